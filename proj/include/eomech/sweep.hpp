#pragma once

#include <functional>
#include <string>
#include <vector>

#include "eomech/fluct.hpp"
#include "eomech/gaussian.hpp"
#include "eomech/meanfield.hpp"
#include "eomech/params.hpp"

namespace eom {

/// Parameters a sweep axis may vary. Values are SI (rad/s, K, W) except the ratio.
enum class SweepParam { delta0c, delta0w, kappa, g2_over_g1, temperature, power, power_w };

SweepParam parse_sweep_param(const std::string& name);
std::string to_string(SweepParam p);

/// Set one swept parameter on a config (g2_over_g1 switches the config to the ratio form).
void apply_param(PhysicalConfig& cfg, SweepParam p, double value);

struct Axis {
  SweepParam param;
  std::vector<double> values;
};

/// n evenly spaced values from lo to hi inclusive (n == 1 gives {lo}).
Axis linear_axis(SweepParam p, double lo, double hi, std::size_t n);

struct BranchPolicy {
  enum class Kind { lowest_stable, all_stable, index, all };
  Kind kind = Kind::lowest_stable;
  int index = 1;  // branch label for Kind::index

  static BranchPolicy parse(const std::string& s);
};
std::string to_string(const BranchPolicy& p);

struct ObservableSet {
  bool entanglement = true;
  bool cooling = true;
  bool squeezing = true;
};

struct SweepSpec {
  PhysicalConfig base;
  std::vector<Axis> axes;  // one or two
  BranchPolicy policy;
  ObservableSet observables;
  int jobs = 1;
};

/// Throws Error(argument) when the axes are empty, more than two, or not strictly monotonic.
void validate(const SweepSpec& spec);

struct Observables {
  double en_ow = 0.0;
  double en_om = 0.0;
  double en_mw = 0.0;
  double n_eff = 0.0;
  double var_q = 0.0;
  double var_p = 0.0;
  double s_q = 0.0;
  double s_p = 0.0;
  double physicality = 0.0;  // min eig of V + (i/2) Omega
};

Observables compute_observables(const Mat6& V, const ObservableSet& which = {});

struct BranchAnalysis {
  SteadyBranch branch;
  Mat6 drift = Mat6::Zero();
  RouthHurwitzVerdict rh;
  bool has_covariance = false;
  CovarianceMatrix covariance;
  Observables observables;
  std::string error;
};

struct PointAnalysis {
  DerivedRates rates;
  Mat6 diffusion = Mat6::Zero();
  std::vector<BranchAnalysis> branches;  // sorted by Q like steady_states
};

/// Full pipeline at one parameter point: rates, branches, stability, covariance and observables
/// for every stable branch.
PointAnalysis analyze_point(const PhysicalConfig& cfg, const ObservableSet& which = {});

struct ObservableRecord {
  std::vector<double> coords;  // one per axis, in axis order
  int branch = 0;              // label (ascending I), 0 if no branch
  int branch_count = 0;
  bool stable = false;
  bool rh_stable = false;
  double abscissa = 0.0;
  double Q = 0.0;
  double I = 0.0;
  double Iw = 0.0;
  double delta_c = 0.0;
  double delta_w = 0.0;
  double omega_m_tilde = 0.0;
  bool has_observables = false;
  Observables obs;
  std::string error;
};

/// Rows for one analyzed point under a branch policy.
std::vector<ObservableRecord> select_records(const PointAnalysis& pa, const BranchPolicy& policy,
                                             const std::vector<double>& coords);

using RecordSink = std::function<void(const ObservableRecord&)>;

/// Evaluate every grid point (row-major over axes) and stream records in deterministic order.
/// Work is spread over spec.jobs threads; output does not depend on the thread count.
void run_sweep(const SweepSpec& spec, const RecordSink& sink);

/// Convenience wrapper collecting all rows.
std::vector<ObservableRecord> run_sweep(const SweepSpec& spec);

struct CriticalTemperature {
  double tc = 0.0;           // 0 marks "no entanglement at t_lo"
  double en_lo = 0.0;
  double en_hi = 0.0;
  bool entangled_at_lo = false;
  std::vector<std::pair<double, double>> path;  // (T, EN) evaluations in order
};

inline constexpr double kEntanglementThreshold = 1e-6;

/// Logarithmic negativity of `pair` on the branch picked by lowest-stable at temperature T (0 if none).
double entanglement_at(const PhysicalConfig& cfg, ModePair pair, double temperature);

/// Bisection on T for the smallest temperature where EN(pair) drops below 1e-6, to 1e-4 K.
CriticalTemperature critical_temperature(const PhysicalConfig& base, ModePair pair, double t_hi,
                                         double t_lo = 1e-3);

}  // namespace eom
