#pragma once

#include <array>
#include <complex>
#include <string>
#include <vector>

#include "eomech/params.hpp"

namespace eom {

/// Classical first and second moments of the three modes.
struct MeanFieldState {
  std::complex<double> a{0.0, 0.0};
  double Q = 0.0;
  double P = 0.0;
  double Q2 = 0.0;
  double P2 = 0.0;
  double PQQP = 0.0;  // <PQ + QP>
  std::complex<double> aw{0.0, 0.0};
};

/// Vacuum moments: zero fields, Q2 = P2 = 1 (with [Q, P] = i scaling of <Q^2>), PQQP = 0.
MeanFieldState vacuum_state();

struct TimeSample {
  double t;
  MeanFieldState state;
};

/// Output of the adiabatic reduction at one time.
struct AdiabaticSample {
  double t;
  double Q;
  double P;
  double intensity;    // |a|^2
  double intensity_w;  // |aw|^2
};

/// Self-consistent cavity response at a fixed mechanical displacement Q.
struct IntensitySolution {
  double I = 0.0;             // |a|^2
  double Iw = 0.0;            // |aw|^2
  double Q2 = 0.0;            // quasi-static <Q^2>
  double delta_c = 0.0;       // effective optical detuning
  double delta_w = 0.0;       // effective microwave detuning
  double omega_m_tilde = 0.0; // Omega_m - 2 g2 I
  int iterations = 0;
  bool converged = false;
};

/// Solve the coupled (I, Q2) pair at fixed Q to 1e-12 relative: plain fixed-point
/// iteration, falling back to a bracketed solve near the spring pole.
IntensitySolution solve_intensity(const DerivedRates& r, double Q);

/// Outer residual Q * Omega_m_tilde - g1 I - gw Iw for a solved intensity.
double force_residual(const DerivedRates& r, double Q, const IntensitySolution& s);

struct SteadyBranch {
  double Q = 0.0;
  double Q2 = 0.0;
  double P2 = 0.0;
  std::complex<double> a{0.0, 0.0};   // stored with the drive phase that makes it real
  std::complex<double> aw{0.0, 0.0};
  double I = 0.0;
  double Iw = 0.0;
  double delta_c = 0.0;
  double delta_w = 0.0;
  double omega_m_tilde = 0.0;
  double omega_m_prime = 0.0;  // 0 when omega_m_tilde <= 0
  double g_tilde = 0.0;        // g1 + 2 g2 Q
  double residual = 0.0;       // max normalized residual of the fixed-point system
  double abscissa = 0.0;       // max Re(eig A)
  bool stable = false;
  bool degenerate = false;     // omega_m_tilde <= 0
  int label = 0;               // 1-based rank by ascending I
};

/// Max normalized residual of the steady-state equations at a branch (I, Iw, Q and Q2 equations).
double branch_residual(const DerivedRates& r, const SteadyBranch& b);

/// Upper bound on |Q| searched for fixed points.
double search_bound(const DerivedRates& r);

/// All real steady states, sorted by Q, each with stability filled from the drift matrix.
/// Throws NumericError if the inner solver fails everywhere.
std::vector<SteadyBranch> steady_states(const DerivedRates& r);

struct ScanPoint {
  double delta0c = 0.0;
  std::vector<SteadyBranch> branches;
  std::string error;  // empty on success
};

/// steady_states at every optical detuning of a strictly increasing grid.
std::vector<ScanPoint> multistability_scan(const DerivedRates& r, const std::vector<double>& delta0c_grid);

/// Characteristic magnitudes of the nine real ODE components, used as absolute tolerance scale.
std::array<double, 9> state_scale(const DerivedRates& r);

/// Integrate the full nine-component mean-field system, reporting the state at each sample time.
std::vector<TimeSample> integrate_full(const DerivedRates& r, const MeanFieldState& init,
                                       const std::vector<double>& times, double tol);

/// Integrate the adiabatically reduced oscillator for Q with the fields slaved to Q.
std::vector<AdiabaticSample> integrate_adiabatic(const DerivedRates& r, double Q0, double P0,
                                                 const std::vector<double>& times, double tol);

/// Fields at their adiabatic (slaved) values for a given (Q, P); second moments quasi-static.
MeanFieldState adiabatic_state(const DerivedRates& r, double Q, double P);

/// `n` evenly spaced times on [0, t_end] (a single 0 when t_end == 0).
std::vector<double> uniform_times(double t_end, std::size_t n);

}  // namespace eom
