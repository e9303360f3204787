#include "eomech/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>

#include "eomech/error.hpp"
#include "eomech/log.hpp"

namespace eom {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct ParamName {
  SweepParam param;
  const char* name;
};

constexpr ParamName kParamNames[] = {
    {SweepParam::delta0c, "delta0c"},         {SweepParam::delta0w, "delta0w"},
    {SweepParam::kappa, "kappa"},             {SweepParam::g2_over_g1, "g2_over_g1"},
    {SweepParam::temperature, "temperature"}, {SweepParam::power, "power"},
    {SweepParam::power_w, "power_w"},
};

ObservableRecord base_record(const std::vector<double>& coords, int count) {
  ObservableRecord rec;
  rec.coords = coords;
  rec.branch_count = count;
  rec.abscissa = rec.Q = rec.I = rec.Iw = rec.delta_c = rec.delta_w = rec.omega_m_tilde = kNaN;
  rec.obs = {kNaN, kNaN, kNaN, kNaN, kNaN, kNaN, kNaN, kNaN, kNaN};
  return rec;
}

ObservableRecord branch_record(const BranchAnalysis& ba, const std::vector<double>& coords, int count) {
  ObservableRecord rec = base_record(coords, count);
  const SteadyBranch& b = ba.branch;
  rec.branch = b.label;
  rec.stable = b.stable;
  rec.rh_stable = ba.rh.stable;
  rec.abscissa = b.abscissa;
  rec.Q = b.Q;
  rec.I = b.I;
  rec.Iw = b.Iw;
  rec.delta_c = b.delta_c;
  rec.delta_w = b.delta_w;
  rec.omega_m_tilde = b.omega_m_tilde;
  if (ba.has_covariance) {
    rec.has_observables = true;
    rec.obs = ba.observables;
  }
  rec.error = ba.error;
  return rec;
}

// Evaluate one grid point into its rows; never throws.
std::vector<ObservableRecord> evaluate_point(const SweepSpec& spec, const std::vector<double>& coords) {
  try {
    PhysicalConfig cfg = spec.base;
    for (std::size_t i = 0; i < spec.axes.size(); ++i) apply_param(cfg, spec.axes[i].param, coords[i]);
    validate(cfg);
    return select_records(analyze_point(cfg, spec.observables), spec.policy, coords);
  } catch (const std::exception& e) {
    ObservableRecord rec = base_record(coords, 0);
    rec.error = e.what();
    return {rec};
  }
}

}  // namespace

SweepParam parse_sweep_param(const std::string& name) {
  for (const auto& p : kParamNames)
    if (name == p.name) return p.param;
  std::string known;
  for (const auto& p : kParamNames) known += std::string(known.empty() ? "" : ", ") + p.name;
  throw Error(ErrorKind::argument, "unknown sweep parameter '" + name + "' (known: " + known + ")");
}

std::string to_string(SweepParam p) {
  for (const auto& n : kParamNames)
    if (n.param == p) return n.name;
  return "?";
}

void apply_param(PhysicalConfig& cfg, SweepParam p, double v) {
  switch (p) {
    case SweepParam::delta0c: cfg.delta0c = v; break;
    case SweepParam::delta0w: cfg.delta0w = v; break;
    case SweepParam::kappa: cfg.kappa = v; break;
    case SweepParam::g2_over_g1: cfg.quadratic = CouplingRatio{v}; break;
    case SweepParam::temperature: cfg.temperature = v; break;
    case SweepParam::power: cfg.power_optical = v; break;
    case SweepParam::power_w: cfg.power_microwave = v; break;
  }
}

Axis linear_axis(SweepParam p, double lo, double hi, std::size_t n) {
  if (n == 0) throw Error(ErrorKind::argument, "axis needs at least one point");
  Axis a{p, std::vector<double>(n)};
  for (std::size_t i = 0; i < n; ++i)
    a.values[i] = n == 1 ? lo : lo + (hi - lo) * double(i) / double(n - 1);
  if (n > 1) a.values.back() = hi;
  return a;
}

BranchPolicy BranchPolicy::parse(const std::string& s) {
  BranchPolicy p;
  if (s == "lowest-stable") {
    p.kind = Kind::lowest_stable;
  } else if (s == "all-stable") {
    p.kind = Kind::all_stable;
  } else if (s == "all") {
    p.kind = Kind::all;
  } else {
    std::size_t used = 0;
    int k = 0;
    try {
      k = std::stoi(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != s.size() || k < 1)
      throw Error(ErrorKind::argument,
                  "branch policy must be lowest-stable, all-stable, all or a branch number >= 1");
    p.kind = Kind::index;
    p.index = k;
  }
  return p;
}

std::string to_string(const BranchPolicy& p) {
  switch (p.kind) {
    case BranchPolicy::Kind::lowest_stable: return "lowest-stable";
    case BranchPolicy::Kind::all_stable: return "all-stable";
    case BranchPolicy::Kind::all: return "all";
    case BranchPolicy::Kind::index: return std::to_string(p.index);
  }
  return "?";
}

void validate(const SweepSpec& spec) {
  if (spec.axes.empty() || spec.axes.size() > 2)
    throw Error(ErrorKind::argument, "a sweep needs one or two axes");
  if (spec.axes.size() == 2 && spec.axes[0].param == spec.axes[1].param)
    throw Error(ErrorKind::argument, "sweep axes must vary different parameters");
  for (const Axis& a : spec.axes) {
    if (a.values.empty()) throw Error(ErrorKind::argument, "axis " + to_string(a.param) + " is empty");
    bool inc = true, dec = true;
    for (std::size_t i = 1; i < a.values.size(); ++i) {
      inc = inc && a.values[i] > a.values[i - 1];
      dec = dec && a.values[i] < a.values[i - 1];
    }
    for (double v : a.values)
      if (!std::isfinite(v)) inc = dec = false;
    if (!inc && !dec)
      throw Error(ErrorKind::argument, "axis " + to_string(a.param) + " must be strictly monotonic");
  }
  if (spec.jobs < 1) throw Error(ErrorKind::argument, "jobs must be >= 1");
}

Observables compute_observables(const Mat6& V, const ObservableSet& which) {
  Observables o{kNaN, kNaN, kNaN, kNaN, kNaN, kNaN, kNaN, kNaN, kNaN};
  if (which.entanglement) {
    o.en_ow = log_negativity(reduce_bipartition(V, ModePair::ow()));
    o.en_om = log_negativity(reduce_bipartition(V, ModePair::om()));
    o.en_mw = log_negativity(reduce_bipartition(V, ModePair::mw()));
  }
  if (which.cooling) {
    const Equipartition e = equipartition_gap(V);
    o.var_q = e.var_q;
    o.var_p = e.var_p;
    o.n_eff = effective_phonon(V);
  }
  if (which.squeezing) {
    o.s_q = squeezing_db(V, Quadrature::Q);
    o.s_p = squeezing_db(V, Quadrature::P);
  }
  o.physicality = physicality_margin(V);
  return o;
}

PointAnalysis analyze_point(const PhysicalConfig& cfg, const ObservableSet& which) {
  PointAnalysis pa;
  pa.rates = derive_couplings(cfg);
  pa.diffusion = build_diffusion(pa.rates).matrix();
  const double marginal = 1e-9 * pa.rates.omega_m;
  for (const SteadyBranch& b : steady_states(pa.rates)) {
    BranchAnalysis ba;
    ba.branch = b;
    ba.drift = build_drift(pa.rates, b).A;
    ba.rh = routh_hurwitz(pa.rates, b);
    if (ba.rh.stable != (b.abscissa < 0.0) && std::abs(b.abscissa) >= marginal) {
      std::ostringstream os;
      os.precision(6);
      os << "Routh-Hurwitz and eigenvalue stability disagree at Q=" << b.Q << " (abscissa "
         << b.abscissa << ")";
      warn(os.str());
    }
    if (b.stable) {
      try {
        ba.covariance = solve_lyapunov(ba.drift, pa.diffusion, marginal);
        ba.observables = compute_observables(ba.covariance.V, which);
        ba.has_covariance = true;
        if (ba.observables.physicality < -1e-6) {
          std::ostringstream os;
          os << "covariance matrix violates the uncertainty relation (min eigenvalue "
             << ba.observables.physicality << ")";
          warn(os.str());
        }
      } catch (const Error& e) {
        ba.error = e.what();
      }
    }
    pa.branches.push_back(std::move(ba));
  }
  return pa;
}

std::vector<ObservableRecord> select_records(const PointAnalysis& pa, const BranchPolicy& policy,
                                             const std::vector<double>& coords) {
  const int count = static_cast<int>(pa.branches.size());
  std::vector<const BranchAnalysis*> stable;
  for (const auto& b : pa.branches)
    if (b.branch.stable) stable.push_back(&b);
  std::sort(stable.begin(), stable.end(),
            [](const BranchAnalysis* x, const BranchAnalysis* y) { return x->branch.label < y->branch.label; });

  std::vector<ObservableRecord> out;
  auto unstable_row = [&]() {
    // No stable branch: report the lowest-intensity branch, flagged unstable.
    const BranchAnalysis* lowest = nullptr;
    for (const auto& b : pa.branches)
      if (!lowest || b.branch.label < lowest->branch.label) lowest = &b;
    ObservableRecord rec = lowest ? branch_record(*lowest, coords, count) : base_record(coords, count);
    if (rec.error.empty()) rec.error = lowest ? "no stable branch" : "no steady state";
    return rec;
  };

  switch (policy.kind) {
    case BranchPolicy::Kind::lowest_stable:
      if (stable.empty())
        out.push_back(unstable_row());
      else
        out.push_back(branch_record(*stable.front(), coords, count));
      break;
    case BranchPolicy::Kind::all_stable:
      if (stable.empty())
        out.push_back(unstable_row());
      else
        for (const auto* b : stable) out.push_back(branch_record(*b, coords, count));
      break;
    case BranchPolicy::Kind::all: {
      std::vector<const BranchAnalysis*> all;
      for (const auto& b : pa.branches) all.push_back(&b);
      std::sort(all.begin(), all.end(), [](const BranchAnalysis* x, const BranchAnalysis* y) {
        return x->branch.label < y->branch.label;
      });
      for (const auto* b : all) out.push_back(branch_record(*b, coords, count));
      if (all.empty()) out.push_back(unstable_row());
      break;
    }
    case BranchPolicy::Kind::index: {
      const BranchAnalysis* hit = nullptr;
      for (const auto& b : pa.branches)
        if (b.branch.label == policy.index) hit = &b;
      if (hit) {
        out.push_back(branch_record(*hit, coords, count));
      } else {
        ObservableRecord rec = base_record(coords, count);
        rec.error = "no branch " + std::to_string(policy.index);
        out.push_back(rec);
      }
      break;
    }
  }
  return out;
}

void run_sweep(const SweepSpec& spec, const RecordSink& sink) {
  validate(spec);
  const std::size_t n0 = spec.axes[0].values.size();
  const std::size_t n1 = spec.axes.size() > 1 ? spec.axes[1].values.size() : 1;
  const std::size_t total = n0 * n1;
  const std::size_t jobs = static_cast<std::size_t>(spec.jobs);

  auto coords_of = [&](std::size_t k) {
    std::vector<double> c{spec.axes[0].values[k / n1]};
    if (spec.axes.size() > 1) c.push_back(spec.axes[1].values[k % n1]);
    return c;
  };

  // Points are processed in fixed-size blocks so memory stays bounded; rows of a
  // block are emitted in grid order once the whole block is done.
  const std::size_t block = std::max<std::size_t>(64, 16 * jobs);
  std::vector<std::vector<ObservableRecord>> rows(block);
  for (std::size_t start = 0; start < total; start += block) {
    const std::size_t end = std::min(total, start + block);
    if (jobs == 1) {
      for (std::size_t k = start; k < end; ++k) rows[k - start] = evaluate_point(spec, coords_of(k));
    } else {
      std::atomic<std::size_t> next{start};
      auto worker = [&]() {
        for (std::size_t k = next++; k < end; k = next++)
          rows[k - start] = evaluate_point(spec, coords_of(k));
      };
      std::vector<std::thread> pool;
      const std::size_t nthreads = std::min(jobs, end - start);
      for (std::size_t t = 0; t < nthreads; ++t) pool.emplace_back(worker);
      for (auto& th : pool) th.join();
    }
    for (std::size_t k = start; k < end; ++k)
      for (const auto& rec : rows[k - start]) sink(rec);
  }
}

std::vector<ObservableRecord> run_sweep(const SweepSpec& spec) {
  std::vector<ObservableRecord> out;
  run_sweep(spec, [&](const ObservableRecord& r) { out.push_back(r); });
  return out;
}

double entanglement_at(const PhysicalConfig& cfg, ModePair pair, double temperature) {
  PhysicalConfig c = cfg;
  c.temperature = temperature;
  const PointAnalysis pa = analyze_point(c, ObservableSet{true, false, false});
  const BranchAnalysis* pick = nullptr;
  for (const auto& b : pa.branches)
    if (b.has_covariance && (!pick || b.branch.label < pick->branch.label)) pick = &b;
  if (!pick) return 0.0;
  return log_negativity(reduce_bipartition(pick->covariance.V, pair));
}

CriticalTemperature critical_temperature(const PhysicalConfig& base, ModePair pair, double t_hi,
                                         double t_lo) {
  if (!(t_lo >= 0.0 && t_hi > t_lo))
    throw Error(ErrorKind::argument, "critical temperature needs 0 <= t_lo < t_hi");
  CriticalTemperature ct;
  auto en = [&](double T) {
    const double v = entanglement_at(base, pair, T);
    ct.path.emplace_back(T, v);
    return v;
  };
  ct.en_lo = en(t_lo);
  ct.entangled_at_lo = ct.en_lo >= kEntanglementThreshold;
  if (!ct.entangled_at_lo) {
    ct.tc = 0.0;
    return ct;
  }
  ct.en_hi = en(t_hi);
  if (ct.en_hi >= kEntanglementThreshold) {
    std::ostringstream os;
    os << "critical temperature not bracketed: EN(" << t_lo << " K) = " << ct.en_lo << ", EN(" << t_hi
       << " K) = " << ct.en_hi;
    throw Error(ErrorKind::argument, os.str());
  }
  double lo = t_lo, hi = t_hi;
  while (hi - lo > 1e-4) {
    const double mid = 0.5 * (lo + hi);
    if (en(mid) >= kEntanglementThreshold)
      lo = mid;
    else
      hi = mid;
  }
  ct.tc = hi;

  auto sorted = ct.path;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 1; i < sorted.size(); ++i)
    if (sorted[i].second > sorted[i - 1].second + 1e-12) {
      warn("entanglement is not monotonically decreasing in temperature along the bisection path");
      break;
    }
  return ct;
}

}  // namespace eom
