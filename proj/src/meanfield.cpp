#include "eomech/meanfield.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "eomech/error.hpp"
#include "eomech/fluct.hpp"
#include "eomech/log.hpp"
#include "eomech/ode.hpp"

namespace eom {

namespace {

constexpr double kContraction = 0.5;
constexpr int kMaxInner = 200;
constexpr double kInnerTol = 1e-12;
constexpr double kBisectTol = 1e-12;
constexpr double kMergeTol = 1e-9;
// A sign change of the force residual across a jump of the inner solution (the
// thermal term diverges at omega_m_tilde = 0) bisects to a point that is no root.
constexpr double kRootResidual = 1e-6;
constexpr std::size_t kMaxGridPoints = 4'000'000;

double lorentzian(double drive, double detuning, double decay) {
  return drive * drive / (detuning * detuning + decay * decay);
}

// Fill the derived fields of `s` from a converged optical intensity.
void finish(const DerivedRates& r, double Q, double I, IntensitySolution& s) {
  s.I = I;
  s.omega_m_tilde = r.omega_m - 2.0 * r.g2 * I;
  s.Q2 = Q * Q + r.omega_m * (1.0 + 2.0 * r.n_m) / s.omega_m_tilde;
  s.delta_c = r.delta0c - r.g1 * Q - r.g2 * s.Q2;
  s.delta_w = r.delta0w - r.gw * Q;
  s.Iw = lorentzian(r.drive_w, s.delta_w, r.kappa_w);
}

IntensitySolution solve_intensity_from(const DerivedRates& r, double Q, double guess) {
  IntensitySolution s;
  const double thermal = r.omega_m * (1.0 + 2.0 * r.n_m);
  if (r.g2 == 0.0 || r.drive == 0.0) {
    // Delta_c does not depend on I: the fixed point is reached in one evaluation.
    const double dc = r.delta0c - r.g1 * Q - r.g2 * (Q * Q + thermal / r.omega_m);
    finish(r, Q, lorentzian(r.drive, dc, r.kappa), s);
    s.iterations = 1;
    s.converged = true;
    return s;
  }
  auto image = [&](double I) {
    const double omt = r.omega_m - 2.0 * r.g2 * I;
    return lorentzian(r.drive, r.delta0c - r.g1 * Q - r.g2 * (Q * Q + thermal / omt), r.kappa);
  };
  double I = guess;
  if (!(I >= 0.0) || !std::isfinite(I)) I = image(0.0);
  // Away from the spring pole the map is nearly flat and plain iteration converges in a
  // few steps; once it stops contracting the bracketed solve below takes over.
  double last_step = std::numeric_limits<double>::infinity();
  for (int it = 1; it <= kMaxInner; ++it) {
    const double next = image(I);
    if (!std::isfinite(next)) break;
    const double step = std::abs(next - I);
    I = next;
    if (step <= kInnerTol * std::max(std::abs(next), 1e-300)) {
      finish(r, Q, I, s);
      s.iterations = it;
      s.converged = true;
      return s;
    }
    if (it > 2 && step > kContraction * last_step) break;
    last_step = step;
  }
  // Near the spring pole (omega_m_tilde -> 0) the map is too steep to contract.
  // I - image(I) changes sign on [0, hi]: it is negative at 0, and at hi either I
  // is the resonant peak or image(I) has collapsed because Delta_c diverges.
  double lo = 0.0;
  double hi = r.drive * r.drive / (r.kappa * r.kappa);
  if (r.g2 > 0.0) hi = std::min(hi, r.omega_m / (2.0 * r.g2) * (1.0 - 1e-14));
  double flo = lo - image(lo);
  double fhi = hi - image(hi);
  if (!(flo < 0.0 && fhi >= 0.0)) {
    finish(r, Q, I, s);
    s.iterations = kMaxInner;
    s.converged = false;
    return s;
  }
  int it = 0;
  int side = 0;
  while (hi - lo > kInnerTol * hi && it < 400) {
    ++it;
    // Illinois regula falsi, halving the stale end's weight when one side repeats.
    double m = (lo * fhi - hi * flo) / (fhi - flo);
    if (!(m > lo && m < hi)) m = 0.5 * (lo + hi);
    const double fm = m - image(m);
    if (fm < 0.0) {
      lo = m;
      flo = fm;
      if (side == -1) fhi *= 0.5;
      side = -1;
    } else {
      hi = m;
      fhi = fm;
      if (side == 1) flo *= 0.5;
      side = 1;
    }
  }
  finish(r, Q, 0.5 * (lo + hi), s);
  s.iterations = kMaxInner + it;
  s.converged = std::isfinite(s.I);
  return s;
}

struct GridPoint {
  double Q;
  double f;
  IntensitySolution sol;
};

GridPoint evaluate(const DerivedRates& r, double Q, double guess) {
  GridPoint p{Q, std::numeric_limits<double>::quiet_NaN(), solve_intensity_from(r, Q, guess)};
  if (p.sol.converged) p.f = force_residual(r, Q, p.sol);
  return p;
}

SteadyBranch make_branch(const DerivedRates& r, double Q, const IntensitySolution& s) {
  SteadyBranch b;
  b.Q = Q;
  b.Q2 = s.Q2;
  b.P2 = 1.0 + 2.0 * r.n_m;
  b.I = s.I;
  b.Iw = s.Iw;
  b.delta_c = s.delta_c;
  b.delta_w = s.delta_w;
  b.a = r.drive / std::complex<double>(r.kappa, s.delta_c);
  b.aw = r.drive_w / std::complex<double>(r.kappa_w, s.delta_w);
  b.omega_m_tilde = s.omega_m_tilde;
  b.degenerate = !(s.omega_m_tilde > 0.0);
  b.omega_m_prime = b.degenerate ? 0.0 : std::sqrt(r.omega_m * s.omega_m_tilde);
  b.g_tilde = r.g1 + 2.0 * r.g2 * Q;
  b.residual = branch_residual(r, b);
  return b;
}

double bisect(const DerivedRates& r, GridPoint lo, GridPoint hi) {
  for (int it = 0; it < 200; ++it) {
    if (hi.Q - lo.Q <= kBisectTol * std::max({1.0, std::abs(lo.Q), std::abs(hi.Q)})) break;
    const double mid = 0.5 * (lo.Q + hi.Q);
    if (mid <= lo.Q || mid >= hi.Q) break;
    GridPoint m = evaluate(r, mid, 0.5 * (lo.sol.I + hi.sol.I));
    if (!std::isfinite(m.f)) {
      std::ostringstream os;
      os.precision(17);
      os << "inner intensity solve failed during bisection at Q=" << mid;
      throw NumericError(os.str());
    }
    if (m.f == 0.0) return mid;
    if ((m.f < 0.0) == (lo.f < 0.0))
      lo = m;
    else
      hi = m;
  }
  return std::abs(lo.f) <= std::abs(hi.f) ? lo.Q : hi.Q;
}

}  // namespace

MeanFieldState vacuum_state() {
  MeanFieldState s;
  s.Q2 = 1.0;
  s.P2 = 1.0;
  return s;
}

IntensitySolution solve_intensity(const DerivedRates& r, double Q) {
  return solve_intensity_from(r, Q, std::numeric_limits<double>::quiet_NaN());
}

double force_residual(const DerivedRates& r, double Q, const IntensitySolution& s) {
  return Q * s.omega_m_tilde - r.g1 * s.I - r.gw * s.Iw;
}

double branch_residual(const DerivedRates& r, const SteadyBranch& b) {
  auto field_residual = [](double I, double drive, double detuning, double decay) {
    const double lhs = I * (detuning * detuning + decay * decay);
    const double rhs = drive * drive;
    return rhs > 0.0 ? std::abs(lhs - rhs) / rhs : std::abs(I);
  };
  const double dc = r.delta0c - r.g1 * b.Q - r.g2 * b.Q2;
  const double dw = r.delta0w - r.gw * b.Q;
  const double omt = r.omega_m - 2.0 * r.g2 * b.I;
  const double r1 = field_residual(b.I, r.drive, dc, r.kappa);
  const double r2 = field_residual(b.Iw, r.drive_w, dw, r.kappa_w);
  const double r3 =
      std::abs(b.Q * omt - r.g1 * b.I - r.gw * b.Iw) / (r.omega_m * std::max(1.0, std::abs(b.Q)));
  const double r4 = std::abs(b.Q2 - b.Q * b.Q - r.omega_m * (1.0 + 2.0 * r.n_m) / omt) /
                    std::max(1.0, std::abs(b.Q2));
  return std::max({r1, r2, r3, r4});
}

double search_bound(const DerivedRates& r) {
  // Peak (resonant) intensities bound the radiation-pressure force.
  const double ipk = r.drive * r.drive / (r.kappa * r.kappa);
  const double iwpk = r.drive_w * r.drive_w / (r.kappa_w * r.kappa_w);
  const double force = std::abs(r.g1) * ipk + std::abs(r.gw) * iwpk;
  const double g2 = r.g2;
  if (g2 <= 0.0 || 2.0 * g2 * ipk < 0.5 * r.omega_m)
    return force / (r.omega_m - 2.0 * std::max(g2, 0.0) * ipk) + 10.0;
  // Strong positive g2 can soften the spring completely; then the optical
  // detuning itself bounds Q because g2 Q^2 must stay within reach of the
  // Lorentzian around the spring-inversion intensity.
  const double istar = r.omega_m / (2.0 * g2);
  const double reach = std::abs(r.delta0c) + r.drive * std::sqrt(2.0 / istar) +
                       2.0 * g2 * (1.0 + 2.0 * r.n_m);
  const double quad = (std::abs(r.g1) + std::sqrt(r.g1 * r.g1 + 4.0 * g2 * reach)) / (2.0 * g2);
  return 1.2 * std::max(2.0 * force / r.omega_m, quad) + 10.0;
}

std::vector<SteadyBranch> steady_states(const DerivedRates& r) {
  const double qmax = search_bound(r);
  const double hmax = qmax / 2000.0;

  std::vector<GridPoint> grid;
  grid.reserve(4096);
  double Q = -qmax;
  double guess = std::numeric_limits<double>::quiet_NaN();
  std::size_t failures = 0;
  while (true) {
    GridPoint p = evaluate(r, Q, guess);
    if (p.sol.converged)
      guess = p.sol.I;
    else
      ++failures;
    grid.push_back(p);
    if (Q >= qmax) break;
    if (grid.size() >= kMaxGridPoints)
      throw NumericError("steady-state grid exceeded its point budget");
    // Resolve the Lorentzian widths in Q of both cavity responses.
    double h = hmax;
    const double slope_c = std::abs(r.g1 + 2.0 * r.g2 * Q);
    if (slope_c > 0.0 && p.sol.converged)
      h = std::min(h, (std::abs(p.sol.delta_c) + r.kappa) / slope_c / 16.0);
    if (r.gw > 0.0) h = std::min(h, (std::abs(r.delta0w - r.gw * Q) + r.kappa_w) / r.gw / 16.0);
    Q = std::min(Q + h, qmax);
  }
  if (failures == grid.size())
    throw NumericError("inner intensity solve failed at every grid point");

  std::vector<double> roots;
  std::size_t skipped = 0;
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    const GridPoint& a = grid[i];
    const GridPoint& b = grid[i + 1];
    if (a.f == 0.0) {
      roots.push_back(a.Q);
      continue;
    }
    if (!std::isfinite(a.f) || !std::isfinite(b.f)) {
      ++skipped;
      continue;
    }
    if ((a.f < 0.0) != (b.f < 0.0) && b.f != 0.0) {
      try {
        roots.push_back(bisect(r, a, b));
      } catch (const NumericError& e) {
        warn(std::string("skipping bracket: ") + e.what());
      }
    }
  }
  if (grid.back().f == 0.0) roots.push_back(grid.back().Q);
  if (skipped > 0 && failures > 0) {
    std::ostringstream os;
    os << "inner intensity solve did not converge at " << failures << " of " << grid.size()
       << " grid points; adjacent brackets skipped";
    warn(os.str());
  }

  std::sort(roots.begin(), roots.end());
  std::vector<SteadyBranch> out;
  for (double q : roots) {
    if (!out.empty() && std::abs(q - out.back().Q) < kMergeTol * std::max(1.0, std::abs(q))) continue;
    const IntensitySolution s = solve_intensity(r, q);
    SteadyBranch b = make_branch(r, q, s);
    if (!(b.residual <= kRootResidual)) continue;
    const SpectralVerdict v = is_stable_eigen(build_drift(r, b).A);
    b.abscissa = v.abscissa;
    b.stable = v.stable && !b.degenerate;
    out.push_back(b);
  }
  if (out.empty() && failures > 0)
    throw NumericError("no steady state found and the inner solver failed on part of the grid");

  std::vector<std::size_t> order(out.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return out[x].I < out[y].I; });
  for (std::size_t rank = 0; rank < order.size(); ++rank) out[order[rank]].label = int(rank) + 1;
  return out;
}

std::vector<ScanPoint> multistability_scan(const DerivedRates& r, const std::vector<double>& grid) {
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1]))
      throw Error(ErrorKind::argument, "detuning grid must be strictly increasing");
  std::vector<ScanPoint> out;
  out.reserve(grid.size());
  for (double d : grid) {
    ScanPoint p;
    p.delta0c = d;
    DerivedRates rr = r;
    rr.delta0c = d;
    try {
      p.branches = steady_states(rr);
    } catch (const Error& e) {
      p.error = e.what();
    }
    out.push_back(std::move(p));
  }
  return out;
}

std::array<double, 9> state_scale(const DerivedRates& r) {
  const double a = std::max(1.0, r.drive / std::hypot(r.delta0c, r.kappa));
  const double aw = std::max(1.0, r.drive_w / std::hypot(r.delta0w, r.kappa_w));
  const double q = std::max(1.0, (std::abs(r.g1) * a * a + std::abs(r.gw) * aw * aw) / r.omega_m);
  const double p2 = 1.0 + 2.0 * r.n_m;
  const double q2 = std::max(p2, q * q);
  return {a, a, q, q, q2, std::max(p2, q * q), q2, aw, aw};
}

std::vector<TimeSample> integrate_full(const DerivedRates& r, const MeanFieldState& init,
                                       const std::vector<double>& times, double tol) {
  if (!(tol > 0.0 && tol <= 1e-3)) throw Error(ErrorKind::argument, "tol must lie in (0, 1e-3]");
  using V9 = ode::Vec<9>;
  const double p2_bath = 2.0 * r.gamma_m * (1.0 + 2.0 * r.n_m);
  auto rhs = [&](double, const V9& y, V9& dy) {
    const double x = y[0], yi = y[1], Q = y[2], P = y[3], Q2 = y[4], P2 = y[5], C = y[6];
    const double xw = y[7], yw = y[8];
    const double I = x * x + yi * yi;
    const double Iw = xw * xw + yw * yw;
    const double dc = r.delta0c - r.g1 * Q - r.g2 * Q2;
    const double dw = r.delta0w - r.gw * Q;
    const double omt = r.omega_m - 2.0 * r.g2 * I;
    const double force = r.g1 * I + r.gw * Iw;
    dy[0] = -r.kappa * x + dc * yi + r.drive;
    dy[1] = -r.kappa * yi - dc * x;
    dy[2] = r.omega_m * P;
    dy[3] = -omt * Q + force - r.gamma_m * P;
    dy[4] = r.omega_m * C;
    dy[5] = -omt * C + 2.0 * force * P - 2.0 * r.gamma_m * P2 + p2_bath;
    dy[6] = -2.0 * omt * Q2 + 2.0 * r.omega_m * P2 + 2.0 * force * Q - r.gamma_m * C;
    dy[7] = -r.kappa_w * xw + dw * yw + r.drive_w;
    dy[8] = -r.kappa_w * yw - dw * xw;
  };
  V9 y0{init.a.real(), init.a.imag(), init.Q, init.P, init.Q2, init.P2, init.PQQP,
        init.aw.real(), init.aw.imag()};
  std::vector<TimeSample> out;
  out.reserve(times.size());
  ode::Options opt;
  opt.tol = tol;
  ode::integrate<9>(rhs, y0, times, state_scale(r), opt, [&](double t, const V9& y) {
    MeanFieldState s;
    s.a = {y[0], y[1]};
    s.Q = y[2];
    s.P = y[3];
    s.Q2 = y[4];
    s.P2 = y[5];
    s.PQQP = y[6];
    s.aw = {y[7], y[8]};
    out.push_back({t, s});
  });
  return out;
}

MeanFieldState adiabatic_state(const DerivedRates& r, double Q, double P) {
  const IntensitySolution s = solve_intensity(r, Q);
  if (!s.converged) throw NumericError("inner intensity solve did not converge");
  MeanFieldState m;
  m.a = r.drive / std::complex<double>(r.kappa, s.delta_c);
  m.aw = r.drive_w / std::complex<double>(r.kappa_w, s.delta_w);
  m.Q = Q;
  m.P = P;
  m.Q2 = s.Q2;
  m.P2 = P * P + 1.0 + 2.0 * r.n_m;
  m.PQQP = 2.0 * Q * P;
  return m;
}

std::vector<AdiabaticSample> integrate_adiabatic(const DerivedRates& r, double Q0, double P0,
                                                 const std::vector<double>& times, double tol) {
  if (!(tol > 0.0 && tol <= 1e-3)) throw Error(ErrorKind::argument, "tol must lie in (0, 1e-3]");
  if (r.kappa / r.gamma_m < 100.0 || r.kappa_w / r.gamma_m < 100.0)
    warn("adiabatic elimination assumes kappa, kappa_w >> gamma_m (ratio below 100)");
  using V2 = ode::Vec<2>;
  double guess = std::numeric_limits<double>::quiet_NaN();
  double t_now = times.empty() ? 0.0 : times.front();
  auto slaved = [&](double Q) {
    IntensitySolution s = solve_intensity_from(r, Q, guess);
    if (!s.converged) {
      std::ostringstream os;
      os.precision(17);
      os << "inner intensity solve did not converge at Q=" << Q;
      throw IntegratorError(os.str(), t_now);
    }
    guess = s.I;
    return s;
  };
  auto rhs = [&](double t, const V2& y, V2& dy) {
    t_now = t;
    const IntensitySolution s = slaved(y[0]);
    dy[0] = r.omega_m * y[1];
    dy[1] = -s.omega_m_tilde * y[0] + r.g1 * s.I + r.gw * s.Iw - r.gamma_m * y[1];
  };
  const auto sc = state_scale(r);
  std::vector<AdiabaticSample> out;
  out.reserve(times.size());
  ode::Options opt;
  opt.tol = tol;
  ode::integrate<2>(rhs, V2{Q0, P0}, times, V2{sc[2], sc[3]}, opt, [&](double t, const V2& y) {
    const IntensitySolution s = slaved(y[0]);
    out.push_back({t, y[0], y[1], s.I, s.Iw});
  });
  return out;
}

std::vector<double> uniform_times(double t_end, std::size_t n) {
  if (!(t_end >= 0.0)) throw Error(ErrorKind::argument, "t_end must be >= 0");
  if (t_end == 0.0 || n < 2) return {0.0};
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) t[i] = t_end * double(i) / double(n - 1);
  t.back() = t_end;
  return t;
}

}  // namespace eom
