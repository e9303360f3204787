// Seeded generators for the property tests.
#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include <Eigen/Dense>

#include "eomech/fluct.hpp"
#include "eomech/params.hpp"
#include "eomech/presets.hpp"

namespace gen {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(eng_); }
  // Log-uniform on [lo, hi], both > 0.
  double log_uniform(double lo, double hi) { return std::exp(uniform(std::log(lo), std::log(hi))); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(eng_); }
  bool coin(double p = 0.5) { return uniform(0.0, 1.0) < p; }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(eng_); }

 private:
  std::mt19937_64 eng_;
};

// Drift-matrix entries spanning deep-stable to strongly unstable regimes. Rates are
// in units of Omega_m = 1 so the RH polynomials and the eigen solver see the same scale.
inline eom::DriftEntries drift_entries(Rng& r) {
  eom::DriftEntries e;
  e.omega_m = 1.0;
  e.kappa = r.log_uniform(1e-3, 3.0);
  e.kappa_w = r.log_uniform(1e-3, 3.0);
  e.gamma_m = r.log_uniform(1e-6, 1e-2);
  e.delta_c = r.uniform(-3.0, 3.0);
  e.delta_w = r.uniform(-3.0, 3.0);
  e.omega_m_tilde = r.coin(0.9) ? r.uniform(0.05, 2.0) : r.uniform(-0.5, 0.05);
  e.G = r.coin(0.2) ? 0.0 : r.log_uniform(1e-4, 1.0) * (r.coin() ? 1.0 : -1.0);
  e.Gw = r.coin(0.2) ? 0.0 : r.log_uniform(1e-4, 1.0) * (r.coin() ? 1.0 : -1.0);
  return e;
}

// Random Hurwitz matrix: a random matrix shifted left of its spectral abscissa.
inline eom::Mat6 stable_matrix(Rng& r) {
  eom::Mat6 A;
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) A(i, j) = r.normal();
  const double abscissa = eom::is_stable_eigen(A).abscissa;
  A -= (abscissa + r.log_uniform(0.05, 2.0)) * eom::Mat6::Identity();
  return A;
}

inline eom::Mat6 psd_matrix(Rng& r) {
  eom::Mat6 B;
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) B(i, j) = r.normal();
  return B * B.transpose();
}

// A valid two-mode Gaussian state: symplectic image of a thermal state.
inline Eigen::Matrix4d two_mode_cm(Rng& r) {
  using M4 = Eigen::Matrix4d;
  const double n1 = r.log_uniform(1e-3, 10.0), n2 = r.log_uniform(1e-3, 10.0);
  M4 V = M4::Zero();
  V(0, 0) = V(1, 1) = n1 + 0.5;
  V(2, 2) = V(3, 3) = n2 + 0.5;
  auto rot = [](double a, double b) {
    M4 R = M4::Zero();
    R.block<2, 2>(0, 0) << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
    R.block<2, 2>(2, 2) << std::cos(b), -std::sin(b), std::sin(b), std::cos(b);
    return R;
  };
  auto squeeze = [](double s1, double s2) {
    M4 S = M4::Zero();
    S.diagonal() << std::exp(-s1), std::exp(s1), std::exp(-s2), std::exp(s2);
    return S;
  };
  // Two-mode squeezer with parameter t in the (q1, p1, q2, p2) ordering.
  auto tms = [](double t) {
    M4 S = M4::Zero();
    const double c = std::cosh(t), s = std::sinh(t);
    S << c, 0, s, 0, 0, c, 0, -s, s, 0, c, 0, 0, -s, 0, c;
    return S;
  };
  // Beam splitter mixing the two modes.
  auto bs = [](double th) {
    M4 S = M4::Zero();
    const double c = std::cos(th), s = std::sin(th);
    S << c, 0, s, 0, 0, c, 0, s, -s, 0, c, 0, 0, -s, 0, c;
    return S;
  };
  const M4 S = rot(r.uniform(0, 6.3), r.uniform(0, 6.3)) * squeeze(r.uniform(-1, 1), r.uniform(-1, 1)) *
               bs(r.uniform(0, 6.3)) * tms(r.uniform(0, 1.5)) * rot(r.uniform(0, 6.3), r.uniform(0, 6.3));
  return S * V * S.transpose();
}

// A physically valid configuration near the reference device.
inline eom::PhysicalConfig config(Rng& r) {
  eom::PhysicalConfig c = eom::fig2_config();
  c.name = "random";
  c.cavity_length *= r.log_uniform(0.3, 3.0);
  c.mass *= r.log_uniform(0.3, 3.0);
  c.omega_m *= r.log_uniform(0.5, 2.0);
  if (r.coin())
    c.mechanical_loss = eom::QualityFactor{r.log_uniform(1e3, 1e6)};
  else
    c.mechanical_loss = eom::MechanicalDamping{r.log_uniform(10.0, 1e5)};
  c.kappa = c.omega_m * r.log_uniform(1e-3, 1.0);
  c.kappa_w = c.omega_m * r.log_uniform(1e-3, 1.0);
  c.mu = r.uniform(0.0, 0.05);
  c.power_optical = r.log_uniform(1e-8, 1e-4);
  c.power_microwave = r.log_uniform(1e-8, 1e-4);
  c.delta0c = c.omega_m * r.uniform(-2.0, 2.0);
  c.delta0w = c.omega_m * r.uniform(-2.0, 2.0);
  c.temperature = r.coin(0.1) ? 0.0 : r.log_uniform(1e-4, 1.0);
  if (r.coin())
    c.quadratic = eom::CouplingRatio{r.uniform(-0.02, 0.02)};
  else
    c.quadratic = eom::MembraneReflectivity{r.uniform(0.0, 0.99), r.coin() ? 1 : -1};
  return c;
}

}  // namespace gen
