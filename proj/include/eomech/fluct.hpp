#pragma once

#include <array>

#include <Eigen/Dense>

#include "eomech/meanfield.hpp"
#include "eomech/params.hpp"

namespace eom {

/// Quadrature order: (dQo, dPo, dQ, dP, dQw, dPw).
using Mat6 = Eigen::Matrix<double, 6, 6>;

struct DriftMatrix {
  Mat6 A = Mat6::Zero();
  SteadyBranch branch;
};

struct DiffusionMatrix {
  std::array<double, 6> diag{};
  Mat6 matrix() const;
};

struct CovarianceMatrix {
  Mat6 V = Mat6::Zero();
  double residual = 0.0;  // ||A V + V A^T + D||_inf / ||D||_inf, evaluated in extended precision
  // Smallest residual any double-precision V can reach: eps ||A||_inf ||V||_inf / ||D||_inf.
  double rounding_floor = 0.0;
};

/// Scalar entries of the drift matrix; G = G_tilde * <Qo>, Gw = gw * <Qw>.
struct DriftEntries {
  double kappa = 0.0;
  double kappa_w = 0.0;
  double gamma_m = 0.0;
  double delta_c = 0.0;
  double delta_w = 0.0;
  double omega_m = 0.0;
  double omega_m_tilde = 0.0;
  double G = 0.0;
  double Gw = 0.0;
};

DriftEntries drift_entries(const DerivedRates& r, const SteadyBranch& b);
Mat6 drift_from_entries(const DriftEntries& e);

DriftMatrix build_drift(const DerivedRates& r, const SteadyBranch& b);
DiffusionMatrix build_diffusion(const DerivedRates& r);

struct SpectralVerdict {
  bool stable = false;
  double abscissa = 0.0;  // max real part of the spectrum
};

/// Stability from the full eigenvalue spectrum. Throws NumericError if the solver fails.
SpectralVerdict is_stable_eigen(const Mat6& A);

struct RouthHurwitzVerdict {
  bool stable = false;
  std::array<double, 6> s{};
};

/// The six Routh–Hurwitz inequalities for the drift matrix structure. Rates are
/// normalized by omega_m before evaluation so the polynomials stay in range.
RouthHurwitzVerdict routh_hurwitz(const DriftEntries& e);
RouthHurwitzVerdict routh_hurwitz(const DerivedRates& r, const SteadyBranch& b);

/// Solve A V + V A^T = -D by the vectorized 36x36 system. `marginal` is the
/// absolute threshold on the spectral abscissa below which A counts as stable;
/// anything closer to the imaginary axis is refused with NumericError.
CovarianceMatrix solve_lyapunov(const Mat6& A, const Mat6& D, double marginal);

/// Minimum eigenvalue of V + (i/2) Omega; negative values mean V violates the uncertainty principle.
double physicality_margin(const Mat6& V);

}  // namespace eom
