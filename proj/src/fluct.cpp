#include "eomech/fluct.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "eomech/error.hpp"
#include "eomech/log.hpp"

namespace eom {

Mat6 DiffusionMatrix::matrix() const {
  Mat6 D = Mat6::Zero();
  for (int i = 0; i < 6; ++i) D(i, i) = diag[i];
  return D;
}

DriftEntries drift_entries(const DerivedRates& r, const SteadyBranch& b) {
  DriftEntries e;
  e.kappa = r.kappa;
  e.kappa_w = r.kappa_w;
  e.gamma_m = r.gamma_m;
  e.delta_c = b.delta_c;
  e.delta_w = b.delta_w;
  e.omega_m = r.omega_m;
  e.omega_m_tilde = b.omega_m_tilde;
  // With the drive phases chosen to make the mean fields real, <Q> = sqrt(2) |a|.
  e.G = b.g_tilde * std::sqrt(2.0) * std::abs(b.a);
  e.Gw = r.gw * std::sqrt(2.0) * std::abs(b.aw);
  return e;
}

Mat6 drift_from_entries(const DriftEntries& e) {
  Mat6 A = Mat6::Zero();
  A(0, 0) = -e.kappa;
  A(0, 1) = e.delta_c;
  A(1, 0) = -e.delta_c;
  A(1, 1) = -e.kappa;
  A(1, 2) = e.G;
  A(2, 3) = e.omega_m;
  A(3, 0) = e.G;
  A(3, 2) = -e.omega_m_tilde;
  A(3, 3) = -e.gamma_m;
  A(3, 4) = e.Gw;
  A(4, 4) = -e.kappa_w;
  A(4, 5) = e.delta_w;
  A(5, 2) = e.Gw;
  A(5, 4) = -e.delta_w;
  A(5, 5) = -e.kappa_w;
  return A;
}

DriftMatrix build_drift(const DerivedRates& r, const SteadyBranch& b) {
  return {drift_from_entries(drift_entries(r, b)), b};
}

DiffusionMatrix build_diffusion(const DerivedRates& r) {
  DiffusionMatrix d;
  d.diag = {r.kappa,
            r.kappa,
            0.0,
            r.gamma_m * (2.0 * r.n_m + 1.0),
            r.kappa_w * (2.0 * r.n_w + 1.0),
            r.kappa_w * (2.0 * r.n_w + 1.0)};
  return d;
}

SpectralVerdict is_stable_eigen(const Mat6& A) {
  if (!A.allFinite()) throw NumericError("drift matrix has non-finite entries");
  Eigen::EigenSolver<Mat6> es(A, false);
  if (es.info() != Eigen::Success) {
    std::ostringstream os;
    os.precision(17);
    os << "eigenvalue solver did not converge for drift matrix\n" << A;
    throw NumericError(os.str());
  }
  SpectralVerdict v;
  v.abscissa = es.eigenvalues().real().maxCoeff();
  v.stable = v.abscissa < 0.0;
  return v;
}

RouthHurwitzVerdict routh_hurwitz(const DriftEntries& e) {
  // All s_i are homogeneous in the rates, so scaling by Omega_m keeps their signs.
  const double u = e.omega_m;
  const double k = e.kappa / u, w = e.kappa_w / u, g = e.gamma_m / u;
  const double Dc = e.delta_c / u, Dw = e.delta_w / u;
  const double O = 1.0, T = e.omega_m_tilde / u;
  const double G = e.G / u, H = e.Gw / u;

  const double k2 = k * k, w2 = w * w, g2 = g * g, Dc2 = Dc * Dc, Dw2 = Dw * Dw;
  const double G2 = G * G, H2 = H * H;
  const double kw = k + w;
  const double base = k2 + 3 * k * w + w2;

  const double s1 = g + 2 * k + 2 * w;
  const double s2 = 2 * g2 * kw + 4 * g * kw * kw + 2 * (Dc2 * k + Dw2 * w + kw * base) + g * O * T;
  const double s3 =
      4 * k * w * ((Dc - Dw) * (Dc - Dw) + kw * kw) * ((Dc + Dw) * (Dc + Dw) + kw * kw) +
      2 * g2 * g * (Dc2 * k + Dw2 * w + kw * base) + 4 * kw * (G2 * Dc * k + H2 * Dw * w) * O +
      g2 * (4 * k2 * k2 + 4 * Dw2 * k * w + 20 * k2 * k * w + 4 * Dw2 * w2 + 32 * k2 * w2 +
            20 * k * w2 * w + 4 * w2 * w2 + 4 * Dc2 * k * kw + G2 * Dc * O + H2 * Dw * O +
            4 * kw * kw * O * T) +
      2 * g *
          (Dc2 * Dc2 * k + k2 * k2 * k + Dw2 * Dw2 * w + 4 * Dw2 * k2 * w + 8 * k2 * k2 * w +
           8 * Dw2 * k * w2 + 20 * k2 * k * w2 + 2 * Dw2 * w2 * w + 20 * k2 * w2 * w +
           8 * k * w2 * w2 + w2 * w2 * w + H2 * Dw * k * O + 2 * H2 * Dw * w * O +
           G2 * Dc * (2 * k + w) * O + 2 * (-Dw2 * w + kw * (k2 + k * w + w2)) * O * T +
           kw * O * O * T * T + 2 * Dc2 * k * (k2 + 4 * k * w + 2 * w2 - O * T));

  const double X = g * (Dc2 + k2) * (Dw2 + w2) - 2 * (H2 * Dw * k + G2 * Dc * w) * O +
                   2 * (Dw2 * k + w * (Dc2 + k * kw)) * O * T;
  const double Y = Dc2 + Dw2 + k2 + 4 * k * w + w2 + 2 * g * kw + O * T;
  const double Z = g * (Dc2 + Dw2 + k2 + 4 * k * w + w2) + 2 * (Dw2 * k + Dc2 * w + kw * (k * w + O * T));
  const double W = Dw2 * k2 + k2 * w2 + 2 * g * k * (Dw2 + w * kw) - G2 * Dc * O - H2 * Dw * O +
                   (Dw2 + k2 + 4 * k * w + w2) * O * T + Dc2 * (Dw2 + 2 * g * w + w2 + O * T);
  const double S1 = g + 2 * kw;
  const double S2 = s2;
  const double R = -H2 * Dw * (Dc2 + k2) - (Dw2 + w2) * (G2 * Dc - (Dc2 + k2) * T);
  const double U = -Dc2 * Dw2 - 2 * g * Dw2 * k - Dw2 * k2 - 2 * g * Dc2 * w - 2 * g * k2 * w -
                   Dc2 * w2 - 2 * g * k * w2 - k2 * w2 + G2 * Dc * O + H2 * Dw * O - Dc2 * O * T -
                   Dw2 * O * T - k2 * O * T - 4 * k * w * O * T - w2 * O * T + Y * Y;
  const double M = -g * Dc2 * Dw2 - g * Dw2 * k2 - g * Dc2 * w2 - g * k2 * w2 + 2 * H2 * Dw * k * O +
                   2 * G2 * Dc * w * O - 2 * Dw2 * k * O * T - 2 * Dc2 * w * O * T -
                   2 * k2 * w * O * T - 2 * k * w2 * O * T + Y * Z;

  const double s4 = X * M - W * (-S1 * X + Z * Z) + S1 * (O * S2 * R - X * U + W * (-S1 * W + Y * Z));
  const double s5 = O * (-R) * (-S1 * (S2 * X - S1 * S1 * O * R) + s3 * Z) + X * s4;
  const double s6 = O * R;

  RouthHurwitzVerdict v;
  v.s = {s1, s2, s3, s4, s5, s6};
  v.stable = true;
  for (double s : v.s) v.stable = v.stable && s > 0.0;
  return v;
}

RouthHurwitzVerdict routh_hurwitz(const DerivedRates& r, const SteadyBranch& b) {
  return routh_hurwitz(drift_entries(r, b));
}

CovarianceMatrix solve_lyapunov(const Mat6& A, const Mat6& D, double marginal) {
  if (!A.allFinite() || !D.allFinite()) throw NumericError("Lyapunov input has non-finite entries");
  const SpectralVerdict sv = is_stable_eigen(A);
  if (!(sv.abscissa < -std::abs(marginal))) {
    std::ostringstream os;
    os.precision(6);
    os << "Lyapunov equation refused: drift matrix is not strictly stable (abscissa " << sv.abscissa
       << ", marginal band " << std::abs(marginal) << ")";
    throw NumericError(os.str());
  }

  // At high drive power the Kronecker system's condition number reaches ~1e8, so it is
  // assembled and refined in extended precision to keep the residual near rounding level.
  using Real = long double;
  using Mat36 = Eigen::Matrix<Real, 36, 36>;
  using Vec36 = Eigen::Matrix<Real, 36, 1>;
  using Mat6L = Eigen::Matrix<Real, 6, 6>;
  const Mat6L AL = A.cast<Real>();
  const Mat6L I6 = Mat6L::Identity();
  // Column-major vec: vec(AV + VA^T) = (I (x) A + A (x) I) vec(V).
  Mat36 K = Mat36::Zero();
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) {
      K.block<6, 6>(6 * i, 6 * j) += I6(i, j) * AL;
      K.block<6, 6>(6 * i, 6 * j) += AL(i, j) * I6;
    }
  Vec36 rhs;
  for (int j = 0; j < 6; ++j)
    for (int i = 0; i < 6; ++i) rhs(6 * j + i) = -static_cast<Real>(D(i, j));

  Eigen::PartialPivLU<Mat36> lu(K);
  Vec36 x = lu.solve(rhs);
  for (int k = 0; k < 2; ++k) x += lu.solve(rhs - K * x);

  CovarianceMatrix cm;
  for (int j = 0; j < 6; ++j)
    for (int i = 0; i < 6; ++i) cm.V(i, j) = static_cast<double>(x(6 * j + i));
  cm.V = 0.5 * (cm.V + cm.V.transpose()).eval();
  if (!cm.V.allFinite()) throw NumericError("Lyapunov solve produced non-finite entries");

  const Mat6L VL = cm.V.cast<Real>();
  const Mat6L res = AL * VL + VL * AL.transpose() + D.cast<Real>();
  const double dnorm = D.cwiseAbs().rowwise().sum().maxCoeff();
  const double rnorm = static_cast<double>(res.cwiseAbs().rowwise().sum().maxCoeff());
  const double scale = dnorm > 0.0 ? dnorm : 1.0;
  cm.residual = rnorm / scale;
  cm.rounding_floor = std::numeric_limits<double>::epsilon() * A.cwiseAbs().rowwise().sum().maxCoeff() *
                      cm.V.cwiseAbs().rowwise().sum().maxCoeff() / scale;
  if (cm.residual > std::max(1e-9, 4.0 * cm.rounding_floor)) {
    std::ostringstream os;
    os << "Lyapunov residual " << cm.residual << " exceeds 1e-9 relative";
    warn(os.str());
  }
  return cm;
}

double physicality_margin(const Mat6& V) {
  using C6 = Eigen::Matrix<std::complex<double>, 6, 6>;
  C6 M = V.cast<std::complex<double>>();
  for (int m = 0; m < 3; ++m) {
    M(2 * m, 2 * m + 1) += std::complex<double>(0.0, 0.5);
    M(2 * m + 1, 2 * m) -= std::complex<double>(0.0, 0.5);
  }
  Eigen::SelfAdjointEigenSolver<C6> es(M, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericError("Hermitian eigen solver did not converge");
  return es.eigenvalues().minCoeff();
}

}  // namespace eom
