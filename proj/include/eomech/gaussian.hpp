#pragma once

#include <string>

#include <Eigen/Dense>

#include "eomech/fluct.hpp"

namespace eom {

using Mat4 = Eigen::Matrix<double, 4, 4>;
using Mat2 = Eigen::Matrix<double, 2, 2>;

enum class Mode { optical = 0, mechanical = 1, microwave = 2 };

/// An ordered pair of distinct modes; the first one occupies block B.
struct ModePair {
  Mode first;
  Mode second;

  static ModePair ow() { return {Mode::optical, Mode::microwave}; }
  static ModePair om() { return {Mode::optical, Mode::mechanical}; }
  static ModePair mw() { return {Mode::mechanical, Mode::microwave}; }
};

/// Parse "ow", "om", "mw" (or the swapped spellings "wo", "mo", "wm").
ModePair parse_mode_pair(const std::string& s);
std::string to_string(ModePair p);

/// Two-mode covariance matrix [[B, C], [C^T, B']].
struct BipartiteCM {
  Mat4 V = Mat4::Zero();
  ModePair pair{Mode::optical, Mode::mechanical};

  Mat2 B() const { return V.topLeftCorner<2, 2>(); }
  Mat2 Bp() const { return V.bottomRightCorner<2, 2>(); }
  Mat2 C() const { return V.topRightCorner<2, 2>(); }
  /// det B + det B' - 2 det C
  double sigma() const;
};

BipartiteCM reduce_bipartition(const Mat6& V, ModePair pair);

/// Smallest symplectic eigenvalue of the partially transposed CM (vacuum = 1/2).
/// Rejects NaN input. Clamps a marginally negative discriminant and a non-positive result (with a warning).
double eta_minus(const BipartiteCM& v);

/// max(0, -ln(2 eta_minus))
double log_negativity(const BipartiteCM& v);

/// (V[2][2] + V[3][3] - 1) / 2
double effective_phonon(const Mat6& V);

enum class Quadrature { Q, P };

/// -10 log10(2 sigma); positive means squeezed below the zero-point variance 1/2.
double squeezing_db(const Mat6& V, Quadrature q);

struct Equipartition {
  double var_q;
  double var_p;
};
Equipartition equipartition_gap(const Mat6& V);

}  // namespace eom
