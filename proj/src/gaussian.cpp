#include "eomech/gaussian.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "eomech/error.hpp"
#include "eomech/log.hpp"

namespace eom {

namespace {

int first_index(Mode m) { return 2 * static_cast<int>(m); }

char letter(Mode m) {
  switch (m) {
    case Mode::optical: return 'o';
    case Mode::mechanical: return 'm';
    case Mode::microwave: return 'w';
  }
  return '?';
}

Mode from_letter(char c) {
  switch (c) {
    case 'o': return Mode::optical;
    case 'm': return Mode::mechanical;
    case 'w': return Mode::microwave;
  }
  throw Error(ErrorKind::argument, std::string("unknown mode letter '") + c + "'");
}

}  // namespace

ModePair parse_mode_pair(const std::string& s) {
  if (s.size() != 2) throw Error(ErrorKind::argument, "mode pair must be two letters from o, m, w");
  ModePair p{from_letter(s[0]), from_letter(s[1])};
  if (p.first == p.second) throw Error(ErrorKind::argument, "mode pair needs two distinct modes");
  return p;
}

std::string to_string(ModePair p) { return {letter(p.first), letter(p.second)}; }

double BipartiteCM::sigma() const { return B().determinant() + Bp().determinant() - 2.0 * C().determinant(); }

BipartiteCM reduce_bipartition(const Mat6& V, ModePair pair) {
  if (pair.first == pair.second) throw Error(ErrorKind::argument, "mode pair needs two distinct modes");
  const int idx[4] = {first_index(pair.first), first_index(pair.first) + 1, first_index(pair.second),
                      first_index(pair.second) + 1};
  BipartiteCM out;
  out.pair = pair;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) out.V(i, j) = V(idx[i], idx[j]);
  return out;
}

double eta_minus(const BipartiteCM& v) {
  if (v.V.hasNaN()) throw NumericError("covariance matrix contains NaN");
  const double sigma = v.sigma();
  const double det = v.V.determinant();
  double disc = sigma * sigma - 4.0 * det;
  if (disc < 0.0) {
    // Round-off can push an exactly-zero discriminant slightly negative.
    const double slack = std::max(1e-12, 1e-12 * sigma * sigma);
    if (disc < -slack) {
      std::ostringstream os;
      os << "negative discriminant " << disc << " in symplectic eigenvalue (invalid covariance matrix)";
      throw NumericError(os.str());
    }
    disc = 0.0;
  }
  const double arg = sigma - std::sqrt(disc);
  if (!(arg > 0.0)) {
    warn("partially transposed covariance matrix has non-positive symplectic eigenvalue; clamped");
    return std::numeric_limits<double>::min();
  }
  return std::sqrt(arg / 2.0);
}

double log_negativity(const BipartiteCM& v) {
  const double eta = eta_minus(v);
  return std::max(0.0, -std::log(2.0 * eta));
}

double effective_phonon(const Mat6& V) { return (V(2, 2) + V(3, 3) - 1.0) / 2.0; }

double squeezing_db(const Mat6& V, Quadrature q) {
  const double sigma = q == Quadrature::Q ? V(2, 2) : V(3, 3);
  if (!(sigma > 0.0)) throw NumericError("mechanical variance must be positive for squeezing in dB");
  return -10.0 * std::log10(2.0 * sigma);
}

Equipartition equipartition_gap(const Mat6& V) { return {V(2, 2), V(3, 3)}; }

}  // namespace eom
