#pragma once

// Dormand–Prince 5(4) integrator with PI step-size control.
//
// Header-only so the right-hand side inlines; the state is a fixed-size array.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "eomech/error.hpp"

namespace eom::ode {

template <std::size_t N>
using Vec = std::array<double, N>;

struct Options {
  double tol = 1e-8;          // relative tolerance; absolute tolerance is tol * scale[i]
  double initial_step = 0.0;  // 0 = automatic
  double max_step = 0.0;      // 0 = unbounded
  std::size_t max_steps = 50'000'000;
};

struct Stats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t evaluations = 0;
};

namespace detail {

// Butcher tableau (Dormand & Prince 1980).
inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                        a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
inline constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                        b6 = 11.0 / 84;
// b - b_hat (error weights)
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                        e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

template <std::size_t N>
bool finite(const Vec<N>& y) {
  for (double v : y)
    if (!std::isfinite(v)) return false;
  return true;
}

template <std::size_t N>
std::string describe(double t, const Vec<N>& y) {
  std::ostringstream os;
  os.precision(17);
  os << "t=" << t << " state=[";
  for (std::size_t i = 0; i < N; ++i) os << (i ? ", " : "") << y[i];
  os << "]";
  return os.str();
}

}  // namespace detail

/// Integrate y' = f(t, y) from samples.front() through samples.back(), calling
/// `observe(t, y)` at every sample time (including the first). Steps are clipped
/// to land exactly on sample times, so no interpolation error is introduced.
///
/// `f` has signature void(double t, const Vec<N>& y, Vec<N>& dy).
/// Throws IntegratorError on step-size underflow, non-finite state or step budget exhaustion.
template <std::size_t N, class Rhs, class Observer>
Stats integrate(Rhs&& f, Vec<N> y, const std::vector<double>& samples, const Vec<N>& scale,
                const Options& opt, Observer&& observe) {
  using namespace detail;
  Stats st;
  if (samples.empty()) return st;
  for (std::size_t i = 1; i < samples.size(); ++i)
    if (!(samples[i] > samples[i - 1]))
      throw Error(ErrorKind::argument, "sample times must be strictly increasing");
  if (!(opt.tol > 0.0)) throw Error(ErrorKind::argument, "integrator tolerance must be > 0");

  double t = samples.front();
  if (!finite(y)) throw IntegratorError("non-finite initial state: " + describe(t, y), t);
  observe(t, y);
  if (samples.size() == 1) return st;

  const double span = samples.back() - samples.front();
  Vec<N> atol;
  for (std::size_t i = 0; i < N; ++i) atol[i] = opt.tol * std::max(std::abs(scale[i]), 1e-300);

  auto err_norm = [&](const Vec<N>& y0, const Vec<N>& y1, const Vec<N>& err) {
    double s = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double sc = atol[i] + opt.tol * std::max(std::abs(y0[i]), std::abs(y1[i]));
      const double r = err[i] / sc;
      s += r * r;
    }
    return std::sqrt(s / N);
  };

  Vec<N> k1, k2, k3, k4, k5, k6, k7, ytmp, ynew, err;
  f(t, y, k1);
  ++st.evaluations;

  double h = opt.initial_step;
  if (h <= 0.0) {
    // Hairer–Wanner starting-step heuristic (first-order part).
    double d0 = 0.0, d1 = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double sc = atol[i] + opt.tol * std::abs(y[i]);
      d0 += (y[i] / sc) * (y[i] / sc);
      d1 += (k1[i] / sc) * (k1[i] / sc);
    }
    d0 = std::sqrt(d0 / N);
    d1 = std::sqrt(d1 / N);
    h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 * span : 0.01 * d0 / d1;
    h = std::min(h, span);
  }
  if (opt.max_step > 0.0) h = std::min(h, opt.max_step);

  constexpr double safety = 0.9, min_factor = 0.2, max_factor = 10.0;
  constexpr double alpha = 0.7 / 5.0, beta = 0.4 / 5.0;
  double err_prev = 1e-4;
  bool last_rejected = false;

  std::size_t next = 1;
  while (next < samples.size()) {
    const double target = samples[next];
    if (st.accepted + st.rejected >= opt.max_steps)
      throw IntegratorError("step budget exhausted at " + describe(t, y), t);
    bool lands = false;
    double hstep = h;
    if (t + 1.0001 * hstep >= target) {
      hstep = target - t;
      lands = true;
    }
    if (hstep <= 16.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(t), span))
      throw IntegratorError("step size underflow (stiffness?) at " + describe(t, y), t);

    for (std::size_t i = 0; i < N; ++i) ytmp[i] = y[i] + hstep * a21 * k1[i];
    f(t + c2 * hstep, ytmp, k2);
    for (std::size_t i = 0; i < N; ++i) ytmp[i] = y[i] + hstep * (a31 * k1[i] + a32 * k2[i]);
    f(t + c3 * hstep, ytmp, k3);
    for (std::size_t i = 0; i < N; ++i)
      ytmp[i] = y[i] + hstep * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    f(t + c4 * hstep, ytmp, k4);
    for (std::size_t i = 0; i < N; ++i)
      ytmp[i] = y[i] + hstep * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    f(t + c5 * hstep, ytmp, k5);
    for (std::size_t i = 0; i < N; ++i)
      ytmp[i] =
          y[i] + hstep * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    f(t + hstep, ytmp, k6);
    for (std::size_t i = 0; i < N; ++i)
      ynew[i] = y[i] + hstep * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
    f(t + hstep, ynew, k7);
    st.evaluations += 6;
    for (std::size_t i = 0; i < N; ++i)
      err[i] = hstep * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);

    const double en = finite(ynew) && finite(k7) ? err_norm(y, ynew, err)
                                                 : std::numeric_limits<double>::infinity();
    if (en <= 1.0) {
      double factor = en == 0.0 ? max_factor
                                : safety * std::pow(en, -alpha) * std::pow(err_prev, beta);
      factor = std::clamp(factor, min_factor, max_factor);
      if (last_rejected) factor = std::min(factor, 1.0);
      err_prev = std::max(en, 1e-4);
      t = lands ? target : t + hstep;
      y = ynew;
      k1 = k7;  // first-same-as-last
      ++st.accepted;
      last_rejected = false;
      if (lands) {
        observe(t, y);
        ++next;
        // Do not let a short clipped step shrink the controller's step.
        h = std::max(h, hstep * factor);
      } else {
        h = hstep * factor;
      }
      if (opt.max_step > 0.0) h = std::min(h, opt.max_step);
    } else {
      if (!std::isfinite(en) && !finite(ynew) && hstep < 1e-12 * span)
        throw IntegratorError("non-finite state near " + describe(t, y), t);
      const double factor =
          std::isfinite(en) ? std::max(min_factor, safety * std::pow(en, -alpha)) : min_factor;
      h = hstep * factor;
      ++st.rejected;
      last_rejected = true;
    }
  }
  return st;
}

}  // namespace eom::ode
