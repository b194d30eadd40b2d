#pragma once

// Dormand-Prince 5(4) with step-size control. Header-only; state is a fixed-size
// Eigen column vector.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "rqt/errors.hpp"
#include "rqt/types.hpp"

namespace rqt {

struct OdeOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  double h0 = 0.0;     // 0 picks a starting step automatically
  double hmax = 0.0;   // 0 means unbounded
  double hmin_rel = 1e-15;
  long max_steps = 2000000;
};

template <int N>
using OdeVec = Eigen::Matrix<double, N, 1>;

template <int N>
struct OdeTrajectory {
  std::vector<double> t;
  std::vector<OdeVec<N>> y;
  std::vector<OdeVec<N>> f;  // rhs at each recorded point
  long accepted = 0;
  long rejected = 0;
};

namespace detail {
struct DP {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                          a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                          a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695,
                          e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                          e6 = 22.0 / 525, e7 = -1.0 / 40;
};
}  // namespace detail

// Integrates dy/dt = f(t, y) from t0 to t1 (either direction). Every value in
// `stops` lying strictly inside the interval is hit exactly and recorded.
template <int N, class F>
OdeTrajectory<N> dopri5(F&& f, double t0, const OdeVec<N>& y0, double t1,
                        const OdeOptions& opt, std::vector<double> stops = {}) {
  using V = OdeVec<N>;
  using detail::DP;
  OdeTrajectory<N> out;
  const double dir = t1 >= t0 ? 1.0 : -1.0;
  stops.push_back(t1);
  std::sort(stops.begin(), stops.end(),
            [dir](double a, double b) { return dir * a < dir * b; });
  stops.erase(std::remove_if(stops.begin(), stops.end(),
                             [&](double s) {
                               return dir * (s - t0) <= 0.0 || dir * (s - t1) > 0.0;
                             }),
              stops.end());
  stops.erase(std::unique(stops.begin(), stops.end()), stops.end());

  double t = t0;
  V y = y0;
  V k1 = f(t, y);
  out.t.push_back(t);
  out.y.push_back(y);
  out.f.push_back(k1);
  if (t0 == t1) return out;

  auto scale = [&](const V& a, const V& b) {
    V s;
    for (int i = 0; i < a.size(); ++i)
      s(i) = opt.atol + opt.rtol * std::max(std::abs(a(i)), std::abs(b(i)));
    return s;
  };

  double span = std::abs(t1 - t0);
  double h = opt.h0;
  if (h <= 0.0) {
    V sc = scale(y, y);
    double d0 = std::sqrt((y.cwiseQuotient(sc)).squaredNorm() / y.size());
    double d1 = std::sqrt((k1.cwiseQuotient(sc)).squaredNorm() / y.size());
    h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 * span : 0.01 * d0 / d1;
    h = std::min(h, span);
  }
  if (opt.hmax > 0.0) h = std::min(h, opt.hmax);
  const double hmin = opt.hmin_rel * std::max(span, std::abs(t0));

  std::size_t next = 0;
  long steps = 0;
  while (next < stops.size()) {
    if (++steps > opt.max_steps)
      throw ToleranceError("ode: step budget exhausted", std::abs(t - t0));
    double target = stops[next];
    bool land = false;
    double hs = h;
    if (hs >= std::abs(target - t)) {
      hs = std::abs(target - t);
      land = true;
    }
    const double hh = dir * hs;
    V k2 = f(t + DP::c2 * hh, y + hh * (DP::a21 * k1));
    V k3 = f(t + DP::c3 * hh, y + hh * (DP::a31 * k1 + DP::a32 * k2));
    V k4 = f(t + DP::c4 * hh, y + hh * (DP::a41 * k1 + DP::a42 * k2 + DP::a43 * k3));
    V k5 = f(t + DP::c5 * hh,
             y + hh * (DP::a51 * k1 + DP::a52 * k2 + DP::a53 * k3 + DP::a54 * k4));
    V k6 = f(t + hh, y + hh * (DP::a61 * k1 + DP::a62 * k2 + DP::a63 * k3 +
                              DP::a64 * k4 + DP::a65 * k5));
    V yn = y + hh * (DP::b1 * k1 + DP::b3 * k3 + DP::b4 * k4 + DP::b5 * k5 +
                     DP::b6 * k6);
    double tn = land ? target : t + hh;
    V k7 = f(tn, yn);
    V err = hh * (DP::e1 * k1 + DP::e3 * k3 + DP::e4 * k4 + DP::e5 * k5 +
                  DP::e6 * k6 + DP::e7 * k7);
    double en = std::sqrt(err.cwiseQuotient(scale(y, yn)).squaredNorm() / y.size());
    if (!std::isfinite(en))
      throw ToleranceError("ode: non-finite state", std::abs(t - t0));
    if (en <= 1.0) {
      t = tn;
      y = yn;
      k1 = k7;
      ++out.accepted;
      out.t.push_back(t);
      out.y.push_back(y);
      out.f.push_back(k1);
      if (land) ++next;
      double fac = en == 0.0 ? 5.0 : std::min(5.0, std::max(0.2, 0.9 * std::pow(en, -0.2)));
      // a landing step may be artificially short; do not let it shrink h
      h = land ? std::max(h, hs * fac) : hs * fac;
    } else {
      ++out.rejected;
      h = hs * std::max(0.2, 0.9 * std::pow(en, -0.2));
      if (h < hmin)
        throw ToleranceError("ode: step size underflow at t=" + std::to_string(t),
                             en);
    }
    if (opt.hmax > 0.0) h = std::min(h, opt.hmax);
  }
  return out;
}

}  // namespace rqt
