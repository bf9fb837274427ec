#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>

namespace rcrs {

class QuadratureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

template <class F>
double simpson_step(const F& f, double a, double fa, double b, double fb, double m, double fm,
                    double whole, double tol, int depth, bool& failed) {
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (std::fabs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  if (depth <= 0) {
    failed = true;
    return left + right + delta / 15.0;
  }
  return simpson_step(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1, failed) +
         simpson_step(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1, failed);
}

}  // namespace detail

// Adaptive Simpson quadrature of f on [a,b] to absolute tolerance tol.
// Throws QuadratureError if the recursion depth is exhausted first.
template <class F>
double adaptive_simpson(const F& f, double a, double b, double tol = 1e-10, int max_depth = 48) {
  if (!(tol > 0.0)) throw std::invalid_argument("adaptive_simpson: tol must be positive");
  if (a == b) return 0.0;
  const double fa = f(a);
  const double fb = f(b);
  const double m = 0.5 * (a + b);
  const double fm = f(m);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  bool failed = false;
  const double r = detail::simpson_step(f, a, fa, b, fb, m, fm, whole, tol, max_depth, failed);
  if (failed || !std::isfinite(r)) {
    throw QuadratureError("adaptive_simpson: no convergence to tol " + std::to_string(tol));
  }
  return r;
}

// Bisection root of f on [a,b]; requires a sign change. Stops when the
// bracket is narrower than tol.
template <class F>
double bisect(const F& f, double a, double b, double tol = 1e-14) {
  double fa = f(a);
  const double fb = f(b);
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if ((fa < 0.0) == (fb < 0.0)) throw std::invalid_argument("bisect: no sign change on bracket");
  for (int it = 0; it < 200 && b - a > tol; ++it) {
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    if (fm == 0.0) return m;
    if ((fm < 0.0) == (fa < 0.0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

}  // namespace rcrs
