#pragma once
// Statistics used by the experiment harness: Pearson correlation with a
// two-sided t-test p-value, and the altruistic-preference fraction that
// expresses the intrinsic reward's share of the total reward.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace esnn {

namespace detail {

// Continued-fraction kernel for the regularized incomplete beta function
// (modified Lentz's method).
inline double incomplete_beta_cf(double a, double b, double x) {
  constexpr double tiny = 1e-300;
  constexpr double eps = 1e-14;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 300; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < eps) return h;
  }
  throw std::runtime_error("incomplete beta: continued fraction stalled");
}

}  // namespace detail

// Regularized incomplete beta I_x(a, b).
inline double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0))
    throw std::invalid_argument("incomplete beta: a and b must be positive");
  if (!(x >= 0.0) || !(x <= 1.0))
    throw std::invalid_argument("incomplete beta: x must lie in [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) -
                          std::lgamma(b) + a * std::log(x) +
                          b * std::log1p(-x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0))
    return front * detail::incomplete_beta_cf(a, b, x) / a;
  return 1.0 - front * detail::incomplete_beta_cf(b, a, 1.0 - x) / b;
}

// Two-sided p-value for a t statistic with nu degrees of freedom:
// p = I_{nu/(nu+t^2)}(nu/2, 1/2).
inline double t_test_two_sided_p(double t, double nu) {
  if (!(nu > 0.0))
    throw std::invalid_argument("t-test: degrees of freedom must be positive");
  if (!std::isfinite(t)) return 0.0;
  return regularized_incomplete_beta(nu / 2.0, 0.5, nu / (nu + t * t));
}

struct Correlation {
  double r = 0.0;
  double p = 1.0;
  std::size_t n = 0;
  bool computable = false;  // false: fewer than 3 points or zero variance
};

// Pearson r between equal-length series with a two-sided t-test p-value
// (nu = n - 2). Degenerate inputs (fewer than 3 points, or zero variance in
// either series) yield a not-computable result rather than a number.
inline Correlation pearson(const std::vector<double>& xs,
                           const std::vector<double>& ys) {
  if (xs.size() != ys.size())
    throw std::invalid_argument("pearson: series lengths differ");
  Correlation out;
  out.n = xs.size();
  for (std::size_t i = 0; i < xs.size(); ++i)
    if (!std::isfinite(xs[i]) || !std::isfinite(ys[i]))
      throw std::invalid_argument("pearson: non-finite sample");
  if (out.n < 3) return out;

  const double n = double(out.n);
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < out.n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < out.n; ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return out;

  double r = sxy / std::sqrt(sxx * syy);
  if (r > 1.0) r = 1.0;
  if (r < -1.0) r = -1.0;
  out.r = r;
  out.computable = true;
  const double nu = n - 2.0;
  const double r2 = r * r;
  if (r2 >= 1.0) {
    out.p = 0.0;
    return out;
  }
  const double t = std::sqrt(r2 * nu / (1.0 - r2));
  out.p = t_test_two_sided_p(t, nu);
  return out;
}

// Intrinsic reward's share of the total reward: da / (da + r_self).
inline double altruistic_preference(double da, double r_self) {
  if (!std::isfinite(da) || !std::isfinite(r_self))
    throw std::invalid_argument("preference: non-finite input");
  const double denom = da + r_self;
  if (denom == 0.0)
    throw std::invalid_argument("preference: zero denominator");
  return da / denom;
}

}  // namespace esnn
