#include "clustertune/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "clustertune/errors.hpp"

namespace clustertune {

namespace {

constexpr double kTiny = 1e-300;
constexpr double kEps = 1e-16;
constexpr int kMaxTerms = 10000;

// Continued fraction for I_x(a,b) (modified Lentz).
double beta_continued_fraction(double a, double b, double x) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxTerms; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;

    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) return h;
  }
  return h;
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0) || !(x >= 0.0 && x <= 1.0)) {
    throw ParameterError("incomplete beta needs a > 0, b > 0, 0 <= x <= 1 (got a=" +
                         std::to_string(a) + ", b=" + std::to_string(b) +
                         ", x=" + std::to_string(x) + ")");
  }
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  double value;
  if (x < (a + 1.0) / (a + b + 2.0)) {
    value = front * beta_continued_fraction(a, b, x) / a;
  } else {
    value = 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
  }
  return std::clamp(value, 0.0, 1.0);
}

double student_t_two_sided_p(double t, double df) {
  if (!(df > 0.0)) throw ParameterError("degrees of freedom must be > 0");
  if (std::isinf(t)) return 0.0;
  const double t2 = t * t;
  return regularized_incomplete_beta(0.5 * df, 0.5, df / (df + t2));
}

WelchResult welch_test(double mean_a, double var_a, std::size_t n_a, double mean_b, double var_b,
                       std::size_t n_b) {
  if (n_a < 2 || n_b < 2) {
    throw TestUndefinedError("Welch test needs n >= 2 in both samples (got " +
                             std::to_string(n_a) + " and " + std::to_string(n_b) + ")");
  }
  if (var_a < 0.0 || var_b < 0.0) throw ParameterError("variance must be >= 0");

  const double qa = var_a / static_cast<double>(n_a);
  const double qb = var_b / static_cast<double>(n_b);
  const double se2 = qa + qb;
  WelchResult r;
  if (se2 == 0.0) {
    r.t = mean_a == mean_b ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(),
                                                 mean_a - mean_b);
    r.p = mean_a == mean_b ? 1.0 : 0.0;
    return r;
  }
  r.t = (mean_a - mean_b) / std::sqrt(se2);
  r.df = se2 * se2 /
         (qa * qa / static_cast<double>(n_a - 1) + qb * qb / static_cast<double>(n_b - 1));
  r.p = student_t_two_sided_p(r.t, r.df);
  return r;
}

}  // namespace clustertune
