#pragma once

#include <cstddef>

namespace clustertune {

// Regularized incomplete beta I_x(a, b), evaluated with a Lentz continued
// fraction, switching to 1 - I_{1-x}(b, a) when x > (a+1)/(a+b+2).
// Throws ParameterError unless a > 0, b > 0 and 0 <= x <= 1.
double regularized_incomplete_beta(double a, double b, double x);

// P(|T| >= |t|) for Student's t with `df` > 0 degrees of freedom.
double student_t_two_sided_p(double t, double df);

struct WelchResult {
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;
};

// Two-sided Welch test from summary statistics. Variances use the sample
// divisor (n-1). Throws TestUndefinedError when either n < 2.
WelchResult welch_test(double mean_a, double var_a, std::size_t n_a, double mean_b, double var_b,
                       std::size_t n_b);

inline double welch_t_test(double mean_a, double var_a, std::size_t n_a, double mean_b,
                           double var_b, std::size_t n_b) {
  return welch_test(mean_a, var_a, n_a, mean_b, var_b, n_b).p;
}

}  // namespace clustertune
