#ifndef AEX_STATS_H_
#define AEX_STATS_H_

#include <span>

namespace aex {

// Regularized incomplete beta function I_x(a, b), a, b > 0, x in [0, 1].
double regularized_incomplete_beta(double a, double b, double x);

// P(|T| >= |t|) for Student's t with `df` degrees of freedom.
double student_t_two_sided_p(double t, double df);

struct TTestResult {
  double t = 0;
  double p = 1;
  double df = 0;
  double mean_difference = 0;
};

// Paired two-sided t-test on a - b. Throws ValidationError on mismatched or
// too-short inputs and NumericalError when all differences are identical.
TTestResult paired_t_test(std::span<const double> a, std::span<const double> b);

}  // namespace aex

#endif  // AEX_STATS_H_
