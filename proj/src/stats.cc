#include "aex/stats.h"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "aex/errors.h"

namespace aex {

namespace {

// Continued fraction for I_x(a, b) by the modified Lentz method; converges
// fast for x < (a + 1) / (a + b + 2).
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIterations = 10000;
  constexpr double kEpsilon = 1e-16;
  constexpr double kTiny = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
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
    if (std::abs(delta - 1.0) < kEpsilon) return h;
  }
  throw NumericalError("incomplete beta: continued fraction did not converge");
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  Require(a > 0 && b > 0, "incomplete beta: shape parameters must be positive");
  Require(x >= 0 && x <= 1, "incomplete beta: x must lie in [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
                           b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double df) {
  Require(df > 0, "student t: degrees of freedom must be positive");
  if (std::isinf(t)) return 0.0;
  return regularized_incomplete_beta(0.5 * df, 0.5, df / (df + t * t));
}

TTestResult paired_t_test(std::span<const double> a, std::span<const double> b) {
  Require(a.size() == b.size(), "paired t-test: samples differ in length (" + std::to_string(a.size()) +
                                    " vs " + std::to_string(b.size()) + ")");
  Require(a.size() >= 2, "paired t-test: need at least two pairs");
  const auto n = static_cast<double>(a.size());
  std::vector<double> diff(a.size());
  double mean = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff[i] = a[i] - b[i];
    mean += diff[i];
  }
  mean /= n;
  double ss = 0;
  for (double d : diff) ss += (d - mean) * (d - mean);
  if (ss == 0.0) {
    throw NumericalError("paired t-test: all paired differences equal " + std::to_string(mean) +
                         "; the statistic is undefined");
  }
  const double sd = std::sqrt(ss / (n - 1.0));
  TTestResult r;
  r.df = n - 1.0;
  r.mean_difference = mean;
  r.t = mean / (sd / std::sqrt(n));
  r.p = student_t_two_sided_p(r.t, r.df);
  return r;
}

}  // namespace aex
