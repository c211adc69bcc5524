// Paired Student t-test with a dependency-free incomplete beta.

#ifndef CAIT_STATS_H_
#define CAIT_STATS_H_

#include <span>

namespace cait {

// Regularized incomplete beta I_x(a, b), continued fraction (modified Lentz)
// to relative tolerance 1e-12.
double RegularizedIncompleteBeta(double a, double b, double x);

// Two-sided tail probability P(|T| >= |t|) for Student t with df degrees of
// freedom.
double StudentTTwoSidedP(double t, double df);

struct TTestResult {
  int n = 0;
  double mean_diff = 0;
  double t_stat = 0;
  double p_value = 1;
  int df = 0;
  // Differences had zero variance but a non-zero mean: t is +/-inf, p is 0.
  bool degenerate_variance = false;
};

// Two-sided paired t-test on a[i] - b[i]. Throws std::invalid_argument on
// length mismatch or fewer than two pairs.
TTestResult PairedTTest(std::span<const double> a, std::span<const double> b);

}  // namespace cait

#endif  // CAIT_STATS_H_
