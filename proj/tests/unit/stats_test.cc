#include "cait/stats.h"

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include <gtest/gtest.h>

namespace cait {
namespace {

// Composite Simpson on the Student t density, as an independent oracle for
// the continued-fraction tail.
double TailByQuadrature(double t, double df) {
  auto pdf = [df](double x) {
    double c = std::exp(std::lgamma((df + 1) / 2) - std::lgamma(df / 2)) /
               std::sqrt(df * M_PI);
    return c * std::pow(1 + x * x / df, -(df + 1) / 2);
  };
  const int n = 200000;
  const double h = t / n;
  double s = pdf(0) + pdf(t);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4 : 2) * pdf(i * h);
  return 1.0 - 2.0 * s * h / 3.0;
}

TEST(IncompleteBetaTest, ClosedForms) {
  // I_x(1, b) = 1 - (1 - x)^b and I_x(a, 1) = x^a.
  EXPECT_NEAR(RegularizedIncompleteBeta(1, 3, 0.2), 1 - std::pow(0.8, 3), 1e-14);
  EXPECT_NEAR(RegularizedIncompleteBeta(2.5, 1, 0.6), std::pow(0.6, 2.5), 1e-14);
  // Symmetry I_x(a, b) = 1 - I_{1-x}(b, a).
  EXPECT_NEAR(RegularizedIncompleteBeta(3.5, 1.25, 0.3),
              1 - RegularizedIncompleteBeta(1.25, 3.5, 0.7), 1e-13);
  EXPECT_EQ(RegularizedIncompleteBeta(2, 3, 0), 0);
  EXPECT_EQ(RegularizedIncompleteBeta(2, 3, 1), 1);
}

TEST(StudentTTest, CauchyAndNormalLimits) {
  // df = 1 is Cauchy: P(|T| >= 1) = 1/2.
  EXPECT_NEAR(StudentTTwoSidedP(1.0, 1), 0.5, 1e-13);
  // df = 2 has P(|T| >= t) = 1 - t / sqrt(2 + t^2).
  EXPECT_NEAR(StudentTTwoSidedP(1.5, 2), 1 - 1.5 / std::sqrt(2 + 2.25), 1e-13);
  EXPECT_EQ(StudentTTwoSidedP(0, 7), 1.0);
}

TEST(StudentTTest, MatchesQuadrature) {
  for (double df : {2.0, 5.0, 19.0}) {
    for (double t : {0.3, 1.7, 3.2}) {
      EXPECT_NEAR(StudentTTwoSidedP(t, df), TailByQuadrature(t, df), 1e-9)
          << "t=" << t << " df=" << df;
    }
  }
}

TEST(PairedTTest, HandComputedExample) {
  // Differences 1, 2, 3: mean 2, sd 1, t = 2 / (1 / sqrt 3) = 2 sqrt 3.
  std::vector<double> a = {2, 4, 6};
  std::vector<double> b = {1, 2, 3};
  TTestResult r = PairedTTest(a, b);
  EXPECT_EQ(r.n, 3);
  EXPECT_EQ(r.df, 2);
  EXPECT_DOUBLE_EQ(r.mean_diff, 2.0);
  EXPECT_NEAR(r.t_stat, 2 * std::sqrt(3.0), 1e-12);
  // df = 2 closed form.
  double t = 2 * std::sqrt(3.0);
  EXPECT_NEAR(r.p_value, 1 - t / std::sqrt(2 + t * t), 1e-12);
  EXPECT_NEAR(r.p_value, 0.07417990022744858, 1e-12);
}

TEST(PairedTTest, IdenticalInputsGiveOne) {
  std::vector<double> a = {70, 80, 90, 100};
  TTestResult r = PairedTTest(a, a);
  EXPECT_EQ(r.t_stat, 0);
  EXPECT_EQ(r.p_value, 1);
  EXPECT_FALSE(r.degenerate_variance);
}

TEST(PairedTTest, ConstantShiftIsDegenerate) {
  std::vector<double> a = {3, 4, 5};
  std::vector<double> b = {2, 3, 4};
  TTestResult r = PairedTTest(a, b);
  EXPECT_TRUE(r.degenerate_variance);
  EXPECT_TRUE(std::isinf(r.t_stat));
  EXPECT_GT(r.t_stat, 0);
  EXPECT_EQ(r.p_value, 0);
}

TEST(PairedTTest, AntisymmetricInArguments) {
  std::vector<double> a = {1, 5, 2, 8, 3};
  std::vector<double> b = {2, 3, 2, 5, 1};
  TTestResult ab = PairedTTest(a, b);
  TTestResult ba = PairedTTest(b, a);
  EXPECT_DOUBLE_EQ(ab.t_stat, -ba.t_stat);
  EXPECT_DOUBLE_EQ(ab.p_value, ba.p_value);
}

TEST(PairedTTest, RejectsBadInput) {
  std::vector<double> one = {1};
  std::vector<double> two = {1, 2};
  EXPECT_THROW(PairedTTest(one, one), std::invalid_argument);
  EXPECT_THROW(PairedTTest(one, two), std::invalid_argument);
}

}  // namespace
}  // namespace cait
