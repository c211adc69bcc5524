#include "cait/stats.h"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace cait {
namespace {

constexpr double kEps = 1e-12;
constexpr double kTiny = 1e-300;
constexpr int kMaxIter = 10000;

// Continued fraction for I_x(a, b); converges quickly for x < (a+1)/(a+b+2).
double BetaContinuedFraction(double a, double b, double x) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) return h;
  }
  throw std::runtime_error("incomplete beta: continued fraction did not converge");
}

}  // namespace

double RegularizedIncompleteBeta(double a, double b, double x) {
  if (!(a > 0) || !(b > 0)) throw std::invalid_argument("incomplete beta: a, b must be > 0");
  if (x <= 0) return 0.0;
  if (x >= 1) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * BetaContinuedFraction(a, b, x) / a;
  }
  return 1.0 - front * BetaContinuedFraction(b, a, 1.0 - x) / b;
}

double StudentTTwoSidedP(double t, double df) {
  if (std::isinf(t)) return 0.0;
  if (t == 0) return 1.0;
  const double x = df / (df + t * t);
  return RegularizedIncompleteBeta(df / 2.0, 0.5, x);
}

TTestResult PairedTTest(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("paired t-test: length mismatch");
  }
  if (a.size() < 2) {
    throw std::invalid_argument("paired t-test: need at least 2 pairs");
  }
  TTestResult r;
  r.n = static_cast<int>(a.size());
  r.df = r.n - 1;
  double sum = 0;
  for (size_t i = 0; i < a.size(); ++i) sum += a[i] - b[i];
  r.mean_diff = sum / r.n;
  double ss = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double dev = (a[i] - b[i]) - r.mean_diff;
    ss += dev * dev;
  }
  const double sd = std::sqrt(ss / r.df);
  if (sd == 0) {
    if (r.mean_diff == 0) {
      r.t_stat = 0;
      r.p_value = 1;
    } else {
      r.t_stat = std::copysign(std::numeric_limits<double>::infinity(), r.mean_diff);
      r.p_value = 0;
      r.degenerate_variance = true;
    }
    return r;
  }
  r.t_stat = r.mean_diff / (sd / std::sqrt(static_cast<double>(r.n)));
  r.p_value = StudentTTwoSidedP(r.t_stat, r.df);
  return r;
}

}  // namespace cait
