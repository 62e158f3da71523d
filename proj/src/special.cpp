#include "qmimo/special.hpp"

#include <algorithm>
#include <cmath>

namespace qmimo {

namespace {
constexpr double kInvSqrt2Pi = 0.3989422804014326779;  // 1/sqrt(2*pi)
constexpr double kSqrt2OverPi = 0.7978845608028653559;  // sqrt(2/pi)
constexpr double kEtaCap = 37.0;

// Laplace continued fraction for erfcx, accurate for x >= 4.
double erfcx_cf(double x) {
  double f = 0.0;
  for (int n = 60; n >= 1; --n) f = (0.5 * n) / (x + f);
  return (1.0 / std::sqrt(M_PI)) / (x + f);
}
}  // namespace

double normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double normal_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }

double erfcx(double x) {
  if (x < 0.0) {
    // erfcx(-x) = 2 exp(x^2) - erfcx(x); overflows to +inf for x < -26.6,
    // which downstream ratios treat as a hard-saturated observation.
    return 2.0 * std::exp(x * x) - erfcx(-x);
  }
  if (x < 4.0) return std::exp(x * x) * std::erfc(x);
  return erfcx_cf(x);
}

double pdf_over_cdf(double x) {
  x = std::clamp(x, -kEtaCap, kEtaCap);
  return kSqrt2OverPi / erfcx(-x * M_SQRT1_2);
}

double sign_fisher_weight(double x) {
  const double denom = erfcx(-x * M_SQRT1_2) * erfcx(x * M_SQRT1_2);
  if (!std::isfinite(denom)) return 0.0;
  return (2.0 / M_PI) / denom;
}

double pdf_over_cdf_slope(double x) {
  // The cap keeps x + r(x) well away from catastrophic cancellation.
  x = std::clamp(x, -kEtaCap, kEtaCap);
  const double r = pdf_over_cdf(x);
  return r * (x + r);
}

}  // namespace qmimo
