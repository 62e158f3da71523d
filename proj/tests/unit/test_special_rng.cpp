#include <doctest.h>

#include <cmath>

#include "qmimo/rng.hpp"
#include "qmimo/special.hpp"

using namespace qmimo;

TEST_SUITE_BEGIN("special_rng");

TEST_CASE("pdf_over_cdf reference values") {
  CHECK(pdf_over_cdf(0.0) == doctest::Approx(0.7978845608028654).epsilon(1e-14));
  // Direct evaluation is safe in the moderate range; compare against it.
  for (double x = -6.0; x <= 6.0; x += 0.37) {
    const double direct = normal_pdf(x) / normal_cdf(x);
    CHECK(pdf_over_cdf(x) == doctest::Approx(direct).epsilon(1e-11));
  }
}

TEST_CASE("pdf_over_cdf asymptote for very negative arguments") {
  // phi/Phi (x) ~ -x - 1/x for x -> -inf.
  for (double x : {-10.0, -20.0, -30.0}) {
    const double approx = -x - 1.0 / x;
    CHECK(pdf_over_cdf(x) == doctest::Approx(approx).epsilon(1e-3));
  }
  CHECK(std::isfinite(pdf_over_cdf(-1e300)));  // capped argument
  CHECK(pdf_over_cdf(1e300) == doctest::Approx(0.0));
}

TEST_CASE("sign_fisher_weight values and decay") {
  CHECK(sign_fisher_weight(0.0) == doctest::Approx(2.0 / M_PI).epsilon(1e-14));
  for (double x = -5.0; x <= 5.0; x += 0.41) {
    const double direct =
        normal_pdf(x) * normal_pdf(x) / (normal_cdf(x) * (1.0 - normal_cdf(x)));
    CHECK(sign_fisher_weight(x) == doctest::Approx(direct).epsilon(1e-10));
    CHECK(sign_fisher_weight(x) == doctest::Approx(sign_fisher_weight(-x)).epsilon(1e-12));
  }
  CHECK(sign_fisher_weight(40.0) == doctest::Approx(0.0));
  CHECK(sign_fisher_weight(0.5) < sign_fisher_weight(0.0));
}

TEST_CASE("pdf_over_cdf_slope is the negative derivative") {
  const double h = 1e-6;
  for (double x = -7.0; x <= 7.0; x += 0.53) {
    const double fd = -(pdf_over_cdf(x + h) - pdf_over_cdf(x - h)) / (2 * h);
    CHECK(pdf_over_cdf_slope(x) == doctest::Approx(fd).epsilon(2e-5));
    CHECK(pdf_over_cdf_slope(x) > 0.0);
    CHECK(pdf_over_cdf_slope(x) < 1.0);
  }
  CHECK(pdf_over_cdf_slope(-30.0) == doctest::Approx(1.0 - 1.0 / 900.0).epsilon(1e-5));
}

TEST_CASE("rng streams are addressed and independent") {
  const RngStream a(42, 1, 7);
  const RngStream b(42, 1, 7);
  CHECK(a.uniform(0) == b.uniform(0));
  CHECK(a.cgauss(123) == b.cgauss(123));
  CHECK(a.uniform(0) != a.uniform(1));
  const RngStream c(42, 2, 7), d(42, 1, 8), e(43, 1, 7);
  CHECK(a.uniform(5) != c.uniform(5));
  CHECK(a.uniform(5) != d.uniform(5));
  CHECK(a.uniform(5) != e.uniform(5));
}

TEST_CASE("rng moments") {
  const RngStream s(2024, 9, 0);
  const int n = 100000;
  double sum = 0, sq = 0, usum = 0;
  int bits = 0;
  for (int i = 0; i < n; ++i) {
    const auto g = s.gauss_pair(std::uint64_t(i));
    sum += g[0] + g[1];
    sq += g[0] * g[0] + g[1] * g[1];
    const double u = s.uniform(std::uint64_t(i));
    usum += u;
    CHECK(u > 0.0);
    CHECK(u <= 1.0);
    bits += s.bit(std::uint64_t(i));
  }
  CHECK(sum / (2 * n) == doctest::Approx(0.0).epsilon(0.01));
  CHECK(sq / (2 * n) == doctest::Approx(1.0).epsilon(0.02));
  CHECK(usum / n == doctest::Approx(0.5).epsilon(0.01));
  CHECK(double(bits) / n == doctest::Approx(0.5).epsilon(0.02));
  // Complex variant has unit complex variance.
  double cvar = 0;
  for (int i = 0; i < n; ++i) cvar += std::norm(s.cgauss(std::uint64_t(i)));
  CHECK(cvar / n == doctest::Approx(1.0).epsilon(0.02));
}

TEST_SUITE_END();
