#include <doctest.h>

#include <cmath>

#include "qmimo/qlm.hpp"

using namespace qmimo;

TEST_SUITE_BEGIN("qlm");

namespace {
CMat random_cmat(int rows, int cols, const RngStream& rng, std::uint64_t base = 0) {
  CMat a(rows, cols);
  for (int c = 0; c < cols; ++c)
    for (int r = 0; r < rows; ++r)
      a(r, c) = rng.cgauss(base + std::uint64_t(c) * rows + std::uint64_t(r));
  return a;
}
}  // namespace

TEST_CASE("quantize scalar and vector") {
  CHECK(quantize(Complex(0.3, -0.7)) == Complex(1, -1));
  CHECK(quantize(Complex(0.0, 0.0)) == Complex(1, 1));  // sign(0) = +1
  CVec z(2);
  z << Complex(-2, 5), Complex(4, -1);
  const CVec q = quantize(z);
  CHECK(q[0] == Complex(-1, 1));
  CHECK(q[1] == Complex(1, -1));
}

TEST_CASE("quantize idempotence and positive-scale invariance") {
  const RngStream rng(7, 0, 0);
  for (int i = 0; i < 200; ++i) {
    const Complex z = rng.cgauss(std::uint64_t(i));
    if (z.real() == 0.0 || z.imag() == 0.0) continue;
    const Complex q = quantize(z);
    CHECK(quantize(q) == q);
    CHECK(quantize(3.7 * z) == q);
    CHECK(quantize(1e-9 * z) == q);
  }
}

TEST_CASE("widen block structure") {
  CMat a(1, 1);
  a << Complex(1, 2);
  const RMat w = widen_matrix(a);
  CHECK(w.rows() == 2);
  CHECK(w(0, 0) == 1.0);
  CHECK(w(0, 1) == -2.0);
  CHECK(w(1, 0) == 2.0);
  CHECK(w(1, 1) == 1.0);

  CVec h(1);
  h << Complex(0, 1);
  const RVec hw = widen_vector(h);
  CHECK(hw[0] == 0.0);
  CHECK(hw[1] == 1.0);
}

TEST_CASE("widening is multiplication-compatible") {
  const RngStream rng(11, 0, 0);
  for (int rep = 0; rep < 100; ++rep) {
    const CMat a = random_cmat(6, 3, rng, std::uint64_t(rep) * 1000);
    const CVec h = random_cmat(3, 1, rng, std::uint64_t(rep) * 1000 + 500).col(0);
    const RVec lhs = widen_matrix(a) * widen_vector(h);
    const RVec rhs = widen_vector(CVec(a * h));
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("narrow examples and round trip") {
  RVec v2(2);
  v2 << 0, 1;
  CHECK(narrow_to_complex(v2)[0] == Complex(0, 1));
  RVec v4(4);
  v4 << 1, 2, 3, 4;
  const CVec n4 = narrow_to_complex(v4);
  CHECK(n4[0] == Complex(1, 3));
  CHECK(n4[1] == Complex(2, 4));

  const RngStream rng(3, 0, 0);
  const CVec h = random_cmat(5, 1, rng).col(0);
  CHECK((narrow_to_complex(widen_vector(h)) - h).norm() == 0.0);

  RVec odd(3);
  odd << 1, 2, 3;
  CHECK_THROWS_AS((void)narrow_to_complex(odd), std::invalid_argument);
}

TEST_CASE("widen_to_real carries noise halves and observations") {
  QuantizedLinearModel m;
  m.A = random_cmat(4, 2, RngStream(5, 0, 0));
  m.noise_var = RVec::Constant(4, 2.0);
  m.y = quantize(CVec(random_cmat(4, 1, RngStream(5, 1, 0)).col(0)));
  const CVec h = random_cmat(2, 1, RngStream(5, 2, 0)).col(0);
  const RealWidenedModel w = widen_to_real(m, h);
  CHECK(w.noise_var.size() == 8);
  CHECK(w.noise_var[0] == 1.0);
  CHECK(w.y.size() == 8);
  CHECK((narrow_to_complex(w.h) - h).norm() == 0.0);
  CHECK_THROWS_AS((void)widen_to_real(m, CVec::Zero(3)), std::invalid_argument);
}

TEST_CASE("simulate_observation noiseless and deterministic") {
  CMat eye = CMat::Identity(1, 1);
  CVec h(1);
  h << Complex(2, -3);
  const RngStream rng(99, 0, 0);
  const CVec y = simulate_observation(eye, h, RVec::Zero(1), rng);
  CHECK(y[0] == Complex(1, -1));

  const CMat a = random_cmat(8, 2, RngStream(1, 0, 0));
  const CVec h2 = random_cmat(2, 1, RngStream(1, 1, 0)).col(0);
  const RVec nv = RVec::Constant(8, 1.0);
  const CVec y1 = simulate_observation(a, h2, nv, RngStream(55, 3, 9));
  const CVec y2 = simulate_observation(a, h2, nv, RngStream(55, 3, 9));
  CHECK((y1 - y2).norm() == 0.0);
  const CVec y3 = simulate_observation(a, h2, nv, RngStream(55, 3, 10));
  CHECK((y1 - y3).norm() != 0.0);
}

TEST_CASE("simulate_observation sign symmetry at zero signal") {
  const CMat a = CMat::Identity(1, 1);
  const CVec h = CVec::Zero(1);
  const RVec nv = RVec::Constant(1, 1.0);
  int pos = 0;
  const int n = 100000;
  for (int t = 0; t < n; ++t) {
    const CVec y = simulate_observation(a, h, nv, RngStream(123, 0, std::uint32_t(t)));
    pos += y[0].real() > 0 ? 1 : 0;
  }
  CHECK(double(pos) / n == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("model invariants are enforced") {
  QuantizedLinearModel m;
  m.A = CMat::Identity(2, 2);
  m.noise_var = RVec::Constant(2, 1.0);
  CHECK_NOTHROW(m.validate());

  QuantizedLinearModel bad_noise = m;
  bad_noise.noise_var[1] = 0.0;
  CHECK_THROWS_AS(bad_noise.validate(), std::invalid_argument);

  QuantizedLinearModel zero_col = m;
  zero_col.A.col(1).setZero();
  CHECK_THROWS_AS(zero_col.validate(), std::invalid_argument);

  QuantizedLinearModel bad_y = m;
  bad_y.y = CVec::Constant(2, Complex(0.5, 1.0));
  CHECK_THROWS_AS(bad_y.validate(), std::invalid_argument);
}

TEST_SUITE_END();
