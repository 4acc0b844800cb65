#include <doctest.h>

#include <cmath>

#include "latpred/models.hpp"
#include "latpred/rng.hpp"

using namespace latpred;

namespace {

// Random parameters kept away from the denominator floor over the sample box.
RationalExpParams random_safe_params(Rng& rng) {
  RationalExpParams p;
  for (auto& v : p.a) v = rng.uniform(-1.0, 1.0);
  for (auto& v : p.b) v = rng.uniform(0.0, 0.5);
  p.c = rng.uniform(0.0, 0.5);
  p.d = rng.uniform(-0.3, 0.3);
  return p;
}

Features random_x(Rng& rng) {
  return {rng.uniform(0.1, 3.0), rng.uniform(0.1, 3.0), rng.uniform(0.1, 3.0)};
}

}  // namespace

TEST_CASE("rational-exp closed form") {
  RationalExpParams zero;
  zero.c = 0.2;
  CHECK(predict_rational_exp(zero, {0, 0, 0}) == 0.0);

  RationalExpParams linear{{1, 1, 1}, {0, 0, 0}, 0.0, 0.0};
  CHECK(predict_rational_exp(linear, {1, 1, 1}) == doctest::Approx(3.0));

  RationalExpParams expo{{0, 0, 1}, {0, 0, 0}, 0.0, std::log(2.0)};
  CHECK(predict_rational_exp(expo, {0, 0, 1}) == doctest::Approx(2.0));

  RationalExpParams ratio{{2, 0, 0}, {1, 0, 0}, 0.0, 0.0};
  CHECK(predict_rational_exp(ratio, {1, 0, 0}) == doctest::Approx(1.0));
}

TEST_CASE("rational-exp throws past the denominator floor, naming the row") {
  RationalExpParams p{{1, 0, 0}, {-1, 0, 0}, 0.0, 0.0};
  CHECK_THROWS_AS(predict_rational_exp(p, {1, 0, 0}, 17), SingularDenominatorError);
  try {
    predict_rational_exp(p, {1, 0, 0}, 17);
  } catch (const SingularDenominatorError& e) {
    CHECK(e.row == 17);
    CHECK(std::string(e.what()).find("17") != std::string::npos);
  }
}

TEST_CASE("rational-exp jacobian vanishes at the origin") {
  Rng rng(1);
  const RationalExpParams p = random_safe_params(rng);
  const auto j = jacobian_rational_exp(p, {0, 0, 0});
  for (double v : j) CHECK(v == 0.0);
}

TEST_CASE("rational-exp jacobian matches central finite differences") {
  Rng rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const RationalExpParams p = random_safe_params(rng);
    const Features x = random_x(rng);
    const auto analytic = jacobian_rational_exp(p, x);

    std::vector<double> packed = pack_params(p);
    for (std::size_t i = 0; i < packed.size(); ++i) {
      const double h = 1e-6 * std::max(1.0, std::abs(packed[i]));
      std::vector<double> hi = packed, lo = packed;
      hi[i] += h;
      lo[i] -= h;
      const double fd = (predict_rational_exp(unpack_rational_exp(hi), x) -
                         predict_rational_exp(unpack_rational_exp(lo), x)) /
                        (2.0 * h);
      const double denom = std::max({std::abs(analytic[i]), std::abs(fd), 1e-12});
      CHECK(std::abs(analytic[i] - fd) / denom < 1e-6);
    }
  }
}

TEST_CASE("at d=0 the d-partial equals x3 times the prediction") {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    RationalExpParams p = random_safe_params(rng);
    p.d = 0.0;
    const Features x = random_x(rng);
    const auto j = jacobian_rational_exp(p, x);
    CHECK(j[7] == doctest::Approx(x[2] * predict_rational_exp(p, x)).epsilon(1e-12));
  }
}

TEST_CASE("rational equals rational-exp with d frozen at zero") {
  Rng rng(4);
  for (int trial = 0; trial < 1000; ++trial) {
    RationalExpParams pe = random_safe_params(rng);
    pe.d = 0.0;
    const RationalParams pr{pe.a, pe.b, pe.c};
    const Features x = random_x(rng);
    CHECK(predict_rational(pr, x) == predict_rational_exp(pe, x));
  }
  RationalParams p;
  p.c = 0.3;
  CHECK(predict_rational(p, {0, 0, 0}) == 0.0);
}

TEST_CASE("univariate rational closed form") {
  CHECK(predict_univariate_rational({1, 1, 0, 1}, 5.0) == doctest::Approx(5.0));
  CHECK(predict_univariate_rational({1, 2, 0, 1}, 3.0) == doctest::Approx(9.0));
  CHECK(predict_univariate_rational({2, 1, 1, 1}, 1.0) == doctest::Approx(1.0));
  CHECK_THROWS(predict_univariate_rational({1, 1, 0, 1}, 0.0));
  CHECK_THROWS(predict_univariate_rational({1, 1, 0, 1}, -2.0));
  CHECK_THROWS(predict_univariate_rational({1, 1, -1, 0}, 1.0));  // denominator at floor
}

TEST_CASE("univariate rational jacobian matches finite differences") {
  Rng rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    UnivariateRationalParams p{rng.uniform(0.2, 2.0), rng.uniform(0.3, 1.8), rng.uniform(0.0, 0.8),
                               rng.uniform(0.3, 1.5)};
    const double X = rng.uniform(0.2, 4.0);
    const auto analytic = jacobian_univariate_rational(p, X);
    std::vector<double> packed = pack_params(p);
    for (std::size_t i = 0; i < packed.size(); ++i) {
      const double h = 1e-6 * std::max(1.0, std::abs(packed[i]));
      std::vector<double> hi = packed, lo = packed;
      hi[i] += h;
      lo[i] -= h;
      const double fd = (predict_univariate_rational(unpack_univariate_rational(hi), X) -
                         predict_univariate_rational(unpack_univariate_rational(lo), X)) /
                        (2.0 * h);
      const double denom = std::max({std::abs(analytic[i]), std::abs(fd), 1e-12});
      CHECK(std::abs(analytic[i] - fd) / denom < 1e-6);
    }
  }
}

TEST_CASE("baseline family trivial values") {
  CHECK(predict_linear({0.1, {0, 0, 0}}, {4, 5, 6}) == doctest::Approx(0.1));
  CHECK(predict_sigmoid({1.0, {0, 0, 0}, 0.0}, {9, 9, 9}) == doctest::Approx(0.5));

  PolynomialParams poly;
  poly.w[0] = 2.5;
  CHECK(predict_polynomial2(poly, {1, 2, 3}) == doctest::Approx(2.5));

  MlpParams mlp;
  mlp.hidden = 16;
  mlp.w_in.assign(48, 0.0);
  mlp.b_in.assign(16, 0.0);
  mlp.w_out.assign(16, 0.0);
  mlp.b_out = 0.3;
  CHECK(mlp_forward(mlp, {1, 2, 3}) == doctest::Approx(0.3));
}

TEST_CASE("polynomial covers all ten terms") {
  PolynomialParams p;
  for (int i = 0; i < 10; ++i) p.w[i] = i + 1;
  const Features x = {2, 3, 5};
  const double expected = 1 + 2 * 2 + 3 * 3 + 4 * 5 + 5 * 4 + 6 * 9 + 7 * 25 + 8 * 6 + 9 * 10 +
                          10 * 15;
  CHECK(predict_polynomial2(p, x) == doctest::Approx(expected));
}

TEST_CASE("sigmoid jacobian matches finite differences") {
  Rng rng(6);
  for (int trial = 0; trial < 30; ++trial) {
    SigmoidParams p{rng.uniform(0.5, 3.0),
                    {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)},
                    rng.uniform(-1, 1)};
    const Features x = random_x(rng);
    const auto analytic = jacobian_sigmoid(p, x);
    std::vector<double> packed = pack_params(p);
    for (std::size_t i = 0; i < packed.size(); ++i) {
      const double h = 1e-6 * std::max(1.0, std::abs(packed[i]));
      std::vector<double> hi = packed, lo = packed;
      hi[i] += h;
      lo[i] -= h;
      const double fd = (predict_sigmoid(unpack_sigmoid(hi), x) -
                         predict_sigmoid(unpack_sigmoid(lo), x)) /
                        (2.0 * h);
      const double denom = std::max({std::abs(analytic[i]), std::abs(fd), 1e-12});
      CHECK(std::abs(analytic[i] - fd) / denom < 1e-6);
    }
  }
}

TEST_CASE("scale redundancy leaves rational-exp predictions unchanged") {
  Rng rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const RationalExpParams p = random_safe_params(rng);
    const double k = rng.uniform(0.2, 5.0);
    RationalExpParams q;
    for (int i = 0; i < 3; ++i) {
      q.a[i] = k * p.a[i];
      q.b[i] = k * p.b[i];
    }
    q.c = k * (1.0 + p.c) - 1.0;
    q.d = p.d;

    const Features x = random_x(rng);
    const double y0 = predict_rational_exp(p, x);
    const double y1 = predict_rational_exp(q, x);
    CHECK(std::abs(y0 - y1) <= 1e-12 * std::max(std::abs(y0), 1.0));
  }
}

TEST_CASE("prediction is deterministic") {
  Rng rng(8);
  const RationalExpParams p = random_safe_params(rng);
  const Features x = random_x(rng);
  const double first = predict_rational_exp(p, x);
  for (int i = 0; i < 10; ++i) CHECK(predict_rational_exp(p, x) == first);
}

TEST_CASE("monotone in x3 when the exponential dominates") {
  const RationalExpParams p{{0.5, 0.5, 1.0}, {0, 0, 0}, 0.0, 0.4};
  double prev = predict_rational_exp(p, {1.0, 1.0, 0.0});
  for (int i = 1; i <= 50; ++i) {
    const double x3 = 0.1 * i;
    const double cur = predict_rational_exp(p, {1.0, 1.0, x3});
    CHECK(cur > prev);
    prev = cur;
  }
}

TEST_CASE("pack/unpack round-trips every family") {
  Rng rng(9);
  const RationalExpParams re = random_safe_params(rng);
  CHECK(pack_params(unpack_rational_exp(pack_params(re))) == pack_params(re));

  const std::vector<double> sig = {1.5, 0.1, -0.2, 0.3, -0.4};
  CHECK(pack_params(unpack_sigmoid(sig)) == sig);

  MlpParams mlp;
  mlp.hidden = 4;
  for (int i = 0; i < 12; ++i) mlp.w_in.push_back(0.1 * i);
  for (int i = 0; i < 4; ++i) mlp.b_in.push_back(-0.2 * i);
  for (int i = 0; i < 4; ++i) mlp.w_out.push_back(0.3 * i);
  mlp.b_out = 0.7;
  const auto packed = pack_params(mlp);
  CHECK(pack_params(unpack_mlp(packed, 4)) == packed);

  CHECK_THROWS(unpack_rational(std::vector<double>(5, 0.0)));
}

TEST_CASE("family names round-trip") {
  for (ModelFamily f : {ModelFamily::kRationalExp, ModelFamily::kRational,
                        ModelFamily::kUnivariateRational, ModelFamily::kPolynomial2,
                        ModelFamily::kLinear, ModelFamily::kSigmoid, ModelFamily::kMlp}) {
    CHECK(family_from_name(family_name(f)) == f);
  }
  CHECK_THROWS(family_from_name("cubist"));
}
