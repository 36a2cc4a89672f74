#include <doctest.h>

#include <cmath>
#include <vector>

#include "rng.hpp"
#include "test_support.hpp"
#include "weights.hpp"

using namespace am;

TEST_CASE("square-root weights") {
  CHECK(sqrt_weights(1) == std::vector<double>{1.0});
  auto w = sqrt_weights(4);
  CHECK(w[1] == doctest::Approx(1.41421356));
  CHECK(w[2] == doctest::Approx(1.73205081));
  CHECK(w[3] == 2.0);
  auto n = normalize(sqrt_weights(2));
  CHECK(n[0] == doctest::Approx(1.0 / (1.0 + std::sqrt(2.0))));
  CHECK(n[1] == doctest::Approx(std::sqrt(2.0) / (1.0 + std::sqrt(2.0))));
}

TEST_CASE("LURE and COMB weights") {
  CHECK(lure_weight(1, 10) == doctest::Approx(1.0 / 90));
  CHECK(lure_weight(9, 10) == doctest::Approx(0.5));
  CHECK(lure_weights(4, 10)[3] == doctest::Approx(1.0 / 42));
  CHECK(comb_weights(4, 10)[3] == doctest::Approx(2.0 / 42));
  CHECK_CODE(lure_weights(10, 10), ErrorCode::Singularity);
  CHECK_CODE(comb_weights(11, 10), ErrorCode::Singularity);
}

TEST_CASE("COMB at tau=4, N=10 is sqrt(4)/42") {
  CHECK(comb_weights(4, 10)[3] == doctest::Approx(2.0 / 42).epsilon(1e-15));
  CHECK(2.0 / 42 == doctest::Approx(1.0 / 21));
}

TEST_CASE("LURE partial sums telescope") {
  for (std::size_t n : {5u, 17u, 200u}) {
    for (std::size_t t0 = 1; t0 < n; t0 += 3) {
      for (std::size_t t = t0; t < n; t += 2) {
        double s = 0.0;
        for (std::size_t tau = t0; tau <= t; ++tau) s += lure_weight(tau, n);
        const double closed = double(t - t0 + 1) / (double(n - t) * double(n - t0 + 1));
        CHECK(s == doctest::Approx(closed).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("normalization") {
  CHECK(normalize(std::vector<double>{2, 2}) == std::vector<double>{0.5, 0.5});
  CHECK(normalize(std::vector<double>{5}) == std::vector<double>{1.0});
  auto a = normalize(std::vector<double>{1, 2, 7});
  auto b = normalize(std::vector<double>{3, 6, 21});
  for (int i = 0; i < 3; ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-15));
  CHECK_CODE(normalize(std::vector<double>{0, 0}), ErrorCode::Normalization);
}

TEST_CASE("INV weights") {
  const std::size_t n = 40, t = 20;
  SUBCASE("junction at ceil(gamma t)") {
    CHECK(inv_junction(0.5, 20) == 10);
    CHECK(inv_junction(0.51, 20) == 11);
    CHECK(inv_junction(0.01, 20) == 1);
  }
  SUBCASE("inverse variances before the junction, COMB after, continuous") {
    std::vector<double> v(t, 2.0);
    auto w = inv_weights(v, 0.5, t, n);
    auto c = comb_weights(t, n);
    const std::size_t j = inv_junction(0.5, t);
    for (std::size_t k = 0; k < j; ++k) CHECK(w[k] == doctest::Approx(0.5));
    for (std::size_t k = j; k < t; ++k) CHECK(w[k] / w[j - 1] == doctest::Approx(c[k] / c[j - 1]).epsilon(1e-12));
  }
  SUBCASE("variances inverse to COMB reproduce COMB") {
    auto c = comb_weights(t, n);
    std::vector<double> v(t);
    for (std::size_t k = 0; k < t; ++k) v[k] = 3.0 / c[k];
    auto a = normalize(inv_weights(v, 0.7, t, n));
    auto b = normalize(c);
    for (std::size_t k = 0; k < t; ++k) CHECK(a[k] == doctest::Approx(b[k]).epsilon(1e-12));
  }
  SUBCASE("tiny gamma tends to the COMB shape") {
    std::vector<double> v(t, 1.0);
    auto a = normalize(inv_weights(v, 1e-9, t, n));
    auto b = normalize(comb_weights(t, n));
    for (std::size_t k = 0; k < t; ++k) CHECK(a[k] == doctest::Approx(b[k]).epsilon(1e-12));
  }
  SUBCASE("nonpositive variances") {
    std::vector<double> v(t, 1.0);
    v[2] = 0.0;
    CHECK_CODE(inv_weights(v, 0.5, t, n), ErrorCode::DegenerateVariance);
    SchemeWeights sw = scheme_weights(WeightScheme::inv(0.5), t, n, v);
    CHECK(sw.fallback);
    std::vector<double> zeros(t, 0.0);
    SchemeWeights all = scheme_weights(WeightScheme::inv(0.5), t, n, zeros);
    CHECK(all.fallback);
    auto b = normalize(comb_weights(t, n));
    for (std::size_t k = 0; k < t; ++k) CHECK(all.normalized[k] == doctest::Approx(b[k]));
  }
  CHECK_CODE(WeightScheme::inv(1.0), ErrorCode::Config);
  CHECK_CODE(WeightScheme::parse("median"), ErrorCode::Config);
}

TEST_CASE("worst-case ratio") {
  CHECK(worst_case_ratio(std::vector<double>{3.0}, 1) == doctest::Approx(1.0));
  const double u = worst_case_ratio(std::vector<double>(100, 1.0), 100);
  CHECK(u > 1.0);
  CHECK(u <= 1.125);
  CHECK(worst_case_ratio(lure_weights(700, 1000), 700) <= 1.125);
  CHECK_CODE(worst_case_ratio(std::vector<double>{2, 1}, 2), ErrorCode::Precondition);
}

TEST_CASE("worst-case ratio against a direct sum") {
  Rng rng(8);
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t t = 1 + rng.next() % 60;
    std::vector<double> w(t);
    double acc = 0.1;
    for (auto& x : w) x = (acc += rng.uniform());
    double a = 0, b = 0, c = 0;
    for (std::size_t k = 0; k < t; ++k) {
      a += w[k];
      b += w[k] * double(k + 1);
      c += w[k] * std::sqrt(double(k + 1));
    }
    CHECK(worst_case_ratio(w, t) == doctest::Approx(a * b / (c * c)).epsilon(1e-12));
    CHECK(worst_case_ratio(w, t) <= 1.125 + 1e-9);
  }
}

TEST_CASE("normalized COMB shape at t=700, N=1000") {
  auto l = normalize(lure_weights(700, 1000));
  auto s = normalize(sqrt_weights(700));
  auto c = normalize(comb_weights(700, 1000));
  for (std::size_t k = 0; k < 50; ++k) {
    CHECK(c[k] < l[k]);
  }
  for (std::size_t k = 650; k < 700; ++k) {
    CHECK(c[k] > s[k]);
  }
}
