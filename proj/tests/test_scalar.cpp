#include <catch_amalgamated.hpp>

#include <cmath>

#include "oracles.hpp"
#include "uclab/scalar.hpp"
#include "uclab/numeric.hpp"

using namespace uclab;
using Catch::Approx;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// Third derivative by a 50-digit central difference with a tiny step.
template <typename F>
double third_mp(F f, double s) {
  const oracle::Real x(s);
  const oracle::Real h("1e-12");
  return static_cast<double>((f(x + 2 * h) - 2 * f(x + h) + 2 * f(x - h) - f(x - 2 * h)) / (2 * h * h * h));
}

}  // namespace

TEST_CASE("binary entropy values and conventions") {
  CHECK(binary_entropy(0.0) == 0.0);
  CHECK(binary_entropy(1.0) == 0.0);
  CHECK_THAT(binary_entropy(0.5), WithinAbs(std::log(2.0), 1e-16));
  CHECK_THAT(binary_entropy(0.2), WithinAbs(0.5004024235381879, 1e-15));
  for (double p : {1e-300, 1e-12, 1e-6, 0.01, 0.2, 0.3819660112501051, 0.5, 0.77, 1 - 1e-9}) {
    CHECK_THAT(binary_entropy(p), WithinRel(oracle::entropy(p), 1e-14));
  }
}

TEST_CASE("binary entropy rejects bad input") {
  CHECK_THROWS_AS(binary_entropy(-0.1), std::domain_error);
  CHECK_THROWS_AS(binary_entropy(1.5), std::domain_error);
  CHECK_THROWS_AS(binary_entropy(std::nan("")), std::domain_error);
  CHECK_THROWS_AS(binary_entropy(INFINITY), std::domain_error);
}

TEST_CASE("binary entropy is symmetric and bounded") {
  for (int k = 0; k <= 10000; ++k) {
    const double p = k / 10000.0;
    REQUIRE(std::abs(binary_entropy(p) - binary_entropy(1.0 - p)) <= 1e-14);
    REQUIRE(binary_entropy(p) <= std::log(2.0) + 1e-16);
    REQUIRE(binary_entropy(p) >= 0.0);
  }
}

TEST_CASE("union probability") {
  CHECK(union_prob(0.0, 0.37) == 0.37);
  CHECK(union_prob(1.0, 0.3) == 1.0);
  CHECK_THAT(union_prob(0.2, 0.3), WithinAbs(0.44, 1e-16));
  CHECK(union_prob(0.3, 0.6) == union_prob(0.6, 0.3));
  CHECK_THROWS_AS(union_prob(0.2, 1.2), std::domain_error);
  CHECK_THAT(union_entropy(0.2, 0.3), WithinAbs(oracle::entropy(0.44), 1e-15));
}

TEST_CASE("golden threshold") {
  const double u = golden_threshold();
  CHECK_THAT(u, WithinAbs(static_cast<double>(oracle::golden_mp()), 1e-17));
  CHECK_THAT(u, WithinAbs(0.3819660113, 1e-10));
  CHECK_THAT(1.0 - u, WithinAbs(0.6180339887498949, 1e-15));
  CHECK_THAT(union_prob(u, u), WithinAbs(1.0 - u, 1e-15));
  CHECK_THAT(binary_entropy(u), WithinAbs(binary_entropy(1.0 - u), 1e-15));
}

TEST_CASE("lambda") {
  const double u = golden_threshold();
  CHECK_THAT(lambda(u), WithinAbs(1.0, 1e-12));
  CHECK_THAT(lambda(0.5), WithinAbs(0.8090169943749475, 1e-15));
  const oracle::Real one_minus = 1 - oracle::Real(0.2);
  const double ratio = static_cast<double>(oracle::entropy_mp(1 - one_minus * one_minus) / oracle::entropy_mp(oracle::Real(0.2)));
  CHECK_THAT(lambda(0.2), WithinRel(ratio, 1e-13));
  CHECK_THAT(lambda(0.2), WithinAbs(1.3057854320000842, 1e-12));

  // Continuity at the threshold: the two branch formulas agree.
  const double ratio_branch = binary_entropy((1 - u) * (1 - u)) / binary_entropy(u);
  CHECK_THAT(ratio_branch, WithinAbs((1 - u) * kGoldenRatio, 1e-12));
  CHECK_THAT(lambda(std::nextafter(u, 1.0)), WithinAbs(lambda(u), 1e-12));

  CHECK_THROWS_AS(lambda(0.0), std::domain_error);
  CHECK_THROWS_AS(lambda(1.0), std::domain_error);
  CHECK(lambda_with_limits(0.0) == 2.0);
  CHECK(lambda_with_limits(1.0) == 0.0);
  CHECK_THAT(lambda_with_limits(1e-12), WithinAbs(2.0, 0.05));
}

TEST_CASE("ratio F") {
  const double s0 = kInverseGolden;
  CHECK_THAT(ratio_F(s0), WithinAbs(kGoldenRatio, 1e-14));
  CHECK_THAT(ratio_F(0.5), WithinAbs(1.6225562489182657, 1e-12));
  const double oracle_half = static_cast<double>(oracle::entropy_mp(oracle::Real(0.25)) /
                                                 (oracle::Real(0.5) * oracle::entropy_mp(oracle::Real(0.5))));
  CHECK_THAT(ratio_F(0.5), WithinRel(oracle_half, 1e-14));
  // F tends to 2 only logarithmically: 2 - 1/(ln(1/s) + 1) to leading order.
  CHECK_THAT(ratio_F(1e-50), WithinAbs(2.0, 0.01));
  CHECK(ratio_F(1e-4) < 2.0);
  CHECK(ratio_F(1.0 - 1e-4) < 2.0);
  CHECK_THROWS_AS(ratio_F(0.0), std::domain_error);
  CHECK_THROWS_AS(ratio_F(1.0), std::domain_error);
}

TEST_CASE("F decreases then increases around the inverse golden ratio") {
  const int n = 100000;
  std::vector<double> f(n + 1);
  int argmin = 1;
  for (int k = 1; k <= n; ++k) {
    f[k] = ratio_F(k / double(n + 1));
    REQUIRE(f[k] < 2.0);
    if (f[k] < f[argmin]) argmin = k;
  }
  const int nearest = static_cast<int>(std::lround(kInverseGolden * (n + 1)));
  CHECK(argmin == nearest);
  CHECK_THAT(f[argmin], WithinAbs(1.6180340, 1e-6));
  for (int k = 2; k <= n; ++k) {
    if (k <= argmin) {
      REQUIRE(f[k] < f[k - 1]);
    } else {
      REQUIRE(f[k] > f[k - 1]);
    }
  }
}

TEST_CASE("third derivative closed forms") {
  CHECK_THAT(d3_H_square(0.5), WithinAbs(-5.0 / (0.5 * 0.5625), 1e-12));
  CHECK_THAT(d3_H_square(0.5), WithinAbs(-17.7778, 1e-4));
  CHECK_THAT(d3_s_H(0.5), WithinAbs(-12.0, 1e-12));
  const auto h_square = [](const oracle::Real& s) { return oracle::entropy_mp(s * s); };
  const auto s_h = [](const oracle::Real& s) { return s * oracle::entropy_mp(s); };
  for (double s : {0.05, 0.25, 0.5, 0.9, 0.95}) {
    CHECK_THAT(d3_H_square(s), WithinRel(third_mp(h_square, s), 1e-9));
    CHECK_THAT(d3_s_H(s), WithinRel(third_mp(s_h, s), 1e-9));
  }
  for (int k = 1; k < 1000; ++k) {
    const double s = k / 1000.0;
    REQUIRE(d3_H_square(s) < 0.0);
    REQUIRE(d3_s_H(s) < 0.0);
  }
}

TEST_CASE("third derivative closed forms match double-precision finite differences") {
  const auto h_square = [](double s) { return binary_entropy(s * s); };
  const auto s_h = [](double s) { return s * binary_entropy(s); };
  for (int k = 0; k <= 900; ++k) {
    const double s = 0.05 + 0.001 * k;
    const double h = fd::unit_interval_step(s);
    REQUIRE_THAT(fd::third(h_square, s, h), WithinRel(d3_H_square(s), 1e-4));
    REQUIRE_THAT(fd::third(s_h, s, h), WithinRel(d3_s_H(s), 1e-4));
  }
}

TEST_CASE("finite-difference stencils on polynomials") {
  const auto cubic = [](double x) { return x * x * x - 2 * x; };
  CHECK_THAT(fd::first(cubic, 0.3, 1e-3), WithinAbs(3 * 0.09 - 2, 1e-10));
  CHECK_THAT(fd::second(cubic, 0.3, 1e-3), WithinAbs(1.8, 1e-7));
  CHECK_THAT(fd::third(cubic, 0.3, 1e-2), WithinAbs(6.0, 1e-6));
  CHECK(fd::unit_interval_step(0.05) == Approx(1e-4));
}

TEST_CASE("third derivative numerator") {
  CHECK(third_deriv_numerator(0.0, 1.3) == Approx(2 * 1.3 - 4));
  CHECK(third_deriv_numerator(0.7, 0.0) == Approx(-4 - 4 * 0.49));
  for (double beta : {0.5, 1.0, 1.7, 1.99}) {
    int changes = 0;
    double prev = third_deriv_numerator(0.0, beta);
    CHECK(prev < 0.0);
    for (int k = 1; k <= 100000; ++k) {
      const double cur = third_deriv_numerator(k / 100000.0, beta);
      if ((cur > 0) != (prev > 0)) ++changes;
      prev = cur;
    }
    CHECK(changes <= 2);
  }
  static_assert(third_deriv_numerator(0.0, 0.0) == -4.0);
}

TEST_CASE("easier entropy inequality") {
  CHECK_THAT(easier_inequality_slack(0.5), WithinAbs(0.1308121, 1e-7));
  CHECK(easier_inequality_slack(kInverseGolden) > 0.0);
  CHECK(easier_inequality_slack(1e-8) < 1e-12);
  for (int k = 1; k <= 100000; ++k) REQUIRE(easier_inequality_slack(k / 100001.0) > 0.0);
}

TEST_CASE("compensated summation") {
  CompensatedSum s;
  s += 1.0;
  for (int k = 0; k < 1000; ++k) s += 1e-16;
  s += -1.0;
  CHECK_THAT(s.value(), WithinRel(1e-13, 1e-9));
  const std::vector<double> xs{1e100, 1.0, -1e100};
  CHECK(compensated_total(xs) == 1.0);
}

TEST_CASE("parallel_for covers every index once and rethrows") {
  for (std::size_t jobs : {1u, 3u, 8u}) {
    std::vector<int> hits(101, 0);
    parallel_for(hits.size(), jobs, [&](std::size_t i) { ++hits[i]; });
    CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
  }
  CHECK_THROWS_AS(parallel_for(10, 2, [](std::size_t i) {
                    if (i == 7) throw std::runtime_error("boom");
                  }),
                  std::runtime_error);
}
