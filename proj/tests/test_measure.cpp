#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "uclab/measure.hpp"

using namespace uclab;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

DiscreteMeasure mixture(const DiscreteMeasure& a, const DiscreteMeasure& b, double t) {
  std::vector<Atom> atoms;
  for (const auto& x : a.atoms()) atoms.push_back({x.location, (1 - t) * x.weight});
  for (const auto& x : b.atoms()) atoms.push_back({x.location, t * x.weight});
  return DiscreteMeasure(atoms);
}

// E_{mu x mu} H(p + q - pq) - lam E_mu H(p) in 50 digits.
double objective_oracle(const DiscreteMeasure& mu, double lam) {
  oracle::Real quad = 0;
  oracle::Real lin = 0;
  for (const auto& a : mu.atoms()) {
    const oracle::Real p(a.location);
    lin += a.weight * oracle::entropy_mp(p);
    for (const auto& b : mu.atoms()) {
      const oracle::Real q(b.location);
      quad += oracle::Real(a.weight) * b.weight * oracle::entropy_mp(p + q - p * q);
    }
  }
  return static_cast<double>(quad - lam * lin);
}

}  // namespace

TEST_CASE("measures are validated and merged") {
  CHECK_THROWS_AS(DiscreteMeasure({}), std::invalid_argument);
  CHECK_THROWS_AS(DiscreteMeasure({{1.2, 1.0}}), std::invalid_argument);
  CHECK_THROWS_AS(DiscreteMeasure({{0.2, 0.5}}), std::invalid_argument);
  const DiscreteMeasure m({{0.5, 0.25}, {0.1, 0.5}, {0.5, 0.25}});
  REQUIRE(m.size() == 2);
  CHECK(m.atoms()[0].location == 0.1);
  CHECK(m.atoms()[1].weight == 0.5);
  CHECK_THAT(mean(m), WithinAbs(0.3, 1e-16));
  CHECK(DiscreteMeasure({{0.0, 0.3}, {1.0, 0.7}}).on_boundary());
  CHECK(DiscreteMeasure::two_atom(1.0, 0.3).size() == 1);
}

TEST_CASE("objective matches the oracle") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Atom> atoms;
    double total = 0;
    for (int k = 0; k < 1 + trial % 5; ++k) {
      atoms.push_back({unit(rng), unit(rng) + 0.01});
      total += atoms.back().weight;
    }
    for (auto& a : atoms) a.weight /= total;
    const DiscreteMeasure mu(atoms);
    const double lam = 0.5 + unit(rng);
    CHECK_THAT(objective(mu, lam).value, WithinAbs(objective_oracle(mu, lam), 1e-14));
  }
}

TEST_CASE("two-atom objective example") {
  CHECK_THAT(two_atom_objective(0.2, 0.5, 1.0), WithinAbs(-0.0868466630706685, 1e-15));
  const auto full = objective(DiscreteMeasure::two_atom(0.2, 0.5), 1.0);
  CHECK_THAT(full.value, WithinAbs(two_atom_objective(0.2, 0.5, 1.0), 1e-15));
  CHECK_THAT(full.mean, WithinAbs(0.6, 1e-15));
}

TEST_CASE("sharp measures have zero objective") {
  for (double u : {0.05, 0.2, 0.3, 0.38}) {
    CHECK_THAT(objective(DiscreteMeasure::dirac(u), lambda(u)).value, WithinAbs(0.0, 1e-14));
  }
  const double g = kGoldenThreshold;
  CHECK_THAT(objective(DiscreteMeasure::dirac(g), 1.0).value, WithinAbs(0.0, 1e-14));
  for (double u : {0.4, 0.5, 0.7, 0.9}) {
    const double w = (1 - u) / (1 - g);
    const auto mu = DiscreteMeasure::two_atom(g, w);
    CHECK_THAT(mean(mu), WithinAbs(u, 1e-14));
    CHECK_THAT(objective(mu, lambda(u)).value, WithinAbs(0.0, 1e-14));
  }
}

TEST_CASE("linearized objective is the directional derivative") {
  const DiscreteMeasure mu({{0.1, 0.3}, {0.45, 0.5}, {1.0, 0.2}});
  const DiscreteMeasure nu({{0.25, 0.6}, {0.8, 0.4}});
  const double lam = 1.1;
  const double h = 1e-5;
  const double t = 0.4;
  const double fd = (objective(mixture(mu, nu, t + h), lam).value - objective(mixture(mu, nu, t - h), lam).value) / (2 * h);
  const auto base = mixture(mu, nu, t);
  CHECK_THAT(fd, WithinAbs(linearized_objective(base, nu, lam) - linearized_objective(base, mu, lam), 1e-8));
}

TEST_CASE("two-atom scan stays nonnegative and is tight at the threshold") {
  for (int k = 1; k < 200; ++k) {
    const double u = k / 200.0;
    REQUIRE(two_atom_min_scan(u, 500).min_slack >= -kScanTolerance);
  }
  const auto at_golden = two_atom_min_scan(kGoldenThreshold, 1000);
  CHECK_THAT(at_golden.min_slack, WithinAbs(0.0, 1e-12));
  const auto above = two_atom_min_scan(0.6, 1000);
  CHECK_THAT(above.min_slack, WithinAbs(0.0, 1e-12));
  CHECK_THAT(above.argmin_v, WithinAbs(kGoldenThreshold, 1e-15));
  CHECK(two_atom_min_scan(0.3, 100, lambda(0.3) * 1.05).min_slack < -1e-3);
}

TEST_CASE("F_mu example") {
  // 2 H(0.58) - H(0.4)
  CHECK_THAT(F_mu(DiscreteMeasure::dirac(0.3), 1.0, 0.4), WithinAbs(0.687572333375050, 1e-14));
  CHECK_THAT(F_mu(DiscreteMeasure::dirac(0.3), 1.0, 0.4),
             WithinAbs(2 * oracle::entropy(0.58) - oracle::entropy(0.4), 1e-15));
}

TEST_CASE("scaled curvature agrees with finite differences") {
  const DiscreteMeasure mu({{0.2, 0.4}, {0.6, 0.35}, {1.0, 0.25}});
  const double lam = 1.2;
  const auto f = [&](double q) { return F_mu(mu, lam, q); };
  for (int k = 1; k < 100; ++k) {
    const double q = k / 100.0;
    const double h = 1e-4 * std::min(q, 1 - q);
    const double g = F_mu_scaled_curvature(mu, lam, q);
    const double numeric = q * (1 - q) * fd::second(f, q, h);
    REQUIRE_THAT(numeric, WithinAbs(g, 1e-5 * (1 + std::abs(g))));
  }
}

TEST_CASE("F_mu is convex then concave") {
  const auto r = F_mu_structure_check(DiscreteMeasure::dirac(kGoldenThreshold), 1.0, 10000);
  CHECK(r.strictly_decreasing);
  CHECK(r.shape == CurvatureShape::ConvexThenConcave);
  REQUIRE(r.inflection);
  CHECK(*r.inflection > 0.0);
  CHECK(*r.inflection < 1.0);
  CHECK(r.sign_mismatches == 0);

  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> unit(0.01, 0.99);
  for (int trial = 0; trial < 20; ++trial) {
    const DiscreteMeasure mu({{unit(rng), 0.5}, {unit(rng), 0.3}, {1.0, 0.2}});
    const auto s = F_mu_structure_check(mu, 0.5 + unit(rng), 2000);
    CHECK(s.strictly_decreasing);
    CHECK(s.sign_mismatches == 0);
  }
  CHECK_THROWS_AS(F_mu_structure_check(DiscreteMeasure({{0.0, 0.5}, {1.0, 0.5}}), 1.0, 100), std::domain_error);
}

TEST_CASE("local search finds no measure below the two-atom bound") {
  LocalSearchOptions options;
  options.atom_grid = 100;
  options.restarts = 3;
  for (double u : {0.15, kGoldenThreshold, 0.55}) {
    const auto r = local_search_min(u, lambda(u), options);
    CHECK(r.best_value >= two_atom_min_scan(u, 1000).min_slack - kSearchTolerance);
    CHECK(r.best_mean <= u + 1e-12);
    CHECK(r.restart_values.size() == 3);
  }
  const auto a = local_search_min(0.3, lambda(0.3), options);
  const auto b = local_search_min(0.3, lambda(0.3), options);
  CHECK(a.best_value == b.best_value);
}

TEST_CASE("small certificate passes and inflated lambda fails") {
  CertificateOptions options;
  options.u_steps = 40;
  options.v_steps = 200;
  options.search_points = 2;
  options.search.atom_grid = 60;
  options.search.restarts = 2;
  const auto r = lemma_certificate(options);
  CHECK(r.passed());
  CHECK(r.rows.size() == 41);
  CHECK_THAT(r.slack_at_golden, WithinAbs(0.0, 1e-12));
  CHECK(r.total_restarts == 4);

  options.lambda_scale = 1.05;
  options.search_points = 0;
  CHECK_FALSE(lemma_certificate(options).scan_passed);
}
