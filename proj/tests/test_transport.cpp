#include <catch_amalgamated.hpp>

#include <random>

#include "oracles.hpp"
#include "uclab/transport.hpp"

using namespace uclab;
using Catch::Matchers::WithinAbs;

namespace {

std::vector<double> random_simplex(std::size_t k, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.05, 1.0);
  std::vector<double> x(k);
  double total = 0;
  for (auto& v : x) total += v = unit(rng);
  for (auto& v : x) v /= total;
  return x;
}

void check_feasible(const TransportPlan& plan, const std::vector<double>& supply, const std::vector<double>& demand) {
  for (std::size_t i = 0; i < supply.size(); ++i) {
    double s = 0;
    for (std::size_t j = 0; j < demand.size(); ++j) {
      REQUIRE(plan.at(i, j) >= -1e-14);
      s += plan.at(i, j);
    }
    REQUIRE_THAT(s, WithinAbs(supply[i], 1e-12));
  }
  for (std::size_t j = 0; j < demand.size(); ++j) {
    double s = 0;
    for (std::size_t i = 0; i < supply.size(); ++i) s += plan.at(i, j);
    REQUIRE_THAT(s, WithinAbs(demand[j], 1e-12));
  }
}

}  // namespace

TEST_CASE("simplex optimum equals the best vertex") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (int trial = 0; trial < 150; ++trial) {
    const std::size_t m = 1 + trial % 3;
    const std::size_t n = 1 + (trial / 3) % 4;
    const auto supply = random_simplex(m, rng);
    const auto demand = random_simplex(n, rng);
    std::vector<double> cost(m * n);
    for (auto& c : cost) c = unit(rng);
    const auto plan = solve_transport(supply, demand, cost);
    check_feasible(plan, supply, demand);
    REQUIRE_THAT(plan.cost, WithinAbs(oracle::transport_vertex_min(supply, demand, cost), 1e-12));
  }
}

TEST_CASE("degenerate problems terminate at the optimum") {
  // Equal marginals make every northwest start degenerate.
  for (std::size_t k : {2u, 3u, 4u}) {
    const std::vector<double> w(k, 1.0 / double(k));
    std::vector<double> cost(k * k);
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < k; ++j) cost[i * k + j] = i == j ? 1.0 : double((i + 2 * j) % 3) / 5.0;
    }
    const auto plan = solve_transport(w, w, cost);
    check_feasible(plan, w, w);
    CHECK_THAT(plan.cost, WithinAbs(oracle::transport_vertex_min(w, w, cost), 1e-12));
  }
}

TEST_CASE("assignment example") {
  const std::vector<double> w{0.5, 0.5};
  const std::vector<double> cost{1.0, 0.0, 0.0, 1.0};
  const auto plan = solve_transport(w, w, cost);
  CHECK_THAT(plan.cost, WithinAbs(0.0, 1e-15));
  CHECK_THAT(plan.at(0, 1), WithinAbs(0.5, 1e-15));
}

TEST_CASE("invalid transport problems") {
  const std::vector<double> a{0.5, 0.5};
  const std::vector<double> b{1.0};
  const std::vector<double> c2{0.0, 0.0};
  CHECK_THROWS_AS(solve_transport(a, std::vector<double>{0.7}, c2), std::invalid_argument);
  CHECK_THROWS_AS(solve_transport(a, b, std::vector<double>{0.0}), std::invalid_argument);
  CHECK_THROWS_AS(solve_transport(std::vector<double>{}, b, std::vector<double>{}), std::invalid_argument);
  CHECK_THROWS_AS(solve_transport(std::vector<double>{-0.5, 1.5}, b, c2), std::invalid_argument);
}
