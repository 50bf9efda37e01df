#pragma once

// Correlated samples. Two uniform samples A, C from a union-closed family can
// be coupled coordinate by coordinate so that the union gains entropy; in
// terms of the conditional inclusion rates p, r of a coordinate the union
// then contains it with probability max(p, r, min(p + r, 1/2)).
//
// This module provides that rate, the worst coupling of a measure with itself
// for the resulting entropy (a transportation LP), the mixed slack
//   (1-a) E[H(p+q-pq)] + a min_coupling E[H(coupled(p,r))] - E[H(p)],
// a grid search for how far above (3 - sqrt 5)/2 the mean can go while that
// slack stays positive, and an exact prefix dynamic program for the greedy
// coupling on an explicit family.

#include <algorithm>
#include <array>
#include <initializer_list>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "uclab/families.hpp"
#include "uclab/measure.hpp"
#include "uclab/numeric.hpp"
#include "uclab/scalar.hpp"
#include "uclab/set_dist.hpp"
#include "uclab/transport.hpp"

namespace uclab {

/// Probability that max(A_i, C_i) = 1 under the greedy common-uniform
/// coupling: comonotone when either rate is at least 1/2, otherwise the two
/// events are placed back to back inside [0, 1/2].
inline double coupled_union_prob(double p, double r) {
  detail::require_probability(p, "coupled_union_prob");
  detail::require_probability(r, "coupled_union_prob");
  if (p >= 0.5 || r >= 0.5) return std::max(p, r);
  return std::min(p + r, 0.5);
}

/// A coupling: weights(i, j) is the mass at (p = rows.atoms()[i].location,
/// r = cols.atoms()[j].location).
struct JointMeasure {
  DiscreteMeasure rows;
  DiscreteMeasure cols;
  std::vector<double> weights;  // row-major

  [[nodiscard]] double at(std::size_t i, std::size_t j) const { return weights[i * cols.size() + j]; }

  /// Largest deviation of the row/column sums from the marginal weights.
  [[nodiscard]] double marginal_error() const {
    double err = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      CompensatedSum s;
      for (std::size_t j = 0; j < cols.size(); ++j) s += at(i, j);
      err = std::max(err, std::abs(s.value() - rows.atoms()[i].weight));
    }
    for (std::size_t j = 0; j < cols.size(); ++j) {
      CompensatedSum s;
      for (std::size_t i = 0; i < rows.size(); ++i) s += at(i, j);
      err = std::max(err, std::abs(s.value() - cols.atoms()[j].weight));
    }
    return err;
  }
};

inline constexpr std::size_t kMaxCouplingAtoms = 200;

struct WorstCouplingReport {
  double value = 0.0;              // min over couplings of E[H(coupled_union_prob(p, r))]
  double independent_value = 0.0;  // the same expectation under the product coupling
  JointMeasure coupling;
  std::size_t pivots = 0;
};

inline std::vector<double> coupled_entropy_costs(const DiscreteMeasure& mu) {
  const auto atoms = mu.atoms();
  std::vector<double> cost(atoms.size() * atoms.size());
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    for (std::size_t j = 0; j < atoms.size(); ++j) {
      cost[i * atoms.size() + j] = binary_entropy(coupled_union_prob(atoms[i].location, atoms[j].location));
    }
  }
  return cost;
}

/// Minimizes E[H(coupled_union_prob(p, r))] over couplings of mu with itself.
inline WorstCouplingReport worst_coupling_value(const DiscreteMeasure& mu) {
  if (mu.size() > kMaxCouplingAtoms) {
    throw std::invalid_argument("worst_coupling_value supports at most 200 atoms");
  }
  const auto atoms = mu.atoms();
  std::vector<double> weights(atoms.size());
  for (std::size_t i = 0; i < atoms.size(); ++i) weights[i] = atoms[i].weight;
  const auto cost = coupled_entropy_costs(mu);
  TransportPlan plan;
  try {
    plan = solve_transport(weights, weights, cost);
  } catch (const std::invalid_argument& e) {
    throw std::logic_error(std::string("coupling LP with valid marginals failed: ") + e.what());
  }
  CompensatedSum independent;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    for (std::size_t j = 0; j < atoms.size(); ++j) independent += weights[i] * weights[j] * cost[i * atoms.size() + j];
  }
  return WorstCouplingReport{plan.cost, independent.value(), JointMeasure{mu, mu, std::move(plan.flow)}, plan.pivots};
}

/// (1 - alpha) E[H(p+q-pq)] + alpha * worst coupling value - E[H(p)].
/// Positive values certify the mixed inequality for mu against every
/// coupling of p and r.
inline double improved_slack(const DiscreteMeasure& mu, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::domain_error("improved_slack needs alpha in [0,1]");
  const auto parts = objective(mu, 1.0);
  const double worst = alpha == 0.0 ? 0.0 : worst_coupling_value(mu).value;
  return (1.0 - alpha) * parts.quadratic + alpha * worst - parts.linear;
}

// ---------------------------------------------------------------------------
// Search for delta

struct DeltaSearchOptions {
  double delta_max = 0.002;          // caps reach (3 - sqrt 5)/2 + delta_max
  std::size_t delta_steps = 200;     // caps above the threshold; delta is a multiple of delta_max / delta_steps
  std::size_t below_steps = 100;     // caps evenly spaced in (0, (3 - sqrt 5)/2]
  std::size_t low_steps = 2000;      // lower atom grid on [0, cap)
  std::size_t high_steps = 20;       // upper atom grid on (cap, 1]
  std::size_t three_atom_steps = 200;  // middle atom grid for {0, v, 1} measures
  std::size_t three_weight_steps = 20; // weight grid on the atom at 1
  std::size_t search_caps = 5;       // local-search minimizers at evenly spaced caps
  LocalSearchOptions search{.atom_grid = 200, .restarts = 4};
  std::size_t jobs = 0;
};

struct DeltaSearchReport {
  double alpha = 0.0;
  double delta = 0.0;                   // largest grid value below every violation
  std::optional<double> violation_gap;  // smallest mean - (3 - sqrt 5)/2 among violating measures
  std::optional<DiscreteMeasure> binding_measure;
  double binding_slack = 0.0;
  std::optional<DiscreteMeasure> tightest_measure;  // smallest slack among measures with mean <= u* + delta
  double tightest_slack = 0.0;
  std::size_t measures_scanned = 0;
  std::size_t degenerate_skipped = 0;  // E[H(p)] = 0: both sides vanish
  bool failed = false;                 // delta == 0
  DeltaSearchOptions options;
};

inline constexpr double kDeltaSlackThreshold = 1e-12;

namespace detail {

struct DeltaCandidate {
  double gap = std::numeric_limits<double>::infinity();  // mean - (3 - sqrt 5)/2
  double slack = std::numeric_limits<double>::infinity();
  std::array<Atom, 3> atoms{};
  std::size_t count = 0;

  [[nodiscard]] bool empty() const { return count == 0; }
  [[nodiscard]] DiscreteMeasure measure() const { return DiscreteMeasure({atoms.begin(), atoms.begin() + count}); }
};

// Per-task results. Nonviolating measures are kept only as the smallest slack
// per delta bucket, where bucket b holds gaps in ((b-1) step, b step] and
// bucket 0 holds gaps <= 0.
struct DeltaTally {
  std::size_t scanned = 0;
  std::size_t degenerate = 0;
  DeltaCandidate binding;  // violator with the smallest gap
  std::vector<DeltaCandidate> buckets;

  void consider(std::span<const Atom> atoms, double alpha, double gap_max, double step) {
    if (atoms.size() > 3) return;
    const DiscreteMeasure mu({atoms.begin(), atoms.end()});
    const double gap = mean(mu) - kGoldenThreshold;
    if (gap > gap_max) return;
    ++scanned;
    const auto parts = objective(mu, 1.0);
    if (parts.linear <= 1e-12) {
      ++degenerate;
      return;
    }
    const double worst = alpha == 0.0 ? 0.0 : worst_coupling_value(mu).value;
    const double slack = (1.0 - alpha) * parts.quadratic + alpha * worst - parts.linear;
    DeltaCandidate c{gap, slack, {}, mu.size()};
    std::copy(mu.atoms().begin(), mu.atoms().end(), c.atoms.begin());
    if (slack <= kDeltaSlackThreshold) {
      if (gap < binding.gap) binding = c;
      return;
    }
    const std::size_t b = bucket(gap, step);
    if (b >= buckets.size()) buckets.resize(b + 1);
    if (slack < buckets[b].slack) buckets[b] = c;
  }

  static std::size_t bucket(double gap, double step) {
    return gap <= 0.0 ? 0 : static_cast<std::size_t>(std::ceil(gap / step));
  }
};

}  // namespace detail

/// For each mean cap m on the grid, scans the atom at m, two-atom measures
/// {v, x} with v < m < x and mean exactly m, and {0, v, 1} measures with
/// mean m; adds local-search minimizers of the alpha = 0 objective at a few
/// caps. A measure violates when its slack is <= 1e-12, and delta is the
/// largest multiple of delta_max / delta_steps strictly below every
/// violating mean minus (3 - sqrt 5)/2. The estimate is valid for the
/// scanned class only.
inline DeltaSearchReport delta_search(double alpha, const DeltaSearchOptions& options = {}) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::domain_error("delta_search needs alpha in [0,1]");
  if (options.delta_steps == 0 || options.below_steps == 0 || !(options.delta_max > 0.0)) {
    throw std::invalid_argument("delta_search needs positive delta_max, delta_steps and below_steps");
  }
  const double gap_max = options.delta_max;
  const double step = options.delta_max / static_cast<double>(options.delta_steps);
  std::vector<double> caps;
  for (std::size_t k = 1; k < options.below_steps; ++k) {
    caps.push_back(kGoldenThreshold * static_cast<double>(k) / static_cast<double>(options.below_steps));
  }
  for (std::size_t k = 0; k <= options.delta_steps; ++k) caps.push_back(kGoldenThreshold + static_cast<double>(k) * step);

  const auto frac = [](std::size_t k, std::size_t steps) {
    return static_cast<double>(k) / static_cast<double>(steps);
  };
  const std::size_t tasks = caps.size() + options.search_caps;
  std::vector<detail::DeltaTally> tallies(tasks);
  parallel_for(tasks, options.jobs, [&](std::size_t task) {
    auto& tally = tallies[task];
    const auto consider = [&](std::initializer_list<Atom> atoms) {
      tally.consider(std::span<const Atom>(atoms.begin(), atoms.size()), alpha, gap_max, step);
    };
    if (task < caps.size()) {
      const double m = caps[task];
      consider({{m, 1.0}});
      for (std::size_t j = 1; j <= options.high_steps; ++j) {
        const double x = m + (1.0 - m) * frac(j, options.high_steps);
        for (std::size_t k = 0; k < options.low_steps; ++k) {
          const double v = m * frac(k, options.low_steps);
          const double w = (x - m) / (x - v);
          consider({{v, w}, {x, 1.0 - w}});
        }
      }
      // {0, v, 1}: weight c at 1 and b at v with b v + c = m.
      for (std::size_t j = 1; j < options.three_weight_steps; ++j) {
        const double c = m * frac(j, options.three_weight_steps);
        for (std::size_t k = 1; k < options.three_atom_steps; ++k) {
          const double v = frac(k, options.three_atom_steps);
          const double b = (m - c) / v;
          if (b + c >= 1.0) continue;
          consider({{0.0, 1.0 - b - c}, {v, b}, {1.0, c}});
        }
      }
    } else {
      const std::size_t k = task - caps.size();
      const double cap = kGoldenThreshold + gap_max * frac(k, std::max<std::size_t>(options.search_caps - 1, 1));
      auto search_options = options.search;
      search_options.seed = options.search.seed + k * options.search.restarts;
      const auto found = local_search_min(cap, 1.0, search_options);
      tally.consider(found.best.atoms(), alpha, gap_max, step);
    }
  });

  DeltaSearchReport r;
  r.alpha = alpha;
  r.options = options;
  detail::DeltaCandidate binding;
  for (const auto& t : tallies) {
    r.measures_scanned += t.scanned;
    r.degenerate_skipped += t.degenerate;
    if (t.binding.gap < binding.gap) binding = t.binding;
  }
  std::size_t allowed = options.delta_steps;  // buckets that may count toward delta
  if (!binding.empty()) {
    r.violation_gap = binding.gap;
    r.binding_measure = binding.measure();
    r.binding_slack = binding.slack;
    const std::size_t b = detail::DeltaTally::bucket(binding.gap, step);
    allowed = b == 0 ? 0 : b - 1;
    r.delta = binding.gap <= 0.0 ? 0.0 : static_cast<double>(allowed) * step;
  } else {
    r.delta = options.delta_max;
  }
  detail::DeltaCandidate tightest;
  for (const auto& t : tallies) {
    for (std::size_t b = 0; b < t.buckets.size() && b <= allowed; ++b) {
      if (!t.buckets[b].empty() && t.buckets[b].slack < tightest.slack) tightest = t.buckets[b];
    }
  }
  if (!tightest.empty()) {
    r.tightest_measure = tightest.measure();
    r.tightest_slack = tightest.slack;
  }
  r.failed = r.delta <= 0.0;
  return r;
}

// ---------------------------------------------------------------------------
// Greedy coupling on an explicit family

enum class RateConvention {
  OwnPrefix,    // A's rate conditions on A's prefix, C's on C's prefix
  SwappedPrefix // A's rate conditions on C's prefix and vice versa
};

inline const char* to_string(RateConvention c) {
  return c == RateConvention::OwnPrefix ? "own-prefix" : "swapped-prefix";
}

struct CoupledPair {
  SubsetMask a;
  SubsetMask c;
  double probability = 0.0;
};

struct CouplingDpReport {
  RateConvention convention = RateConvention::OwnPrefix;
  std::vector<CoupledPair> joint;  // sorted by (a, c)
  double entropy = 0.0;             // ln |F|
  double coupled_union_entropy = 0.0;      // H(A u C)
  double independent_union_entropy = 0.0;  // H(A u B), B an independent copy
  double marginal_error_a = 0.0;    // max |Pr[A = S] - 1/|F|| over all S (0 off F)
  double marginal_error_c = 0.0;
  bool marginals_uniform = false;   // both errors <= 1e-12
  std::size_t undefined_rates = 0;  // prefixes matching no member (swapped convention only)
};

inline constexpr int kMaxCouplingDpN = 10;
inline constexpr std::size_t kMaxCouplingDpFamily = 64;

/// Exact law of (A, C) under the greedy coupling, step by step over the
/// elements 1..n. At each step the two inclusion rates are the proportions
/// of members extending the relevant prefix that contain the element; a
/// common uniform x couples them comonotonically when either rate is at
/// least 1/2, and otherwise places [x < p] and [1/2 - r < x <= 1/2] side by
/// side.
inline CouplingDpReport greedy_coupling_dp(const Family& f,
                                           RateConvention convention = RateConvention::OwnPrefix) {
  if (f.n() > kMaxCouplingDpN || f.size() > kMaxCouplingDpFamily) {
    throw std::invalid_argument("greedy_coupling_dp supports n <= 10 and |F| <= 64");
  }
  if (!is_union_closed(f)) throw std::invalid_argument("family is not union-closed");
  CouplingDpReport r;
  r.convention = convention;
  std::map<std::pair<std::uint32_t, std::uint32_t>, double> state{{{0u, 0u}, 1.0}};
  for (int k = 0; k < f.n(); ++k) {
    const std::uint32_t low = (1u << k) - 1u;
    const std::uint32_t bit = 1u << k;
    std::vector<std::size_t> matching(std::size_t{1} << k, 0), containing(std::size_t{1} << k, 0);
    for (auto s : f.sets()) {
      ++matching[s.bits & low];
      if (s.bits & bit) ++containing[s.bits & low];
    }
    const auto rate = [&](std::uint32_t prefix) {
      if (matching[prefix] == 0) {
        ++r.undefined_rates;
        return 0.0;
      }
      return static_cast<double>(containing[prefix]) / static_cast<double>(matching[prefix]);
    };
    std::map<std::pair<std::uint32_t, std::uint32_t>, double> next;
    for (const auto& [key, mass] : state) {
      const auto [a, c] = key;
      const bool own = convention == RateConvention::OwnPrefix;
      const double pa = rate(own ? a : c);
      const double pc = rate(own ? c : a);
      double both = 0.0;
      if (pa >= 0.5 || pc >= 0.5) {
        both = std::min(pa, pc);
      } else {
        both = std::max(0.0, pa + pc - 0.5);
      }
      const double only_a = pa - both;
      const double only_c = pc - both;
      // Written so that pa = 1 or pc = 1 leaves exactly zero mass here.
      const double neither = std::max(0.0, (1.0 - pa) - only_c);
      if (both > 0.0) next[{a | bit, c | bit}] += mass * both;
      if (only_a > 0.0) next[{a | bit, c}] += mass * only_a;
      if (only_c > 0.0) next[{a, c | bit}] += mass * only_c;
      if (neither > 0.0) next[{a, c}] += mass * neither;
    }
    state = std::move(next);
  }

  const std::size_t universe = std::size_t{1} << f.n();
  std::vector<double> law_a(universe, 0.0), law_c(universe, 0.0), law_union(universe, 0.0);
  for (const auto& [key, mass] : state) {
    r.joint.push_back({SubsetMask{key.first}, SubsetMask{key.second}, mass});
    law_a[key.first] += mass;
    law_c[key.second] += mass;
    law_union[key.first | key.second] += mass;
  }
  const double target = 1.0 / static_cast<double>(f.size());
  for (std::uint32_t s = 0; s < universe; ++s) {
    const double expected = f.contains(SubsetMask{s}) ? target : 0.0;
    r.marginal_error_a = std::max(r.marginal_error_a, std::abs(law_a[s] - expected));
    r.marginal_error_c = std::max(r.marginal_error_c, std::abs(law_c[s] - expected));
  }
  r.marginals_uniform = r.marginal_error_a <= 1e-12 && r.marginal_error_c <= 1e-12;

  const auto uniform = ExplicitSetDistribution::uniform(f.n(), f.sets());
  r.entropy = entropy_explicit(uniform);
  detail::renormalize(law_union);
  r.coupled_union_entropy = entropy_explicit(ExplicitSetDistribution(f.n(), std::move(law_union)));
  r.independent_union_entropy = entropy_explicit(union_of_independent(uniform, uniform));
  return r;
}

}  // namespace uclab
