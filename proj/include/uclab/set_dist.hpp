#pragma once

// Probability distributions over subsets of the ground set [n] = {1, ..., n}.
//
// Element i is stored as bit i-1 of a SubsetMask. Element indices in the
// public API are 1-based; A_{<i} is the mask restricted to its low i-1 bits.

#include <algorithm>
#include <bit>
#include <cmath>
#include <compare>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "uclab/numeric.hpp"
#include "uclab/scalar.hpp"

namespace uclab {

inline constexpr int kMaxExplicitN = 24;

/// Probabilities below this are exact zeros in entropy and divergence sums.
inline constexpr double kProbabilityFloor = 1e-300;

struct SubsetMask {
  std::uint32_t bits = 0;

  [[nodiscard]] constexpr bool contains(int element) const noexcept {
    return ((bits >> (element - 1)) & 1u) != 0;
  }
  /// Intersection with [i-1].
  [[nodiscard]] constexpr SubsetMask prefix_before(int element) const noexcept {
    return SubsetMask{bits & ((1u << (element - 1)) - 1u)};
  }
  [[nodiscard]] constexpr int size() const noexcept { return std::popcount(bits); }

  friend constexpr SubsetMask operator|(SubsetMask a, SubsetMask b) noexcept {
    return SubsetMask{a.bits | b.bits};
  }
  friend constexpr auto operator<=>(SubsetMask, SubsetMask) = default;
};

inline constexpr SubsetMask full_mask(int n) noexcept {
  return SubsetMask{n >= 32 ? ~0u : ((1u << n) - 1u)};
}

namespace detail {

inline void require_explicit_size(int n) {
  if (n < 0 || n > kMaxExplicitN) {
    throw std::invalid_argument("explicit set distributions need 0 <= n <= " +
                                std::to_string(kMaxExplicitN) + ", got n=" + std::to_string(n));
  }
}

inline void require_element(int n, int element) {
  if (element < 1 || element > n) {
    throw std::out_of_range("element index " + std::to_string(element) + " outside [1," +
                            std::to_string(n) + "]");
  }
}

}  // namespace detail

/// Full probability table over the 2^n subsets of [n].
class ExplicitSetDistribution {
public:
  static constexpr double kNormalizationTolerance = 1e-12;

  ExplicitSetDistribution(int n, std::vector<double> probs) : n_(n), probs_(std::move(probs)) {
    detail::require_explicit_size(n);
    if (probs_.size() != (std::size_t{1} << n)) {
      throw std::invalid_argument("probability table must have 2^n entries");
    }
    CompensatedSum total;
    for (double p : probs_) {
      if (!std::isfinite(p) || p < 0.0) {
        throw std::invalid_argument("probabilities must be finite and nonnegative");
      }
      total += p;
    }
    if (std::abs(total.value() - 1.0) > kNormalizationTolerance) {
      throw std::invalid_argument("probabilities sum to " + std::to_string(total.value()) +
                                  ", expected 1");
    }
  }

  /// Builds a table from (mask, probability) pairs; repeated masks accumulate.
  static ExplicitSetDistribution from_entries(
      int n, std::span<const std::pair<SubsetMask, double>> entries) {
    detail::require_explicit_size(n);
    std::vector<double> probs(std::size_t{1} << n, 0.0);
    for (const auto& [mask, p] : entries) {
      if (mask.bits >= probs.size()) throw std::invalid_argument("mask outside 2^n");
      probs[mask.bits] += p;
    }
    return {n, std::move(probs)};
  }

  static ExplicitSetDistribution point_mass(int n, SubsetMask mask) {
    const std::pair<SubsetMask, double> entry{mask, 1.0};
    return from_entries(n, std::span(&entry, 1));
  }

  /// Uniform law on the given (distinct) masks.
  static ExplicitSetDistribution uniform(int n, std::span<const SubsetMask> support) {
    if (support.empty()) throw std::invalid_argument("uniform law needs a nonempty support");
    std::vector<std::pair<SubsetMask, double>> entries;
    entries.reserve(support.size());
    const double p = 1.0 / static_cast<double>(support.size());
    for (auto m : support) entries.emplace_back(m, p);
    return from_entries(n, entries);
  }

  [[nodiscard]] int n() const noexcept { return n_; }
  [[nodiscard]] std::size_t size() const noexcept { return probs_.size(); }
  [[nodiscard]] std::span<const double> probs() const noexcept { return probs_; }
  [[nodiscard]] double operator[](SubsetMask m) const { return probs_.at(m.bits); }

  friend bool operator==(const ExplicitSetDistribution&, const ExplicitSetDistribution&) = default;

private:
  int n_;
  std::vector<double> probs_;
};

/// Per-coordinate expected conditional entropies H(A_{<i+1} | A_{<i}),
/// listed in processing order.
struct ChainProfile {
  std::vector<double> entries;

  [[nodiscard]] double total() const { return compensated_total(entries); }
};

struct MixtureComponent {
  double weight = 0.0;
  double inclusion = 0.0;
};

/// Weighted mixture of product distributions: component k puts every element
/// in the set independently with probability `inclusion`.
struct ProductMixture {
  int n = 0;
  std::vector<MixtureComponent> components;

  void validate() const {
    if (n < 0) throw std::invalid_argument("mixture ground-set size must be nonnegative");
    if (components.empty()) throw std::invalid_argument("mixture needs at least one component");
    CompensatedSum total;
    for (const auto& c : components) {
      if (!std::isfinite(c.weight) || c.weight < 0.0) {
        throw std::invalid_argument("mixture weights must be nonnegative");
      }
      detail::require_probability(c.inclusion, "mixture inclusion");
      total += c.weight;
    }
    if (std::abs(total.value() - 1.0) > ExplicitSetDistribution::kNormalizationTolerance) {
      throw std::invalid_argument("mixture weights must sum to 1");
    }
  }
};

// ---------------------------------------------------------------------------
// Basic functionals

inline double entropy_explicit(const ExplicitSetDistribution& d) {
  CompensatedSum acc;
  for (double p : d.probs()) {
    if (p > kProbabilityFloor) acc += -p * std::log(p);
  }
  return std::max(0.0, acc.value());
}

/// Pr[i in A], 1-based element index.
inline double marginal(const ExplicitSetDistribution& d, int element) {
  detail::require_element(d.n(), element);
  const std::uint32_t bit = 1u << (element - 1);
  CompensatedSum acc;
  const auto probs = d.probs();
  for (std::uint32_t m = 0; m < probs.size(); ++m) {
    if (m & bit) acc += probs[m];
  }
  return std::clamp(acc.value(), 0.0, 1.0);
}

inline std::vector<double> marginals(const ExplicitSetDistribution& d) {
  std::vector<double> out(static_cast<std::size_t>(d.n()));
  for (int i = 1; i <= d.n(); ++i) out[static_cast<std::size_t>(i - 1)] = marginal(d, i);
  return out;
}

namespace detail {

inline std::vector<std::pair<std::uint32_t, double>> support_of(const ExplicitSetDistribution& d) {
  std::vector<std::pair<std::uint32_t, double>> out;
  const auto probs = d.probs();
  for (std::uint32_t m = 0; m < probs.size(); ++m) {
    if (probs[m] > 0.0) out.emplace_back(m, probs[m]);
  }
  return out;
}

/// Renormalizes a nonnegative table whose mass equals 1 up to rounding.
inline void renormalize(std::vector<double>& probs) {
  const double total = compensated_total(probs);
  for (auto& p : probs) p /= total;
}

}  // namespace detail

/// Law of A u B for independent A ~ d1, B ~ d2.
///
/// Sparse inputs are convolved pairwise, which is exact and never produces
/// negative entries. Dense large tables go through the subset-sum (zeta)
/// transform and its Moebius inverse, clamping rounding residue at zero.
inline ExplicitSetDistribution union_of_independent(const ExplicitSetDistribution& d1,
                                                    const ExplicitSetDistribution& d2) {
  if (d1.n() != d2.n()) throw std::invalid_argument("union_of_independent: size mismatch");
  const auto s1 = detail::support_of(d1);
  const auto s2 = detail::support_of(d2);
  std::vector<double> out(d1.size(), 0.0);
  constexpr double kPairBudget = double(1 << 28);
  if (double(s1.size()) * double(s2.size()) <= kPairBudget) {
    for (const auto& [m1, p1] : s1) {
      for (const auto& [m2, p2] : s2) out[m1 | m2] += p1 * p2;
    }
  } else {
    std::vector<double> f(d1.probs().begin(), d1.probs().end());
    std::vector<double> g(d2.probs().begin(), d2.probs().end());
    for (int b = 0; b < d1.n(); ++b) {
      const std::uint32_t bit = 1u << b;
      for (std::uint32_t m = 0; m < f.size(); ++m) {
        if (m & bit) {
          f[m] += f[m ^ bit];
          g[m] += g[m ^ bit];
        }
      }
    }
    for (std::size_t m = 0; m < f.size(); ++m) out[m] = f[m] * g[m];
    for (int b = 0; b < d1.n(); ++b) {
      const std::uint32_t bit = 1u << b;
      for (std::uint32_t m = 0; m < out.size(); ++m) {
        if (m & bit) out[m] -= out[m ^ bit];
      }
    }
    for (auto& p : out) p = std::max(p, 0.0);
  }
  detail::renormalize(out);
  return {d1.n(), std::move(out)};
}

/// D(P || Q) = sum P ln(P/Q); +infinity when P is not absolutely continuous
/// with respect to Q.
inline double kl_divergence(const ExplicitSetDistribution& p, const ExplicitSetDistribution& q) {
  if (p.n() != q.n()) throw std::invalid_argument("kl_divergence: size mismatch");
  const auto pp = p.probs();
  const auto qq = q.probs();
  CompensatedSum acc;
  for (std::size_t m = 0; m < pp.size(); ++m) {
    if (pp[m] <= kProbabilityFloor) continue;
    if (qq[m] <= kProbabilityFloor) return std::numeric_limits<double>::infinity();
    acc += pp[m] * (std::log(pp[m]) - std::log(qq[m]));
  }
  return std::max(0.0, acc.value());
}

// ---------------------------------------------------------------------------
// Chain rule

namespace detail {

/// levels[k][T] = Pr[A n [k] = T] for k = 0..n.
inline std::vector<std::vector<double>> prefix_marginals(const ExplicitSetDistribution& d) {
  const int n = d.n();
  std::vector<std::vector<double>> levels(static_cast<std::size_t>(n) + 1);
  levels[static_cast<std::size_t>(n)].assign(d.probs().begin(), d.probs().end());
  for (int k = n - 1; k >= 0; --k) {
    const auto& above = levels[static_cast<std::size_t>(k) + 1];
    auto& level = levels[static_cast<std::size_t>(k)];
    level.assign(std::size_t{1} << k, 0.0);
    const std::uint32_t bit = 1u << k;
    for (std::uint32_t t = 0; t < level.size(); ++t) level[t] = above[t] + above[t | bit];
  }
  return levels;
}

inline ExplicitSetDistribution permuted(const ExplicitSetDistribution& d,
                                        std::span<const int> order) {
  const int n = d.n();
  if (order.size() != static_cast<std::size_t>(n)) {
    throw std::invalid_argument("element order must list every element once");
  }
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  for (int e : order) {
    require_element(n, e);
    if (seen[static_cast<std::size_t>(e - 1)]) throw std::invalid_argument("element order repeats an element");
    seen[static_cast<std::size_t>(e - 1)] = true;
  }
  std::vector<double> out(d.size(), 0.0);
  const auto probs = d.probs();
  for (std::uint32_t m = 0; m < probs.size(); ++m) {
    std::uint32_t mapped = 0;
    for (int j = 0; j < n; ++j) {
      if ((m >> (order[static_cast<std::size_t>(j)] - 1)) & 1u) mapped |= 1u << j;
    }
    out[mapped] = probs[m];
  }
  return {n, std::move(out)};
}

}  // namespace detail

/// Pr[i in A | A_{<i} = prefix].
inline double conditional_prob(const ExplicitSetDistribution& d, int element, SubsetMask prefix) {
  detail::require_element(d.n(), element);
  const std::uint32_t low = (1u << (element - 1)) - 1u;
  if ((prefix.bits & ~low) != 0) {
    throw std::invalid_argument("prefix must be a subset of [i-1]");
  }
  const std::uint32_t bit = 1u << (element - 1);
  CompensatedSum matching;
  CompensatedSum with_element;
  const auto probs = d.probs();
  for (std::uint32_t m = 0; m < probs.size(); ++m) {
    if ((m & low) != prefix.bits) continue;
    matching += probs[m];
    if (m & bit) with_element += probs[m];
  }
  if (matching.value() <= kProbabilityFloor) {
    throw std::domain_error("conditioning prefix has zero probability");
  }
  return std::clamp(with_element.value() / matching.value(), 0.0, 1.0);
}

/// Chain-rule decomposition of H(A). `order` lists the elements in the order
/// they are revealed (1-based); empty means the natural order 1..n.
inline ChainProfile chain_profile(const ExplicitSetDistribution& d, std::span<const int> order = {}) {
  if (!order.empty()) return chain_profile(detail::permuted(d, order));
  const auto levels = detail::prefix_marginals(d);
  ChainProfile profile;
  profile.entries.reserve(static_cast<std::size_t>(d.n()));
  for (int k = 0; k < d.n(); ++k) {
    const auto& before = levels[static_cast<std::size_t>(k)];
    const auto& after = levels[static_cast<std::size_t>(k) + 1];
    const std::uint32_t bit = 1u << k;
    CompensatedSum acc;
    for (std::uint32_t t = 0; t < before.size(); ++t) {
      const double mass = before[t];
      if (mass <= kProbabilityFloor) continue;
      acc += mass * binary_entropy(std::clamp(after[t | bit] / mass, 0.0, 1.0));
    }
    profile.entries.push_back(std::max(0.0, acc.value()));
  }
  return profile;
}

/// H((A u B)_{<i+1} | A_{<i}, B_{<i}) = E[H(p_i + q_i - p_i q_i)] for
/// independent A, B ~ d, where p_i, q_i are the conditional inclusion
/// probabilities of element i given each sample's own prefix.
inline double union_step_given_prefixes(const ExplicitSetDistribution& d, int element) {
  detail::require_element(d.n(), element);
  const auto levels = detail::prefix_marginals(d);
  const auto k = static_cast<std::size_t>(element - 1);
  const auto& before = levels[k];
  const auto& after = levels[k + 1];
  const std::uint32_t bit = 1u << k;
  std::vector<std::pair<double, double>> prefixes;  // (mass, conditional probability)
  for (std::uint32_t t = 0; t < before.size(); ++t) {
    if (before[t] > kProbabilityFloor) {
      prefixes.emplace_back(before[t], std::clamp(after[t | bit] / before[t], 0.0, 1.0));
    }
  }
  CompensatedSum acc;
  for (const auto& [ma, pa] : prefixes) {
    for (const auto& [mb, pb] : prefixes) acc += ma * mb * union_entropy(pa, pb);
  }
  return std::max(0.0, acc.value());
}

// ---------------------------------------------------------------------------
// Product mixtures

struct EntropyBounds {
  double lower = 0.0;
  double upper = 0.0;
};

inline double mixing_entropy(const ProductMixture& m) {
  CompensatedSum acc;
  for (const auto& c : m.components) {
    if (c.weight > kProbabilityFloor) acc += -c.weight * std::log(c.weight);
  }
  return std::max(0.0, acc.value());
}

/// H(A | component) <= H(A) <= H(A | component) + H(component).
inline EntropyBounds mixture_entropy_bounds(const ProductMixture& m) {
  m.validate();
  CompensatedSum conditional;
  for (const auto& c : m.components) {
    conditional += c.weight * static_cast<double>(m.n) * binary_entropy(c.inclusion);
  }
  const double lower = conditional.value();
  return {lower, lower + mixing_entropy(m)};
}

inline double mixture_marginal(const ProductMixture& m) {
  CompensatedSum acc;
  for (const auto& c : m.components) acc += c.weight * c.inclusion;
  return acc.value();
}

/// Expands a mixture into its full table (n <= 24).
inline ExplicitSetDistribution expand(const ProductMixture& m) {
  m.validate();
  detail::require_explicit_size(m.n);
  const int n = m.n;
  // Pr[S] depends only on |S|.
  std::vector<double> by_size(static_cast<std::size_t>(n) + 1, 0.0);
  for (int k = 0; k <= n; ++k) {
    CompensatedSum acc;
    for (const auto& c : m.components) {
      acc += c.weight * std::pow(c.inclusion, k) * std::pow(1.0 - c.inclusion, n - k);
    }
    by_size[static_cast<std::size_t>(k)] = std::max(0.0, acc.value());
  }
  std::vector<double> probs(std::size_t{1} << n);
  for (std::uint32_t s = 0; s < probs.size(); ++s) {
    probs[s] = by_size[static_cast<std::size_t>(std::popcount(s))];
  }
  detail::renormalize(probs);
  return {n, std::move(probs)};
}

/// Product Bernoulli(u) law on subsets of [n].
inline ExplicitSetDistribution example1_distribution(double u, int n) {
  detail::require_probability(u, "example1_distribution");
  if (n > kMaxExplicitN) {
    throw std::invalid_argument("example1_distribution: n too large for an explicit table");
  }
  return expand(ProductMixture{n, {{1.0, u}}});
}

/// With probability w = (1-u) * 2/(sqrt 5 - 1) each element is included
/// independently with probability (3 - sqrt 5)/2; otherwise A = [n].
/// Requires u >= (3 - sqrt 5)/2 so that w is a probability.
inline ProductMixture example2_distribution(double u, int n) {
  detail::require_probability(u, "example2_distribution");
  if (u < kGoldenThreshold - 1e-15) {
    throw std::domain_error("example2_distribution needs u >= (3 - sqrt 5)/2");
  }
  const double w = std::clamp((1.0 - u) * kGoldenRatio, 0.0, 1.0);
  ProductMixture m{n, {{w, kGoldenThreshold}, {1.0 - w, 1.0}}};
  m.validate();
  return m;
}

// ---------------------------------------------------------------------------
// Union-entropy inequality

struct Theorem2Report {
  double u = 0.0;       // largest marginal
  double lambda = 0.0;  // lambda(u)
  double lhs = 0.0;     // H(A u B)
  double rhs = 0.0;     // lambda(u) H(A)
  double slack = 0.0;   // lhs - rhs
  bool tight = false;   // |slack| <= 1e-10 (1 + lhs)
};

/// Checks H(A u B) >= lambda(u) H(A) where u = max_i Pr[i in A].
inline Theorem2Report verify_theorem2(const ExplicitSetDistribution& d) {
  if (d.n() == 0) throw std::domain_error("verify_theorem2: empty ground set");
  const auto m = marginals(d);
  const double u = *std::max_element(m.begin(), m.end());
  if (u <= 0.0 || u >= 1.0) {
    throw std::domain_error("verify_theorem2: largest marginal must lie in (0,1)");
  }
  Theorem2Report r;
  r.u = u;
  r.lambda = lambda(u);
  r.lhs = entropy_explicit(union_of_independent(d, d));
  r.rhs = r.lambda * entropy_explicit(d);
  r.slack = r.lhs - r.rhs;
  r.tight = std::abs(r.slack) <= 1e-10 * (1.0 + r.lhs);
  return r;
}

// ---------------------------------------------------------------------------
// Text serialization
//
//   n=<int>
//   <mask in hex> <probability>      (explicit tables; zero entries omitted)
//   <weight> <inclusion>             (product mixtures)
//
// Blank lines and lines starting with '#' are ignored.

namespace detail {

inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline bool skippable(const std::string& line) {
  const auto pos = line.find_first_not_of(" \t\r");
  return pos == std::string::npos || line[pos] == '#';
}

inline int read_size_header(std::istream& in) {
  std::string line;
  while (std::getline(in, line)) {
    if (skippable(line)) continue;
    const auto pos = line.find_first_not_of(" \t");
    if (line.compare(pos, 2, "n=") != 0) {
      throw std::invalid_argument("expected header line 'n=<int>', got '" + line + "'");
    }
    try {
      return std::stoi(line.substr(pos + 2));
    } catch (const std::exception&) {
      throw std::invalid_argument("malformed size header '" + line + "'");
    }
  }
  throw std::invalid_argument("missing header line 'n=<int>'");
}

}  // namespace detail

inline void write_distribution(std::ostream& out, const ExplicitSetDistribution& d) {
  out << "n=" << d.n() << '\n';
  const auto probs = d.probs();
  for (std::uint32_t m = 0; m < probs.size(); ++m) {
    if (probs[m] == 0.0) continue;
    std::ostringstream hex;
    hex << std::hex << m;
    out << hex.str() << ' ' << detail::format_double(probs[m]) << '\n';
  }
}

inline ExplicitSetDistribution read_distribution(std::istream& in) {
  const int n = detail::read_size_header(in);
  detail::require_explicit_size(n);
  std::vector<std::pair<SubsetMask, double>> entries;
  std::string line;
  while (std::getline(in, line)) {
    if (detail::skippable(line)) continue;
    std::istringstream fields(line);
    std::uint32_t mask = 0;
    double p = 0.0;
    if (!(fields >> std::hex >> mask >> std::dec >> p)) {
      throw std::invalid_argument("malformed distribution line '" + line + "'");
    }
    if (mask >= (std::uint32_t{1} << n)) {
      throw std::invalid_argument("mask " + line + " outside [n]");
    }
    entries.emplace_back(SubsetMask{mask}, p);
  }
  return ExplicitSetDistribution::from_entries(n, entries);
}

inline void write_mixture(std::ostream& out, const ProductMixture& m) {
  out << "n=" << m.n << '\n';
  for (const auto& c : m.components) {
    out << detail::format_double(c.weight) << ' ' << detail::format_double(c.inclusion) << '\n';
  }
}

inline ProductMixture read_mixture(std::istream& in) {
  ProductMixture m;
  m.n = detail::read_size_header(in);
  std::string line;
  while (std::getline(in, line)) {
    if (detail::skippable(line)) continue;
    std::istringstream fields(line);
    MixtureComponent c;
    if (!(fields >> c.weight >> c.inclusion)) {
      throw std::invalid_argument("malformed mixture line '" + line + "'");
    }
    m.components.push_back(c);
  }
  m.validate();
  return m;
}

}  // namespace uclab
