#pragma once

// Families of subsets of [n]: union-closedness, closure, element frequencies,
// exhaustive enumeration on tiny ground sets and the entropy diagnostics for
// the uniform law on a family.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "uclab/scalar.hpp"
#include "uclab/set_dist.hpp"

namespace uclab {

/// Nonempty set of distinct subsets of [n], kept sorted by mask value.
class Family {
public:
  Family(int n, std::vector<SubsetMask> sets) : n_(n), sets_(std::move(sets)) {
    detail::require_explicit_size(n);
    std::sort(sets_.begin(), sets_.end());
    sets_.erase(std::unique(sets_.begin(), sets_.end()), sets_.end());
    if (sets_.empty()) throw std::invalid_argument("a family must contain at least one set");
    if (sets_.back().bits > full_mask(n).bits) {
      throw std::invalid_argument("family member outside the ground set");
    }
  }

  /// Decodes the characteristic vector of a family: bit S of `code` is set
  /// iff S is a member. Only meaningful for 2^n <= 64.
  static Family from_code(int n, std::uint64_t code) {
    std::vector<SubsetMask> sets;
    for (std::uint32_t s = 0; s < (1u << n); ++s) {
      if ((code >> s) & 1u) sets.push_back(SubsetMask{s});
    }
    return {n, std::move(sets)};
  }

  static Family powerset(int n) {
    std::vector<SubsetMask> sets;
    for (std::uint32_t s = 0; s <= full_mask(n).bits; ++s) sets.push_back(SubsetMask{s});
    return {n, std::move(sets)};
  }

  [[nodiscard]] int n() const noexcept { return n_; }
  [[nodiscard]] std::size_t size() const noexcept { return sets_.size(); }
  [[nodiscard]] std::span<const SubsetMask> sets() const noexcept { return sets_; }
  [[nodiscard]] bool contains(SubsetMask s) const {
    return std::binary_search(sets_.begin(), sets_.end(), s);
  }
  /// Characteristic-vector code; requires 2^n <= 64.
  [[nodiscard]] std::uint64_t code() const {
    if (n_ > 6) throw std::invalid_argument("family code needs n <= 6");
    std::uint64_t c = 0;
    for (auto s : sets_) c |= std::uint64_t{1} << s.bits;
    return c;
  }

  friend bool operator==(const Family&, const Family&) = default;

private:
  int n_;
  std::vector<SubsetMask> sets_;
};

inline bool is_union_closed(const Family& f) {
  std::vector<bool> member(std::size_t{1} << f.n(), false);
  for (auto s : f.sets()) member[s.bits] = true;
  const auto sets = f.sets();
  for (std::size_t a = 0; a < sets.size(); ++a) {
    for (std::size_t b = a + 1; b < sets.size(); ++b) {
      if (!member[(sets[a] | sets[b]).bits]) return false;
    }
  }
  return true;
}

/// Smallest union-closed family containing g.
inline Family union_closure(const Family& g) {
  std::vector<bool> member(std::size_t{1} << g.n(), false);
  std::vector<SubsetMask> members(g.sets().begin(), g.sets().end());
  for (auto s : members) member[s.bits] = true;
  // Every pair (a, b) with a < b is joined exactly once: when b is visited.
  for (std::size_t b = 0; b < members.size(); ++b) {
    for (std::size_t a = 0; a < b; ++a) {
      const SubsetMask u = members[a] | members[b];
      if (!member[u.bits]) {
        member[u.bits] = true;
        members.push_back(u);
      }
    }
  }
  return {g.n(), std::move(members)};
}

struct FrequencyReport {
  std::vector<std::size_t> counts;  // counts[i-1] = #{S in F : i in S}
  int best_element = 0;             // 1-based, smallest index among ties; 0 if n = 0
  double best_proportion = 0.0;
  bool degenerate = false;          // no element occurs in any member
};

inline FrequencyReport max_element_frequency(const Family& f) {
  FrequencyReport r;
  r.counts.assign(static_cast<std::size_t>(f.n()), 0);
  for (auto s : f.sets()) {
    for (int i = 1; i <= f.n(); ++i) {
      if (s.contains(i)) ++r.counts[static_cast<std::size_t>(i - 1)];
    }
  }
  std::size_t best = 0;
  for (int i = 1; i <= f.n(); ++i) {
    const auto c = r.counts[static_cast<std::size_t>(i - 1)];
    if (r.best_element == 0 || c > best) {
      best = c;
      r.best_element = i;
    }
  }
  r.best_proportion = static_cast<double>(best) / static_cast<double>(f.size());
  r.degenerate = best == 0;
  return r;
}

// ---------------------------------------------------------------------------
// Exhaustive enumeration

inline constexpr int kMaxEnumerationN = 4;

namespace detail {

inline bool code_is_union_closed(std::uint64_t code, int n) {
  const std::uint32_t universe = 1u << n;
  for (std::uint32_t s = 0; s < universe; ++s) {
    if (!((code >> s) & 1u)) continue;
    for (std::uint32_t t = s + 1; t < universe; ++t) {
      if (((code >> t) & 1u) && !((code >> (s | t)) & 1u)) return false;
    }
  }
  return true;
}

}  // namespace detail

/// Number of characteristic-vector codes on [n]: 2^(2^n).
inline std::uint64_t family_code_limit(int n) {
  if (n < 0 || n > kMaxEnumerationN) {
    throw std::invalid_argument("exhaustive enumeration supports 0 <= n <= 4");
  }
  return std::uint64_t{1} << (1u << n);
}

/// Calls visit(family) for every nonempty union-closed family on [n], in
/// increasing order of the characteristic-vector code. [first, last) limits
/// the scanned codes, which lets callers shard the work; the defaults scan
/// everything. Returns the number of families visited.
inline std::uint64_t enumerate_union_closed(int n, const std::function<void(const Family&)>& visit,
                                            std::uint64_t first = 1,
                                            std::optional<std::uint64_t> last = std::nullopt) {
  const std::uint64_t limit = family_code_limit(n);
  const std::uint64_t end = std::min(last.value_or(limit), limit);
  std::uint64_t count = 0;
  for (std::uint64_t code = std::max<std::uint64_t>(first, 1); code < end; ++code) {
    if (!detail::code_is_union_closed(code, n)) continue;
    ++count;
    if (visit) visit(Family::from_code(n, code));
  }
  return count;
}

struct Theorem1Report {
  int n = 0;
  std::uint64_t union_closed_families = 0;  // all nonempty union-closed families
  std::uint64_t families_checked = 0;       // excluding {emptyset}
  bool empty_family_excluded = false;
  double min_best_proportion = 1.0;
  std::optional<Family> witness;
  int witness_element = 0;
  bool holds = true;  // min_best_proportion >= (3 - sqrt 5)/2
};

/// Minimum over nonempty union-closed families on [n] (other than {emptyset})
/// of the largest element frequency. The witness is the largest minimizing
/// family, earliest in enumeration order among equals.
inline Theorem1Report verify_theorem1(int n) {
  Theorem1Report r;
  r.n = n;
  r.union_closed_families = enumerate_union_closed(n, [&](const Family& f) {
    if (f.size() == 1 && f.sets()[0].bits == 0) {
      r.empty_family_excluded = true;
      return;
    }
    ++r.families_checked;
    const auto freq = max_element_frequency(f);
    const bool better = !r.witness || freq.best_proportion < r.min_best_proportion ||
                        (freq.best_proportion == r.min_best_proportion && f.size() > r.witness->size());
    if (better) {
      r.min_best_proportion = freq.best_proportion;
      r.witness = f;
      r.witness_element = freq.best_element;
    }
  });
  r.holds = r.min_best_proportion >= kGoldenThreshold;
  return r;
}

// ---------------------------------------------------------------------------
// Entropy diagnostics for the uniform law on a family

inline constexpr int kMaxDiagnosticsN = 12;

struct StepDiagnostic {
  int element = 0;
  double marginal = 0.0;
  bool skipped = false;      // element lies in every member
  double union_step = 0.0;   // H((A u B)_{<i+1} | (A u B)_{<i})
  double joint_step = 0.0;   // H((A u B)_{<i+1} | A_{<i}, B_{<i})
  double single_step = 0.0;  // H(A_{<i+1} | A_{<i})
  double slack = 0.0;        // union_step - lambda * single_step
};

struct ChainDiagnostics {
  double entropy = 0.0;        // H(A) = ln |F|
  double union_entropy = 0.0;  // H(A u B)
  bool union_not_above = true;
  double u = 0.0;              // largest marginal below 1
  std::optional<double> lambda;
  std::vector<StepDiagnostic> steps;
  double min_step_slack = 0.0;
};

/// A, B independent and uniform on a union-closed family. Elements contained
/// in every member have zero conditional entropy on both sides and are left
/// out of the choice of u.
inline ChainDiagnostics entropy_chain_diagnostics(const Family& f) {
  if (f.n() > kMaxDiagnosticsN) throw std::invalid_argument("diagnostics need n <= 12");
  if (!is_union_closed(f)) throw std::invalid_argument("family is not union-closed");
  const auto d = ExplicitSetDistribution::uniform(f.n(), f.sets());
  const auto joined = union_of_independent(d, d);
  ChainDiagnostics r;
  r.entropy = entropy_explicit(d);
  r.union_entropy = entropy_explicit(joined);
  r.union_not_above = r.union_entropy <= r.entropy + 1e-12;

  const auto m = marginals(d);
  const auto counts = max_element_frequency(f).counts;
  std::vector<bool> full(static_cast<std::size_t>(f.n()));
  for (int i = 1; i <= f.n(); ++i) {
    full[static_cast<std::size_t>(i - 1)] = counts[static_cast<std::size_t>(i - 1)] == f.size();
    if (!full[static_cast<std::size_t>(i - 1)]) r.u = std::max(r.u, m[static_cast<std::size_t>(i - 1)]);
  }
  if (r.u > 0.0) r.lambda = lambda(r.u);

  const auto single = chain_profile(d);
  const auto joined_profile = chain_profile(joined);
  r.min_step_slack = std::numeric_limits<double>::infinity();
  for (int i = 1; i <= f.n(); ++i) {
    const auto k = static_cast<std::size_t>(i - 1);
    StepDiagnostic s;
    s.element = i;
    s.marginal = m[k];
    s.skipped = full[k] || !r.lambda;
    s.union_step = joined_profile.entries[k];
    s.joint_step = union_step_given_prefixes(d, i);
    s.single_step = single.entries[k];
    if (!s.skipped) {
      s.slack = s.union_step - *r.lambda * s.single_step;
      r.min_step_slack = std::min(r.min_step_slack, s.slack);
    }
    r.steps.push_back(s);
  }
  if (!std::isfinite(r.min_step_slack)) r.min_step_slack = 0.0;
  return r;
}

// ---------------------------------------------------------------------------
// Random generation and file format

/// Union closure of `generators` random subsets of [n].
template <typename Rng>
Family random_union_closed(int n, std::size_t generators, Rng& rng) {
  std::uniform_int_distribution<std::uint32_t> pick(0, full_mask(n).bits);
  std::vector<SubsetMask> sets;
  for (std::size_t k = 0; k < std::max<std::size_t>(generators, 1); ++k) sets.push_back(SubsetMask{pick(rng)});
  return union_closure(Family(n, std::move(sets)));
}

/// Header "n=<int>", then one member mask per line in hex.
inline void write_family(std::ostream& out, const Family& f) {
  out << "n=" << f.n() << '\n';
  for (auto s : f.sets()) {
    std::ostringstream hex;
    hex << std::hex << s.bits;
    out << hex.str() << '\n';
  }
}

inline Family read_family(std::istream& in) {
  const int n = detail::read_size_header(in);
  detail::require_explicit_size(n);
  std::vector<SubsetMask> sets;
  std::string line;
  while (std::getline(in, line)) {
    if (detail::skippable(line)) continue;
    std::istringstream fields(line);
    std::uint32_t mask = 0;
    if (!(fields >> std::hex >> mask)) throw std::invalid_argument("malformed family line '" + line + "'");
    sets.push_back(SubsetMask{mask});
  }
  return {n, std::move(sets)};
}

}  // namespace uclab
