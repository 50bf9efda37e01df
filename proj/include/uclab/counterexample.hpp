#pragma once

// A set distribution with H(A u B) <= d H(A) for independent copies A, B but
// D(A u B || A) bounded independently of n.
//
// Draw k from a geometric law Pr[k] = (1-theta) theta^k and put each element
// of [n] in A independently with probability 1 - (1-ubar)^(k+1). Given the
// two draws, A u B is again a product, with k' = k_A + k_B + 1 in place of k.
// The geometric law is truncated at K with the tail folded into component K.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "uclab/numeric.hpp"
#include "uclab/scalar.hpp"
#include "uclab/set_dist.hpp"

namespace uclab {

inline constexpr double kTailMassLimit = 1e-12;
inline constexpr int kMaxExactCounterexampleN = 12;
inline constexpr int kMaxExactCounterexampleK = 20;

/// Smallest K with theta^(K+1) < 1e-12, and at least ceil(30 / -ln theta).
inline int default_truncation(double theta) {
  detail::require_open_unit(theta, "default_truncation");
  int k = static_cast<int>(std::ceil(30.0 / -std::log(theta)));
  while (std::pow(theta, k + 1) >= kTailMassLimit) ++k;
  return k;
}

struct CounterexampleParams {
  double u_bar = 0.2;
  double u = 0.25;
  double d = 1.35;
  double theta = 0.01;
  std::int64_t n = 1000000;
  std::optional<int> truncation;  // K; default_truncation(theta) when unset

  [[nodiscard]] int K() const { return truncation ? *truncation : default_truncation(theta); }

  /// H(2 ubar - ubar^2) / H(ubar).
  [[nodiscard]] double ratio_at_u_bar() const {
    return binary_entropy(1.0 - (1.0 - u_bar) * (1.0 - u_bar)) / binary_entropy(u_bar);
  }

  void validate() const {
    if (!(u_bar > 0.0 && u_bar < u && u < 1.0)) throw std::invalid_argument("need 0 < ubar < u < 1");
    if (!(theta > 0.0 && theta < 1.0)) throw std::invalid_argument("need 0 < theta < 1");
    if (!(d > ratio_at_u_bar())) throw std::invalid_argument("need d > H(2 ubar - ubar^2) / H(ubar)");
    if (n < 1) throw std::invalid_argument("need n >= 1");
    const int k = K();
    if (k < 0) throw std::invalid_argument("truncation must be nonnegative");
    if (std::pow(theta, k + 1) >= kTailMassLimit) {
      throw std::invalid_argument("truncation leaves tail mass theta^(K+1) >= 1e-12");
    }
  }
};

/// Truncated geometric weights: (1-theta) theta^k for k < K, theta^K at K.
inline std::vector<double> truncated_geometric(double theta, int K) {
  std::vector<double> w(static_cast<std::size_t>(K) + 1);
  for (int k = 0; k < K; ++k) w[static_cast<std::size_t>(k)] = (1.0 - theta) * std::pow(theta, k);
  w[static_cast<std::size_t>(K)] = std::pow(theta, K);
  detail::renormalize(w);
  return w;
}

/// 1 - (1-ubar)^(k+1).
inline double component_inclusion(double u_bar, std::int64_t k) {
  return -std::expm1(static_cast<double>(k + 1) * std::log1p(-u_bar));
}

/// The mixture itself; n must fit an int.
inline ProductMixture build_counterexample(const CounterexampleParams& p) {
  p.validate();
  if (p.n > std::numeric_limits<int>::max()) throw std::invalid_argument("n too large for a mixture object");
  const auto w = truncated_geometric(p.theta, p.K());
  ProductMixture m{static_cast<int>(p.n), {}};
  for (std::size_t k = 0; k < w.size(); ++k) {
    m.components.push_back({w[k], component_inclusion(p.u_bar, static_cast<std::int64_t>(k))});
  }
  m.validate();
  return m;
}

/// Untruncated marginal 1 - (1-theta)(1-ubar) / (1 - theta (1-ubar)).
inline double marginal_inclusion(const CounterexampleParams& p) {
  p.validate();
  const double keep = 1.0 - p.u_bar;
  return 1.0 - (1.0 - p.theta) * keep / (1.0 - p.theta * keep);
}

/// Law of k' = k_A + k_B + 1 for two independent truncated draws; entry j
/// is Pr[k' = j], j = 0 .. 2K+1 (entry 0 is always 0).
inline std::vector<double> k_prime_pmf(const CounterexampleParams& p) {
  p.validate();
  const auto w = truncated_geometric(p.theta, p.K());
  std::vector<double> pmf(2 * w.size(), 0.0);
  for (std::size_t a = 0; a < w.size(); ++a) {
    for (std::size_t b = 0; b < w.size(); ++b) pmf[a + b + 1] += w[a] * w[b];
  }
  return pmf;
}

/// Untruncated Pr[k' = j] = (1-theta)^2 j theta^(j-1).
inline double k_prime_pmf_closed(double theta, std::int64_t j) {
  if (j < 1) return 0.0;
  return (1.0 - theta) * (1.0 - theta) * static_cast<double>(j) * std::pow(theta, static_cast<double>(j - 1));
}

/// n * sum_k Pr[k] H(1 - (1-ubar)^(k+1)).
inline double entropy_lower_bound(const CounterexampleParams& p) {
  p.validate();
  const auto w = truncated_geometric(p.theta, p.K());
  CompensatedSum acc;
  for (std::size_t k = 0; k < w.size(); ++k) {
    acc += w[k] * binary_entropy(component_inclusion(p.u_bar, static_cast<std::int64_t>(k)));
  }
  return static_cast<double>(p.n) * acc.value();
}

inline double k_prime_entropy(const CounterexampleParams& p) {
  CompensatedSum acc;
  for (double x : k_prime_pmf(p)) {
    if (x > kProbabilityFloor) acc += -x * std::log(x);
  }
  return std::max(0.0, acc.value());
}

/// H(k') + n * sum_{k'} Pr[k'] H(1 - (1-ubar)^(k'+1)).
inline double union_entropy_upper_bound(const CounterexampleParams& p) {
  const auto pmf = k_prime_pmf(p);
  CompensatedSum acc;
  for (std::size_t j = 1; j < pmf.size(); ++j) {
    acc += pmf[j] * binary_entropy(component_inclusion(p.u_bar, static_cast<std::int64_t>(j)));
  }
  return k_prime_entropy(p) + static_cast<double>(p.n) * acc.value();
}

inline double ratio_bound(const CounterexampleParams& p) {
  return union_entropy_upper_bound(p) / entropy_lower_bound(p);
}

/// sum_{k'} Pr[k'] (-k' ln theta - ln(1-theta)); no dependence on n.
inline double kl_upper_bound(const CounterexampleParams& p) {
  const auto pmf = k_prime_pmf(p);
  const double lt = std::log(p.theta);
  const double l1 = std::log1p(-p.theta);
  CompensatedSum acc;
  for (std::size_t j = 1; j < pmf.size(); ++j) acc += pmf[j] * (-static_cast<double>(j) * lt - l1);
  return acc.value();
}

struct ExactCounterexampleValues {
  double entropy = 0.0;        // H(A)
  double union_entropy = 0.0;  // H(A u B)
  double kl = 0.0;             // D(A u B || A)
  double marginal = 0.0;
  bool within_bounds = false;
};

struct CounterexampleReport {
  CounterexampleParams params;
  int truncation = 0;
  double marginal = 0.0;            // untruncated closed form
  double marginal_truncated = 0.0;  // of the built mixture
  bool admissible = false;          // marginal <= u
  double ratio_at_u_bar = 0.0;      // H(2 ubar - ubar^2) / H(ubar), the n -> inf, theta -> 0 limit
  double entropy_lower = 0.0;
  double entropy_upper = 0.0;       // entropy_lower + H(k)
  double k_prime_entropy = 0.0;
  double union_upper = 0.0;
  double ratio = 0.0;
  bool ratio_below_d = false;
  double kl_bound = 0.0;
  // The k' weights (1-theta) j theta^(j-1) inflate the exact pmf by this factor.
  double single_factor_inflation = 0.0;
  std::optional<ExactCounterexampleValues> exact;

  [[nodiscard]] bool passed() const {
    return admissible && ratio_below_d && (!exact || exact->within_bounds);
  }
};

namespace detail {

inline CounterexampleReport counterexample_bounds(const CounterexampleParams& p) {
  p.validate();
  CounterexampleReport r;
  r.params = p;
  r.truncation = p.K();
  r.marginal = marginal_inclusion(p);
  const auto w = truncated_geometric(p.theta, r.truncation);
  CompensatedSum m;
  for (std::size_t k = 0; k < w.size(); ++k) m += w[k] * component_inclusion(p.u_bar, static_cast<std::int64_t>(k));
  r.marginal_truncated = m.value();
  r.admissible = r.marginal <= p.u;
  r.ratio_at_u_bar = p.ratio_at_u_bar();
  r.entropy_lower = entropy_lower_bound(p);
  CompensatedSum mixing;
  for (double x : w) {
    if (x > kProbabilityFloor) mixing += -x * std::log(x);
  }
  r.entropy_upper = r.entropy_lower + std::max(0.0, mixing.value());
  r.k_prime_entropy = k_prime_entropy(p);
  r.union_upper = union_entropy_upper_bound(p);
  r.ratio = r.union_upper / r.entropy_lower;
  r.ratio_below_d = r.ratio < p.d;
  r.kl_bound = kl_upper_bound(p);
  r.single_factor_inflation = 1.0 / (1.0 - p.theta);
  return r;
}

}  // namespace detail

/// Bound arithmetic only; never touches 2^n states.
inline CounterexampleReport counterexample_report(const CounterexampleParams& p) {
  return detail::counterexample_bounds(p);
}

/// Bounds plus exact H(A), H(A u B) and D(A u B || A) from the full tables.
inline CounterexampleReport exact_small_n_check(const CounterexampleParams& p) {
  if (p.n > kMaxExactCounterexampleN) throw std::invalid_argument("exact check needs n <= 12");
  if (p.K() > kMaxExactCounterexampleK) throw std::invalid_argument("exact check needs K <= 20");
  auto r = detail::counterexample_bounds(p);
  const auto a = expand(build_counterexample(p));
  const auto joined = union_of_independent(a, a);
  ExactCounterexampleValues e;
  e.entropy = entropy_explicit(a);
  e.union_entropy = entropy_explicit(joined);
  e.kl = kl_divergence(joined, a);
  e.marginal = marginal(a, 1);
  const double tol = 1e-10 * (1.0 + r.entropy_upper);
  e.within_bounds = e.entropy >= r.entropy_lower - tol && e.entropy <= r.entropy_upper + tol &&
                    e.union_entropy <= r.union_upper + tol && e.kl <= r.kl_bound + tol &&
                    e.marginal <= p.u;
  r.exact = e;
  return r;
}

}  // namespace uclab
