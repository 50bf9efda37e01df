#pragma once

// Closed-form scalar functions: binary entropy (in nats), the union map
// p + q - pq, the golden threshold, the piecewise ratio lambda(u), the ratio
// F(s) = H(s^2) / (s H(s)) and the third-derivative formulas behind its
// monotonicity.

#include <cmath>
#include <stdexcept>
#include <string>

namespace uclab {

inline constexpr double kGoldenThreshold = 0.38196601125010515179541316563436188;  // (3 - sqrt 5) / 2
inline constexpr double kInverseGolden = 0.61803398874989484820458683436563812;    // (sqrt 5 - 1) / 2
inline constexpr double kGoldenRatio = 1.61803398874989484820458683436563812;      // 2 / (sqrt 5 - 1)
inline constexpr double kLn2 = 0.69314718055994530941723212145817657;

namespace detail {

inline void require_probability(double p, const char* what) {
  if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
    throw std::domain_error(std::string(what) + ": argument must be a finite value in [0,1], got " +
                            std::to_string(p));
  }
}

inline void require_open_unit(double s, const char* what) {
  if (!std::isfinite(s) || s <= 0.0 || s >= 1.0) {
    throw std::domain_error(std::string(what) + ": argument must lie in the open interval (0,1), got " +
                            std::to_string(s));
  }
}

}  // namespace detail

/// H(p) = -p ln p - (1-p) ln(1-p), with 0 ln 0 = 0.
///
/// Evaluated on the smaller of p and 1-p so that the log1p term stays
/// accurate near both endpoints; 1-p is exact for p >= 1/2.
inline double binary_entropy(double p) {
  detail::require_probability(p, "binary_entropy");
  const double a = p <= 0.5 ? p : 1.0 - p;
  if (a == 0.0) return 0.0;
  return -a * std::log(a) - (1.0 - a) * std::log1p(-a);
}

/// p + q - pq: the inclusion probability of an element in the union of two
/// independent sets that contain it with probabilities p and q.
inline double union_prob(double p, double q) {
  detail::require_probability(p, "union_prob");
  detail::require_probability(q, "union_prob");
  const double r = p + q - p * q;
  return r > 1.0 ? 1.0 : r;
}

/// H(p + q - pq), evaluated as H((1-p)(1-q)) so that no cancellation occurs
/// when the union probability is close to 1.
inline double union_entropy(double p, double q) {
  detail::require_probability(p, "union_entropy");
  detail::require_probability(q, "union_entropy");
  return binary_entropy((1.0 - p) * (1.0 - q));
}

/// (3 - sqrt 5) / 2.
inline constexpr double golden_threshold() noexcept { return kGoldenThreshold; }

/// The piecewise lower-bound ratio
///   H(2u - u^2) / H(u)      for u <= (3 - sqrt 5)/2,
///   (1 - u) * 2/(sqrt 5 - 1) for u >= (3 - sqrt 5)/2.
/// Both branches equal 1 at the threshold. Endpoints are rejected; see
/// lambda_with_limits for the limit values there.
inline double lambda(double u) {
  detail::require_open_unit(u, "lambda");
  if (u <= kGoldenThreshold) {
    const double s = 1.0 - u;
    return binary_entropy(s * s) / binary_entropy(u);
  }
  return (1.0 - u) * kGoldenRatio;
}

/// lambda(u) extended by continuity: 2 at u = 0, 0 at u = 1.
inline double lambda_with_limits(double u) {
  detail::require_probability(u, "lambda_with_limits");
  if (u == 0.0) return 2.0;
  if (u == 1.0) return 0.0;
  return lambda(u);
}

/// F(s) = H(s^2) / (s H(s)). Takes values in [phi, 2), minimal at s = 1/phi.
inline double ratio_F(double s) {
  detail::require_open_unit(s, "ratio_F");
  return binary_entropy(s * s) / (s * binary_entropy(s));
}

/// d^3/ds^3 H(s^2) = (-4 - 4 s^2) / (s (1 - s^2)^2).
inline double d3_H_square(double s) {
  detail::require_open_unit(s, "d3_H_square");
  const double t = 1.0 - s * s;
  return (-4.0 - 4.0 * s * s) / (s * t * t);
}

/// d^3/ds^3 s H(s) = (s - 2) / (s (1 - s)^2).
inline double d3_s_H(double s) {
  detail::require_open_unit(s, "d3_s_H");
  const double t = 1.0 - s;
  return (s - 2.0) / (s * t * t);
}

/// Numerator of d^3/ds^3 [H(s^2) - beta s H(s)] over the common denominator
/// s (1 - s^2)^2: the cubic -4 - 4 s^2 - beta (s - 2)(1 + s)^2.
inline constexpr double third_deriv_numerator(double s, double beta) noexcept {
  return -4.0 - 4.0 * s * s - beta * (s - 2.0) * (1.0 + s) * (1.0 + s);
}

/// 2 s H(s) - H(s^2), strictly positive on (0,1).
inline double easier_inequality_slack(double s) {
  detail::require_open_unit(s, "easier_inequality_slack");
  return 2.0 * s * binary_entropy(s) - binary_entropy(s * s);
}

}  // namespace uclab
