#pragma once

// Finitely supported probability measures on [0,1] and the functional
//
//   Phi(mu) = E_{p,q ~ mu x mu}[H(p + q - pq)] - lambda E_{p ~ mu}[H(p)]
//
// whose nonnegativity under the mean constraint E[p] <= u (with
// lambda = lambda(u)) drives the union-entropy bound. The module evaluates
// Phi, scans the extremal two-atom family {v, 1}, checks the
// convex-then-concave structure of the linearized function F_mu, and runs an
// independent local search over measures on a location grid.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "uclab/numeric.hpp"
#include "uclab/scalar.hpp"

namespace uclab {

inline constexpr std::uint64_t kDefaultSeed = 271828;

struct Atom {
  double location = 0.0;
  double weight = 0.0;
};

/// Atoms with strictly increasing locations in [0,1]; weights sum to 1.
/// Construction sorts the atoms and merges repeated locations.
class DiscreteMeasure {
public:
  static constexpr double kNormalizationTolerance = 1e-12;

  explicit DiscreteMeasure(std::vector<Atom> atoms) {
    if (atoms.empty()) throw std::invalid_argument("a measure needs at least one atom");
    CompensatedSum total;
    for (const auto& a : atoms) {
      if (!std::isfinite(a.location) || a.location < 0.0 || a.location > 1.0) {
        throw std::invalid_argument("atom location outside [0,1]");
      }
      if (!std::isfinite(a.weight) || a.weight < 0.0) {
        throw std::invalid_argument("atom weights must be nonnegative");
      }
      total += a.weight;
    }
    if (std::abs(total.value() - 1.0) > kNormalizationTolerance) {
      throw std::invalid_argument("atom weights sum to " + std::to_string(total.value()));
    }
    std::sort(atoms.begin(), atoms.end(),
              [](const Atom& a, const Atom& b) { return a.location < b.location; });
    for (const auto& a : atoms) {
      if (!atoms_.empty() && atoms_.back().location == a.location) {
        atoms_.back().weight += a.weight;
      } else {
        atoms_.push_back(a);
      }
    }
  }

  static DiscreteMeasure dirac(double x) { return DiscreteMeasure({{x, 1.0}}); }

  /// Mass w at v and 1 - w at 1.
  static DiscreteMeasure two_atom(double v, double w) {
    if (v == 1.0) return dirac(1.0);
    return DiscreteMeasure({{v, w}, {1.0, 1.0 - w}});
  }

  [[nodiscard]] std::span<const Atom> atoms() const noexcept { return atoms_; }
  [[nodiscard]] std::size_t size() const noexcept { return atoms_.size(); }

  /// True when all mass sits on {0, 1}.
  [[nodiscard]] bool on_boundary() const noexcept {
    return std::all_of(atoms_.begin(), atoms_.end(), [](const Atom& a) {
      return a.weight == 0.0 || a.location == 0.0 || a.location == 1.0;
    });
  }

private:
  std::vector<Atom> atoms_;
};

inline double mean(const DiscreteMeasure& mu) {
  CompensatedSum acc;
  for (const auto& a : mu.atoms()) acc += a.weight * a.location;
  return acc.value();
}

struct ObjectiveReport {
  double quadratic = 0.0;  // E_{mu x mu}[H(p + q - pq)]
  double linear = 0.0;     // E_mu[H(p)]
  double lambda = 0.0;
  double value = 0.0;      // quadratic - lambda * linear
  double mean = 0.0;
};

inline ObjectiveReport objective(const DiscreteMeasure& mu, double lam) {
  const auto atoms = mu.atoms();
  CompensatedSum quadratic;
  CompensatedSum linear;
  for (const auto& a : atoms) {
    linear += a.weight * binary_entropy(a.location);
    for (const auto& b : atoms) quadratic += a.weight * b.weight * union_entropy(a.location, b.location);
  }
  ObjectiveReport r;
  r.quadratic = quadratic.value();
  r.linear = linear.value();
  r.lambda = lam;
  r.value = r.quadratic - lam * r.linear;
  r.mean = mean(mu);
  return r;
}

/// 2 E_{mu x nu}[H(p + q - pq)] - lambda E_nu[H(q)]: the first-order
/// variation of the objective at mu in the direction of nu.
inline double linearized_objective(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double lam) {
  CompensatedSum cross;
  CompensatedSum linear;
  for (const auto& b : nu.atoms()) {
    linear += b.weight * binary_entropy(b.location);
    for (const auto& a : mu.atoms()) cross += a.weight * b.weight * union_entropy(a.location, b.location);
  }
  return 2.0 * cross.value() - lam * linear.value();
}

/// Objective of the measure with mass w at v and 1 - w at 1:
/// w^2 H(2v - v^2) - lambda w H(v).
inline double two_atom_objective(double v, double w, double lam) {
  detail::require_probability(v, "two_atom_objective");
  detail::require_probability(w, "two_atom_objective");
  return w * w * union_entropy(v, v) - lam * w * binary_entropy(v);
}

struct TwoAtomScan {
  double u = 0.0;
  double lambda = 0.0;
  double min_slack = 0.0;
  double argmin_v = 0.0;
  double argmin_w = 0.0;
  std::size_t points = 0;
};

/// Minimizes the two-atom objective over v in (0, u] with the mean
/// constraint active, w = (1-u)/(1-v). The v grid is u k / v_steps for
/// k = 1..v_steps, plus (3 - sqrt 5)/2 whenever it lies below u.
inline TwoAtomScan two_atom_min_scan(double u, std::size_t v_steps, double lam) {
  detail::require_open_unit(u, "two_atom_min_scan");
  if (v_steps == 0) throw std::invalid_argument("two_atom_min_scan needs v_steps >= 1");
  TwoAtomScan r;
  r.u = u;
  r.lambda = lam;
  r.min_slack = std::numeric_limits<double>::infinity();
  const auto consider = [&](double v) {
    const double w = std::min(1.0, (1.0 - u) / (1.0 - v));
    const double slack = two_atom_objective(v, w, lam);
    ++r.points;
    if (slack < r.min_slack) {
      r.min_slack = slack;
      r.argmin_v = v;
      r.argmin_w = w;
    }
  };
  for (std::size_t k = 1; k <= v_steps; ++k) {
    consider(k == v_steps ? u : u * static_cast<double>(k) / static_cast<double>(v_steps));
  }
  if (kGoldenThreshold < u) consider(kGoldenThreshold);
  return r;
}

inline TwoAtomScan two_atom_min_scan(double u, std::size_t v_steps) {
  return two_atom_min_scan(u, v_steps, lambda(u));
}

// ---------------------------------------------------------------------------
// Structure of F_mu

/// F_mu(q) = 2 E_{p ~ mu}[H(p + q - pq)] - lambda H(q).
inline double F_mu(const DiscreteMeasure& mu, double lam, double q) {
  detail::require_open_unit(q, "F_mu");
  CompensatedSum acc;
  for (const auto& a : mu.atoms()) acc += a.weight * union_entropy(a.location, q);
  return 2.0 * acc.value() - lam * binary_entropy(q);
}

/// q (1-q) F_mu''(q) = -2 E_p[(1-p) q / (p + q - pq)] + lambda.
inline double F_mu_scaled_curvature(const DiscreteMeasure& mu, double lam, double q) {
  detail::require_open_unit(q, "F_mu_scaled_curvature");
  CompensatedSum acc;
  for (const auto& a : mu.atoms()) {
    const double p = a.location;
    acc += a.weight * (1.0 - p) * q / (p + q - p * q);
  }
  return -2.0 * acc.value() + lam;
}

enum class CurvatureShape { ConvexThenConcave, Convex, Concave };

inline const char* to_string(CurvatureShape s) {
  switch (s) {
    case CurvatureShape::ConvexThenConcave: return "convex-then-concave";
    case CurvatureShape::Convex: return "convex";
    case CurvatureShape::Concave: return "concave";
  }
  return "?";
}

struct StructureReport {
  std::size_t grid = 0;
  bool strictly_decreasing = true;   // q(1-q) F_mu'' on the grid
  CurvatureShape shape = CurvatureShape::Convex;
  std::optional<double> inflection;  // sign change a of q(1-q) F_mu''
  std::size_t sign_checks = 0;       // grid points tested by second differences
  std::size_t sign_mismatches = 0;   // second-difference sign disagrees with shape
};

/// Evaluates G(q) = q(1-q) F_mu''(q) on q = k/(grid+1), checks that it is
/// strictly decreasing, locates its sign change by bisection and confirms
/// convexity left of it and concavity right of it with second differences
/// of F_mu. Measures concentrated on {0,1} are rejected.
inline StructureReport F_mu_structure_check(const DiscreteMeasure& mu, double lam, std::size_t grid) {
  if (mu.on_boundary()) {
    throw std::domain_error("F_mu structure is degenerate for measures supported on {0,1}");
  }
  if (grid < 2) throw std::invalid_argument("F_mu_structure_check needs grid >= 2");
  StructureReport r;
  r.grid = grid;
  const auto at = [&](std::size_t k) { return static_cast<double>(k) / static_cast<double>(grid + 1); };
  double previous = F_mu_scaled_curvature(mu, lam, at(1));
  for (std::size_t k = 2; k <= grid; ++k) {
    const double g = F_mu_scaled_curvature(mu, lam, at(k));
    if (!(g < previous)) r.strictly_decreasing = false;
    previous = g;
  }

  constexpr double lo_end = 1e-12;
  constexpr double hi_end = 1.0 - 1e-12;
  const double g_lo = F_mu_scaled_curvature(mu, lam, lo_end);
  const double g_hi = F_mu_scaled_curvature(mu, lam, hi_end);
  if (g_lo > 0.0 && g_hi < 0.0) {
    double lo = lo_end;
    double hi = hi_end;
    for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
      const double mid = 0.5 * (lo + hi);
      (F_mu_scaled_curvature(mu, lam, mid) > 0.0 ? lo : hi) = mid;
    }
    r.inflection = 0.5 * (lo + hi);
    r.shape = CurvatureShape::ConvexThenConcave;
  } else {
    r.shape = g_lo <= 0.0 ? CurvatureShape::Concave : CurvatureShape::Convex;
  }

  const auto f = [&](double q) { return F_mu(mu, lam, q); };
  for (std::size_t k = 1; k <= grid; ++k) {
    const double q = at(k);
    const double h = fd::unit_interval_step(q);
    if (q - 2 * h <= 0.0 || q + 2 * h >= 1.0) continue;
    if (r.inflection && std::abs(q - *r.inflection) <= 4 * h) continue;
    const double second = fd::second(f, q, h);
    // Points where the curvature is below stencil resolution carry no sign.
    if (std::abs(F_mu_scaled_curvature(mu, lam, q)) < 1e-6) continue;
    ++r.sign_checks;
    const bool convex_expected = r.inflection ? q < *r.inflection : r.shape == CurvatureShape::Convex;
    if ((second > 0.0) != convex_expected) ++r.sign_mismatches;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Local search over measures on a location grid

struct LocalSearchOptions {
  std::size_t atom_grid = 1000;       // uniform locations k / atom_grid
  std::size_t restarts = 10;
  std::uint64_t seed = kDefaultSeed;  // restart r is seeded with seed + r
  std::size_t max_iterations = 5000;
  std::size_t max_start_atoms = 4;
};

struct LocalSearchReport {
  DiscreteMeasure best = DiscreteMeasure::dirac(0.0);
  double best_value = 0.0;
  double best_mean = 0.0;
  bool concentrated = false;  // >= 1 - 1e-3 of the mass on {v, 1}
  std::vector<double> restart_values;
  std::size_t locations = 0;
};

namespace detail {

class MeasureSearch {
public:
  MeasureSearch(double u, double lam, std::size_t atom_grid) : u_(u), lam_(lam) {
    for (std::size_t k = 0; k <= atom_grid; ++k) {
      x_.push_back(static_cast<double>(k) / static_cast<double>(atom_grid));
    }
    x_.push_back(u);
    x_.push_back(kGoldenThreshold);
    std::sort(x_.begin(), x_.end());
    x_.erase(std::unique(x_.begin(), x_.end()), x_.end());
    const std::size_t n = x_.size();
    q_.resize(n * n);
    h_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      h_[i] = binary_entropy(x_[i]);
      for (std::size_t j = 0; j <= i; ++j) q_[i * n + j] = q_[j * n + i] = union_entropy(x_[i], x_[j]);
    }
  }

  [[nodiscard]] std::size_t locations() const noexcept { return x_.size(); }

  template <typename Rng>
  std::vector<double> random_start(Rng& rng, std::size_t max_atoms) const {
    const std::size_t n = x_.size();
    std::uniform_int_distribution<std::size_t> pick_count(1, std::max<std::size_t>(max_atoms, 1));
    std::uniform_int_distribution<std::size_t> pick_location(0, n - 1);
    std::uniform_real_distribution<double> pick_weight(0.05, 1.0);
    std::vector<double> w(n, 0.0);
    const std::size_t count = pick_count(rng);
    double total = 0.0;
    for (std::size_t k = 0; k < count; ++k) {
      const double mass = pick_weight(rng);
      w[pick_location(rng)] += mass;
      total += mass;
    }
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      w[i] /= total;
      m += w[i] * x_[i];
    }
    if (m > u_) {
      // Mix with the point mass at 0 until the mean constraint holds.
      const double t = u_ / m;
      for (auto& wi : w) wi *= t;
      w[0] += 1.0 - t;
    }
    return w;
  }

  /// Steepest feasible exchange descent; returns the final objective.
  double descend(std::vector<double>& w, std::size_t max_iterations) const {
    const std::size_t n = x_.size();
    std::vector<double> qw(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (w[j] == 0.0) continue;
      for (std::size_t i = 0; i < n; ++i) qw[i] += q_[i * n + j] * w[j];
    }
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) m += w[i] * x_[i];

    for (std::size_t it = 0; it < max_iterations; ++it) {
      Move best;
      std::vector<std::size_t> support;
      for (std::size_t i = 0; i < n; ++i) {
        if (w[i] > 0.0) support.push_back(i);
      }
      const auto grad = [&](std::size_t i) { return 2.0 * qw[i] - lam_ * h_[i]; };
      const auto Q = [&](std::size_t i, std::size_t j) { return q_[i * n + j]; };
      const double mean_room = std::max(0.0, u_ - m);

      // Shift mass from a support atom i to any location j.
      for (std::size_t i : support) {
        const double gi = grad(i);
        for (std::size_t j = 0; j < n; ++j) {
          if (j == i) continue;
          double cap = w[i];
          if (x_[j] > x_[i]) cap = std::min(cap, mean_room / (x_[j] - x_[i]));
          best.offer(line_min(grad(j) - gi, Q(i, i) + Q(j, j) - 2 * Q(i, j), cap), x_[j],
                     {{{j, 1.0}, {i, -1.0}, {i, 0.0}}});
        }
      }
      // Mean-preserving moves: pull mass from two support atoms into a
      // location between them, or spread one support atom onto two
      // surrounding locations (one of them in the support or at 0 or 1).
      for (std::size_t a = 0; a < support.size(); ++a) {
        for (std::size_t b = a + 1; b < support.size(); ++b) {
          const std::size_t i = support[a];
          const std::size_t k = support[b];
          for (std::size_t j = i + 1; j < k; ++j) {
            const double alpha = (x_[k] - x_[j]) / (x_[k] - x_[i]);
            const double beta = 1.0 - alpha;
            const double slope = grad(j) - alpha * grad(i) - beta * grad(k);
            const double curv = Q(j, j) + alpha * alpha * Q(i, i) + beta * beta * Q(k, k) -
                                2 * alpha * Q(i, j) - 2 * beta * Q(j, k) + 2 * alpha * beta * Q(i, k);
            best.offer(line_min(slope, curv, std::min(w[i] / alpha, w[k] / beta)), x_[j],
                       {{{j, 1.0}, {i, -alpha}, {k, -beta}}});
          }
        }
      }
      std::vector<std::size_t> anchors = support;
      anchors.push_back(0);
      anchors.push_back(n - 1);
      std::sort(anchors.begin(), anchors.end());
      anchors.erase(std::unique(anchors.begin(), anchors.end()), anchors.end());
      const auto spread = [&](std::size_t j, std::size_t i, std::size_t k) {
        const double alpha = (x_[k] - x_[i]) / (x_[k] - x_[j]);
        const double beta = 1.0 - alpha;
        const double slope = alpha * grad(j) + beta * grad(k) - grad(i);
        const double curv = alpha * alpha * Q(j, j) + beta * beta * Q(k, k) + Q(i, i) +
                            2 * alpha * beta * Q(j, k) - 2 * alpha * Q(i, j) - 2 * beta * Q(i, k);
        best.offer(line_min(slope, curv, w[i]), x_[k], {{{j, alpha}, {k, beta}, {i, -1.0}}});
      };
      for (std::size_t i : support) {
        for (std::size_t j : anchors) {
          if (j >= i) break;
          for (std::size_t k = i + 1; k < n; ++k) spread(j, i, k);
        }
        for (std::size_t k : anchors) {
          if (k <= i) continue;
          for (std::size_t j = 0; j < i; ++j) spread(j, i, k);
        }
      }

      if (!best.valid || best.step.delta > -1e-15) break;
      for (const auto& [idx, coef] : best.direction) {
        if (coef == 0.0) continue;
        const double dw = best.step.t * coef;
        w[idx] += dw;
        m += dw * x_[idx];
        for (std::size_t r = 0; r < n; ++r) qw[r] += dw * q_[r * n + idx];
      }
      for (const auto& [idx, coef] : best.direction) {
        if (w[idx] < 1e-15) w[idx] = 0.0;
      }
    }
    return value(w);
  }

  [[nodiscard]] double value(const std::vector<double>& w) const {
    const std::size_t n = x_.size();
    CompensatedSum quad;
    CompensatedSum lin;
    for (std::size_t i = 0; i < n; ++i) {
      if (w[i] == 0.0) continue;
      lin += w[i] * h_[i];
      for (std::size_t j = 0; j < n; ++j) {
        if (w[j] != 0.0) quad += w[i] * w[j] * q_[i * n + j];
      }
    }
    return quad.value() - lam_ * lin.value();
  }

  [[nodiscard]] DiscreteMeasure to_measure(const std::vector<double>& w) const {
    std::vector<Atom> atoms;
    double total = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (w[i] > 0.0) {
        atoms.push_back({x_[i], w[i]});
        total += w[i];
      }
    }
    for (auto& a : atoms) a.weight /= total;
    return DiscreteMeasure(std::move(atoms));
  }

private:
  using Direction = std::array<std::pair<std::size_t, double>, 3>;

  struct Step {
    double t = 0.0;
    double delta = 0.0;
  };

  struct Move {
    bool valid = false;
    Step step;
    double target = 0.0;
    Direction direction{};

    // Lower objective wins; near-ties go to the move whose mass lands
    // closest to location 1.
    void offer(Step s, double target_location, const Direction& dir) {
      if (s.t <= 0.0) return;
      const bool better = !valid || s.delta < step.delta - 1e-15 ||
                          (s.delta <= step.delta + 1e-15 && target_location > target);
      if (!better) return;
      valid = true;
      step = s;
      target = target_location;
      direction = dir;
    }
  };

  /// Minimizes slope * t + curvature * t^2 over t in [0, cap].
  static Step line_min(double slope, double curvature, double cap) {
    if (!(cap > 1e-15)) return {};
    Step best{cap, slope * cap + curvature * cap * cap};
    if (curvature > 0.0) {
      const double t = -slope / (2.0 * curvature);
      if (t > 0.0 && t < cap) {
        const double d = slope * t + curvature * t * t;
        if (d < best.delta) best = {t, d};
      }
    }
    return best;
  }

  double u_;
  double lam_;
  std::vector<double> x_;
  std::vector<double> q_;
  std::vector<double> h_;
};

inline double interior_mass(const DiscreteMeasure& mu) {
  double m = 0.0;
  for (const auto& a : mu.atoms()) {
    if (a.location > 0.0 && a.location < 1.0) m += a.weight;
  }
  return m;
}

inline bool concentrated_on_v_and_one(const DiscreteMeasure& mu) {
  double at_one = 0.0;
  double heaviest_other = 0.0;
  for (const auto& a : mu.atoms()) {
    if (a.location == 1.0) {
      at_one += a.weight;
    } else {
      heaviest_other = std::max(heaviest_other, a.weight);
    }
  }
  return at_one + heaviest_other >= 1.0 - 1e-3;
}

}  // namespace detail

/// Minimizes the objective over measures on a location grid (uniform grid
/// plus the points u, (3 - sqrt 5)/2 and 1) subject to mean <= u, by steepest
/// feasible exchange moves from seeded random starts. Among restarts within
/// 1e-12 of each other the one with more mass strictly inside (0,1) is kept.
inline LocalSearchReport local_search_min(double u, double lam, const LocalSearchOptions& options) {
  detail::require_probability(u, "local_search_min");
  if (options.restarts == 0) throw std::invalid_argument("local_search_min needs restarts >= 1");
  const detail::MeasureSearch search(u, lam, options.atom_grid);
  LocalSearchReport r;
  r.locations = search.locations();
  bool have = false;
  double best_interior = 0.0;
  for (std::size_t k = 0; k < options.restarts; ++k) {
    std::mt19937_64 rng(options.seed + k);
    auto w = search.random_start(rng, options.max_start_atoms);
    const double value = search.descend(w, options.max_iterations);
    r.restart_values.push_back(value);
    const auto mu = search.to_measure(w);
    const double interior = detail::interior_mass(mu);
    const bool better = !have || value < r.best_value - 1e-12 ||
                        (value <= r.best_value + 1e-12 && interior > best_interior);
    if (better) {
      have = true;
      r.best = mu;
      r.best_value = value;
      best_interior = interior;
    }
  }
  r.best_mean = mean(r.best);
  r.concentrated = detail::concentrated_on_v_and_one(r.best);
  return r;
}

// ---------------------------------------------------------------------------
// Certificate over a grid of u

struct CertificateOptions {
  std::size_t u_steps = 1000;
  std::size_t v_steps = 1000;
  std::size_t search_points = 100;  // u values (evenly spaced through the grid) given a local search
  LocalSearchOptions search{.atom_grid = 1000, .restarts = 10};
  double lambda_scale = 1.0;        // multiplies lambda(u); values > 1 must produce violations
  std::size_t jobs = 0;
};

struct CertificateRow {
  double u = 0.0;
  double lambda = 0.0;
  double scan_min = 0.0;
  double argmin_v = 0.0;
  std::optional<double> search_best;
  std::optional<bool> search_concentrated;
};

struct CertificateReport {
  std::vector<CertificateRow> rows;
  double worst_scan_slack = 0.0;
  double worst_u = 0.0;
  double slack_at_golden = 0.0;
  double worst_search_value = 0.0;
  double max_search_gain = 0.0;  // max over searched u of scan_min - search_best
  std::size_t total_restarts = 0;
  bool scan_passed = false;      // worst_scan_slack >= -1e-9
  bool search_passed = false;    // max_search_gain <= 1e-6
  [[nodiscard]] bool passed() const noexcept { return scan_passed && search_passed; }
};

inline constexpr double kScanTolerance = 1e-9;
inline constexpr double kSearchTolerance = 1e-6;

/// u runs over k/(u_steps+1), k = 1..u_steps, together with (3 - sqrt 5)/2.
inline CertificateReport lemma_certificate(const CertificateOptions& options) {
  std::vector<double> us;
  for (std::size_t k = 1; k <= options.u_steps; ++k) {
    us.push_back(static_cast<double>(k) / static_cast<double>(options.u_steps + 1));
  }
  us.push_back(kGoldenThreshold);
  std::sort(us.begin(), us.end());
  us.erase(std::unique(us.begin(), us.end()), us.end());

  std::vector<bool> searched(us.size(), false);
  if (options.search_points > 0) {
    const std::size_t stride = std::max<std::size_t>(1, us.size() / options.search_points);
    std::size_t marked = 0;
    for (std::size_t i = stride / 2; i < us.size() && marked < options.search_points; i += stride, ++marked) {
      searched[i] = true;
    }
  }

  CertificateReport r;
  r.rows.resize(us.size());
  parallel_for(us.size(), options.jobs, [&](std::size_t i) {
    const double u = us[i];
    const double lam = lambda(u) * options.lambda_scale;
    const auto scan = two_atom_min_scan(u, options.v_steps, lam);
    CertificateRow row{u, lam, scan.min_slack, scan.argmin_v, std::nullopt, std::nullopt};
    if (searched[i]) {
      auto search_options = options.search;
      search_options.seed = options.search.seed + i * options.search.restarts;
      const auto found = local_search_min(u, lam, search_options);
      row.search_best = found.best_value;
      row.search_concentrated = found.concentrated;
    }
    r.rows[i] = row;
  });

  r.worst_scan_slack = std::numeric_limits<double>::infinity();
  r.worst_search_value = std::numeric_limits<double>::infinity();
  r.max_search_gain = -std::numeric_limits<double>::infinity();
  for (const auto& row : r.rows) {
    if (row.scan_min < r.worst_scan_slack) {
      r.worst_scan_slack = row.scan_min;
      r.worst_u = row.u;
    }
    if (row.u == kGoldenThreshold) r.slack_at_golden = row.scan_min;
    if (row.search_best) {
      r.total_restarts += options.search.restarts;
      r.worst_search_value = std::min(r.worst_search_value, *row.search_best);
      r.max_search_gain = std::max(r.max_search_gain, row.scan_min - *row.search_best);
    }
  }
  if (r.total_restarts == 0) {
    r.worst_search_value = 0.0;
    r.max_search_gain = 0.0;
  }
  r.scan_passed = r.worst_scan_slack >= -kScanTolerance;
  r.search_passed = r.max_search_gain <= kSearchTolerance;
  return r;
}

}  // namespace uclab
