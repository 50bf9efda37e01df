#pragma once

// Dense transportation simplex: minimize sum_ij cost_ij x_ij subject to
// row sums = supply, column sums = demand, x >= 0.
//
// The basis is kept as a spanning tree of the bipartite row/column graph
// (rows + cols - 1 cells, degenerate zero-flow cells allowed). Entering cells
// are chosen by most negative reduced cost; after a run of degenerate pivots
// the solver switches to Bland's rule so it cannot cycle.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <queue>
#include <span>
#include <stdexcept>
#include <vector>

#include "uclab/numeric.hpp"

namespace uclab {

struct TransportPlan {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> flow;  // row-major rows x cols
  double cost = 0.0;
  std::size_t pivots = 0;

  [[nodiscard]] double at(std::size_t i, std::size_t j) const { return flow[i * cols + j]; }
};

namespace detail {

class TransportSimplex {
public:
  TransportSimplex(std::span<const double> supply, std::span<const double> demand,
                   std::span<const double> cost)
      : m_(supply.size()), n_(demand.size()), cost_(cost.begin(), cost.end()),
        flow_(m_ * n_, 0.0), basic_(m_ * n_, false) {
    northwest_corner(supply, demand);
  }

  TransportPlan solve() {
    const double scale = 1.0 + std::abs(*std::max_element(cost_.begin(), cost_.end(),
                                                          [](double a, double b) { return std::abs(a) < std::abs(b); }));
    const double tolerance = 1e-12 * scale;
    const std::size_t max_pivots = 100 * (m_ + n_) * (m_ + n_) + 1000;
    std::size_t degenerate_run = 0;
    std::size_t pivots = 0;
    std::vector<double> u(m_), v(n_);
    while (true) {
      compute_potentials(u, v);
      const bool bland = degenerate_run > m_ + n_;
      std::size_t enter = npos;
      double most_negative = -tolerance;
      for (std::size_t c = 0; c < m_ * n_; ++c) {
        if (basic_[c]) continue;
        const double reduced = cost_[c] - u[c / n_] - v[c % n_];
        if (reduced < most_negative) {
          most_negative = reduced;
          enter = c;
          if (bland) break;
        }
      }
      if (enter == npos) break;
      if (++pivots > max_pivots) throw std::runtime_error("transportation simplex did not converge");
      const double theta = pivot(enter);
      degenerate_run = theta > 0.0 ? 0 : degenerate_run + 1;
    }

    TransportPlan plan;
    plan.rows = m_;
    plan.cols = n_;
    plan.pivots = pivots;
    plan.flow = flow_;
    CompensatedSum total;
    for (std::size_t c = 0; c < m_ * n_; ++c) {
      plan.flow[c] = std::max(0.0, plan.flow[c]);
      total += plan.flow[c] * cost_[c];
    }
    plan.cost = total.value();
    return plan;
  }

private:
  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

  void northwest_corner(std::span<const double> supply, std::span<const double> demand) {
    std::vector<double> a(supply.begin(), supply.end());
    std::vector<double> b(demand.begin(), demand.end());
    std::size_t i = 0;
    std::size_t j = 0;
    while (true) {
      const double x = std::min(a[i], b[j]);
      flow_[i * n_ + j] = x;
      basic_[i * n_ + j] = true;
      cells_.push_back(i * n_ + j);
      if (i == m_ - 1 && j == n_ - 1) break;
      if (i == m_ - 1) {
        a[i] -= x;
        ++j;
      } else if (j == n_ - 1 || a[i] <= b[j]) {
        b[j] -= x;
        ++i;
      } else {
        a[i] -= x;
        ++j;
      }
    }
  }

  // Row node i is i, column node j is m + j.
  std::vector<std::vector<std::size_t>> adjacency() const {
    std::vector<std::vector<std::size_t>> adj(m_ + n_);
    for (std::size_t c : cells_) {
      adj[c / n_].push_back(c);
      adj[m_ + c % n_].push_back(c);
    }
    return adj;
  }

  void compute_potentials(std::vector<double>& u, std::vector<double>& v) const {
    const auto adj = adjacency();
    std::vector<bool> seen(m_ + n_, false);
    std::queue<std::size_t> pending;
    u[0] = 0.0;
    seen[0] = true;
    pending.push(0);
    while (!pending.empty()) {
      const std::size_t node = pending.front();
      pending.pop();
      for (std::size_t c : adj[node]) {
        const std::size_t i = c / n_;
        const std::size_t j = c % n_;
        if (node < m_ && !seen[m_ + j]) {
          v[j] = cost_[c] - u[i];
          seen[m_ + j] = true;
          pending.push(m_ + j);
        } else if (node >= m_ && !seen[i]) {
          u[i] = cost_[c] - v[j];
          seen[i] = true;
          pending.push(i);
        }
      }
    }
  }

  /// Brings `enter` into the basis; returns the step length.
  double pivot(std::size_t enter) {
    const std::size_t row = enter / n_;
    const std::size_t col = enter % n_;
    // Tree path from column node to row node, recorded as the cells crossed.
    const auto adj = adjacency();
    std::vector<std::size_t> via(m_ + n_, npos);
    std::vector<bool> seen(m_ + n_, false);
    std::queue<std::size_t> pending;
    seen[m_ + col] = true;
    pending.push(m_ + col);
    while (!pending.empty() && !seen[row]) {
      const std::size_t node = pending.front();
      pending.pop();
      for (std::size_t c : adj[node]) {
        const std::size_t other = node < m_ ? m_ + c % n_ : c / n_;
        if (seen[other]) continue;
        seen[other] = true;
        via[other] = c;
        pending.push(other);
      }
    }
    std::vector<std::size_t> path;  // from the row node back to the column node
    for (std::size_t node = row; node != m_ + col;) {
      const std::size_t c = via[node];
      path.push_back(c);
      node = node < m_ ? m_ + c % n_ : c / n_;
    }
    // path[0] touches the entering row and is a "-" cell; signs alternate.
    std::size_t leave = npos;
    double theta = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < path.size(); k += 2) {
      const std::size_t c = path[k];
      if (flow_[c] < theta || (flow_[c] == theta && c < leave)) {
        theta = flow_[c];
        leave = c;
      }
    }
    theta = std::max(theta, 0.0);
    flow_[enter] = theta;
    for (std::size_t k = 0; k < path.size(); ++k) flow_[path[k]] += (k % 2 == 0 ? -theta : theta);
    flow_[leave] = 0.0;
    basic_[leave] = false;
    basic_[enter] = true;
    *std::find(cells_.begin(), cells_.end(), leave) = enter;
    return theta;
  }

  std::size_t m_;
  std::size_t n_;
  std::vector<double> cost_;
  std::vector<double> flow_;
  std::vector<bool> basic_;
  std::vector<std::size_t> cells_;
};

}  // namespace detail

/// Solves the balanced transportation problem. Supplies and demands must be
/// nonnegative with equal totals (to 1e-12 relative).
inline TransportPlan solve_transport(std::span<const double> supply, std::span<const double> demand,
                                     std::span<const double> cost) {
  if (supply.empty() || demand.empty()) throw std::invalid_argument("transport problem needs rows and columns");
  if (cost.size() != supply.size() * demand.size()) {
    throw std::invalid_argument("cost matrix must be rows x cols");
  }
  const auto check = [](std::span<const double> xs) {
    for (double x : xs) {
      if (!std::isfinite(x) || x < 0.0) throw std::invalid_argument("supplies and demands must be nonnegative");
    }
    return compensated_total(xs);
  };
  const double a = check(supply);
  const double b = check(demand);
  if (std::abs(a - b) > 1e-12 * std::max(1.0, a)) {
    throw std::invalid_argument("unbalanced transportation problem");
  }
  return detail::TransportSimplex(supply, demand, cost).solve();
}

}  // namespace uclab
