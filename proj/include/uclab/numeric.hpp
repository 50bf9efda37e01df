#pragma once

// Small numerical helpers shared by every module: compensated summation,
// finite-difference stencils and a deterministic parallel loop.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace uclab {

/// Neumaier-compensated accumulator. The result does not depend on the
/// magnitude ordering of the summands to first order, which keeps reductions
/// reproducible when the same terms are summed in the same order.
class CompensatedSum {
public:
  CompensatedSum& operator+=(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
    return *this;
  }

  [[nodiscard]] double value() const noexcept { return sum_ + comp_; }

private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

template <typename Range>
double compensated_total(const Range& values) {
  CompensatedSum acc;
  for (double v : values) acc += v;
  return acc.value();
}

namespace fd {

/// 5-point central stencil for the first derivative, O(h^4).
template <typename F>
double first(F&& f, double x, double h) {
  return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h);
}

/// 5-point central stencil for the second derivative, O(h^4).
template <typename F>
double second(F&& f, double x, double h) {
  return (-f(x + 2 * h) + 16 * f(x + h) - 30 * f(x) + 16 * f(x - h) - f(x - 2 * h)) /
         (12 * h * h);
}

/// 5-point central stencil for the third derivative, O(h^2).
template <typename F>
double third(F&& f, double x, double h) {
  return (f(x + 2 * h) - 2 * f(x + h) + 2 * f(x - h) - f(x - 2 * h)) / (2 * h * h * h);
}

/// Step for stencils on (0,1): proportional to the distance from the nearest
/// endpoint, equal to 1e-4 at distance 0.05.
inline double unit_interval_step(double x) noexcept {
  return 2e-3 * std::min(x, 1.0 - x);
}

}  // namespace fd

/// Resolves a requested worker count; 0 means "all hardware threads".
inline std::size_t resolve_jobs(std::size_t jobs) noexcept {
  if (jobs != 0) return jobs;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

/// Calls body(i) for every i in [0, count) across `jobs` threads. Work is
/// handed out in a fixed striped pattern; callers write into per-index slots
/// and reduce afterwards, so results never depend on scheduling.
template <typename Body>
void parallel_for(std::size_t count, std::size_t jobs, Body&& body) {
  jobs = std::min(resolve_jobs(jobs), std::max<std::size_t>(count, 1));
  if (jobs <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> workers;
  workers.reserve(jobs);
  for (std::size_t w = 0; w < jobs; ++w) {
    workers.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < count; i += jobs) body(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : workers) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace uclab
