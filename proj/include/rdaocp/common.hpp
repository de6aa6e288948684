#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

namespace rdaocp {

using Point = Eigen::Vector2d;
using Vector = Eigen::VectorXd;

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad input: invalid sizes, ids, parameters or incompatible meshes.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Linear algebra failure (non-symmetric input, indefinite matrix, residual not met).
class SolverError : public Error {
 public:
  using Error::Error;
};

/// Rank-deficient local least-squares problem that patch enlargement could not fix.
class ReconstructionError : public Error {
 public:
  using Error::Error;
};

/// Projected gradient iteration diverged or did not converge.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// Number of worker threads; honours RDAOCP_THREADS, defaults to hardware concurrency.
inline unsigned worker_threads() {
  if (const char* env = std::getenv("RDAOCP_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return static_cast<unsigned>(n);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1U : hw;
}

/// Static-chunk parallel loop over [0, count). The body must only write to
/// slots owned by its index, so the result does not depend on the schedule.
inline void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) {
  const unsigned threads = worker_threads();
  if (threads <= 1 || count < 256) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  const std::size_t chunk = (count + threads - 1) / threads;
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  for (unsigned t = 0; t < threads; ++t) {
    const std::size_t begin = t * chunk;
    const std::size_t end = std::min(count, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&, t, begin, end] {
      try {
        for (std::size_t i = begin; i < end; ++i) body(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace rdaocp
