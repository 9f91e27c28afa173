#pragma once

#include <cvxreg/types.hpp>

#include <algorithm>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#define CVXREG_PARALLEL_FOR _Pragma("omp parallel for schedule(static)")
#else
#define CVXREG_PARALLEL_FOR
#endif

namespace cvxreg {

/// Row sums of an n x n matrix accumulated per fixed block of columns and
/// combined in block order, so the rounding does not depend on how blocks
/// are distributed over workers.
class BlockRowSums {
 public:
  static constexpr Index kBlock = 64;

  explicit BlockRowSums(Index n)
      : n_(n), blocks_((n + kBlock - 1) / kBlock), parts_(n, blocks_) {
    parts_.setZero();
  }

  Index blocks() const { return blocks_; }
  Index begin(Index b) const { return b * kBlock; }
  Index end(Index b) const { return std::min(n_, (b + 1) * kBlock); }
  Eigen::Block<Matrix, Eigen::Dynamic, 1, true> block(Index b) { return parts_.col(b); }

  Vector reduce() const {
    Vector out = Vector::Zero(n_);
    for (Index b = 0; b < blocks_; ++b) out += parts_.col(b);
    return out;
  }

 private:
  Index n_;
  Index blocks_;
  Matrix parts_;
};

/// Caps the OpenMP team size for the lifetime of the object.
class ThreadScope {
 public:
  explicit ThreadScope(int threads) {
#ifdef _OPENMP
    previous_ = omp_get_max_threads();
    if (threads > 0) omp_set_num_threads(threads);
#else
    (void)threads;
#endif
  }
  ~ThreadScope() {
#ifdef _OPENMP
    omp_set_num_threads(previous_);
#endif
  }
  ThreadScope(const ThreadScope&) = delete;
  ThreadScope& operator=(const ThreadScope&) = delete;

 private:
  int previous_ = 1;
};

}  // namespace cvxreg
