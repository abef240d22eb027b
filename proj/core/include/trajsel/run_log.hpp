#ifndef TRAJSEL_RUN_LOG_HPP
#define TRAJSEL_RUN_LOG_HPP

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <vector>

#include "trajsel/types.hpp"

namespace trajsel {

/// Hard evaluation budget. Every objective call moves `used` by exactly one;
/// used never exceeds cap.
struct EvalBudgetMeter {
  std::uint64_t used = 0;
  std::uint64_t cap = 0;

  bool exhausted() const { return used >= cap; }
  std::uint64_t remaining() const { return cap - used; }
};

struct Evaluation {
  Eigen::VectorXd x;
  double f = 0.0;
};

/// Complete evaluation history of one optimizer run.
struct RunLog {
  ProblemId problem;
  std::uint64_t seed = 0;
  std::vector<Evaluation> evaluations;
  /// Index of the first evaluation performed after the algorithm switch.
  std::optional<std::size_t> split_index;

  void append(Eigen::VectorXd x, double f) {
    evaluations.push_back({std::move(x), f});
  }

  std::size_t size() const { return evaluations.size(); }
  bool empty() const { return evaluations.empty(); }

  /// Minimum f over all evaluations so far. Requires a non-empty log.
  double best_f() const;
  const Evaluation& best() const;

  /// Non-increasing series: entry k is the minimum over the first k+1 values.
  std::vector<double> best_so_far() const;
};

}  // namespace trajsel

#endif
