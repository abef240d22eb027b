#ifndef TRAJSEL_BENCH_SUITE_HPP
#define TRAJSEL_BENCH_SUITE_HPP

#include <Eigen/Core>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "trajsel/run_log.hpp"
#include "trajsel/types.hpp"

namespace trajsel {

/// Search domain shared by all suites.
inline constexpr double kDomainLo = -5.0;
inline constexpr double kDomainHi = 5.0;

/// One evaluatable benchmark problem. Immutable after construction and safe
/// to share across threads; budget meters and logs are per-run.
///
/// Instance parameters (shift, rotations, objective offset) are derived
/// deterministically from (suite, function_id, instance_id), so equal ids
/// are bit-identical functions.
class ProblemInstance {
 public:
  /// Everything instance-specific. Exposed so that independent reference
  /// implementations and warm-start code can inspect the transforms.
  struct Transforms {
    Eigen::VectorXd x_opt;
    double f_opt = 0.0;
    Eigen::VectorXd shift;  // input shift when distinct from x_opt; else empty
    Eigen::MatrixXd rot_r;  // identity when the function uses no rotation
    Eigen::MatrixXd rot_q;
    Eigen::VectorXd signs;          // ±1 pattern (f5, f20, f24); else empty
    Eigen::MatrixXd peak_centers;   // Gallagher peaks, K x D; else empty
    Eigen::VectorXd peak_weights;   // K
    Eigen::MatrixXd peak_scales;    // K x D, diagonal of each peak's metric
    double raw_offset = 0.0;        // value of the raw formula at x_opt
  };

  const ProblemId& id() const { return id_; }
  int dimension() const { return id_.dimension; }
  const Eigen::VectorXd& x_opt() const { return tf_.x_opt; }
  double f_opt() const { return tf_.f_opt; }
  const Transforms& transforms() const { return tf_; }
  /// Transfer problems carry their catalog name; TRAIN problems the BBOB-style one.
  const std::string& name() const { return name_; }

  /// Objective value, unmetered. evaluate() is the budgeted entry point.
  double value(const Eigen::VectorXd& x) const;

  /// Consumes one unit of budget and appends to the log if one is attached.
  /// Returns nullopt (and records nothing) when the meter is exhausted.
  std::optional<double> evaluate(const Eigen::VectorXd& x,
                                 EvalBudgetMeter& meter,
                                 RunLog* log = nullptr) const;

  /// y - f_opt clamped below at zero.
  double precision(double y) const { return y > tf_.f_opt ? y - tf_.f_opt : 0.0; }

 private:
  friend ProblemInstance make_problem(ProblemId id);
  friend ProblemInstance make_transfer_problem(const std::string& name,
                                               int dimension);
  ProblemInstance() = default;

  ProblemId id_;
  std::string name_;
  Transforms tf_;
  int kind_ = 0;  // dispatch tag, suite-local function index
};

/// Builds a TRAIN-suite problem (function_id 1..24) or a TRANSFER problem
/// addressed by catalog index. Throws ConfigError for unknown ids or
/// unsupported dimensions (valid: 2..40).
ProblemInstance make_problem(ProblemId id);

/// Builds a transfer problem by catalog name; one canonical instance per
/// name (instance_id fixed at 0).
ProblemInstance make_transfer_problem(const std::string& name, int dimension);

/// Names of the transfer catalog, in function_id order (1-based ids).
const std::vector<std::string>& transfer_catalog();

inline constexpr int kNumTrainFunctions = 24;

/// Convenience binding of (problem, meter, log) used by the optimizers.
class Evaluator {
 public:
  Evaluator(const ProblemInstance& p, EvalBudgetMeter& meter, RunLog* log)
      : problem_(&p), meter_(&meter), log_(log) {}

  std::optional<double> operator()(const Eigen::VectorXd& x) {
    return problem_->evaluate(x, *meter_, log_);
  }

  bool exhausted() const { return meter_->exhausted(); }
  std::uint64_t remaining() const { return meter_->remaining(); }
  const ProblemInstance& problem() const { return *problem_; }
  RunLog* log() const { return log_; }

 private:
  const ProblemInstance* problem_;
  EvalBudgetMeter* meter_;
  RunLog* log_;
};

}  // namespace trajsel

#endif
