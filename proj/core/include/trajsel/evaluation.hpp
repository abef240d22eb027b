#ifndef TRAJSEL_EVALUATION_HPP
#define TRAJSEL_EVALUATION_HPP

#include <Eigen/Core>
#include <array>
#include <map>
#include <string>
#include <vector>

#include "trajsel/forest.hpp"
#include "trajsel/selector.hpp"
#include "trajsel/store.hpp"
#include "trajsel/ts_features.hpp"

namespace trajsel {

enum class FoldScheme { kLeaveInstanceOut, kLeaveRunOut };

std::string to_string(FoldScheme s);
FoldScheme fold_scheme_from_string(const std::string& s);

struct FoldSpec {
  FoldScheme scheme = FoldScheme::kLeaveInstanceOut;
  int repeat_index = 0;
  std::uint64_t seed = 0;
  std::vector<RunKey> train;
  std::vector<RunKey> test;
};

/// Per-function stratified 70/30 splits, one fold per repeat. Under
/// leave-instance-out all runs of an instance land on the same side; under
/// leave-run-out each instance's runs split 70/30 individually.
std::vector<FoldSpec> make_folds(const std::vector<RunKey>& keys,
                                 FoldScheme scheme, int repeats,
                                 double train_fraction, std::uint64_t seed);

/// The three feature views of one dataset.
struct FeatureBundle {
  FeatureMatrix ela;
  FeatureMatrix ts;  // full TS catalog
  std::vector<std::string> selected_ts;

  FeatureMatrix by_mode(const std::string& mode) const;
};

const std::vector<std::string>& feature_modes();  // {"ela","ts","ela_ts"}

struct EvaluationOptions {
  std::vector<std::string> modes = {"ela", "ts", "ela_ts"};
  int grid_cv_folds = 5;
  std::uint64_t seed = 0;
  int jobs = 1;
};

struct ScenarioReport {
  int dimension = 0;
  std::uint64_t a1_budget = 0;
  std::uint64_t a2_budget = 0;
  std::string fold_scheme;

  /// Dataset-level oracle baselines (policies built and scored on the full
  /// slice; the dominance chain is structural here).
  std::map<std::string, double> policy_ratios;
  /// Selector mean ratio per feature mode, averaged over fold means.
  std::map<std::string, double> selector_ratios;
  std::map<std::string, std::vector<double>> fold_selector_ratios;
  /// Policies scored on each fold's test rows (reported, not asserted).
  std::map<std::string, std::vector<double>> fold_policy_ratios;
  /// Per-function mean ratios: rows "vbs_iid"... and "selector:<mode>".
  std::map<std::string, std::map<int, double>> per_function_ratios;
  std::array<double, kNumAlgorithms> best_fractions{};
  std::vector<SelectionDecision> decisions;  // all fold test decisions
  std::vector<int> flagged_folds;

  bool any_fold_flagged() const { return !flagged_folds.empty(); }
};

/// Trains one model per (algorithm, mode) inside the fold's training split
/// (grid search included) and applies one model bundle per trained mode.
TrainedModel train_performance_model(const FeatureMatrix& train_features,
                                     const PerformanceTable& perf,
                                     AlgorithmId algorithm,
                                     std::uint64_t a2_budget, int grid_cv_folds,
                                     std::uint64_t seed, int jobs);

ScenarioReport evaluate_scenario(const FeatureBundle& features,
                                 const PerformanceTable& perf,
                                 const std::vector<FoldSpec>& folds,
                                 std::uint64_t a2_budget,
                                 const EvaluationOptions& opt);

/// Fraction of runs where each algorithm reaches the row minimum (ties
/// count for every tied algorithm, so a column can exceed 1 in total).
std::array<double, kNumAlgorithms> best_algorithm_fractions(
    const PerformanceTable& table, std::uint64_t budget);

struct TransferReport {
  std::uint64_t a2_budget = 0;
  std::map<std::string, double> selector_ratios;  // per mode, on transfer runs
  std::map<std::string, double> policy_ratios;    // oracles on the transfer set
  /// Per transfer function: fraction of runs each algorithm was truly
  /// optimal (ties counted) and how often each mode's selector picked it.
  std::map<int, std::array<double, kNumAlgorithms>> optimal_fractions;
  std::map<std::string, std::map<int, std::array<double, kNumAlgorithms>>>
      selected_fractions;
  std::vector<SelectionDecision> decisions;
};

/// Trains on the full TRAIN dataset and evaluates every TRANSFER run.
TransferReport transfer_evaluate(const FeatureBundle& train_features,
                                 const PerformanceTable& train_perf,
                                 const FeatureBundle& test_features,
                                 const PerformanceTable& test_perf,
                                 std::uint64_t a2_budget,
                                 const EvaluationOptions& opt);

struct SimilarityResult {
  std::vector<std::string> problem_labels;  // train problems then test problems
  int n_train = 0;
  Eigen::MatrixXd correlation;
  int rank = 0;
  std::vector<std::string> dropped_features;
};

/// Per-problem median feature vectors, standardized by train statistics,
/// projected onto the train SVD basis; Pearson correlations of the
/// projected problem vectors.
SimilarityResult similarity_analysis(const FeatureMatrix& train_runs,
                                     const FeatureMatrix& test_runs);

}  // namespace trajsel

#endif
