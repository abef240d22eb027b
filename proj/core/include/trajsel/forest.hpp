#ifndef TRAJSEL_FOREST_HPP
#define TRAJSEL_FOREST_HPP

#include <Eigen/Core>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "trajsel/types.hpp"

namespace trajsel {

/// log10 of the target precision, clamped at the numerical floor so a hit
/// of the optimum maps to a finite value.
inline double target_transform(double precision) {
  return std::log10(std::max(precision, 1e-12));
}

enum class MaxFeatures : std::uint8_t { kAll = 0, kSqrt = 1, kLog2 = 2 };

std::string to_string(MaxFeatures m);

struct ForestParams {
  int n_estimators = 100;
  MaxFeatures max_features = MaxFeatures::kAll;
  int max_depth = 0;  // 0: unlimited
  int min_samples_split = 2;
  bool bootstrap = true;

  friend bool operator==(const ForestParams&, const ForestParams&) = default;
  std::string describe() const;
};

/// The full hyperparameter lattice, 72 configurations, emitted in the
/// tie-break preference order (fewer trees, shallower, larger min split).
std::vector<ForestParams> hyper_grid();

/// Bagged CART forest. Regression trees split on variance reduction, the
/// classification variant on Gini impurity (used for feature selection).
/// Split search and leaf statistics are computed in value-sorted order, so
/// fitted trees do not depend on row presentation order.
class RandomForest {
 public:
  enum class Task : std::uint8_t { kRegression = 0, kClassification = 1 };

  static RandomForest fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                          const ForestParams& params, std::uint64_t seed,
                          Task task = Task::kRegression);

  double predict(const Eigen::VectorXd& x) const;
  Eigen::VectorXd predict_many(const Eigen::MatrixXd& x) const;

  /// Mean impurity-decrease importance, normalized to sum 1 (all zeros when
  /// no split was ever made).
  const Eigen::VectorXd& feature_importances() const { return importances_; }
  /// Range of per-tree predictions for one point (mean-of-trees sandwich).
  std::pair<double, double> prediction_range(const Eigen::VectorXd& x) const;
  /// Out-of-bag MSE; absent when bootstrap was off or no row was left out.
  std::optional<double> oob_mse() const { return oob_mse_; }

  const ForestParams& params() const { return params_; }
  Task task() const { return task_; }
  int n_features() const { return n_features_; }

  void save(std::ostream& out) const;
  static RandomForest load(std::istream& in);

  struct Node {
    int feature = -1;  // -1: leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
  };
  struct Tree {
    std::vector<Node> nodes;
    double predict(const Eigen::VectorXd& x) const;
  };

 private:
  std::vector<Tree> trees_;
  Eigen::VectorXd importances_;
  ForestParams params_;
  Task task_ = Task::kRegression;
  int n_features_ = 0;
  std::optional<double> oob_mse_;
};

struct GridSearchResult {
  ForestParams best;
  double best_cv_mse = 0.0;
  std::vector<double> cv_mse;  // one entry per grid configuration
  RandomForest model;          // best config refit on the full data
};

/// Exhaustive search over hyper_grid() scored by k-fold CV mean squared
/// error. When `groups` is non-empty, folds are built over whole groups so
/// correlated rows never straddle the split. Ties keep the earlier grid
/// entry, which encodes the documented preference order.
GridSearchResult grid_search(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                             const std::vector<int>& groups, int k_folds,
                             std::uint64_t seed, int jobs = 1);

/// Named feature rows for a set of runs; NaN marks an invalid entry.
struct FeatureMatrix {
  std::vector<std::string> names;
  std::vector<RunKey> keys;
  Eigen::MatrixXd values;

  int n_rows() const { return static_cast<int>(values.rows()); }
  int n_cols() const { return static_cast<int>(values.cols()); }
  int column(const std::string& name) const;

  /// Column-wise median over valid entries; NaN when a column has none.
  Eigen::VectorXd column_medians() const;
  /// Replaces NaNs by the given per-column values.
  void impute(const Eigen::VectorXd& fill);
  /// Horizontal concatenation; keys must match row-for-row.
  static FeatureMatrix concat(const FeatureMatrix& a, const FeatureMatrix& b);
  FeatureMatrix select_rows(const std::vector<int>& rows) const;
  FeatureMatrix select_columns(const std::vector<std::string>& cols) const;
};

void write_feature_csv(const std::filesystem::path& path,
                       const FeatureMatrix& m);
FeatureMatrix read_feature_csv(const std::filesystem::path& path);

/// One trained per-algorithm regressor plus everything needed to apply it.
struct TrainedModel {
  RandomForest forest;
  std::vector<std::string> feature_names;
  Eigen::VectorXd imputation;  // training medians, applied to invalid inputs
  ForestParams chosen;
  double cv_mse = 0.0;
};

/// Map from (feature mode, a2 budget, algorithm) to a trained model,
/// serialized as one self-describing file with a JSON header.
class ModelBundle {
 public:
  static std::string key_of(const std::string& mode, std::uint64_t budget,
                            AlgorithmId a);

  void put(const std::string& mode, std::uint64_t budget, AlgorithmId a,
           TrainedModel model);
  const TrainedModel* find(const std::string& mode, std::uint64_t budget,
                           AlgorithmId a) const;

  /// Predicted log-precision for all six algorithms, algorithm-ordinal
  /// order. The named features must match the stored schema exactly;
  /// mismatches raise SchemaMismatchError listing the offending columns.
  std::array<double, kNumAlgorithms> predict_all(
      const std::string& mode, std::uint64_t budget,
      const std::vector<std::string>& names, const Eigen::VectorXd& values) const;

  std::uint64_t dataset_hash = 0;
  std::uint64_t seed = 0;

  void save(const std::filesystem::path& path) const;
  static ModelBundle load(const std::filesystem::path& path);

  const std::map<std::string, TrainedModel>& models() const { return models_; }

 private:
  std::map<std::string, TrainedModel> models_;
};

}  // namespace trajsel

#endif
