#ifndef TRAJSEL_ELA_HPP
#define TRAJSEL_ELA_HPP

#include <Eigen/Core>
#include <limits>
#include <string>
#include <vector>

#include "trajsel/run_log.hpp"

namespace trajsel {

/// Trajectory sample: rows of X aligned with y. Feature computation never
/// evaluates the objective; this is all it sees.
struct Sample {
  Eigen::MatrixXd x;  // n x d
  Eigen::VectorXd y;  // n

  int n() const { return static_cast<int>(y.size()); }
  int d() const { return static_cast<int>(x.cols()); }

  static Sample from_log(const RunLog& log);
  /// A1 portion only (entries before the split, or everything when unsplit).
  static Sample from_log_prefix(const RunLog& log);
};

/// One feature with its validity flag. Invalid features carry NaN and a
/// short reason code; a non-empty reason with valid=true is a warning.
struct FeatureValue {
  double value = std::numeric_limits<double>::quiet_NaN();
  bool valid = false;
  const char* reason = "";

  static FeatureValue ok(double v) { return {v, true, ""}; }
  static FeatureValue ok_flagged(double v, const char* why) { return {v, true, why}; }
  static FeatureValue invalid(const char* why) {
    return {std::numeric_limits<double>::quiet_NaN(), false, why};
  }
};

struct FeatureSet {
  std::vector<std::string> names;
  std::vector<FeatureValue> values;

  void push(std::string name, FeatureValue v) {
    names.push_back(std::move(name));
    values.push_back(v);
  }
};

/// y-distribution: skewness, kurtosis (excess), number of KDE peaks.
FeatureSet ela_distribution(const Sample& s);

/// Level sets at quantiles {0.10, 0.25, 0.50}: cross-validated LDA and QDA
/// misclassification rates plus their ratio, 9 features.
FeatureSet ela_levelset(const Sample& s);

/// Model-fit features of linear/quadratic regressions, 8 features.
FeatureSet ela_meta_model(const Sample& s);

/// Pairwise-distance contraction of the best-quantile subsets at
/// {0.02, 0.05, 0.10, 0.25}: mean/median as ratio and difference, 16 features.
FeatureSet ela_dispersion(const Sample& s);

/// Information content of the fitness sequence along a nearest-neighbour
/// tour: h_max, eps_s, eps_max, eps_ratio, m0.
FeatureSet ela_information_content(const Sample& s);

/// Nearest-better clustering statistics, 5 features.
FeatureSet ela_nbc(const Sample& s);

inline constexpr int kElaCatalogVersion = 1;
inline constexpr int kNumElaFeatures = 38;

/// Names of the standard 38-feature vector, fixed order. The dispersion set
/// contributes its 8 ratio features here; the per-set API exposes all 16.
const std::vector<std::string>& ela_catalog();

struct ElaVector {
  std::vector<FeatureValue> values;  // catalog order, kNumElaFeatures entries
};

/// The standard 38-feature vector of one run's trajectory sample.
ElaVector compute_ela(const Sample& s);

}  // namespace trajsel

#endif
