#ifndef TRAJSEL_TS_FEATURES_HPP
#define TRAJSEL_TS_FEATURES_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "trajsel/cma_es.hpp"
#include "trajsel/ela.hpp"
#include "trajsel/forest.hpp"

namespace trajsel {

inline constexpr int kTsCatalogVersion = 1;

/// Names of the per-channel feature functions, catalog order.
const std::vector<std::string>& ts_function_names();

/// Full catalog: every feature function applied to every psi channel,
/// named `ts.<channel>.<function>`.
const std::vector<std::string>& ts_catalog();

/// All catalog functions over one series, names prefixed with
/// `ts.<prefix>.`. Variance-dependent features are invalid on constant
/// input, never NaN without a flag.
FeatureSet ts_features_of_channel(const std::vector<double>& v,
                                  const std::string& prefix);

struct TsFeatureVector {
  std::vector<FeatureValue> values;  // ts_catalog() order
};

/// Catalog features over all 10 channels of one run's state series.
/// Requires at least 8 rows; shorter series yield all-invalid entries.
TsFeatureVector compute_ts_features(const CmaStateSeries& series);

/// Outcome of importance-based selection on the TS feature matrix.
struct SelectedFeatureSet {
  std::vector<std::string> names;  // importance-descending
  std::vector<double> importances;
  double threshold = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t dataset_hash = 0;
  bool fallback_used = false;  // empty selection fell back to the top 20

  void save(const std::filesystem::path& path) const;
  static SelectedFeatureSet load(const std::filesystem::path& path);
};

/// Trains a classification forest to predict the function id from the TS
/// features and keeps features whose normalized impurity importance
/// exceeds the threshold. Invalid entries are median-imputed first.
SelectedFeatureSet select_features(const FeatureMatrix& ts_features,
                                   const std::vector<int>& function_labels,
                                   double threshold, std::uint64_t seed,
                                   std::uint64_t dataset_hash = 0);

}  // namespace trajsel

#endif
