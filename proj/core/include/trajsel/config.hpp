#ifndef TRAJSEL_CONFIG_HPP
#define TRAJSEL_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "trajsel/types.hpp"

namespace trajsel {

inline constexpr int kConfigSchemaVersion = 1;

/// Scenario definition parsed from a flat key-value file. Unknown keys are
/// errors; the textual form round-trips losslessly.
struct ScenarioConfig {
  std::string label = "scenario";
  std::vector<int> dimensions = {5};
  int a1_budget_per_dim = 30;
  std::vector<int> a2_budgets_per_dim = {20, 70, 170};
  int n_instances = 10;
  int n_runs = 100;
  std::uint64_t seed_base = 1;
  std::vector<std::string> feature_modes = {"ela", "ts", "ela_ts"};
  Suite suite = Suite::kTrain;
  std::vector<int> functions;  // empty: the whole suite
  std::string output_dir = "data";
  bool reseed_on_switch = false;
  int fold_repeats = 5;
  double train_fraction = 0.7;
  double ts_importance_threshold = 2e-3;
  int jobs = 0;  // 0: hardware concurrency

  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;

  void validate() const;
  std::string to_text() const;
  static ScenarioConfig from_text(const std::string& text);
  static ScenarioConfig from_file(const std::filesystem::path& path);

  /// Functions actually in play: the explicit list or the full suite.
  std::vector<int> function_ids() const;
  /// Instance ids: 1..n for the TRAIN suite, the single canonical 0 for
  /// the transfer suite.
  std::vector<int> instance_ids() const;
  std::uint64_t a1_budget(int dimension) const;
  std::vector<std::uint64_t> a2_budgets(int dimension) const;

  std::uint64_t run_seed(int dimension, int fid, int iid, int run) const;
};

}  // namespace trajsel

#endif
