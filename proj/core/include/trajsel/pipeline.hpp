#ifndef TRAJSEL_PIPELINE_HPP
#define TRAJSEL_PIPELINE_HPP

#include <filesystem>
#include <initializer_list>
#include <string>
#include <utility>

#include "trajsel/config.hpp"
#include "trajsel/evaluation.hpp"
#include "trajsel/selector.hpp"

namespace trajsel {

/// Structured one-event-per-line logging with a quiet human mode.
struct Logger {
  bool quiet = false;

  void event(const std::string& name,
             std::initializer_list<std::pair<std::string, std::string>> fields =
                 {}) const;
  void human(const std::string& message) const;
};

/// Output root precedence: explicit override, then $TRAJSEL_DATA_DIR, then
/// the config's output_dir.
std::filesystem::path resolve_data_root(const ScenarioConfig& cfg,
                                        const std::string& cli_override);

inline std::filesystem::path scenario_dir(const std::filesystem::path& root,
                                          const ScenarioConfig& cfg) {
  return root / cfg.label;
}

/// Runs the A1 trajectories and all warm-started branches, persists run
/// logs and the performance table, seals the manifest. Interrupted
/// collections resume from the manifest without recomputing finished runs.
void cmd_collect(const ScenarioConfig& cfg, const std::filesystem::path& root,
                 const Logger& log);

/// Computes the ELA and TS feature matrices from the sealed dataset, plus
/// the importance-selected TS feature artifact.
void cmd_features(const ScenarioConfig& cfg, const std::filesystem::path& root,
                  const Logger& log);

/// Trains the full-dataset model bundles (one per dimension), grid search
/// included; prints the chosen configuration per (algorithm, budget, mode).
void cmd_train(const ScenarioConfig& cfg, const std::filesystem::path& root,
               const Logger& log);

/// Fold-based evaluation of all scenarios (dimension x A2 budget); emits
/// report JSONs, fig3/fig4 tables, selections.csv, baselines.json and fold
/// files. Returns false when any fold was flagged.
bool cmd_evaluate(const ScenarioConfig& cfg, const std::filesystem::path& root,
                  FoldScheme scheme, const Logger& log);

/// Trains on the full TRAIN dataset and tests on every TRANSFER run;
/// emits fig5.csv and a transfer report into the train scenario directory.
void cmd_transfer(const ScenarioConfig& train_cfg,
                  const ScenarioConfig& transfer_cfg,
                  const std::filesystem::path& root, const Logger& log);

/// SVD/Pearson trajectory-similarity analysis between the two suites;
/// emits fig6.csv.
void cmd_similarity(const ScenarioConfig& train_cfg,
                    const ScenarioConfig& transfer_cfg,
                    const std::filesystem::path& root, const Logger& log);

/// One-shot selection: reads a trajectory file, applies a trained bundle,
/// returns the decision (the CLI prints the chosen algorithm).
SelectionDecision cmd_select(const std::filesystem::path& trajectory_file,
                             const std::filesystem::path& scenario,
                             const std::string& mode, std::uint64_t a2_budget,
                             const Logger& log);

/// Loads the three feature views of a dataset directory.
FeatureBundle load_feature_bundle(const std::filesystem::path& scenario);

}  // namespace trajsel

#endif
