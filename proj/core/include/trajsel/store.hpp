#ifndef TRAJSEL_STORE_HPP
#define TRAJSEL_STORE_HPP

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "trajsel/cma_es.hpp"
#include "trajsel/run_log.hpp"
#include "trajsel/types.hpp"

namespace trajsel {

/// Ground truth for training and for the VBS/SBS oracles: one row per
/// (run, algorithm, a2 budget).
struct PerformanceTable {
  std::vector<PerformanceRow> rows;

  std::vector<std::uint64_t> budgets() const;
  std::vector<RunKey> run_keys() const;
  /// Throws ConfigError when a (key, algorithm, budget) combination repeats.
  void check_unique() const;
};

void write_performance_csv(const std::filesystem::path& path,
                           const PerformanceTable& table,
                           std::uint64_t dataset_hash);
PerformanceTable read_performance_csv(const std::filesystem::path& path);

/// Per-run record in the dataset manifest.
struct ManifestEntry {
  RunKey key;
  std::string file;  // path relative to the dataset directory
  std::uint64_t checksum = 0;
  std::uint64_t n_evaluations = 0;
  std::uint64_t series_rows = 0;
  double a1_precision = 0.0;
  bool incumbent_preserved = true;
  std::vector<PerformanceRow> rows;  // branch outcomes for this run
};

/// Versioned on-disk dataset: run logs in a compact binary format under
/// `<dir>/<suite>/<fid>/<iid>/<run>.trj`, plus an indexed JSON manifest so a
/// large dataset enumerates without touching every file. Floats round-trip
/// binary-exact.
class TrajectoryStore {
 public:
  explicit TrajectoryStore(std::filesystem::path dir);

  const std::filesystem::path& dir() const { return dir_; }
  std::filesystem::path run_path(const RunKey& key) const;

  /// Atomic write (temp + rename); rewriting identical content is a no-op.
  void write_run(const RunKey& key, const RunLog& log,
                 const CmaStateSeries& series);
  std::pair<RunLog, CmaStateSeries> read_run(const RunKey& key) const;

  /// True when the manifest lists the key and the file checksum still
  /// matches (cheap: checksum of the file on disk, no full decode).
  bool has_valid_run(const RunKey& key) const;

  void record_entry(ManifestEntry entry);
  const ManifestEntry* find_entry(const RunKey& key) const;
  std::vector<RunKey> keys() const;  // sorted
  std::size_t size() const { return entries_.size(); }

  /// Serializes the manifest; `sealed` marks the dataset complete.
  void commit_manifest(bool sealed);
  bool sealed() const { return sealed_; }
  /// Content hash over all per-run checksums, in sorted key order.
  std::uint64_t dataset_hash() const;

  /// Assembles the performance table from manifest entries. Runs with an
  /// incomplete branch set are excluded and reported in `quarantined`.
  PerformanceTable export_performance_table(
      std::vector<RunKey>* quarantined = nullptr) const;

 private:
  std::filesystem::path manifest_path() const;
  void load_manifest();

  std::filesystem::path dir_;
  std::map<RunKey, ManifestEntry> entries_;
  bool sealed_ = false;
};

/// Raw trajectory file IO; exposed for the one-shot CLI path that reads a
/// single .trj without a dataset around it.
void write_trajectory_file(const std::filesystem::path& path, const RunKey& key,
                           const RunLog& log, const CmaStateSeries& series);
std::tuple<RunKey, RunLog, CmaStateSeries> read_trajectory_file(
    const std::filesystem::path& path);

}  // namespace trajsel

#endif
