#ifndef TRAJSEL_TYPES_HPP
#define TRAJSEL_TYPES_HPP

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace trajsel {

enum class Suite : std::uint8_t { kTrain = 0, kTransfer = 1 };

std::string to_string(Suite s);
Suite suite_from_string(const std::string& s);

/// The six portfolio members. Ordinals are stable and used in every table.
enum class AlgorithmId : std::uint8_t {
  kCmaNonElitist = 0,
  kCmaElitist = 1,
  kDe = 2,
  kPso = 3,
  kQuasiNewton = 4,
  kMlsl = 5,
};

inline constexpr int kNumAlgorithms = 6;
inline constexpr std::array<AlgorithmId, kNumAlgorithms> kAllAlgorithms = {
    AlgorithmId::kCmaNonElitist, AlgorithmId::kCmaElitist,
    AlgorithmId::kDe,            AlgorithmId::kPso,
    AlgorithmId::kQuasiNewton,   AlgorithmId::kMlsl};

std::string to_string(AlgorithmId a);
AlgorithmId algorithm_from_string(const std::string& s);

/// Identity of a benchmark problem: "<suite>:<fid>:<iid>:<dim>" in the CLI.
struct ProblemId {
  Suite suite = Suite::kTrain;
  int function_id = 1;
  int instance_id = 0;
  int dimension = 5;

  friend bool operator==(const ProblemId&, const ProblemId&) = default;

  std::string key() const;
  static ProblemId from_key(const std::string& key);
};

/// Identity of one collected run within a dataset.
struct RunKey {
  Suite suite = Suite::kTrain;
  int function_id = 1;
  int instance_id = 0;
  int dimension = 5;
  int run_index = 0;
  std::uint64_t seed = 0;

  ProblemId problem() const {
    return ProblemId{suite, function_id, instance_id, dimension};
  }

  friend bool operator==(const RunKey&, const RunKey&) = default;
  friend auto operator<=>(const RunKey&, const RunKey&) = default;

  std::string key() const;
  static RunKey from_key(const std::string& key);
};

/// Ground-truth outcome of one warm-started branch.
struct PerformanceRow {
  RunKey key;
  AlgorithmId algorithm = AlgorithmId::kCmaNonElitist;
  std::uint64_t a2_budget = 0;
  double precision = 0.0;

  friend bool operator==(const PerformanceRow&, const PerformanceRow&) = default;
};

struct NotFoundError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Stored artifact has a different schema version than this build writes.
struct MigrationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Feature vector does not match the schema a model was trained with.
struct SchemaMismatchError : std::runtime_error {
  SchemaMismatchError(std::string what, std::vector<std::string> missing,
                      std::vector<std::string> extra)
      : std::runtime_error(std::move(what)),
        missing_columns(std::move(missing)),
        extra_columns(std::move(extra)) {}
  std::vector<std::string> missing_columns;
  std::vector<std::string> extra_columns;
};

}  // namespace trajsel

#endif
