#ifndef TRAJSEL_SELECTOR_HPP
#define TRAJSEL_SELECTOR_HPP

#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "trajsel/store.hpp"
#include "trajsel/types.hpp"

namespace trajsel {

/// Precision clamp shared by the ratio and the regression target so a hit
/// of the optimum stays finite.
inline constexpr double kPrecisionFloor = 1e-12;

/// Per-run VBS precision divided by the achieved precision, both clamped
/// below; 1 is optimal and 0/0 resolves to 1 by the clamp.
inline double performance_ratio(double vbs_precision, double achieved_precision) {
  const double vbs = std::max(vbs_precision, kPrecisionFloor);
  const double got = std::max(achieved_precision, kPrecisionFloor);
  return vbs / got;
}

struct SelectionDecision {
  RunKey key;
  std::uint64_t a2_budget = 0;
  std::string mode;
  std::array<double, kNumAlgorithms> predictions{};
  AlgorithmId chosen = AlgorithmId::kCmaNonElitist;
  bool tie = false;
};

/// Argmin over the six predicted log-precisions; exact ties go to the
/// lowest algorithm ordinal and set the tie flag.
SelectionDecision select(const RunKey& key, std::uint64_t a2_budget,
                         const std::string& mode,
                         const std::array<double, kNumAlgorithms>& predictions);

/// One budget's slice of the performance table, indexed per run.
struct BudgetSlice {
  std::uint64_t a2_budget = 0;
  std::vector<RunKey> keys;  // sorted
  std::map<RunKey, std::array<double, kNumAlgorithms>> precisions;

  static BudgetSlice from(const PerformanceTable& table, std::uint64_t budget);

  const std::array<double, kNumAlgorithms>& row(const RunKey& key) const;
  double vbs_precision(const RunKey& key) const;  // row minimum
  /// All algorithms achieving the row minimum (ties included).
  std::vector<AlgorithmId> winners(const RunKey& key) const;
};

enum class PolicyKind { kVbsRun, kVbsInstance, kVbsFunction, kSbs };

std::string to_string(PolicyKind k);

/// A baseline selector realized as an explicit choice table.
struct BaselinePolicy {
  PolicyKind kind = PolicyKind::kVbsRun;
  std::map<RunKey, AlgorithmId> per_run;          // VBS_RUN
  std::map<std::pair<int, int>, AlgorithmId> per_instance;  // (fid, iid)
  std::map<int, AlgorithmId> per_function;        // fid
  AlgorithmId global = AlgorithmId::kCmaNonElitist;  // SBS

  AlgorithmId choice(const RunKey& key) const;
};

struct Baselines {
  BaselinePolicy vbs_run;
  BaselinePolicy vbs_iid;
  BaselinePolicy vbs_fid;
  BaselinePolicy sbs;
};

/// VBS_RUN takes the per-run argmin; VBS_IID / VBS_FID pick the single
/// algorithm maximizing the mean per-run performance ratio within the
/// instance / function group (so the dominance chain is structural); SBS is
/// the algorithm most often among the per-run winners, ties counted for all.
Baselines build_baselines(const PerformanceTable& table, std::uint64_t budget);

/// Mean per-run performance ratio of a policy over the slice.
double mean_ratio(const BaselinePolicy& policy, const BudgetSlice& slice);
/// Mean ratio of explicit per-run decisions (an algorithm selector).
double mean_ratio(const std::map<RunKey, AlgorithmId>& decisions,
                  const BudgetSlice& slice);

}  // namespace trajsel

#endif
