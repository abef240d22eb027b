#include "trajsel/selector.hpp"

#include <algorithm>
#include <cmath>

namespace trajsel {

std::string to_string(PolicyKind k) {
  switch (k) {
    case PolicyKind::kVbsRun: return "vbs_run";
    case PolicyKind::kVbsInstance: return "vbs_iid";
    case PolicyKind::kVbsFunction: return "vbs_fid";
    case PolicyKind::kSbs: return "sbs";
  }
  return "?";
}

SelectionDecision select(const RunKey& key, std::uint64_t a2_budget,
                         const std::string& mode,
                         const std::array<double, kNumAlgorithms>& predictions) {
  SelectionDecision d;
  d.key = key;
  d.a2_budget = a2_budget;
  d.mode = mode;
  d.predictions = predictions;
  int best = 0;
  for (int a = 1; a < kNumAlgorithms; ++a)
    if (predictions[static_cast<std::size_t>(a)] <
        predictions[static_cast<std::size_t>(best)])
      best = a;
  d.chosen = kAllAlgorithms[static_cast<std::size_t>(best)];
  for (int a = 0; a < kNumAlgorithms; ++a)
    if (a != best && predictions[static_cast<std::size_t>(a)] ==
                         predictions[static_cast<std::size_t>(best)])
      d.tie = true;
  return d;
}

BudgetSlice BudgetSlice::from(const PerformanceTable& table,
                              std::uint64_t budget) {
  BudgetSlice s;
  s.a2_budget = budget;
  for (const auto& row : table.rows) {
    if (row.a2_budget != budget) continue;
    auto [it, inserted] = s.precisions.try_emplace(row.key);
    if (inserted) {
      it->second.fill(std::numeric_limits<double>::quiet_NaN());
      s.keys.push_back(row.key);
    }
    it->second[static_cast<std::size_t>(row.algorithm)] = row.precision;
  }
  std::sort(s.keys.begin(), s.keys.end());
  for (const auto& key : s.keys)
    for (double p : s.precisions.at(key))
      if (!std::isfinite(p))
        throw ConfigError("incomplete performance row set for " + key.key() +
                          " at budget " + std::to_string(budget));
  return s;
}

const std::array<double, kNumAlgorithms>& BudgetSlice::row(
    const RunKey& key) const {
  const auto it = precisions.find(key);
  if (it == precisions.end())
    throw NotFoundError("no performance rows for " + key.key());
  return it->second;
}

double BudgetSlice::vbs_precision(const RunKey& key) const {
  const auto& r = row(key);
  return *std::min_element(r.begin(), r.end());
}

std::vector<AlgorithmId> BudgetSlice::winners(const RunKey& key) const {
  const auto& r = row(key);
  const double best = *std::min_element(r.begin(), r.end());
  std::vector<AlgorithmId> out;
  for (int a = 0; a < kNumAlgorithms; ++a)
    if (r[static_cast<std::size_t>(a)] == best)
      out.push_back(kAllAlgorithms[static_cast<std::size_t>(a)]);
  return out;
}

AlgorithmId BaselinePolicy::choice(const RunKey& key) const {
  switch (kind) {
    case PolicyKind::kVbsRun: {
      const auto it = per_run.find(key);
      if (it == per_run.end())
        throw NotFoundError("per-run VBS has no entry for " + key.key());
      return it->second;
    }
    case PolicyKind::kVbsInstance: {
      const auto it = per_instance.find({key.function_id, key.instance_id});
      if (it == per_instance.end())
        throw NotFoundError("per-instance VBS has no entry for " + key.key());
      return it->second;
    }
    case PolicyKind::kVbsFunction: {
      const auto it = per_function.find(key.function_id);
      if (it == per_function.end())
        throw NotFoundError("per-function VBS has no entry for " + key.key());
      return it->second;
    }
    case PolicyKind::kSbs:
      return global;
  }
  throw ConfigError("invalid policy kind");
}

namespace {

// group criterion shared by VBS_IID / VBS_FID: the algorithm with the best
// mean per-run ratio, ties to the lowest ordinal
template <typename GroupKey>
std::map<GroupKey, AlgorithmId> best_per_group(
    const BudgetSlice& slice,
    const std::function<GroupKey(const RunKey&)>& group_of) {
  std::map<GroupKey, std::array<double, kNumAlgorithms>> sums;
  std::map<GroupKey, int> counts;
  for (const auto& key : slice.keys) {
    const double vbs = slice.vbs_precision(key);
    auto [it, inserted] = sums.try_emplace(group_of(key));
    if (inserted) it->second.fill(0.0);
    const auto& row = slice.row(key);
    for (int a = 0; a < kNumAlgorithms; ++a)
      it->second[static_cast<std::size_t>(a)] +=
          performance_ratio(vbs, row[static_cast<std::size_t>(a)]);
    ++counts[group_of(key)];
  }
  std::map<GroupKey, AlgorithmId> out;
  for (const auto& [group, acc] : sums) {
    int best = 0;
    for (int a = 1; a < kNumAlgorithms; ++a)
      if (acc[static_cast<std::size_t>(a)] > acc[static_cast<std::size_t>(best)])
        best = a;
    out[group] = kAllAlgorithms[static_cast<std::size_t>(best)];
  }
  return out;
}

}  // namespace

Baselines build_baselines(const PerformanceTable& table, std::uint64_t budget) {
  const BudgetSlice slice = BudgetSlice::from(table, budget);
  if (slice.keys.empty())
    throw ConfigError("no performance rows at budget " + std::to_string(budget));

  Baselines b;
  b.vbs_run.kind = PolicyKind::kVbsRun;
  b.vbs_iid.kind = PolicyKind::kVbsInstance;
  b.vbs_fid.kind = PolicyKind::kVbsFunction;
  b.sbs.kind = PolicyKind::kSbs;

  std::array<std::size_t, kNumAlgorithms> win_counts{};
  for (const auto& key : slice.keys) {
    const auto winners = slice.winners(key);
    b.vbs_run.per_run[key] = winners.front();  // canonical: lowest ordinal
    for (AlgorithmId a : winners) ++win_counts[static_cast<std::size_t>(a)];
  }

  b.vbs_iid.per_instance = best_per_group<std::pair<int, int>>(
      slice, [](const RunKey& k) {
        return std::pair<int, int>{k.function_id, k.instance_id};
      });
  b.vbs_fid.per_function =
      best_per_group<int>(slice, [](const RunKey& k) { return k.function_id; });

  int best = 0;
  for (int a = 1; a < kNumAlgorithms; ++a)
    if (win_counts[static_cast<std::size_t>(a)] >
        win_counts[static_cast<std::size_t>(best)])
      best = a;
  b.sbs.global = kAllAlgorithms[static_cast<std::size_t>(best)];
  return b;
}

double mean_ratio(const BaselinePolicy& policy, const BudgetSlice& slice) {
  double sum = 0.0;
  for (const auto& key : slice.keys) {
    const auto a = policy.choice(key);
    sum += performance_ratio(slice.vbs_precision(key),
                             slice.row(key)[static_cast<std::size_t>(a)]);
  }
  return sum / static_cast<double>(slice.keys.size());
}

double mean_ratio(const std::map<RunKey, AlgorithmId>& decisions,
                  const BudgetSlice& slice) {
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& [key, a] : decisions) {
    sum += performance_ratio(slice.vbs_precision(key),
                             slice.row(key)[static_cast<std::size_t>(a)]);
    ++count;
  }
  if (count == 0) throw ConfigError("mean_ratio over an empty decision set");
  return sum / static_cast<double>(count);
}

}  // namespace trajsel
