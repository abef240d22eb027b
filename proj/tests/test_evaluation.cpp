#include <algorithm>
#include <cmath>
#include <set>

#include "doctest.h"
#include "trajsel/evaluation.hpp"
#include "trajsel/rng.hpp"

using namespace trajsel;

namespace {

std::vector<RunKey> dataset_keys(int fids, int iids, int runs) {
  std::vector<RunKey> keys;
  for (int f = 1; f <= fids; ++f)
    for (int i = 1; i <= iids; ++i)
      for (int r = 0; r < runs; ++r)
        keys.push_back(RunKey{Suite::kTrain, f, i, 5, r,
                              static_cast<std::uint64_t>(f * 1000 + i * 10 + r)});
  return keys;
}

// Synthetic learnable dataset: function k's designated algorithm (k mod 6)
// is an order of magnitude better on every run, and feature 0 encodes the
// function id with small noise.
struct SyntheticData {
  FeatureBundle features;
  PerformanceTable perf;
};

SyntheticData make_learnable(int fids, int iids, int runs, std::uint64_t budget,
                             std::uint64_t seed) {
  SyntheticData d;
  const auto keys = dataset_keys(fids, iids, runs);
  Rng rng(seed);

  d.features.ela.keys = keys;
  for (int c = 0; c < 5; ++c)
    d.features.ela.names.push_back("ela_f" + std::to_string(c));
  d.features.ela.values.resize(static_cast<int>(keys.size()), 5);

  d.features.ts.keys = keys;
  for (int c = 0; c < 3; ++c)
    d.features.ts.names.push_back("ts_f" + std::to_string(c));
  d.features.ts.values.resize(static_cast<int>(keys.size()), 3);
  d.features.selected_ts = d.features.ts.names;

  for (std::size_t i = 0; i < keys.size(); ++i) {
    const int row = static_cast<int>(i);
    d.features.ela.values(row, 0) = keys[i].function_id + 0.01 * rng.next_gauss();
    for (int c = 1; c < 5; ++c)
      d.features.ela.values(row, c) = rng.next_double();
    d.features.ts.values(row, 0) = keys[i].function_id + 0.01 * rng.next_gauss();
    for (int c = 1; c < 3; ++c) d.features.ts.values(row, c) = rng.next_double();

    const int best = keys[i].function_id % kNumAlgorithms;
    for (int a = 0; a < kNumAlgorithms; ++a) {
      const double precision =
          a == best ? 1e-8 * (1.0 + 0.1 * rng.next_double())
                    : 1e-2 * (a + 1) * (1.0 + 0.1 * rng.next_double());
      d.perf.rows.push_back({keys[i], kAllAlgorithms[a], budget, precision});
    }
  }
  return d;
}

}  // namespace

TEST_CASE("folds: proportions, partition, determinism, grouping") {
  const auto keys = dataset_keys(3, 10, 4);
  const auto folds =
      make_folds(keys, FoldScheme::kLeaveInstanceOut, 5, 0.7, 42);
  CHECK(folds.size() == 5);

  std::set<std::uint64_t> fold_seeds;
  for (const auto& fold : folds) {
    fold_seeds.insert(fold.seed);
    // exact partition
    CHECK(fold.train.size() + fold.test.size() == keys.size());
    std::set<RunKey> all(fold.train.begin(), fold.train.end());
    all.insert(fold.test.begin(), fold.test.end());
    CHECK(all.size() == keys.size());

    // 10 instances -> 7 train / 3 test per function, all runs together
    std::map<int, std::set<int>> train_inst, test_inst;
    for (const auto& k : fold.train) train_inst[k.function_id].insert(k.instance_id);
    for (const auto& k : fold.test) test_inst[k.function_id].insert(k.instance_id);
    for (int f = 1; f <= 3; ++f) {
      CHECK(train_inst[f].size() == 7);
      CHECK(test_inst[f].size() == 3);
      for (int i : train_inst[f]) CHECK(test_inst[f].count(i) == 0);
    }
  }
  CHECK(fold_seeds.size() == 5);  // distinct splits per repeat

  // determinism
  const auto again =
      make_folds(keys, FoldScheme::kLeaveInstanceOut, 5, 0.7, 42);
  for (int i = 0; i < 5; ++i) {
    CHECK(again[static_cast<std::size_t>(i)].train ==
          folds[static_cast<std::size_t>(i)].train);
  }

  // leave-run-out splits within each instance
  const auto run_folds = make_folds(keys, FoldScheme::kLeaveRunOut, 2, 0.7, 1);
  for (const auto& fold : run_folds) {
    std::map<std::pair<int, int>, int> train_runs;
    for (const auto& k : fold.train)
      ++train_runs[{k.function_id, k.instance_id}];
    for (const auto& [group, count] : train_runs) CHECK(count == 3);  // of 4
  }

  // too few instances for the instance scheme
  CHECK_THROWS_AS(
      make_folds(dataset_keys(2, 1, 5), FoldScheme::kLeaveInstanceOut, 1, 0.7, 0),
      ConfigError);
}

TEST_CASE("best-algorithm fractions: ties count for every winner") {
  PerformanceTable all_tie;
  const auto keys = dataset_keys(2, 1, 2);
  for (const auto& k : keys)
    for (AlgorithmId a : kAllAlgorithms)
      all_tie.rows.push_back({k, a, 50, 0.5});
  const auto fractions = best_algorithm_fractions(all_tie, 50);
  double sum = 0.0;
  for (double f : fractions) {
    CHECK(f == 1.0);
    sum += f;
  }
  CHECK(sum == doctest::Approx(6.0));

  // random table vs direct recount
  Rng rng(9);
  PerformanceTable t;
  for (const auto& k : keys)
    for (AlgorithmId a : kAllAlgorithms)
      t.rows.push_back({k, a, 50, rng.next_double()});
  const auto got = best_algorithm_fractions(t, 50);
  std::array<double, kNumAlgorithms> want{};
  const auto slice = BudgetSlice::from(t, 50);
  for (const auto& k : keys) {
    const auto& row = slice.row(k);
    const double best = *std::min_element(row.begin(), row.end());
    for (int a = 0; a < kNumAlgorithms; ++a)
      if (row[static_cast<std::size_t>(a)] == best)
        want[static_cast<std::size_t>(a)] += 1.0 / keys.size();
  }
  for (int a = 0; a < kNumAlgorithms; ++a)
    CHECK(got[static_cast<std::size_t>(a)] ==
          doctest::Approx(want[static_cast<std::size_t>(a)]));
}

TEST_CASE("scenario evaluation on a learnable dataset") {
  const std::uint64_t budget = 100;
  const auto data = make_learnable(4, 3, 3, budget, 7);
  const auto folds = make_folds(data.features.ela.keys,
                                FoldScheme::kLeaveInstanceOut, 1, 0.7, 11);

  EvaluationOptions opt;
  opt.modes = {"ela"};
  opt.grid_cv_folds = 3;
  opt.seed = 5;
  opt.jobs = 2;
  const auto report =
      evaluate_scenario(data.features, data.perf, folds, budget, opt);

  CHECK(report.policy_ratios.at("vbs_run") == 1.0);
  CHECK(report.policy_ratios.at("vbs_run") >= report.policy_ratios.at("vbs_iid"));
  CHECK(report.policy_ratios.at("vbs_iid") >=
        report.policy_ratios.at("vbs_fid") - 1e-12);
  CHECK(report.policy_ratios.at("vbs_fid") >=
        report.policy_ratios.at("sbs") - 1e-12);

  REQUIRE(report.selector_ratios.count("ela") == 1);
  const double selector = report.selector_ratios.at("ela");
  CHECK(selector >= 0.0);
  CHECK(selector <= 1.0);
  // features encode the function id, so the selector beats the single best
  CHECK(selector >= report.policy_ratios.at("sbs"));
  CHECK(report.flagged_folds.empty());
  CHECK_FALSE(report.decisions.empty());
  for (const auto& d : report.decisions) CHECK(d.mode == "ela");
}

TEST_CASE("transfer evaluation: fractions and ratio bookkeeping") {
  const std::uint64_t budget = 100;
  const auto train = make_learnable(4, 3, 3, budget, 3);

  // transfer set: same feature semantics, different function ids
  SyntheticData test = make_learnable(3, 1, 4, budget, 17);
  for (auto& k : test.features.ela.keys) k.suite = Suite::kTransfer;
  for (auto& k : test.features.ts.keys) k.suite = Suite::kTransfer;
  for (auto& r : test.perf.rows) r.key.suite = Suite::kTransfer;

  EvaluationOptions opt;
  opt.modes = {"ela"};
  opt.grid_cv_folds = 3;
  opt.seed = 23;
  opt.jobs = 2;
  const auto report = transfer_evaluate(train.features, train.perf,
                                        test.features, test.perf, budget, opt);

  CHECK(report.policy_ratios.at("vbs_run") == 1.0);
  CHECK(report.selector_ratios.at("ela") >= 0.0);
  CHECK(report.selector_ratios.at("ela") <= 1.0);

  for (const auto& [fid, fractions] : report.selected_fractions.at("ela")) {
    double sum = 0.0;
    for (double f : fractions) sum += f;
    CHECK(sum == doctest::Approx(1.0));  // the selector picks exactly one
  }
  for (const auto& [fid, fractions] : report.optimal_fractions) {
    double sum = 0.0;
    for (double f : fractions) sum += f;
    CHECK(sum >= 1.0 - 1e-12);  // ties can push it above one
  }
}

TEST_CASE("similarity analysis: symmetry, diagonal, duplicates, dropping") {
  Rng rng(31);
  FeatureMatrix train;
  train.names = {"a", "b", "c", "zero_var"};
  const int problems = 6, runs = 4;
  train.values.resize(problems * runs, 4);
  for (int p = 0; p < problems; ++p)
    for (int r = 0; r < runs; ++r) {
      const int row = p * runs + r;
      train.keys.push_back(RunKey{Suite::kTrain, p + 1, 1, 5, r, 0});
      train.values(row, 0) = p + 0.1 * rng.next_gauss();
      train.values(row, 1) = std::sin(p * 2.0) + 0.1 * rng.next_gauss();
      train.values(row, 2) = rng.next_gauss();
      train.values(row, 3) = 7.0;  // constant: must be dropped
    }

  // test side duplicates train problem 1's distribution
  FeatureMatrix test;
  test.names = train.names;
  test.values.resize(2 * runs, 4);
  for (int p = 0; p < 2; ++p)
    for (int r = 0; r < runs; ++r) {
      const int row = p * runs + r;
      test.keys.push_back(RunKey{Suite::kTransfer, p + 1, 0, 5, r, 0});
      // problem 1 mirrors train problem 1 exactly (same rows)
      if (p == 0) {
        test.values.row(row) = train.values.row(r);
      } else {
        test.values(row, 0) = 10 + rng.next_gauss();
        test.values(row, 1) = rng.next_gauss();
        test.values(row, 2) = rng.next_gauss();
        test.values(row, 3) = 7.0;
      }
    }

  const auto sim = similarity_analysis(train, test);
  CHECK(sim.dropped_features == std::vector<std::string>{"zero_var"});
  CHECK(sim.n_train == problems);
  const int n = static_cast<int>(sim.problem_labels.size());
  REQUIRE(sim.correlation.rows() == n);

  for (int i = 0; i < n; ++i) {
    CHECK(sim.correlation(i, i) == 1.0);
    for (int j = 0; j < n; ++j) {
      CHECK(sim.correlation(i, j) == sim.correlation(j, i));
      CHECK(sim.correlation(i, j) <= 1.0 + 1e-12);
      CHECK(sim.correlation(i, j) >= -1.0 - 1e-12);
    }
  }
  // transfer problem 1 duplicates train problem 1: correlation 1
  const int dup = sim.n_train;  // first test row
  CHECK(std::abs(sim.correlation(0, dup) - 1.0) <= 1e-10);

  CHECK_THROWS_AS(similarity_analysis(train, FeatureMatrix{{"x"}, {}, {}}),
                  SchemaMismatchError);
}
