#include "trajsel/evaluation.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "trajsel/rng.hpp"

namespace trajsel {

namespace {

// fold seeds and grid seeds hang off these tags
enum : std::uint64_t { kTagFold = 21, kTagGrid = 22 };

std::map<RunKey, int> index_rows(const std::vector<RunKey>& keys) {
  std::map<RunKey, int> out;
  for (std::size_t i = 0; i < keys.size(); ++i)
    out[keys[i]] = static_cast<int>(i);
  return out;
}

}  // namespace

std::string to_string(FoldScheme s) {
  return s == FoldScheme::kLeaveInstanceOut ? "leave_instance_out"
                                            : "leave_run_out";
}

FoldScheme fold_scheme_from_string(const std::string& s) {
  if (s == "leave_instance_out" || s == "instance")
    return FoldScheme::kLeaveInstanceOut;
  if (s == "leave_run_out" || s == "run") return FoldScheme::kLeaveRunOut;
  throw ConfigError("unknown fold scheme '" + s + "'");
}

std::vector<FoldSpec> make_folds(const std::vector<RunKey>& keys,
                                 FoldScheme scheme, int repeats,
                                 double train_fraction, std::uint64_t seed) {
  if (keys.empty()) throw ConfigError("make_folds: empty dataset");

  auto split_count = [&](int n) {
    const int k = static_cast<int>(std::lround(train_fraction * n));
    return std::clamp(k, 1, n - 1);
  };

  std::vector<FoldSpec> folds;
  for (int rep = 0; rep < repeats; ++rep) {
    FoldSpec fold;
    fold.scheme = scheme;
    fold.repeat_index = rep;
    fold.seed = Rng(seed).fork(kTagFold).fork(static_cast<std::uint64_t>(rep))
                    .next_u64();
    Rng rng(fold.seed);

    if (scheme == FoldScheme::kLeaveInstanceOut) {
      // function -> its instances
      std::map<int, std::set<int>> instances;
      for (const auto& k : keys) instances[k.function_id].insert(k.instance_id);
      std::map<std::pair<int, int>, bool> instance_in_train;
      for (auto& [fid, iids] : instances) {
        if (iids.size() < 2)
          throw ConfigError(
              "leave-instance-out needs >= 2 instances per function; function " +
              std::to_string(fid) + " has " + std::to_string(iids.size()));
        std::vector<int> order(iids.begin(), iids.end());
        for (std::size_t i = order.size() - 1; i > 0; --i)
          std::swap(order[i], order[rng.next_below(i + 1)]);
        const int n_train = split_count(static_cast<int>(order.size()));
        for (std::size_t i = 0; i < order.size(); ++i)
          instance_in_train[{fid, order[i]}] = static_cast<int>(i) < n_train;
      }
      for (const auto& k : keys)
        (instance_in_train.at({k.function_id, k.instance_id}) ? fold.train
                                                              : fold.test)
            .push_back(k);
    } else {
      std::map<std::pair<int, int>, std::vector<RunKey>> groups;
      for (const auto& k : keys)
        groups[{k.function_id, k.instance_id}].push_back(k);
      for (auto& [group, members] : groups) {
        std::sort(members.begin(), members.end());
        if (members.size() < 2)
          throw ConfigError("leave-run-out needs >= 2 runs per instance");
        for (std::size_t i = members.size() - 1; i > 0; --i)
          std::swap(members[i], members[rng.next_below(i + 1)]);
        const int n_train = split_count(static_cast<int>(members.size()));
        for (std::size_t i = 0; i < members.size(); ++i)
          (static_cast<int>(i) < n_train ? fold.train : fold.test)
              .push_back(members[i]);
      }
    }
    std::sort(fold.train.begin(), fold.train.end());
    std::sort(fold.test.begin(), fold.test.end());
    folds.push_back(std::move(fold));
  }
  return folds;
}

const std::vector<std::string>& feature_modes() {
  static const std::vector<std::string> modes = {"ela", "ts", "ela_ts"};
  return modes;
}

FeatureMatrix FeatureBundle::by_mode(const std::string& mode) const {
  if (mode == "ela") return ela;
  if (mode == "ts") return ts.select_columns(selected_ts);
  if (mode == "ela_ts")
    return FeatureMatrix::concat(ela, ts.select_columns(selected_ts));
  throw ConfigError("unknown feature mode '" + mode + "'");
}

TrainedModel train_performance_model(const FeatureMatrix& train_features,
                                     const PerformanceTable& perf,
                                     AlgorithmId algorithm,
                                     std::uint64_t a2_budget, int grid_cv_folds,
                                     std::uint64_t seed, int jobs) {
  const BudgetSlice slice = BudgetSlice::from(perf, a2_budget);

  FeatureMatrix imputed = train_features;
  Eigen::VectorXd medians = imputed.column_medians();
  for (int c = 0; c < medians.size(); ++c)
    if (!std::isfinite(medians[c])) medians[c] = 0.0;
  imputed.impute(medians);

  Eigen::VectorXd y(imputed.n_rows());
  std::vector<int> groups;
  groups.reserve(static_cast<std::size_t>(imputed.n_rows()));
  for (int i = 0; i < imputed.n_rows(); ++i) {
    const RunKey& key = imputed.keys[static_cast<std::size_t>(i)];
    y[i] = target_transform(
        slice.row(key)[static_cast<std::size_t>(algorithm)]);
    groups.push_back(key.function_id * 1000 + key.instance_id);
  }

  GridSearchResult gs =
      grid_search(imputed.values, y, groups, grid_cv_folds, seed, jobs);

  TrainedModel model;
  model.forest = std::move(gs.model);
  model.feature_names = imputed.names;
  model.imputation = medians;
  model.chosen = gs.best;
  model.cv_mse = gs.best_cv_mse;
  return model;
}

std::array<double, kNumAlgorithms> best_algorithm_fractions(
    const PerformanceTable& table, std::uint64_t budget) {
  const BudgetSlice slice = BudgetSlice::from(table, budget);
  std::array<double, kNumAlgorithms> fractions{};
  for (const auto& key : slice.keys)
    for (AlgorithmId a : slice.winners(key))
      fractions[static_cast<std::size_t>(a)] += 1.0;
  for (auto& f : fractions) f /= static_cast<double>(slice.keys.size());
  return fractions;
}

ScenarioReport evaluate_scenario(const FeatureBundle& features,
                                 const PerformanceTable& perf,
                                 const std::vector<FoldSpec>& folds,
                                 std::uint64_t a2_budget,
                                 const EvaluationOptions& opt) {
  ScenarioReport report;
  report.a2_budget = a2_budget;
  if (!features.ela.keys.empty())
    report.dimension = features.ela.keys.front().dimension;
  if (!folds.empty()) report.fold_scheme = to_string(folds.front().scheme);

  const BudgetSlice slice = BudgetSlice::from(perf, a2_budget);
  const Baselines baselines = build_baselines(perf, a2_budget);
  report.policy_ratios["vbs_run"] = mean_ratio(baselines.vbs_run, slice);
  report.policy_ratios["vbs_iid"] = mean_ratio(baselines.vbs_iid, slice);
  report.policy_ratios["vbs_fid"] = mean_ratio(baselines.vbs_fid, slice);
  report.policy_ratios["sbs"] = mean_ratio(baselines.sbs, slice);
  report.best_fractions = best_algorithm_fractions(perf, a2_budget);

  // per-function oracle rows
  {
    std::map<int, std::vector<RunKey>> by_fid;
    for (const auto& key : slice.keys) by_fid[key.function_id].push_back(key);
    for (const auto& [fid, group_keys] : by_fid) {
      for (const auto& [label, policy] :
           {std::pair<std::string, const BaselinePolicy*>{"vbs_iid",
                                                          &baselines.vbs_iid},
            {"vbs_fid", &baselines.vbs_fid},
            {"sbs", &baselines.sbs}}) {
        double sum = 0.0;
        for (const auto& key : group_keys) {
          const auto a = policy->choice(key);
          sum += performance_ratio(slice.vbs_precision(key),
                                   slice.row(key)[static_cast<std::size_t>(a)]);
        }
        report.per_function_ratios[label][fid] =
            sum / static_cast<double>(group_keys.size());
      }
    }
  }

  for (std::size_t mode_i = 0; mode_i < opt.modes.size(); ++mode_i) {
    const std::string& mode = opt.modes[mode_i];
    const FeatureMatrix mode_features = features.by_mode(mode);
    const auto row_of = index_rows(mode_features.keys);
    std::map<int, double> fn_ratio_sum;
    std::map<int, int> fn_ratio_count;

    for (std::size_t fold_i = 0; fold_i < folds.size(); ++fold_i) {
      const FoldSpec& fold = folds[fold_i];
      try {
        std::vector<int> train_rows, test_rows;
        for (const auto& key : fold.train) train_rows.push_back(row_of.at(key));
        for (const auto& key : fold.test) test_rows.push_back(row_of.at(key));
        const FeatureMatrix train_view = mode_features.select_rows(train_rows);
        FeatureMatrix test_view = mode_features.select_rows(test_rows);

        // six per-algorithm models trained inside this fold
        ModelBundle bundle;
        for (AlgorithmId a : kAllAlgorithms) {
          const std::uint64_t seed =
              Rng(opt.seed).fork(kTagGrid).fork(fold_i).fork(mode_i)
                  .fork(static_cast<std::uint64_t>(a))
                  .next_u64();
          bundle.put(mode, a2_budget, a,
                     train_performance_model(train_view, perf, a, a2_budget,
                                             opt.grid_cv_folds, seed, opt.jobs));
        }

        double ratio_sum = 0.0;
        double policy_sum[4] = {0, 0, 0, 0};
        for (int r = 0; r < test_view.n_rows(); ++r) {
          const RunKey& key = test_view.keys[static_cast<std::size_t>(r)];
          const auto preds = bundle.predict_all(
              mode, a2_budget, test_view.names, test_view.values.row(r).transpose());
          SelectionDecision d = select(key, a2_budget, mode, preds);
          const double ratio = performance_ratio(
              slice.vbs_precision(key),
              slice.row(key)[static_cast<std::size_t>(d.chosen)]);
          ratio_sum += ratio;
          fn_ratio_sum[key.function_id] += ratio;
          ++fn_ratio_count[key.function_id];
          report.decisions.push_back(std::move(d));

          const BaselinePolicy* pols[4] = {&baselines.vbs_run, &baselines.vbs_iid,
                                           &baselines.vbs_fid, &baselines.sbs};
          for (int p = 0; p < 4; ++p) {
            const auto a = pols[p]->choice(key);
            policy_sum[p] += performance_ratio(
                slice.vbs_precision(key),
                slice.row(key)[static_cast<std::size_t>(a)]);
          }
        }
        const auto n_test = static_cast<double>(test_view.n_rows());
        report.fold_selector_ratios[mode].push_back(ratio_sum / n_test);
        if (mode_i == 0) {
          report.fold_policy_ratios["vbs_run"].push_back(policy_sum[0] / n_test);
          report.fold_policy_ratios["vbs_iid"].push_back(policy_sum[1] / n_test);
          report.fold_policy_ratios["vbs_fid"].push_back(policy_sum[2] / n_test);
          report.fold_policy_ratios["sbs"].push_back(policy_sum[3] / n_test);
        }
      } catch (const std::exception&) {
        report.flagged_folds.push_back(static_cast<int>(fold_i));
      }
    }

    const auto& fold_ratios = report.fold_selector_ratios[mode];
    if (!fold_ratios.empty())
      report.selector_ratios[mode] =
          std::accumulate(fold_ratios.begin(), fold_ratios.end(), 0.0) /
          static_cast<double>(fold_ratios.size());
    for (const auto& [fid, sum] : fn_ratio_sum)
      report.per_function_ratios["selector:" + mode][fid] =
          sum / fn_ratio_count[fid];
  }
  return report;
}

TransferReport transfer_evaluate(const FeatureBundle& train_features,
                                 const PerformanceTable& train_perf,
                                 const FeatureBundle& test_features,
                                 const PerformanceTable& test_perf,
                                 std::uint64_t a2_budget,
                                 const EvaluationOptions& opt) {
  TransferReport report;
  report.a2_budget = a2_budget;
  const BudgetSlice test_slice = BudgetSlice::from(test_perf, a2_budget);

  // oracle views of the transfer set
  {
    const Baselines base = build_baselines(test_perf, a2_budget);
    report.policy_ratios["vbs_run"] = mean_ratio(base.vbs_run, test_slice);
    report.policy_ratios["sbs"] = mean_ratio(base.sbs, test_slice);
  }
  std::map<int, int> runs_per_function;
  for (const auto& key : test_slice.keys) {
    ++runs_per_function[key.function_id];
    for (AlgorithmId a : test_slice.winners(key))
      report.optimal_fractions[key.function_id][static_cast<std::size_t>(a)] +=
          1.0;
  }
  for (auto& [fid, fractions] : report.optimal_fractions)
    for (auto& f : fractions) f /= runs_per_function[fid];

  for (std::size_t mode_i = 0; mode_i < opt.modes.size(); ++mode_i) {
    const std::string& mode = opt.modes[mode_i];
    const FeatureMatrix train_view = train_features.by_mode(mode);
    FeatureMatrix test_view = test_features.by_mode(mode);

    ModelBundle bundle;
    for (AlgorithmId a : kAllAlgorithms) {
      const std::uint64_t seed =
          Rng(opt.seed).fork(kTagGrid).fork(1000 + mode_i)
              .fork(static_cast<std::uint64_t>(a))
              .next_u64();
      bundle.put(mode, a2_budget, a,
                 train_performance_model(train_view, train_perf, a, a2_budget,
                                         opt.grid_cv_folds, seed, opt.jobs));
    }

    double ratio_sum = 0.0;
    std::map<int, std::array<double, kNumAlgorithms>> selected;
    for (int r = 0; r < test_view.n_rows(); ++r) {
      const RunKey& key = test_view.keys[static_cast<std::size_t>(r)];
      const auto preds = bundle.predict_all(mode, a2_budget, test_view.names,
                                            test_view.values.row(r).transpose());
      SelectionDecision d = select(key, a2_budget, mode, preds);
      ratio_sum += performance_ratio(
          test_slice.vbs_precision(key),
          test_slice.row(key)[static_cast<std::size_t>(d.chosen)]);
      selected[key.function_id][static_cast<std::size_t>(d.chosen)] += 1.0;
      report.decisions.push_back(std::move(d));
    }
    report.selector_ratios[mode] =
        ratio_sum / static_cast<double>(test_view.n_rows());
    for (auto& [fid, fractions] : selected)
      for (auto& f : fractions) f /= runs_per_function[fid];
    report.selected_fractions[mode] = std::move(selected);
  }
  return report;
}

SimilarityResult similarity_analysis(const FeatureMatrix& train_runs,
                                     const FeatureMatrix& test_runs) {
  if (train_runs.names != test_runs.names)
    throw SchemaMismatchError("similarity: feature schemas differ", {}, {});

  auto problem_medians = [](const FeatureMatrix& m) {
    std::map<std::pair<int, int>, std::vector<int>> by_problem;  // (suite,fid)
    for (std::size_t i = 0; i < m.keys.size(); ++i)
      by_problem[{static_cast<int>(m.keys[i].suite), m.keys[i].function_id}]
          .push_back(static_cast<int>(i));
    std::vector<std::string> labels;
    Eigen::MatrixXd medians(by_problem.size(), m.n_cols());
    int row = 0;
    for (const auto& [problem, rows] : by_problem) {
      labels.push_back(
          (problem.first == 0 ? std::string("train:") : std::string("transfer:")) +
          std::to_string(problem.second));
      const FeatureMatrix sub = m.select_rows(rows);
      medians.row(row++) = sub.column_medians().transpose();
    }
    return std::pair{labels, medians};
  };

  auto [train_labels, train_median] = problem_medians(train_runs);
  auto [test_labels, test_median] = problem_medians(test_runs);

  // drop features that are degenerate on the train side or non-finite on
  // either side
  SimilarityResult result;
  std::vector<int> keep;
  for (int c = 0; c < train_median.cols(); ++c) {
    const Eigen::VectorXd col = train_median.col(c);
    const bool finite =
        col.allFinite() && test_median.col(c).allFinite();
    const double sd = std::sqrt(
        (col.array() - col.mean()).square().sum() /
        std::max<double>(1.0, static_cast<double>(col.size()) - 1.0));
    if (finite && sd > 0.0)
      keep.push_back(c);
    else
      result.dropped_features.push_back(train_runs.names[static_cast<std::size_t>(c)]);
  }
  if (keep.empty()) throw ConfigError("similarity: no usable features");

  Eigen::MatrixXd a(train_median.rows(), keep.size());
  Eigen::MatrixXd b(test_median.rows(), keep.size());
  for (std::size_t i = 0; i < keep.size(); ++i) {
    a.col(static_cast<int>(i)) = train_median.col(keep[i]);
    b.col(static_cast<int>(i)) = test_median.col(keep[i]);
  }

  // standardize with train statistics only
  for (int c = 0; c < a.cols(); ++c) {
    const double mean = a.col(c).mean();
    const double sd = std::sqrt((a.col(c).array() - mean).square().sum() /
                                std::max<double>(1.0, a.rows() - 1.0));
    a.col(c) = (a.col(c).array() - mean) / sd;
    b.col(c) = (b.col(c).array() - mean) / sd;
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinV);
  const double floor_sv = 1e-10 * svd.singularValues().maxCoeff();
  int rank = 0;
  for (int i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()[i] > floor_sv) ++rank;
  result.rank = rank;
  const Eigen::MatrixXd basis = svd.matrixV().leftCols(rank);

  Eigen::MatrixXd projected(a.rows() + b.rows(), rank);
  projected.topRows(a.rows()) = a * basis;
  projected.bottomRows(b.rows()) = b * basis;

  const int n = static_cast<int>(projected.rows());
  result.correlation.resize(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      const Eigen::VectorXd u = projected.row(i);
      const Eigen::VectorXd v = projected.row(j);
      const double mu = u.mean(), mv = v.mean();
      const double num = ((u.array() - mu) * (v.array() - mv)).sum();
      const double den = std::sqrt((u.array() - mu).square().sum() *
                                   (v.array() - mv).square().sum());
      const double corr = den > 0.0 ? num / den : (i == j ? 1.0 : 0.0);
      result.correlation(i, j) = corr;
      result.correlation(j, i) = corr;
    }
    result.correlation(i, i) = 1.0;
  }

  result.problem_labels = train_labels;
  result.problem_labels.insert(result.problem_labels.end(), test_labels.begin(),
                               test_labels.end());
  result.n_train = static_cast<int>(train_labels.size());
  return result;
}

}  // namespace trajsel
