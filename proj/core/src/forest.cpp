#include "trajsel/forest.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <set>

#include "json.hpp"
#include "trajsel/csv.hpp"
#include "trajsel/parallel.hpp"
#include "trajsel/rng.hpp"

namespace trajsel {

namespace {

using nlohmann::json;

constexpr char kBundleMagic[4] = {'R', 'F', 'B', '1'};
constexpr std::uint32_t kBundleVersion = 1;

template <typename T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw MigrationError("model stream truncated");
  return v;
}

}  // namespace

std::string to_string(MaxFeatures m) {
  switch (m) {
    case MaxFeatures::kAll: return "all";
    case MaxFeatures::kSqrt: return "sqrt";
    case MaxFeatures::kLog2: return "log2";
  }
  return "?";
}

std::string ForestParams::describe() const {
  return "n_estimators=" + std::to_string(n_estimators) +
         " max_features=" + to_string(max_features) +
         " max_depth=" + (max_depth ? std::to_string(max_depth) : "none") +
         " min_samples_split=" + std::to_string(min_samples_split);
}

std::vector<ForestParams> hyper_grid() {
  // iteration order encodes the tie preference: fewer trees first, then
  // shallower, then larger min split
  std::vector<ForestParams> grid;
  for (int trees : {100, 300})
    for (int depth : {3, 5, 15, 0})
      for (int mss : {10, 5, 2})
        for (MaxFeatures mf :
             {MaxFeatures::kAll, MaxFeatures::kSqrt, MaxFeatures::kLog2}) {
          ForestParams p;
          p.n_estimators = trees;
          p.max_depth = depth;
          p.min_samples_split = mss;
          p.max_features = mf;
          grid.push_back(p);
        }
  return grid;
}

double RandomForest::Tree::predict(const Eigen::VectorXd& x) const {
  int i = 0;
  while (nodes[static_cast<std::size_t>(i)].feature >= 0) {
    const auto& n = nodes[static_cast<std::size_t>(i)];
    i = x[n.feature] <= n.threshold ? n.left : n.right;
  }
  return nodes[static_cast<std::size_t>(i)].value;
}

namespace {

struct TreeBuilder {
  const Eigen::MatrixXd& x;
  const Eigen::VectorXd& y;
  RandomForest::Task task;
  const ForestParams& params;
  int n_classes;
  Rng rng;
  std::vector<RandomForest::Node>& nodes;
  Eigen::VectorXd& importance;

  // Impurity times node size. Values are sorted before summation so the
  // result does not depend on row presentation order.
  double impurity_times_n(const std::vector<int>& idx) const {
    if (task == RandomForest::Task::kRegression) {
      std::vector<double> vals;
      vals.reserve(idx.size());
      for (int i : idx) vals.push_back(y[i]);
      std::sort(vals.begin(), vals.end());
      double sum = 0.0, sq = 0.0;
      for (double v : vals) {
        sum += v;
        sq += v * v;
      }
      return sq - sum * sum / static_cast<double>(vals.size());
    }
    std::vector<int> counts(static_cast<std::size_t>(n_classes), 0);
    for (int i : idx) ++counts[static_cast<std::size_t>(y[i])];
    double acc = 0.0;
    for (int c : counts) acc += static_cast<double>(c) * c;
    return static_cast<double>(idx.size()) -
           acc / static_cast<double>(idx.size());
  }

  double leaf_value(const std::vector<int>& idx) const {
    if (task == RandomForest::Task::kRegression) {
      std::vector<double> vals;
      vals.reserve(idx.size());
      for (int i : idx) vals.push_back(y[i]);
      std::sort(vals.begin(), vals.end());
      double sum = 0.0;
      for (double v : vals) sum += v;
      return sum / static_cast<double>(vals.size());
    }
    std::vector<int> counts(static_cast<std::size_t>(n_classes), 0);
    for (int i : idx) ++counts[static_cast<std::size_t>(y[i])];
    int best = 0;
    for (int c = 1; c < n_classes; ++c)
      if (counts[static_cast<std::size_t>(c)] >
          counts[static_cast<std::size_t>(best)])
        best = c;
    return static_cast<double>(best);
  }

  int candidate_count() const {
    const int p = static_cast<int>(x.cols());
    switch (params.max_features) {
      case MaxFeatures::kAll: return p;
      case MaxFeatures::kSqrt:
        return std::max(1, static_cast<int>(std::ceil(std::sqrt(p))));
      case MaxFeatures::kLog2:
        return std::max(1, static_cast<int>(std::ceil(std::log2(p))));
    }
    return p;
  }

  int build(std::vector<int> idx, int depth) {
    const double node_impurity = impurity_times_n(idx);
    const bool stop = node_impurity <= 0.0 ||
                      static_cast<int>(idx.size()) < params.min_samples_split ||
                      (params.max_depth > 0 && depth >= params.max_depth);
    if (stop) return make_leaf(idx);

    const int p = static_cast<int>(x.cols());
    const int k = candidate_count();
    std::vector<int> features(static_cast<std::size_t>(p));
    std::iota(features.begin(), features.end(), 0);
    if (k < p) {
      // partial Fisher-Yates, then ascending scan order
      for (int i = 0; i < k; ++i) {
        const int j = i + static_cast<int>(
                              rng.next_below(static_cast<std::uint64_t>(p - i)));
        std::swap(features[static_cast<std::size_t>(i)],
                  features[static_cast<std::size_t>(j)]);
      }
      features.resize(static_cast<std::size_t>(k));
      std::sort(features.begin(), features.end());
    }

    int best_feature = -1;
    double best_threshold = 0.0;
    double best_children = 0.0;
    std::vector<std::pair<double, double>> pairs;  // (feature value, target)
    for (int f : features) {
      pairs.clear();
      pairs.reserve(idx.size());
      for (int i : idx) pairs.emplace_back(x(i, f), y[i]);
      std::sort(pairs.begin(), pairs.end());

      if (task == RandomForest::Task::kRegression) {
        double suml = 0.0, sql = 0.0, sumr = 0.0, sqr = 0.0;
        for (const auto& [v, t] : pairs) {
          sumr += t;
          sqr += t * t;
        }
        const auto n = static_cast<double>(pairs.size());
        for (std::size_t i = 0; i + 1 < pairs.size(); ++i) {
          const double t = pairs[i].second;
          suml += t;
          sql += t * t;
          sumr -= t;
          sqr -= t * t;
          if (pairs[i].first == pairs[i + 1].first) continue;
          const double nl = static_cast<double>(i + 1), nr = n - nl;
          const double children =
              (sql - suml * suml / nl) + (sqr - sumr * sumr / nr);
          if (best_feature < 0 || children < best_children) {
            best_children = children;
            best_feature = f;
            best_threshold =
                pairs[i].first + 0.5 * (pairs[i + 1].first - pairs[i].first);
          }
        }
      } else {
        std::vector<int> left(static_cast<std::size_t>(n_classes), 0);
        std::vector<int> right(static_cast<std::size_t>(n_classes), 0);
        for (const auto& [v, t] : pairs) ++right[static_cast<std::size_t>(t)];
        for (std::size_t i = 0; i + 1 < pairs.size(); ++i) {
          const auto cls = static_cast<std::size_t>(pairs[i].second);
          ++left[cls];
          --right[cls];
          if (pairs[i].first == pairs[i + 1].first) continue;
          const double nl = static_cast<double>(i + 1);
          const double nr = static_cast<double>(pairs.size()) - nl;
          double accl = 0.0, accr = 0.0;
          for (int c = 0; c < n_classes; ++c) {
            accl += static_cast<double>(left[static_cast<std::size_t>(c)]) *
                    left[static_cast<std::size_t>(c)];
            accr += static_cast<double>(right[static_cast<std::size_t>(c)]) *
                    right[static_cast<std::size_t>(c)];
          }
          const double children = (nl - accl / nl) + (nr - accr / nr);
          if (best_feature < 0 || children < best_children) {
            best_children = children;
            best_feature = f;
            best_threshold =
                pairs[i].first + 0.5 * (pairs[i + 1].first - pairs[i].first);
          }
        }
      }
    }

    if (best_feature < 0) return make_leaf(idx);  // all candidates constant

    importance[best_feature] += node_impurity - best_children;

    std::vector<int> left_idx, right_idx;
    for (int i : idx)
      (x(i, best_feature) <= best_threshold ? left_idx : right_idx).push_back(i);

    const int me = static_cast<int>(nodes.size());
    nodes.push_back({best_feature, best_threshold, -1, -1, 0.0});
    const int l = build(std::move(left_idx), depth + 1);
    const int r = build(std::move(right_idx), depth + 1);
    nodes[static_cast<std::size_t>(me)].left = l;
    nodes[static_cast<std::size_t>(me)].right = r;
    return me;
  }

  int make_leaf(const std::vector<int>& idx) {
    const int me = static_cast<int>(nodes.size());
    nodes.push_back({-1, 0.0, -1, -1, leaf_value(idx)});
    return me;
  }
};

}  // namespace

RandomForest RandomForest::fit(const Eigen::MatrixXd& x,
                               const Eigen::VectorXd& y,
                               const ForestParams& params, std::uint64_t seed,
                               Task task) {
  if (x.rows() != y.size() || x.rows() == 0)
    throw ConfigError("forest fit: X rows and y length must match and be > 0");
  for (int i = 0; i < y.size(); ++i)
    if (!std::isfinite(y[i]))
      throw ConfigError("forest fit: non-finite target at row " +
                        std::to_string(i) + " (impute invalid features first)");

  RandomForest rf;
  rf.params_ = params;
  rf.task_ = task;
  rf.n_features_ = static_cast<int>(x.cols());
  rf.importances_ = Eigen::VectorXd::Zero(x.cols());

  int n_classes = 1;
  if (task == Task::kClassification)
    n_classes = static_cast<int>(y.maxCoeff()) + 1;

  const int n = static_cast<int>(x.rows());
  const auto n_trees = static_cast<std::size_t>(params.n_estimators);
  rf.trees_.resize(n_trees);
  std::vector<Eigen::VectorXd> per_tree_importance(n_trees);
  std::vector<std::vector<int>> bags(n_trees);

  Rng base(seed);
  for (std::size_t t = 0; t < n_trees; ++t) {
    Rng tree_rng = base.fork(t);
    std::vector<int> idx(static_cast<std::size_t>(n));
    if (params.bootstrap) {
      for (auto& i : idx)
        i = static_cast<int>(tree_rng.next_below(static_cast<std::uint64_t>(n)));
      std::sort(idx.begin(), idx.end());
    } else {
      std::iota(idx.begin(), idx.end(), 0);
    }
    bags[t] = idx;
    per_tree_importance[t] = Eigen::VectorXd::Zero(x.cols());
    TreeBuilder builder{x,      y,        task,
                        params, n_classes, tree_rng,
                        rf.trees_[t].nodes, per_tree_importance[t]};
    builder.build(std::move(idx), 0);
  }

  for (std::size_t t = 0; t < n_trees; ++t) rf.importances_ += per_tree_importance[t];
  const double total = rf.importances_.sum();
  if (total > 0.0) rf.importances_ /= total;

  if (params.bootstrap && task == Task::kRegression) {
    Eigen::VectorXd oob_sum = Eigen::VectorXd::Zero(n);
    Eigen::VectorXi oob_count = Eigen::VectorXi::Zero(n);
    std::vector<char> in_bag(static_cast<std::size_t>(n));
    for (std::size_t t = 0; t < n_trees; ++t) {
      std::fill(in_bag.begin(), in_bag.end(), 0);
      for (int i : bags[t]) in_bag[static_cast<std::size_t>(i)] = 1;
      for (int i = 0; i < n; ++i) {
        if (in_bag[static_cast<std::size_t>(i)]) continue;
        oob_sum[i] += rf.trees_[t].predict(x.row(i).transpose());
        ++oob_count[i];
      }
    }
    double se = 0.0;
    int covered = 0;
    for (int i = 0; i < n; ++i) {
      if (oob_count[i] == 0) continue;
      const double e = oob_sum[i] / oob_count[i] - y[i];
      se += e * e;
      ++covered;
    }
    if (covered > 0) rf.oob_mse_ = se / covered;
  }
  return rf;
}

double RandomForest::predict(const Eigen::VectorXd& x) const {
  if (task_ == Task::kRegression) {
    double sum = 0.0;
    for (const auto& t : trees_) sum += t.predict(x);
    return sum / static_cast<double>(trees_.size());
  }
  std::map<int, int> votes;
  for (const auto& t : trees_) ++votes[static_cast<int>(t.predict(x))];
  int best = -1, best_count = -1;
  for (const auto& [cls, count] : votes)
    if (count > best_count) {
      best = cls;
      best_count = count;
    }
  return static_cast<double>(best);
}

Eigen::VectorXd RandomForest::predict_many(const Eigen::MatrixXd& x) const {
  Eigen::VectorXd out(x.rows());
  for (int i = 0; i < x.rows(); ++i) out[i] = predict(x.row(i).transpose());
  return out;
}

std::pair<double, double> RandomForest::prediction_range(
    const Eigen::VectorXd& x) const {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& t : trees_) {
    const double v = t.predict(x);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return {lo, hi};
}

void RandomForest::save(std::ostream& out) const {
  put(out, static_cast<std::uint8_t>(task_));
  put(out, static_cast<std::int32_t>(n_features_));
  put(out, static_cast<std::int32_t>(params_.n_estimators));
  put(out, static_cast<std::uint8_t>(params_.max_features));
  put(out, static_cast<std::int32_t>(params_.max_depth));
  put(out, static_cast<std::int32_t>(params_.min_samples_split));
  put(out, static_cast<std::uint8_t>(params_.bootstrap ? 1 : 0));
  put(out, static_cast<std::uint8_t>(oob_mse_ ? 1 : 0));
  put(out, oob_mse_ ? *oob_mse_ : 0.0);
  for (int i = 0; i < n_features_; ++i) put(out, importances_[i]);
  put(out, static_cast<std::uint64_t>(trees_.size()));
  for (const auto& t : trees_) {
    put(out, static_cast<std::uint64_t>(t.nodes.size()));
    for (const auto& n : t.nodes) {
      put(out, static_cast<std::int32_t>(n.feature));
      put(out, n.threshold);
      put(out, static_cast<std::int32_t>(n.left));
      put(out, static_cast<std::int32_t>(n.right));
      put(out, n.value);
    }
  }
}

RandomForest RandomForest::load(std::istream& in) {
  RandomForest rf;
  rf.task_ = static_cast<Task>(get<std::uint8_t>(in));
  rf.n_features_ = get<std::int32_t>(in);
  rf.params_.n_estimators = get<std::int32_t>(in);
  rf.params_.max_features = static_cast<MaxFeatures>(get<std::uint8_t>(in));
  rf.params_.max_depth = get<std::int32_t>(in);
  rf.params_.min_samples_split = get<std::int32_t>(in);
  rf.params_.bootstrap = get<std::uint8_t>(in) != 0;
  const bool has_oob = get<std::uint8_t>(in) != 0;
  const double oob = get<double>(in);
  if (has_oob) rf.oob_mse_ = oob;
  rf.importances_.resize(rf.n_features_);
  for (int i = 0; i < rf.n_features_; ++i) rf.importances_[i] = get<double>(in);
  rf.trees_.resize(get<std::uint64_t>(in));
  for (auto& t : rf.trees_) {
    t.nodes.resize(get<std::uint64_t>(in));
    for (auto& n : t.nodes) {
      n.feature = get<std::int32_t>(in);
      n.threshold = get<double>(in);
      n.left = get<std::int32_t>(in);
      n.right = get<std::int32_t>(in);
      n.value = get<double>(in);
    }
  }
  return rf;
}

GridSearchResult grid_search(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                             const std::vector<int>& groups, int k_folds,
                             std::uint64_t seed, int jobs) {
  const int n = static_cast<int>(x.rows());
  if (!groups.empty() && static_cast<int>(groups.size()) != n)
    throw ConfigError("grid_search: group labels must cover every row");

  // fold id per row; whole groups go to one fold
  std::vector<int> fold(static_cast<std::size_t>(n));
  Rng rng = Rng(seed).fork(0x6b666f6c);
  if (groups.empty()) {
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    for (int i = n - 1; i > 0; --i)
      std::swap(order[static_cast<std::size_t>(i)],
                order[rng.next_below(static_cast<std::uint64_t>(i + 1))]);
    for (int i = 0; i < n; ++i)
      fold[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] =
          i % k_folds;
  } else {
    std::vector<int> distinct(groups.begin(), groups.end());
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    for (std::size_t i = distinct.size() - 1; i > 0; --i)
      std::swap(distinct[i], distinct[rng.next_below(i + 1)]);
    if (static_cast<int>(distinct.size()) < k_folds)
      k_folds = static_cast<int>(distinct.size());
    std::map<int, int> group_fold;
    for (std::size_t i = 0; i < distinct.size(); ++i)
      group_fold[distinct[i]] = static_cast<int>(i) % k_folds;
    for (int i = 0; i < n; ++i)
      fold[static_cast<std::size_t>(i)] = group_fold[groups[static_cast<std::size_t>(i)]];
  }

  const auto grid = hyper_grid();
  GridSearchResult result;
  result.cv_mse.assign(grid.size(), 0.0);

  parallel_for(grid.size(), jobs, [&](std::size_t c) {
    double se = 0.0;
    std::size_t count = 0;
    for (int f = 0; f < k_folds; ++f) {
      std::vector<int> train, val;
      for (int i = 0; i < n; ++i)
        (fold[static_cast<std::size_t>(i)] == f ? val : train).push_back(i);
      if (train.empty() || val.empty()) continue;

      Eigen::MatrixXd xt(train.size(), x.cols());
      Eigen::VectorXd yt(train.size());
      for (std::size_t i = 0; i < train.size(); ++i) {
        xt.row(static_cast<int>(i)) = x.row(train[i]);
        yt[static_cast<int>(i)] = y[train[i]];
      }
      const std::uint64_t fit_seed =
          Rng(seed).fork(c).fork(static_cast<std::uint64_t>(f)).next_u64();
      const RandomForest rf = RandomForest::fit(xt, yt, grid[c], fit_seed);
      for (int i : val) {
        const double e = rf.predict(x.row(i).transpose()) - y[i];
        se += e * e;
        ++count;
      }
    }
    result.cv_mse[c] = count ? se / static_cast<double>(count)
                             : std::numeric_limits<double>::infinity();
  });

  std::size_t best = 0;
  for (std::size_t c = 1; c < grid.size(); ++c)
    if (result.cv_mse[c] < result.cv_mse[best]) best = c;
  result.best = grid[best];
  result.best_cv_mse = result.cv_mse[best];
  result.model = RandomForest::fit(x, y, result.best, seed);
  return result;
}

int FeatureMatrix::column(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return static_cast<int>(i);
  return -1;
}

Eigen::VectorXd FeatureMatrix::column_medians() const {
  Eigen::VectorXd med(n_cols());
  for (int c = 0; c < n_cols(); ++c) {
    std::vector<double> vals;
    for (int r = 0; r < n_rows(); ++r)
      if (std::isfinite(values(r, c))) vals.push_back(values(r, c));
    if (vals.empty()) {
      med[c] = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    std::sort(vals.begin(), vals.end());
    const std::size_t m = vals.size();
    med[c] = m % 2 ? vals[m / 2] : 0.5 * (vals[m / 2 - 1] + vals[m / 2]);
  }
  return med;
}

void FeatureMatrix::impute(const Eigen::VectorXd& fill) {
  if (fill.size() != values.cols())
    throw ConfigError("impute: fill vector width mismatch");
  for (int r = 0; r < values.rows(); ++r)
    for (int c = 0; c < values.cols(); ++c)
      if (!std::isfinite(values(r, c))) values(r, c) = fill[c];
}

FeatureMatrix FeatureMatrix::concat(const FeatureMatrix& a,
                                    const FeatureMatrix& b) {
  if (a.keys != b.keys)
    throw ConfigError("feature concat: row keys do not match");
  FeatureMatrix out;
  out.keys = a.keys;
  out.names = a.names;
  out.names.insert(out.names.end(), b.names.begin(), b.names.end());
  out.values.resize(a.values.rows(), a.values.cols() + b.values.cols());
  out.values << a.values, b.values;
  return out;
}

FeatureMatrix FeatureMatrix::select_rows(const std::vector<int>& rows) const {
  FeatureMatrix out;
  out.names = names;
  out.values.resize(static_cast<int>(rows.size()), values.cols());
  out.keys.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.values.row(static_cast<int>(i)) = values.row(rows[i]);
    out.keys.push_back(keys[static_cast<std::size_t>(rows[i])]);
  }
  return out;
}

FeatureMatrix FeatureMatrix::select_columns(
    const std::vector<std::string>& cols) const {
  FeatureMatrix out;
  out.keys = keys;
  out.names = cols;
  out.values.resize(values.rows(), static_cast<int>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) {
    const int src = column(cols[c]);
    if (src < 0) throw ConfigError("unknown feature column '" + cols[c] + "'");
    out.values.col(static_cast<int>(c)) = values.col(src);
  }
  return out;
}

void write_feature_csv(const std::filesystem::path& path,
                       const FeatureMatrix& m) {
  CsvTable csv;
  csv.header = {"suite", "fid", "iid", "dim", "run", "seed"};
  csv.header.insert(csv.header.end(), m.names.begin(), m.names.end());
  csv.header.push_back("validity");
  for (int r = 0; r < m.n_rows(); ++r) {
    const RunKey& k = m.keys[static_cast<std::size_t>(r)];
    std::vector<std::string> row = {to_string(k.suite),
                                    std::to_string(k.function_id),
                                    std::to_string(k.instance_id),
                                    std::to_string(k.dimension),
                                    std::to_string(k.run_index),
                                    std::to_string(k.seed)};
    std::string mask(static_cast<std::size_t>((m.n_cols() + 3) / 4), '0');
    for (int c = 0; c < m.n_cols(); ++c) {
      row.push_back(format_double(m.values(r, c)));
      if (std::isfinite(m.values(r, c))) {
        const int nibble = c / 4, bit = c % 4;
        const int cur = mask[static_cast<std::size_t>(nibble)] <= '9'
                            ? mask[static_cast<std::size_t>(nibble)] - '0'
                            : mask[static_cast<std::size_t>(nibble)] - 'a' + 10;
        const int next = cur | (1 << bit);
        mask[static_cast<std::size_t>(nibble)] =
            static_cast<char>(next < 10 ? '0' + next : 'a' + next - 10);
      }
    }
    row.push_back(mask);
    csv.rows.push_back(std::move(row));
  }
  write_csv(path, csv);
}

FeatureMatrix read_feature_csv(const std::filesystem::path& path) {
  const CsvTable csv = read_csv(path);
  if (csv.header.size() < 8 || csv.header.back() != "validity")
    throw MigrationError("unexpected feature csv layout in " + path.string());
  FeatureMatrix m;
  m.names.assign(csv.header.begin() + 6, csv.header.end() - 1);
  m.values.resize(static_cast<int>(csv.rows.size()),
                  static_cast<int>(m.names.size()));
  for (std::size_t r = 0; r < csv.rows.size(); ++r) {
    const auto& row = csv.rows[r];
    RunKey k;
    k.suite = suite_from_string(row[0]);
    k.function_id = std::stoi(row[1]);
    k.instance_id = std::stoi(row[2]);
    k.dimension = std::stoi(row[3]);
    k.run_index = std::stoi(row[4]);
    k.seed = std::stoull(row[5]);
    m.keys.push_back(k);
    for (std::size_t c = 0; c < m.names.size(); ++c) {
      const std::string& cell = row[6 + c];
      m.values(static_cast<int>(r), static_cast<int>(c)) =
          cell == "nan" || cell == "-nan"
              ? std::numeric_limits<double>::quiet_NaN()
              : parse_double(cell);
    }
  }
  return m;
}

std::string ModelBundle::key_of(const std::string& mode, std::uint64_t budget,
                                AlgorithmId a) {
  return mode + "|" + std::to_string(budget) + "|" + to_string(a);
}

void ModelBundle::put(const std::string& mode, std::uint64_t budget,
                      AlgorithmId a, TrainedModel model) {
  models_[key_of(mode, budget, a)] = std::move(model);
}

const TrainedModel* ModelBundle::find(const std::string& mode,
                                      std::uint64_t budget,
                                      AlgorithmId a) const {
  const auto it = models_.find(key_of(mode, budget, a));
  return it == models_.end() ? nullptr : &it->second;
}

std::array<double, kNumAlgorithms> ModelBundle::predict_all(
    const std::string& mode, std::uint64_t budget,
    const std::vector<std::string>& names, const Eigen::VectorXd& values) const {
  const TrainedModel* first = find(mode, budget, kAllAlgorithms[0]);
  if (!first)
    throw NotFoundError("no trained model for mode '" + mode + "' at budget " +
                        std::to_string(budget));

  // strict schema check against the stored feature names
  std::vector<std::string> missing, extra;
  std::map<std::string, int> input_pos;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (!input_pos.emplace(names[i], static_cast<int>(i)).second)
      extra.push_back(names[i] + " (duplicate)");
  }
  for (const auto& name : first->feature_names)
    if (input_pos.find(name) == input_pos.end()) missing.push_back(name);
  std::set<std::string> wanted(first->feature_names.begin(),
                               first->feature_names.end());
  for (const auto& name : names)
    if (wanted.find(name) == wanted.end()) extra.push_back(name);
  if (!missing.empty() || !extra.empty()) {
    std::string what = "feature schema mismatch;";
    if (!missing.empty()) {
      what += " missing:";
      for (const auto& s : missing) what += " " + s;
    }
    if (!extra.empty()) {
      what += " extra:";
      for (const auto& s : extra) what += " " + s;
    }
    throw SchemaMismatchError(what, missing, extra);
  }

  std::array<double, kNumAlgorithms> out{};
  for (int a = 0; a < kNumAlgorithms; ++a) {
    const TrainedModel* model = find(mode, budget, kAllAlgorithms[a]);
    if (!model)
      throw NotFoundError("bundle incomplete: no model for " +
                          to_string(kAllAlgorithms[a]));
    Eigen::VectorXd ordered(model->feature_names.size());
    for (std::size_t i = 0; i < model->feature_names.size(); ++i) {
      const double v = values[input_pos.at(model->feature_names[i])];
      ordered[static_cast<int>(i)] =
          std::isfinite(v) ? v : model->imputation[static_cast<int>(i)];
    }
    out[static_cast<std::size_t>(a)] = model->forest.predict(ordered);
  }
  return out;
}

void ModelBundle::save(const std::filesystem::path& path) const {
  json header;
  header["schema_version"] = kBundleVersion;
  header["dataset_hash"] = dataset_hash;
  header["seed"] = seed;
  header["entries"] = json::array();
  for (const auto& [key, model] : models_) {
    json e;
    e["key"] = key;
    e["feature_names"] = model.feature_names;
    e["imputation"] = json::array();
    for (int i = 0; i < model.imputation.size(); ++i)
      e["imputation"].push_back(format_double(model.imputation[i]));
    e["n_estimators"] = model.chosen.n_estimators;
    e["max_features"] = to_string(model.chosen.max_features);
    e["max_depth"] = model.chosen.max_depth;
    e["min_samples_split"] = model.chosen.min_samples_split;
    e["cv_mse"] = format_double(model.cv_mse);
    header["entries"].push_back(std::move(e));
  }
  const std::string head = header.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw NotFoundError("cannot open for writing: " + path.string());
  out.write(kBundleMagic, 4);
  trajsel::put(out, static_cast<std::uint64_t>(head.size()));
  out.write(head.data(), static_cast<std::streamsize>(head.size()));
  for (const auto& [key, model] : models_) model.forest.save(out);
}

ModelBundle ModelBundle::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("cannot open: " + path.string());
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kBundleMagic, 4) != 0)
    throw MigrationError("not a model bundle: " + path.string());
  const auto head_size = get<std::uint64_t>(in);
  std::string head(head_size, '\0');
  in.read(head.data(), static_cast<std::streamsize>(head_size));
  const json header = json::parse(head);
  if (header.at("schema_version").get<std::uint32_t>() != kBundleVersion)
    throw MigrationError("model bundle schema version mismatch: " +
                         path.string());

  ModelBundle bundle;
  bundle.dataset_hash = header.at("dataset_hash").get<std::uint64_t>();
  bundle.seed = header.at("seed").get<std::uint64_t>();
  for (const auto& e : header.at("entries")) {
    TrainedModel model;
    model.feature_names =
        e.at("feature_names").get<std::vector<std::string>>();
    const auto& imp = e.at("imputation");
    model.imputation.resize(static_cast<int>(imp.size()));
    for (std::size_t i = 0; i < imp.size(); ++i)
      model.imputation[static_cast<int>(i)] =
          parse_double(imp[i].get<std::string>());
    model.chosen.n_estimators = e.at("n_estimators").get<int>();
    const std::string mf = e.at("max_features").get<std::string>();
    model.chosen.max_features = mf == "all"    ? MaxFeatures::kAll
                                : mf == "sqrt" ? MaxFeatures::kSqrt
                                               : MaxFeatures::kLog2;
    model.chosen.max_depth = e.at("max_depth").get<int>();
    model.chosen.min_samples_split = e.at("min_samples_split").get<int>();
    model.cv_mse = parse_double(e.at("cv_mse").get<std::string>());
    model.forest = RandomForest::load(in);
    bundle.models_[e.at("key").get<std::string>()] = std::move(model);
  }
  return bundle;
}

}  // namespace trajsel
