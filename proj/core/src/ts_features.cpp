#include "trajsel/ts_features.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "json.hpp"
#include "trajsel/csv.hpp"

namespace trajsel {

namespace {

using nlohmann::json;

const std::vector<std::string> kFunctionNames = {
    "mean",          "variance",        "std",
    "abs_energy",    "rms",             "min",
    "max",           "median",          "first",
    "last",          "slope",           "intercept",
    "acf_1",         "acf_2",           "acf_3",
    "count_above_mean", "count_below_mean", "mean_crossings",
    "longest_increase", "mean_abs_change", "n_local_maxima",
    "sample_entropy", "quarter_ratio"};

double acf(const std::vector<double>& v, double mean, double ss, int lag) {
  double acc = 0.0;
  for (std::size_t t = 0; t + lag < v.size(); ++t)
    acc += (v[t] - mean) * (v[t + lag] - mean);
  return acc / ss;
}

// SampEn(m=2, r=0.2 sd) with Chebyshev template distance.
FeatureValue sample_entropy(const std::vector<double>& v, double sd) {
  const int n = static_cast<int>(v.size());
  constexpr int m = 2;
  const double r = 0.2 * sd;
  if (n <= m + 1 || sd <= 0.0) return FeatureValue::invalid("degenerate");

  auto matches = [&](int len) {
    int count = 0;
    for (int i = 0; i + len <= n; ++i)
      for (int j = i + 1; j + len <= n; ++j) {
        bool ok = true;
        for (int k = 0; k < len && ok; ++k)
          ok = std::abs(v[i + k] - v[j + k]) <= r;
        count += ok;
      }
    return count;
  };
  const int b = matches(m);
  const int a = matches(m + 1);
  if (a == 0 || b == 0) return FeatureValue::invalid("no_matches");
  return FeatureValue::ok(-std::log(static_cast<double>(a) / b));
}

}  // namespace

const std::vector<std::string>& ts_function_names() { return kFunctionNames; }

const std::vector<std::string>& ts_catalog() {
  static const std::vector<std::string> catalog = [] {
    std::vector<std::string> names;
    for (const auto& channel : psi_channel_names())
      for (const auto& fn : kFunctionNames)
        names.push_back("ts." + channel + "." + fn);
    return names;
  }();
  return catalog;
}

FeatureSet ts_features_of_channel(const std::vector<double>& v,
                                  const std::string& prefix) {
  FeatureSet out;
  const int n = static_cast<int>(v.size());
  auto name = [&](const std::string& fn) { return "ts." + prefix + "." + fn; };
  if (n < 2) {
    for (const auto& fn : kFunctionNames)
      out.push(name(fn), FeatureValue::invalid("series_too_short"));
    return out;
  }

  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  const double variance = ss / n;  // population convention
  const double sd = std::sqrt(variance);
  const bool constant = ss == 0.0;

  double energy = 0.0;
  for (double x : v) energy += x * x;

  std::vector<double> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  const double median = n % 2 ? sorted[static_cast<std::size_t>(n / 2)]
                              : 0.5 * (sorted[static_cast<std::size_t>(n / 2 - 1)] +
                                       sorted[static_cast<std::size_t>(n / 2)]);

  // least-squares line over t = 0..n-1
  const double tmean = (n - 1) / 2.0;
  double stt = 0.0, sty = 0.0;
  for (int t = 0; t < n; ++t) {
    stt += (t - tmean) * (t - tmean);
    sty += (t - tmean) * (v[static_cast<std::size_t>(t)] - mean);
  }
  const double slope = sty / stt;
  const double intercept = mean - slope * tmean;

  int above = 0, below = 0, crossings = 0, maxima = 0;
  for (int t = 0; t < n; ++t) {
    above += v[static_cast<std::size_t>(t)] > mean;
    below += v[static_cast<std::size_t>(t)] < mean;
    if (t + 1 < n &&
        (v[static_cast<std::size_t>(t)] - mean) *
                (v[static_cast<std::size_t>(t + 1)] - mean) <
            0.0)
      ++crossings;
    if (t > 0 && t + 1 < n && v[static_cast<std::size_t>(t)] > v[static_cast<std::size_t>(t - 1)] &&
        v[static_cast<std::size_t>(t)] > v[static_cast<std::size_t>(t + 1)])
      ++maxima;
  }

  int longest = 0, run = 0;
  double abs_change = 0.0;
  for (int t = 0; t + 1 < n; ++t) {
    abs_change += std::abs(v[static_cast<std::size_t>(t + 1)] - v[static_cast<std::size_t>(t)]);
    run = v[static_cast<std::size_t>(t + 1)] > v[static_cast<std::size_t>(t)] ? run + 1 : 0;
    longest = std::max(longest, run);
  }
  abs_change /= (n - 1);

  const int quarter = (n + 3) / 4;
  double first_q = 0.0, last_q = 0.0;
  for (int t = 0; t < quarter; ++t) {
    first_q += v[static_cast<std::size_t>(t)];
    last_q += v[static_cast<std::size_t>(n - 1 - t)];
  }
  first_q /= quarter;
  last_q /= quarter;

  out.push(name("mean"), FeatureValue::ok(mean));
  out.push(name("variance"), FeatureValue::ok(variance));
  out.push(name("std"), FeatureValue::ok(sd));
  out.push(name("abs_energy"), FeatureValue::ok(energy));
  out.push(name("rms"), FeatureValue::ok(std::sqrt(energy / n)));
  out.push(name("min"), FeatureValue::ok(sorted.front()));
  out.push(name("max"), FeatureValue::ok(sorted.back()));
  out.push(name("median"), FeatureValue::ok(median));
  out.push(name("first"), FeatureValue::ok(v.front()));
  out.push(name("last"), FeatureValue::ok(v.back()));
  out.push(name("slope"), FeatureValue::ok(slope));
  out.push(name("intercept"), FeatureValue::ok(intercept));
  for (int lag = 1; lag <= 3; ++lag) {
    const std::string nm = name("acf_" + std::to_string(lag));
    if (constant || n <= lag)
      out.push(nm, FeatureValue::invalid("constant_or_short"));
    else
      out.push(nm, FeatureValue::ok(acf(v, mean, ss, lag)));
  }
  out.push(name("count_above_mean"), FeatureValue::ok(above));
  out.push(name("count_below_mean"), FeatureValue::ok(below));
  out.push(name("mean_crossings"), FeatureValue::ok(crossings));
  out.push(name("longest_increase"), FeatureValue::ok(longest));
  out.push(name("mean_abs_change"), FeatureValue::ok(abs_change));
  out.push(name("n_local_maxima"), FeatureValue::ok(maxima));
  out.push(name("sample_entropy"), sample_entropy(v, sd));
  out.push(name("quarter_ratio"), first_q != 0.0
                                      ? FeatureValue::ok(last_q / first_q)
                                      : FeatureValue::invalid("zero_first_quarter"));
  return out;
}

TsFeatureVector compute_ts_features(const CmaStateSeries& series) {
  TsFeatureVector out;
  out.values.reserve(ts_catalog().size());
  if (series.size() < 8) {
    out.values.assign(ts_catalog().size(),
                      FeatureValue::invalid("series_too_short"));
    return out;
  }
  for (int c = 0; c < kPsiWidth; ++c) {
    const FeatureSet set =
        ts_features_of_channel(series.channel(c), psi_channel_names()[static_cast<std::size_t>(c)]);
    out.values.insert(out.values.end(), set.values.begin(), set.values.end());
  }
  return out;
}

SelectedFeatureSet select_features(const FeatureMatrix& ts_features,
                                   const std::vector<int>& function_labels,
                                   double threshold, std::uint64_t seed,
                                   std::uint64_t dataset_hash) {
  if (static_cast<int>(function_labels.size()) != ts_features.n_rows())
    throw ConfigError("select_features: one label per feature row required");
  std::vector<int> distinct(function_labels.begin(), function_labels.end());
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() < 2)
    throw ConfigError("select_features: need at least two function classes");

  FeatureMatrix imputed = ts_features;
  imputed.impute(imputed.column_medians());
  // a column that is invalid everywhere has no median; freeze it at zero
  for (int r = 0; r < imputed.values.rows(); ++r)
    for (int c = 0; c < imputed.values.cols(); ++c)
      if (!std::isfinite(imputed.values(r, c))) imputed.values(r, c) = 0.0;

  Eigen::VectorXd labels(ts_features.n_rows());
  for (int i = 0; i < ts_features.n_rows(); ++i) {
    const auto pos = std::lower_bound(distinct.begin(), distinct.end(),
                                      function_labels[static_cast<std::size_t>(i)]);
    labels[i] = static_cast<double>(pos - distinct.begin());
  }

  ForestParams params;
  params.n_estimators = 300;
  params.max_features = MaxFeatures::kSqrt;
  const RandomForest rf = RandomForest::fit(
      imputed.values, labels, params, seed, RandomForest::Task::kClassification);
  const Eigen::VectorXd importance = rf.feature_importances();

  std::vector<int> order(static_cast<std::size_t>(ts_features.n_cols()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return importance[a] > importance[b];
  });

  SelectedFeatureSet out;
  out.threshold = threshold;
  out.seed = seed;
  out.dataset_hash = dataset_hash;
  for (int c : order) {
    if (importance[c] > threshold) {
      out.names.push_back(ts_features.names[static_cast<std::size_t>(c)]);
      out.importances.push_back(importance[c]);
    }
  }
  if (out.names.empty()) {
    out.fallback_used = true;
    const int k = std::min(20, ts_features.n_cols());
    for (int i = 0; i < k; ++i) {
      const int c = order[static_cast<std::size_t>(i)];
      out.names.push_back(ts_features.names[static_cast<std::size_t>(c)]);
      out.importances.push_back(importance[c]);
    }
  }
  return out;
}

void SelectedFeatureSet::save(const std::filesystem::path& path) const {
  json j;
  j["catalog_version"] = kTsCatalogVersion;
  j["threshold"] = format_double(threshold);
  j["seed"] = seed;
  j["dataset_hash"] = dataset_hash;
  j["fallback_used"] = fallback_used;
  j["names"] = names;
  j["importances"] = json::array();
  for (double v : importances) j["importances"].push_back(format_double(v));
  std::ofstream out(path);
  if (!out) throw NotFoundError("cannot open for writing: " + path.string());
  out << j.dump(2) << '\n';
}

SelectedFeatureSet SelectedFeatureSet::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open: " + path.string());
  const json j = json::parse(in);
  if (j.at("catalog_version").get<int>() != kTsCatalogVersion)
    throw MigrationError("selected-feature catalog version mismatch: " +
                         path.string());
  SelectedFeatureSet out;
  out.threshold = parse_double(j.at("threshold").get<std::string>());
  out.seed = j.at("seed").get<std::uint64_t>();
  out.dataset_hash = j.at("dataset_hash").get<std::uint64_t>();
  out.fallback_used = j.at("fallback_used").get<bool>();
  out.names = j.at("names").get<std::vector<std::string>>();
  for (const auto& v : j.at("importances"))
    out.importances.push_back(parse_double(v.get<std::string>()));
  return out;
}

}  // namespace trajsel
