#include "trajsel/config.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "trajsel/bench_suite.hpp"
#include "trajsel/csv.hpp"
#include "trajsel/rng.hpp"

namespace trajsel {

namespace {

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (!std::isspace(static_cast<unsigned char>(c))) {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

int to_int(const std::string& s, const std::string& key) {
  int v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size())
    throw ConfigError("config key '" + key + "': invalid integer '" + s + "'");
  return v;
}

std::string join_ints(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(v[i]);
  }
  return out;
}

}  // namespace

void ScenarioConfig::validate() const {
  auto fail = [](const std::string& field, const std::string& why) {
    throw ConfigError("config field '" + field + "': " + why);
  };
  if (label.empty()) fail("label", "must be non-empty");
  if (dimensions.empty()) fail("dimension", "need at least one dimension");
  for (int d : dimensions)
    if (d < 2 || d > 40) fail("dimension", "must be in 2..40");
  if (a1_budget_per_dim <= 0) fail("a1_budget_per_dim", "must be positive");
  if (a2_budgets_per_dim.empty())
    fail("a2_budgets_per_dim", "need at least one budget");
  for (int b : a2_budgets_per_dim)
    if (b <= 0) fail("a2_budgets_per_dim", "budgets must be positive");
  if (n_instances < 1) fail("n_instances", "must be >= 1");
  if (n_runs < 1) fail("n_runs", "must be >= 1");
  if (feature_modes.empty()) fail("feature_modes", "must be non-empty");
  for (const auto& m : feature_modes)
    if (m != "ela" && m != "ts" && m != "ela_ts")
      fail("feature_modes", "unknown mode '" + m + "'");
  if (fold_repeats < 1) fail("fold_repeats", "must be >= 1");
  if (train_fraction <= 0.0 || train_fraction >= 1.0)
    fail("train_fraction", "must be in (0,1)");
  if (ts_importance_threshold < 0.0)
    fail("ts_importance_threshold", "must be >= 0");
  if (jobs < 0) fail("jobs", "must be >= 0");
  const int max_fid = suite == Suite::kTrain
                          ? kNumTrainFunctions
                          : static_cast<int>(transfer_catalog().size());
  for (int f : functions)
    if (f < 1 || f > max_fid)
      fail("functions", "function id " + std::to_string(f) +
                            " outside 1.." + std::to_string(max_fid));
}

std::vector<int> ScenarioConfig::function_ids() const {
  if (!functions.empty()) return functions;
  const int max_fid = suite == Suite::kTrain
                          ? kNumTrainFunctions
                          : static_cast<int>(transfer_catalog().size());
  std::vector<int> out;
  for (int f = 1; f <= max_fid; ++f) out.push_back(f);
  return out;
}

std::vector<int> ScenarioConfig::instance_ids() const {
  if (suite == Suite::kTransfer) return {0};
  std::vector<int> out;
  for (int i = 1; i <= n_instances; ++i) out.push_back(i);
  return out;
}

std::uint64_t ScenarioConfig::a1_budget(int dimension) const {
  return static_cast<std::uint64_t>(a1_budget_per_dim) * dimension;
}

std::vector<std::uint64_t> ScenarioConfig::a2_budgets(int dimension) const {
  std::vector<std::uint64_t> out;
  for (int b : a2_budgets_per_dim)
    out.push_back(static_cast<std::uint64_t>(b) * dimension);
  return out;
}

std::uint64_t ScenarioConfig::run_seed(int dimension, int fid, int iid,
                                       int run) const {
  return Rng(seed_base)
      .fork(static_cast<std::uint64_t>(dimension))
      .fork(static_cast<std::uint64_t>(fid))
      .fork(static_cast<std::uint64_t>(iid))
      .fork(static_cast<std::uint64_t>(run))
      .next_u64();
}

std::string ScenarioConfig::to_text() const {
  std::ostringstream out;
  out << "schema_version = " << kConfigSchemaVersion << "\n";
  out << "label = " << label << "\n";
  out << "dimension = " << join_ints(dimensions) << "\n";
  out << "a1_budget_per_dim = " << a1_budget_per_dim << "\n";
  out << "a2_budgets_per_dim = " << join_ints(a2_budgets_per_dim) << "\n";
  out << "n_instances = " << n_instances << "\n";
  out << "n_runs = " << n_runs << "\n";
  out << "seed_base = " << seed_base << "\n";
  out << "feature_modes = ";
  for (std::size_t i = 0; i < feature_modes.size(); ++i)
    out << (i ? "," : "") << feature_modes[i];
  out << "\n";
  out << "suite = " << to_string(suite) << "\n";
  if (!functions.empty()) out << "functions = " << join_ints(functions) << "\n";
  out << "output_dir = " << output_dir << "\n";
  out << "reseed_on_switch = " << (reseed_on_switch ? "true" : "false") << "\n";
  out << "fold_repeats = " << fold_repeats << "\n";
  out << "train_fraction = " << format_double(train_fraction) << "\n";
  out << "ts_importance_threshold = " << format_double(ts_importance_threshold)
      << "\n";
  out << "jobs = " << jobs << "\n";
  return out.str();
}

ScenarioConfig ScenarioConfig::from_text(const std::string& text) {
  ScenarioConfig cfg;
  std::set<std::string> seen;
  bool version_ok = false;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    // trim
    const auto begin = line.find_first_not_of(" \t\r");
    if (begin == std::string::npos) continue;
    const auto end = line.find_last_not_of(" \t\r");
    line = line.substr(begin, end - begin + 1);

    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": expected 'key = value', got '" + line + "'");
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t");
      const auto e = s.find_last_not_of(" \t");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!seen.insert(key).second)
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": duplicate key '" + key + "'");

    if (key == "schema_version") {
      if (to_int(value, key) != kConfigSchemaVersion)
        throw ConfigError("config schema_version " + value +
                          " unsupported (this build reads " +
                          std::to_string(kConfigSchemaVersion) + ")");
      version_ok = true;
    } else if (key == "label") {
      cfg.label = value;
    } else if (key == "dimension") {
      cfg.dimensions.clear();
      for (const auto& v : split_list(value))
        cfg.dimensions.push_back(to_int(v, key));
    } else if (key == "a1_budget_per_dim") {
      cfg.a1_budget_per_dim = to_int(value, key);
    } else if (key == "a2_budgets_per_dim") {
      cfg.a2_budgets_per_dim.clear();
      for (const auto& v : split_list(value))
        cfg.a2_budgets_per_dim.push_back(to_int(v, key));
    } else if (key == "n_instances") {
      cfg.n_instances = to_int(value, key);
    } else if (key == "n_runs") {
      cfg.n_runs = to_int(value, key);
    } else if (key == "seed_base") {
      cfg.seed_base = std::stoull(value);
    } else if (key == "feature_modes") {
      cfg.feature_modes = split_list(value);
    } else if (key == "suite") {
      cfg.suite = suite_from_string(value);
    } else if (key == "functions") {
      cfg.functions.clear();
      for (const auto& v : split_list(value))
        cfg.functions.push_back(to_int(v, key));
    } else if (key == "output_dir") {
      cfg.output_dir = value;
    } else if (key == "reseed_on_switch") {
      if (value != "true" && value != "false")
        throw ConfigError("config key 'reseed_on_switch': expected true|false");
      cfg.reseed_on_switch = value == "true";
    } else if (key == "fold_repeats") {
      cfg.fold_repeats = to_int(value, key);
    } else if (key == "train_fraction") {
      cfg.train_fraction = parse_double(value);
    } else if (key == "ts_importance_threshold") {
      cfg.ts_importance_threshold = parse_double(value);
    } else if (key == "jobs") {
      cfg.jobs = to_int(value, key);
    } else {
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": unknown key '" + key + "'");
    }
  }
  if (!version_ok)
    throw ConfigError("config is missing the schema_version key");
  cfg.validate();
  return cfg;
}

ScenarioConfig ScenarioConfig::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open config: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_text(buf.str());
}

}  // namespace trajsel
