#include "trajsel/store.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <set>

#include "json.hpp"
#include "trajsel/csv.hpp"

namespace trajsel {

namespace {

using nlohmann::json;

constexpr char kMagic[4] = {'T', 'R', 'J', '1'};
constexpr std::uint32_t kTrjVersion = 1;
constexpr int kManifestVersion = 1;

template <typename T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw MigrationError("trajectory file truncated");
  return v;
}

json row_to_json(const PerformanceRow& r) {
  return json{{"algorithm", to_string(r.algorithm)},
              {"budget", r.a2_budget},
              {"precision", format_double(r.precision)}};
}

PerformanceRow row_from_json(const RunKey& key, const json& j) {
  PerformanceRow r;
  r.key = key;
  r.algorithm = algorithm_from_string(j.at("algorithm").get<std::string>());
  r.a2_budget = j.at("budget").get<std::uint64_t>();
  r.precision = parse_double(j.at("precision").get<std::string>());
  return r;
}

}  // namespace

std::vector<std::uint64_t> PerformanceTable::budgets() const {
  std::set<std::uint64_t> b;
  for (const auto& r : rows) b.insert(r.a2_budget);
  return {b.begin(), b.end()};
}

std::vector<RunKey> PerformanceTable::run_keys() const {
  std::set<RunKey> k;
  for (const auto& r : rows) k.insert(r.key);
  return {k.begin(), k.end()};
}

void PerformanceTable::check_unique() const {
  std::set<std::tuple<RunKey, int, std::uint64_t>> seen;
  for (const auto& r : rows) {
    const auto item = std::make_tuple(r.key, static_cast<int>(r.algorithm),
                                      r.a2_budget);
    if (!seen.insert(item).second)
      throw ConfigError("duplicate performance row for " + r.key.key() + " " +
                        to_string(r.algorithm) + " @" +
                        std::to_string(r.a2_budget));
  }
}

void write_performance_csv(const std::filesystem::path& path,
                           const PerformanceTable& table,
                           std::uint64_t dataset_hash) {
  CsvTable csv;
  csv.header = {"suite", "fid",       "iid",      "dim",      "run",
                "seed",  "algorithm", "a2_budget", "precision"};
  for (const auto& r : table.rows) {
    csv.rows.push_back({to_string(r.key.suite),
                        std::to_string(r.key.function_id),
                        std::to_string(r.key.instance_id),
                        std::to_string(r.key.dimension),
                        std::to_string(r.key.run_index),
                        std::to_string(r.key.seed), to_string(r.algorithm),
                        std::to_string(r.a2_budget),
                        format_double(r.precision)});
  }
  write_csv(path, csv);

  json schema;
  schema["schema_version"] = kManifestVersion;
  schema["columns"] = csv.header;
  schema["units"] = {{"precision", "objective value above the optimum"},
                     {"a2_budget", "function evaluations after the switch"}};
  schema["dataset_hash"] = dataset_hash;
  std::ofstream out(path.string() + ".schema.json");
  out << schema.dump(2) << '\n';
}

PerformanceTable read_performance_csv(const std::filesystem::path& path) {
  const CsvTable csv = read_csv(path);
  const std::vector<std::string> want = {"suite", "fid",       "iid",
                                         "dim",   "run",       "seed",
                                         "algorithm", "a2_budget", "precision"};
  if (csv.header != want)
    throw MigrationError("unexpected performance table columns in " +
                         path.string());
  PerformanceTable t;
  for (const auto& row : csv.rows) {
    PerformanceRow r;
    r.key.suite = suite_from_string(row[0]);
    r.key.function_id = std::stoi(row[1]);
    r.key.instance_id = std::stoi(row[2]);
    r.key.dimension = std::stoi(row[3]);
    r.key.run_index = std::stoi(row[4]);
    r.key.seed = std::stoull(row[5]);
    r.algorithm = algorithm_from_string(row[6]);
    r.a2_budget = std::stoull(row[7]);
    r.precision = parse_double(row[8]);
    t.rows.push_back(r);
  }
  return t;
}

void write_trajectory_file(const std::filesystem::path& path, const RunKey& key,
                           const RunLog& log, const CmaStateSeries& series) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw NotFoundError("cannot open for writing: " + path.string());
  out.write(kMagic, 4);
  put(out, kTrjVersion);
  put(out, static_cast<std::uint8_t>(key.suite));
  put(out, static_cast<std::int32_t>(key.function_id));
  put(out, static_cast<std::int32_t>(key.instance_id));
  put(out, static_cast<std::int32_t>(key.dimension));
  put(out, static_cast<std::int32_t>(key.run_index));
  put(out, key.seed);
  put(out, static_cast<std::int64_t>(
               log.split_index ? static_cast<std::int64_t>(*log.split_index)
                               : -1));
  put(out, static_cast<std::uint64_t>(log.size()));
  for (const auto& e : log.evaluations) {
    out.write(reinterpret_cast<const char*>(e.x.data()),
              static_cast<std::streamsize>(sizeof(double) * e.x.size()));
    put(out, e.f);
  }
  put(out, static_cast<std::uint64_t>(series.size()));
  for (const auto& row : series.rows) {
    out.write(reinterpret_cast<const char*>(row.values.data()),
              sizeof(double) * kPsiWidth);
    put(out, static_cast<std::uint8_t>(row.repaired ? 1 : 0));
  }
}

std::tuple<RunKey, RunLog, CmaStateSeries> read_trajectory_file(
    const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("cannot open: " + path.string());
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw MigrationError("not a trajectory file: " + path.string());
  const auto version = get<std::uint32_t>(in);
  if (version != kTrjVersion)
    throw MigrationError("trajectory schema version " +
                         std::to_string(version) + " (this build reads " +
                         std::to_string(kTrjVersion) + "): " + path.string());

  RunKey key;
  key.suite = static_cast<Suite>(get<std::uint8_t>(in));
  key.function_id = get<std::int32_t>(in);
  key.instance_id = get<std::int32_t>(in);
  key.dimension = get<std::int32_t>(in);
  key.run_index = get<std::int32_t>(in);
  key.seed = get<std::uint64_t>(in);

  RunLog log;
  log.problem = key.problem();
  log.seed = key.seed;
  const auto split = get<std::int64_t>(in);
  if (split >= 0) log.split_index = static_cast<std::size_t>(split);
  const auto n = get<std::uint64_t>(in);
  log.evaluations.resize(n);
  for (auto& e : log.evaluations) {
    e.x.resize(key.dimension);
    in.read(reinterpret_cast<char*>(e.x.data()),
            static_cast<std::streamsize>(sizeof(double) * key.dimension));
    e.f = get<double>(in);
  }

  CmaStateSeries series;
  const auto rows = get<std::uint64_t>(in);
  series.rows.resize(rows);
  for (auto& r : series.rows) {
    in.read(reinterpret_cast<char*>(r.values.data()), sizeof(double) * kPsiWidth);
    r.repaired = get<std::uint8_t>(in) != 0;
  }
  if (!in) throw MigrationError("trajectory file truncated: " + path.string());
  return {key, std::move(log), std::move(series)};
}

TrajectoryStore::TrajectoryStore(std::filesystem::path dir)
    : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
  load_manifest();
}

std::filesystem::path TrajectoryStore::manifest_path() const {
  return dir_ / "manifest.json";
}

std::filesystem::path TrajectoryStore::run_path(const RunKey& key) const {
  return dir_ / to_string(key.suite) / std::to_string(key.function_id) /
         std::to_string(key.instance_id) /
         (std::to_string(key.run_index) + ".trj");
}

void TrajectoryStore::load_manifest() {
  entries_.clear();
  sealed_ = false;
  std::ifstream in(manifest_path());
  if (!in) return;
  json m = json::parse(in);
  if (m.at("schema_version").get<int>() != kManifestVersion)
    throw MigrationError("manifest schema version mismatch in " +
                         manifest_path().string());
  sealed_ = m.value("sealed", false);
  for (const auto& e : m.at("entries")) {
    ManifestEntry entry;
    entry.key = RunKey::from_key(e.at("key").get<std::string>());
    entry.key.seed = e.at("seed").get<std::uint64_t>();
    entry.file = e.at("file").get<std::string>();
    entry.checksum = e.at("checksum").get<std::uint64_t>();
    entry.n_evaluations = e.at("n_evaluations").get<std::uint64_t>();
    entry.series_rows = e.at("series_rows").get<std::uint64_t>();
    entry.a1_precision = parse_double(e.at("a1_precision").get<std::string>());
    entry.incumbent_preserved = e.at("incumbent_preserved").get<bool>();
    for (const auto& r : e.at("rows"))
      entry.rows.push_back(row_from_json(entry.key, r));
    entries_[entry.key] = std::move(entry);
  }
}

void TrajectoryStore::commit_manifest(bool sealed) {
  sealed_ = sealed;
  json m;
  m["schema_version"] = kManifestVersion;
  m["sealed"] = sealed_;
  m["dataset_hash"] = dataset_hash();
  m["entries"] = json::array();
  for (const auto& [key, e] : entries_) {
    json je;
    je["key"] = key.key();
    je["seed"] = key.seed;
    je["file"] = e.file;
    je["checksum"] = e.checksum;
    je["n_evaluations"] = e.n_evaluations;
    je["series_rows"] = e.series_rows;
    je["a1_precision"] = format_double(e.a1_precision);
    je["incumbent_preserved"] = e.incumbent_preserved;
    je["rows"] = json::array();
    for (const auto& r : e.rows) je["rows"].push_back(row_to_json(r));
    m["entries"].push_back(std::move(je));
  }
  const auto tmp = manifest_path().string() + ".tmp";
  {
    std::ofstream out(tmp);
    out << m.dump(1) << '\n';
  }
  std::filesystem::rename(tmp, manifest_path());
}

std::uint64_t TrajectoryStore::dataset_hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& [key, e] : entries_) {
    const std::string k = key.key();
    h = fnv1a(k.data(), k.size(), h);
    h = fnv1a(&e.checksum, sizeof e.checksum, h);
  }
  return h;
}

void TrajectoryStore::write_run(const RunKey& key, const RunLog& log,
                                const CmaStateSeries& series) {
  const auto path = run_path(key);
  std::filesystem::create_directories(path.parent_path());
  const auto tmp = path.string() + ".tmp";
  write_trajectory_file(tmp, key, log, series);
  const std::uint64_t sum = fnv1a_file(tmp);
  if (std::filesystem::exists(path) && fnv1a_file(path) == sum) {
    std::filesystem::remove(tmp);  // identical content already present
    return;
  }
  std::filesystem::rename(tmp, path);
}

std::pair<RunLog, CmaStateSeries> TrajectoryStore::read_run(
    const RunKey& key) const {
  const auto path = run_path(key);
  if (!std::filesystem::exists(path))
    throw NotFoundError("no stored run for " + key.key());
  auto [stored_key, log, series] = read_trajectory_file(path);
  if (!(stored_key == key))
    throw MigrationError("trajectory key mismatch in " + path.string());
  return {std::move(log), std::move(series)};
}

bool TrajectoryStore::has_valid_run(const RunKey& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return false;
  const auto path = run_path(key);
  if (!std::filesystem::exists(path)) return false;
  return fnv1a_file(path) == it->second.checksum;
}

void TrajectoryStore::record_entry(ManifestEntry entry) {
  const auto path = run_path(entry.key);
  entry.file =
      std::filesystem::relative(path, dir_).generic_string();
  entry.checksum = fnv1a_file(path);
  entries_[entry.key] = std::move(entry);
}

const ManifestEntry* TrajectoryStore::find_entry(const RunKey& key) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? nullptr : &it->second;
}

std::vector<RunKey> TrajectoryStore::keys() const {
  std::vector<RunKey> out;
  out.reserve(entries_.size());
  for (const auto& [key, _] : entries_) out.push_back(key);
  return out;
}

PerformanceTable TrajectoryStore::export_performance_table(
    std::vector<RunKey>* quarantined) const {
  // every run must carry the same (algorithm, budget) set; incomplete ones
  // are excluded and reported
  std::size_t expected = 0;
  for (const auto& [_, e] : entries_)
    expected = std::max(expected, e.rows.size());

  PerformanceTable t;
  for (const auto& [key, e] : entries_) {
    if (e.rows.size() != expected) {
      if (quarantined) quarantined->push_back(key);
      continue;
    }
    t.rows.insert(t.rows.end(), e.rows.begin(), e.rows.end());
  }
  t.check_unique();
  return t;
}

}  // namespace trajsel
