#include "trajsel/types.hpp"

#include <charconv>

#include "trajsel/run_log.hpp"

namespace trajsel {

namespace {

int parse_int(const std::string& s, const char* what) {
  int v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size())
    throw ConfigError(std::string("invalid ") + what + ": '" + s + "'");
  return v;
}

std::vector<std::string> split_key(const std::string& key, std::size_t parts) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = key.find(':', start);
    if (pos == std::string::npos) {
      out.push_back(key.substr(start));
      break;
    }
    out.push_back(key.substr(start, pos - start));
    start = pos + 1;
  }
  if (out.size() != parts)
    throw ConfigError("malformed key '" + key + "': expected " +
                      std::to_string(parts) + " ':'-separated fields");
  return out;
}

}  // namespace

std::string to_string(Suite s) {
  return s == Suite::kTrain ? "train" : "transfer";
}

Suite suite_from_string(const std::string& s) {
  if (s == "train") return Suite::kTrain;
  if (s == "transfer") return Suite::kTransfer;
  throw ConfigError("unknown suite '" + s + "' (expected train|transfer)");
}

std::string to_string(AlgorithmId a) {
  switch (a) {
    case AlgorithmId::kCmaNonElitist: return "cma_nonelitist";
    case AlgorithmId::kCmaElitist: return "cma_elitist";
    case AlgorithmId::kDe: return "de";
    case AlgorithmId::kPso: return "pso";
    case AlgorithmId::kQuasiNewton: return "quasi_newton";
    case AlgorithmId::kMlsl: return "mlsl";
  }
  throw ConfigError("invalid algorithm id");
}

AlgorithmId algorithm_from_string(const std::string& s) {
  for (AlgorithmId a : kAllAlgorithms)
    if (to_string(a) == s) return a;
  throw ConfigError("unknown algorithm '" + s + "'");
}

std::string ProblemId::key() const {
  return to_string(suite) + ":" + std::to_string(function_id) + ":" +
         std::to_string(instance_id) + ":" + std::to_string(dimension);
}

ProblemId ProblemId::from_key(const std::string& key) {
  const auto f = split_key(key, 4);
  return ProblemId{suite_from_string(f[0]), parse_int(f[1], "function id"),
                   parse_int(f[2], "instance id"), parse_int(f[3], "dimension")};
}

std::string RunKey::key() const {
  return problem().key() + ":" + std::to_string(run_index);
}

RunKey RunKey::from_key(const std::string& key) {
  const auto f = split_key(key, 5);
  RunKey k;
  k.suite = suite_from_string(f[0]);
  k.function_id = parse_int(f[1], "function id");
  k.instance_id = parse_int(f[2], "instance id");
  k.dimension = parse_int(f[3], "dimension");
  k.run_index = parse_int(f[4], "run index");
  return k;
}

double RunLog::best_f() const { return best().f; }

const Evaluation& RunLog::best() const {
  if (evaluations.empty()) throw NotFoundError("best() on empty run log");
  const Evaluation* b = &evaluations.front();
  for (const auto& e : evaluations)
    if (e.f < b->f) b = &e;
  return *b;
}

std::vector<double> RunLog::best_so_far() const {
  std::vector<double> out;
  out.reserve(evaluations.size());
  double best = std::numeric_limits<double>::infinity();
  for (const auto& e : evaluations) {
    best = std::min(best, e.f);
    out.push_back(best);
  }
  return out;
}

}  // namespace trajsel
