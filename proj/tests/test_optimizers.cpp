#include <algorithm>

#include "doctest.h"
#include "trajsel/bench_suite.hpp"
#include "trajsel/optimizers.hpp"

using namespace trajsel;

namespace {

WarmStartPayload payload_for(const ProblemInstance& p, std::uint64_t seed) {
  return run_a1_cma(p, 30ULL * p.dimension(), seed).payload;
}

}  // namespace

TEST_CASE("every branch consumes exactly its budget and keeps the incumbent") {
  auto p = make_problem({Suite::kTrain, 3, 1, 5});
  const auto payload = payload_for(p, 11);
  const double split_precision = p.precision(payload.best.f);

  for (AlgorithmId a : kAllAlgorithms) {
    for (std::uint64_t b : {0ULL, 3ULL, 100ULL, 350ULL}) {
      const RunLog log = warm_start_run(a, payload, p, b, 11);
      CHECK(log.size() == payload.archive.size() + b);
      CHECK(log.split_index == payload.archive.size());
      const double final_precision = p.precision(log.best_f());
      CHECK(final_precision <= split_precision);
      if (b == 0) CHECK(log.best_f() == payload.best.f);
    }
  }
}

TEST_CASE("budget exhaustion mid-gradient truncates cleanly") {
  auto p = make_problem({Suite::kTrain, 8, 1, 5});
  const auto payload = payload_for(p, 5);
  // 3 < D, so the very first forward-difference gradient cannot finish
  const RunLog log = warm_start_run(AlgorithmId::kQuasiNewton, payload, p, 3, 5);
  CHECK(log.size() == payload.archive.size() + 3);
  CHECK(log.best_f() <= payload.best.f);
}

TEST_CASE("warm starts are deterministic per (payload, seed)") {
  auto p = make_problem({Suite::kTrain, 21, 2, 5});
  const auto payload = payload_for(p, 77);
  for (AlgorithmId a : kAllAlgorithms) {
    const RunLog r1 = warm_start_run(a, payload, p, 80, 77);
    const RunLog r2 = warm_start_run(a, payload, p, 80, 77);
    REQUIRE(r1.size() == r2.size());
    for (std::size_t i = 0; i < r1.size(); ++i)
      CHECK(r1.evaluations[i].f == r2.evaluations[i].f);
  }
}

TEST_CASE("a shorter branch is an exact prefix of a longer one") {
  // run_portfolio reads intermediate budgets off one long branch; this is the
  // property that makes that sound.
  auto p = make_problem({Suite::kTrain, 17, 1, 5});
  const auto payload = payload_for(p, 31);
  for (AlgorithmId a : kAllAlgorithms) {
    const RunLog short_run = warm_start_run(a, payload, p, 100, 31);
    const RunLog long_run = warm_start_run(a, payload, p, 850, 31);
    for (std::size_t i = 0; i < short_run.size(); ++i) {
      CHECK(short_run.evaluations[i].x == long_run.evaluations[i].x);
      CHECK(short_run.evaluations[i].f == long_run.evaluations[i].f);
    }
  }
}

TEST_CASE("run_portfolio emits one row per algorithm and budget") {
  auto p = make_problem({Suite::kTrain, 2, 1, 5});
  RunKey key{Suite::kTrain, 2, 1, 5, 0, 123};
  PortfolioConfig cfg;
  cfg.a2_budgets = {20, 70};
  const auto out = run_portfolio(p, key, cfg);

  CHECK(out.rows.size() == kNumAlgorithms * 2);
  CHECK(out.a1.log.size() == 150);
  CHECK(out.incumbent_preserved);
  for (const auto& row : out.rows) {
    CHECK(row.precision >= 0.0);
    CHECK(row.precision <= out.a1_precision);
  }

  // derived row equals an explicitly re-run branch
  const RunLog direct =
      warm_start_run(AlgorithmId::kDe, out.a1.payload, p, 20, key.seed);
  const double direct_precision = p.precision(direct.best_f());
  for (const auto& row : out.rows)
    if (row.algorithm == AlgorithmId::kDe && row.a2_budget == 20)
      CHECK(row.precision == direct_precision);
}

TEST_CASE("collect_portfolio_runs covers all runs with distinct seeds") {
  auto p = make_problem({Suite::kTrain, 1, 1, 5});
  PortfolioConfig cfg;
  cfg.a2_budgets = {20};
  const auto rows = collect_portfolio_runs(p, 3, {100, 101, 102}, cfg);
  CHECK(rows.size() == 3 * kNumAlgorithms);
  CHECK_THROWS_AS(collect_portfolio_runs(p, 3, {1, 2}, cfg), ConfigError);
}

TEST_CASE("reseeding on switch changes CMA branches but keeps budget exact") {
  auto p = make_problem({Suite::kTrain, 14, 1, 5});
  const auto payload = payload_for(p, 9);
  const RunLog cont =
      warm_start_run(AlgorithmId::kCmaNonElitist, payload, p, 200, 9, false);
  const RunLog reseeded =
      warm_start_run(AlgorithmId::kCmaNonElitist, payload, p, 200, 9, true);
  CHECK(cont.size() == reseeded.size());
  bool any_diff = false;
  for (std::size_t i = payload.archive.size(); i < cont.size(); ++i)
    if (cont.evaluations[i].f != reseeded.evaluations[i].f) any_diff = true;
  CHECK(any_diff);
}
