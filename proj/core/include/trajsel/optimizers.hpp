#ifndef TRAJSEL_OPTIMIZERS_HPP
#define TRAJSEL_OPTIMIZERS_HPP

#include <cstdint>
#include <vector>

#include "trajsel/bench_suite.hpp"
#include "trajsel/cma_es.hpp"
#include "trajsel/run_log.hpp"
#include "trajsel/types.hpp"

namespace trajsel {

/// Everything the second-phase algorithms may use from the first phase.
struct WarmStartPayload {
  std::vector<Evaluation> archive;  // all A1 evaluations, in order
  Evaluation best;
  CmaCheckpoint cma;
  std::uint64_t a1_budget_used = 0;
};

struct A1Result {
  RunLog log;
  WarmStartPayload payload;
  CmaStateSeries series;
};

/// Non-elitist CMA-ES for exactly `budget` evaluations, logging one psi row
/// per completed generation and capturing full resumable state.
A1Result run_a1_cma(const ProblemInstance& p, std::uint64_t budget,
                    std::uint64_t seed);

/// Continues the search with algorithm `a` for exactly `a2_budget` more
/// evaluations. The returned log holds the A1 archive as a prefix
/// (split_index = archive size), so best-so-far never loses the incumbent.
///
/// Per-algorithm policy: CMA variants resume the checkpoint verbatim (the
/// elitist variant only flips selection to mu+lambda and seeds its pool from
/// the archive); DE/PSO start from the best archive points with zeroed PSO
/// velocities; the quasi-Newton searcher starts a BFGS line-search descent
/// from the incumbent with forward-difference gradients; MLSL launches
/// quasi-Newton searches from nearest-better cluster heads of the archive.
RunLog warm_start_run(AlgorithmId a, const WarmStartPayload& payload,
                      const ProblemInstance& p, std::uint64_t a2_budget,
                      std::uint64_t seed, bool reseed_on_switch = false);

struct PortfolioConfig {
  std::uint64_t a1_budget = 0;               // 0: 30 * dimension
  std::vector<std::uint64_t> a2_budgets;     // empty: {20, 70, 170} * dimension
  bool reseed_on_switch = false;
};

struct PortfolioRunOutput {
  A1Result a1;
  double a1_precision = 0.0;            // precision at the A1/A2 split
  std::vector<PerformanceRow> rows;     // one row per (algorithm, a2 budget)
  bool incumbent_preserved = true;
};

/// One shared A1 prefix, then a warm-started branch per algorithm; precisions
/// recorded at every configured A2 budget.
PortfolioRunOutput run_portfolio(const ProblemInstance& p, const RunKey& key,
                                 const PortfolioConfig& cfg);

/// Branches for all runs of one problem; seeds must be distinct per run.
std::vector<PerformanceRow> collect_portfolio_runs(
    const ProblemInstance& p, int n_runs,
    const std::vector<std::uint64_t>& seeds, const PortfolioConfig& cfg);

}  // namespace trajsel

#endif
