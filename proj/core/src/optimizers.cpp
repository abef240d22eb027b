#include "trajsel/optimizers.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

namespace trajsel {

namespace {

enum : std::uint64_t { kTagA1 = 11, kTagBranch = 13 };

Rng branch_rng(std::uint64_t seed, AlgorithmId a) {
  return Rng(seed).fork(kTagBranch).fork(static_cast<std::uint64_t>(a));
}

// Archive indices ordered by (f, position); position breaks ties so the
// ordering is stable across runs.
std::vector<int> archive_order(const std::vector<Evaluation>& archive) {
  std::vector<int> idx(archive.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
    return archive[a].f < archive[b].f;
  });
  return idx;
}

// Quasi-Newton steps may leave the box; the evaluation is taken at the
// clipped point (that is what gets logged) and the squared excursion is
// added as a penalty seen only by the optimizer.
std::optional<double> penalized_eval(Evaluator& ev, const Eigen::VectorXd& x) {
  const Eigen::VectorXd xc = x.cwiseMax(kDomainLo).cwiseMin(kDomainHi);
  const auto f = ev(xc);
  if (!f) return std::nullopt;
  return *f + (x - xc).squaredNorm();
}

// Forward-difference gradient, one meter tick per component.
std::optional<Eigen::VectorXd> fd_gradient(Evaluator& ev,
                                           const Eigen::VectorXd& x,
                                           double fx) {
  const int d = static_cast<int>(x.size());
  Eigen::VectorXd g(d);
  for (int i = 0; i < d; ++i) {
    const double h = 1e-8 * std::max(1.0, std::abs(x[i]));
    Eigen::VectorXd xh = x;
    xh[i] += h;
    const auto fh = penalized_eval(ev, xh);
    if (!fh) return std::nullopt;
    g[i] = (*fh - fx) / h;
  }
  return g;
}

// BFGS descent consuming the whole budget: line-search steps with inverse
// Hessian updates, restarting from the provided start list (then random
// archive points) on convergence or line-search failure.
void bfgs_engine(Evaluator& ev, Rng& rng,
                 const std::vector<Evaluation>& archive,
                 std::vector<std::pair<Eigen::VectorXd, double>> starts) {
  const int d = static_cast<int>(archive.front().x.size());
  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(d, d);

  std::size_t next_start = 0;
  auto pop_start = [&]() -> std::pair<Eigen::VectorXd, double> {
    if (next_start < starts.size()) return starts[next_start++];
    const auto& e = archive[rng.next_below(archive.size())];
    return {e.x, e.f};
  };

  Eigen::VectorXd x;
  double fx = 0.0;
  Eigen::MatrixXd hess_inv = identity;
  Eigen::VectorXd g;

  auto begin_from = [&](std::pair<Eigen::VectorXd, double> st) -> bool {
    x = std::move(st.first);
    fx = st.second;
    hess_inv = identity;
    const auto grad = fd_gradient(ev, x, fx);
    if (!grad) return false;
    g = *grad;
    return true;
  };

  if (!begin_from(pop_start())) return;

  while (!ev.exhausted()) {
    if (g.norm() < 1e-10) {  // converged early
      if (!begin_from(pop_start())) return;
      continue;
    }

    Eigen::VectorXd dir = -(hess_inv * g);
    if (dir.dot(g) >= 0.0) {
      hess_inv = identity;
      dir = -g;
    }
    const double slope = g.dot(dir);

    double alpha = 1.0;
    bool accepted = false;
    Eigen::VectorXd xn;
    double fn = 0.0;
    for (int bt = 0; bt < 25 && !accepted; ++bt) {
      xn = x + alpha * dir;
      const auto f = penalized_eval(ev, xn);
      if (!f) return;  // budget exhausted mid-search; log already final
      fn = *f;
      if (fn <= fx + 1e-4 * alpha * slope)
        accepted = true;
      else
        alpha *= 0.5;
    }
    if (!accepted) {
      if (!begin_from(pop_start())) return;
      continue;
    }

    const auto gn = fd_gradient(ev, xn, fn);
    if (!gn) return;

    const Eigen::VectorXd s = xn - x;
    const Eigen::VectorXd y = *gn - g;
    const double sy = s.dot(y);
    if (sy > 1e-12) {
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd v = identity - rho * s * y.transpose();
      hess_inv = v * hess_inv * v.transpose() + rho * s * s.transpose();
    } else {
      hess_inv = identity;
    }
    x = xn;
    fx = fn;
    g = *gn;
  }
}

void run_de(Evaluator& ev, Rng rng, const std::vector<Evaluation>& archive) {
  const int d = static_cast<int>(archive.front().x.size());
  const int pop =
      std::min<int>(5 * d, static_cast<int>(archive.size()));
  const auto order = archive_order(archive);

  Eigen::MatrixXd xs(d, pop);
  Eigen::VectorXd fs(pop);
  for (int i = 0; i < pop; ++i) {
    xs.col(i) = archive[order[i]].x;
    fs[i] = archive[order[i]].f;
  }

  const double weight = 0.5, crossover = 0.9;
  while (!ev.exhausted()) {
    for (int i = 0; i < pop && !ev.exhausted(); ++i) {
      int r1, r2, r3;
      do r1 = static_cast<int>(rng.next_below(pop)); while (r1 == i);
      do r2 = static_cast<int>(rng.next_below(pop)); while (r2 == i || r2 == r1);
      do r3 = static_cast<int>(rng.next_below(pop));
      while (r3 == i || r3 == r1 || r3 == r2);

      const Eigen::VectorXd v = xs.col(r1) + weight * (xs.col(r2) - xs.col(r3));
      const int jrand = static_cast<int>(rng.next_below(d));
      Eigen::VectorXd trial = xs.col(i);
      for (int j = 0; j < d; ++j)
        if (j == jrand || rng.next_double() < crossover) trial[j] = v[j];
      trial = trial.cwiseMax(kDomainLo).cwiseMin(kDomainHi);

      const auto f = ev(trial);
      if (!f) return;
      if (*f <= fs[i]) {
        xs.col(i) = trial;
        fs[i] = *f;
      }
    }
  }
}

void run_pso(Evaluator& ev, Rng rng, const std::vector<Evaluation>& archive) {
  const int d = static_cast<int>(archive.front().x.size());
  const int swarm = std::min<int>(40, static_cast<int>(archive.size()));
  const auto order = archive_order(archive);

  Eigen::MatrixXd xs(d, swarm), vel = Eigen::MatrixXd::Zero(d, swarm);
  Eigen::MatrixXd pbest_x(d, swarm);
  Eigen::VectorXd pbest_f(swarm);
  for (int i = 0; i < swarm; ++i) {
    xs.col(i) = archive[order[i]].x;
    pbest_x.col(i) = xs.col(i);
    pbest_f[i] = archive[order[i]].f;
  }
  int gbest = 0;  // order[] is sorted, so particle 0 starts as the leader

  const double inertia = 0.7298437881283576;
  const double accel = 1.49618;
  const double vmax = 0.5 * (kDomainHi - kDomainLo);

  while (!ev.exhausted()) {
    for (int i = 0; i < swarm && !ev.exhausted(); ++i) {
      for (int j = 0; j < d; ++j) {
        const double r1 = rng.next_double();
        const double r2 = rng.next_double();
        double v = inertia * vel(j, i) +
                   accel * r1 * (pbest_x(j, i) - xs(j, i)) +
                   accel * r2 * (pbest_x(j, gbest) - xs(j, i));
        vel(j, i) = std::clamp(v, -vmax, vmax);
      }
      xs.col(i) += vel.col(i);
      xs.col(i) = xs.col(i).cwiseMax(kDomainLo).cwiseMin(kDomainHi);

      const auto f = ev(xs.col(i));
      if (!f) return;
      if (*f < pbest_f[i]) {
        pbest_f[i] = *f;
        pbest_x.col(i) = xs.col(i);
        if (*f < pbest_f[gbest]) gbest = i;
      }
    }
  }
}

// Nearest-better cluster heads of the archive: the incumbent plus every
// point whose nearest strictly-better neighbour is farther than twice the
// mean nearest-better distance.
std::vector<std::pair<Eigen::VectorXd, double>> mlsl_starts(
    const std::vector<Evaluation>& archive) {
  const int n = static_cast<int>(archive.size());
  std::vector<double> nb_dist(n, -1.0);
  double sum = 0.0;
  int count = 0;
  for (int i = 0; i < n; ++i) {
    double dmin = -1.0;
    for (int j = 0; j < n; ++j) {
      const bool better = archive[j].f < archive[i].f ||
                          (archive[j].f == archive[i].f && j < i);
      if (!better) continue;
      const double dist = (archive[i].x - archive[j].x).norm();
      if (dmin < 0.0 || dist < dmin) dmin = dist;
    }
    nb_dist[i] = dmin;
    if (dmin >= 0.0) {
      sum += dmin;
      ++count;
    }
  }
  const double cut = count > 0 ? 2.0 * sum / count : 0.0;

  std::vector<int> heads;
  for (int i = 0; i < n; ++i)
    if (nb_dist[i] < 0.0 || nb_dist[i] > cut) heads.push_back(i);
  std::stable_sort(heads.begin(), heads.end(), [&](int a, int b) {
    return archive[a].f < archive[b].f;
  });

  std::vector<std::pair<Eigen::VectorXd, double>> starts;
  starts.reserve(heads.size());
  for (int i : heads) starts.push_back({archive[i].x, archive[i].f});
  return starts;
}

}  // namespace

A1Result run_a1_cma(const ProblemInstance& p, std::uint64_t budget,
                    std::uint64_t seed) {
  A1Result out;
  out.log.problem = p.id();
  out.log.seed = seed;

  CmaEs cma(p.dimension(), Rng(seed).fork(kTagA1));
  EvalBudgetMeter meter{0, budget};
  Evaluator ev(p, meter, &out.log);
  cma.run(ev, &out.series);

  out.payload.archive = out.log.evaluations;
  out.payload.best = out.log.best();
  out.payload.cma = cma.checkpoint();
  out.payload.a1_budget_used = budget;
  return out;
}

RunLog warm_start_run(AlgorithmId a, const WarmStartPayload& payload,
                      const ProblemInstance& p, std::uint64_t a2_budget,
                      std::uint64_t seed, bool reseed_on_switch) {
  RunLog log;
  log.problem = p.id();
  log.seed = seed;
  log.evaluations = payload.archive;
  log.split_index = payload.archive.size();

  EvalBudgetMeter meter{0, a2_budget};
  Evaluator ev(p, meter, &log);
  Rng rng = branch_rng(seed, a);

  switch (a) {
    case AlgorithmId::kCmaNonElitist:
    case AlgorithmId::kCmaElitist: {
      CmaCheckpoint cp = payload.cma;
      if (reseed_on_switch) cp.rng_state = rng.state();
      CmaEs cma(cp);
      if (a == AlgorithmId::kCmaElitist) {
        cma.set_elitist(true);
        const int mu = cma.lambda() / 2;
        const auto order = archive_order(payload.archive);
        const int k = std::min<int>(mu, static_cast<int>(order.size()));
        Eigen::MatrixXd px(p.dimension(), k);
        Eigen::VectorXd pf(k);
        for (int i = 0; i < k; ++i) {
          px.col(i) = payload.archive[order[i]].x;
          pf[i] = payload.archive[order[i]].f;
        }
        cma.seed_parents(px, pf);
      }
      cma.run(ev);
      break;
    }
    case AlgorithmId::kDe:
      run_de(ev, rng, payload.archive);
      break;
    case AlgorithmId::kPso:
      run_pso(ev, rng, payload.archive);
      break;
    case AlgorithmId::kQuasiNewton:
      bfgs_engine(ev, rng, payload.archive,
                  {{payload.best.x, payload.best.f}});
      break;
    case AlgorithmId::kMlsl:
      bfgs_engine(ev, rng, payload.archive, mlsl_starts(payload.archive));
      break;
  }
  return log;
}

PortfolioRunOutput run_portfolio(const ProblemInstance& p, const RunKey& key,
                                 const PortfolioConfig& cfg) {
  const std::uint64_t a1_budget =
      cfg.a1_budget ? cfg.a1_budget : 30ULL * p.dimension();
  std::vector<std::uint64_t> budgets = cfg.a2_budgets;
  if (budgets.empty())
    budgets = {20ULL * p.dimension(), 70ULL * p.dimension(),
               170ULL * p.dimension()};
  const std::uint64_t max_budget =
      *std::max_element(budgets.begin(), budgets.end());

  PortfolioRunOutput out;
  out.a1 = run_a1_cma(p, a1_budget, key.seed);
  out.a1_precision = p.precision(out.a1.payload.best.f);

  // One branch per algorithm at the largest budget; the smaller budgets are
  // exact prefixes of the same deterministic stream, so their precisions are
  // read off the best-so-far curve.
  for (AlgorithmId a : kAllAlgorithms) {
    const RunLog log = warm_start_run(a, out.a1.payload, p, max_budget,
                                      key.seed, cfg.reseed_on_switch);
    const auto bsf = log.best_so_far();
    for (const std::uint64_t b : budgets) {
      const std::size_t idx = static_cast<std::size_t>(a1_budget + b) - 1;
      const double prec = p.precision(bsf.at(idx));
      out.rows.push_back({key, a, b, prec});
      if (prec > out.a1_precision) out.incumbent_preserved = false;
    }
  }
  return out;
}

std::vector<PerformanceRow> collect_portfolio_runs(
    const ProblemInstance& p, int n_runs,
    const std::vector<std::uint64_t>& seeds, const PortfolioConfig& cfg) {
  if (static_cast<int>(seeds.size()) < n_runs)
    throw ConfigError("collect_portfolio_runs: need one seed per run");
  std::vector<PerformanceRow> rows;
  for (int r = 0; r < n_runs; ++r) {
    RunKey key;
    key.suite = p.id().suite;
    key.function_id = p.id().function_id;
    key.instance_id = p.id().instance_id;
    key.dimension = p.id().dimension;
    key.run_index = r;
    key.seed = seeds[static_cast<std::size_t>(r)];
    auto out = run_portfolio(p, key, cfg);
    rows.insert(rows.end(), out.rows.begin(), out.rows.end());
  }
  return rows;
}

}  // namespace trajsel
