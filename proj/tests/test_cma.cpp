#include <Eigen/Dense>
#include <cmath>

#include "doctest.h"
#include "trajsel/bench_suite.hpp"
#include "trajsel/cma_es.hpp"
#include "trajsel/optimizers.hpp"
#include "trajsel/rng.hpp"

using namespace trajsel;

namespace {

Eigen::MatrixXd random_spd(Rng& rng, int d) {
  Eigen::MatrixXd a(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = rng.next_gauss();
  Eigen::MatrixXd spd = a * a.transpose();
  spd.diagonal().array() += 0.1;
  return spd;
}

}  // namespace

TEST_CASE("default population size and snapshot count") {
  // D=5: lambda = 4 + floor(3 ln 5) = 8; 150 evaluations -> 18 generations
  auto p = make_problem({Suite::kTrain, 1, 1, 5});
  auto r5 = run_a1_cma(p, 150, 42);
  CHECK(r5.payload.cma.lambda == 8);
  CHECK(r5.series.size() == 18);
  CHECK(r5.log.size() == 150);

  auto p10 = make_problem({Suite::kTrain, 1, 1, 10});
  auto r10 = run_a1_cma(p10, 300, 42);
  CHECK(r10.payload.cma.lambda == 10);
  CHECK(r10.series.size() == 30);
  for (const auto& row : r10.series.rows)
    CHECK(row.values.size() == kPsiWidth);
}

TEST_CASE("same problem and seed give bit-identical runs") {
  auto p = make_problem({Suite::kTrain, 12, 2, 5});
  auto a = run_a1_cma(p, 150, 7);
  auto b = run_a1_cma(p, 150, 7);
  REQUIRE(a.log.size() == b.log.size());
  for (std::size_t i = 0; i < a.log.size(); ++i) {
    CHECK(a.log.evaluations[i].f == b.log.evaluations[i].f);
    CHECK(a.log.evaluations[i].x == b.log.evaluations[i].x);
  }
}

TEST_CASE("switch identity: warm-started non-elitist CMA equals the uninterrupted run") {
  Rng picker(99);
  for (int trial = 0; trial < 5; ++trial) {
    const int fid = 1 + static_cast<int>(picker.next_below(24));
    const std::uint64_t seed = picker.next_u64();
    auto p = make_problem({Suite::kTrain, fid, 1, 5});

    // uninterrupted run of 500 evaluations on one engine
    RunLog full;
    full.problem = p.id();
    CmaEs cma(5, Rng(seed).fork(11));
    EvalBudgetMeter meter{0, 500};
    Evaluator ev(p, meter, &full);
    cma.run(ev);

    // split run: 150 + warm-started 350
    auto a1 = run_a1_cma(p, 150, seed);
    auto resumed = warm_start_run(AlgorithmId::kCmaNonElitist, a1.payload, p,
                                  350, seed);

    REQUIRE(resumed.size() == 500);
    REQUIRE(full.size() == 500);
    for (std::size_t i = 0; i < 500; ++i) {
      CHECK(full.evaluations[i].x == resumed.evaluations[i].x);
      CHECK(full.evaluations[i].f == resumed.evaluations[i].f);
    }
  }
}

TEST_CASE("snapshot closed forms at the distribution center") {
  const int d = 5, lambda = 8;
  const Eigen::VectorXd m = Eigen::VectorXd::Constant(d, 1.5);
  const Eigen::MatrixXd c = Eigen::MatrixXd::Identity(d, d);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(d);

  Eigen::MatrixXd pop(d, lambda);
  for (int k = 0; k < lambda; ++k) pop.col(k) = m;

  const PsiRow row = snapshot_state(m, 1.0, c, zero, zero, pop);
  CHECK(row[0] == 1.0);
  CHECK(row[5] == 0.0);  // ||gamma||
  CHECK(row[9] == 0.0);  // mean gamma
  const double want = lambda * (-0.5 * d * std::log(2.0 * 3.141592653589793));
  CHECK(row[1] == doctest::Approx(want).epsilon(1e-12));
  CHECK(row[2] == doctest::Approx(std::sqrt(static_cast<double>(d))));
  CHECK(row[6] == doctest::Approx(1.0));
}

TEST_CASE("snapshot Mahalanobis with isotropic scale two") {
  const int d = 5;
  const Eigen::VectorXd m = Eigen::VectorXd::Zero(d);
  const Eigen::MatrixXd c = Eigen::MatrixXd::Identity(d, d);
  Eigen::MatrixXd pop(d, 1);
  pop.col(0) = m;
  pop(0, 0) = 2.0;

  const PsiRow row = snapshot_state(m, 2.0, c, m, m, pop);
  CHECK(row[5] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("Mahalanobis via eigen path agrees with the direct solve") {
  Rng rng(4242);
  for (int trial = 0; trial < 100; ++trial) {
    const int d = 3 + static_cast<int>(rng.next_below(8));
    const Eigen::MatrixXd c = random_spd(rng, d);
    Eigen::VectorXd m(d), x(d);
    for (int i = 0; i < d; ++i) {
      m[i] = rng.next_gauss();
      x[i] = rng.next_gauss();
    }
    const double sigma = 0.5 + rng.next_double();

    Eigen::MatrixXd pop(d, 1);
    pop.col(0) = x;
    const PsiRow row =
        snapshot_state(m, sigma, c, Eigen::VectorXd::Zero(d),
                       Eigen::VectorXd::Zero(d), pop);
    const double direct = mahalanobis_direct(m, sigma, c, x);
    CHECK(std::abs(row[5] - direct) <= 1e-8 * std::max(1.0, direct));
  }
}

TEST_CASE("psi norm entries match their definition") {
  auto p = make_problem({Suite::kTrain, 10, 1, 5});
  auto r = run_a1_cma(p, 150, 3);
  // reconstruct ||v|| and mean(v) from the checkpointed eigenvalues of the
  // final generation via norm identity ||v||^2 = sum v_i^2
  for (const auto& row : r.series.rows) {
    CHECK(row[0] > 0.0);       // sigma
    CHECK(row[2] >= 0.0);      // ||v||
    CHECK(row[6] > 0.0);       // mean eigenvalue
    CHECK(std::isfinite(row[1]));
  }
}

TEST_CASE("covariance stays positive definite over a long run") {
  auto p = make_problem({Suite::kTrain, 20, 1, 5});
  CmaEs cma(5, Rng(17).fork(11));
  EvalBudgetMeter meter{0, 2000};
  RunLog log;
  Evaluator ev(p, meter, &log);
  cma.run(ev);
  CHECK(cma.min_eigenvalue() > 0.0);
  CHECK(cma.generation() == 2000 / cma.lambda());
}

TEST_CASE("elitist parent set best is non-increasing per generation") {
  auto p = make_problem({Suite::kTrain, 15, 1, 5});
  auto a1 = run_a1_cma(p, 150, 23);

  CmaEs cma(a1.payload.cma);
  cma.set_elitist(true);
  const int mu = cma.lambda() / 2;
  Eigen::MatrixXd px(5, mu);
  Eigen::VectorXd pf(mu);
  std::vector<const Evaluation*> sorted;
  for (const auto& e : a1.payload.archive) sorted.push_back(&e);
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](auto* a, auto* b) { return a->f < b->f; });
  for (int i = 0; i < mu; ++i) {
    px.col(i) = sorted[static_cast<std::size_t>(i)]->x;
    pf[i] = sorted[static_cast<std::size_t>(i)]->f;
  }
  cma.seed_parents(px, pf);

  double prev = pf.minCoeff();
  for (int gen = 0; gen < 30; ++gen) {
    EvalBudgetMeter meter{0, static_cast<std::uint64_t>(cma.lambda())};
    Evaluator ev(p, meter, nullptr);
    cma.run(ev);
    const auto cp = cma.checkpoint();
    REQUIRE(cp.parent_f.size() > 0);
    const double cur = cp.parent_f.minCoeff();
    CHECK(cur <= prev);
    prev = cur;
  }
}
