#include <filesystem>
#include <random>
#include <set>
#include <sstream>

#include "doctest.h"
#include "trajsel/forest.hpp"
#include "trajsel/rng.hpp"

using namespace trajsel;

namespace {

std::pair<Eigen::MatrixXd, Eigen::VectorXd> make_data(Rng& rng, int n, int p) {
  Eigen::MatrixXd x(n, p);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) x(i, j) = rng.next_double(-1.0, 1.0);
    y[i] = std::sin(3.0 * x(i, 0)) + 0.5 * x(i, 1 % p);
  }
  return {x, y};
}

}  // namespace

TEST_CASE("target transform: log10 with clamp at 1e-12") {
  CHECK(target_transform(1e-3) == doctest::Approx(-3.0));
  CHECK(target_transform(0.0) == doctest::Approx(-12.0));
  CHECK(target_transform(10.0) == doctest::Approx(1.0));
  CHECK(target_transform(1e-15) == doctest::Approx(-12.0));
  // non-decreasing
  double prev = target_transform(0.0);
  for (double p : {1e-13, 1e-9, 1e-4, 0.1, 1.0, 100.0}) {
    CHECK(target_transform(p) >= prev);
    prev = target_transform(p);
  }
}

TEST_CASE("constant target predicts the constant everywhere") {
  Rng rng(1);
  auto [x, y] = make_data(rng, 60, 4);
  y.setConstant(2.75);
  const auto rf = RandomForest::fit(x, y, {}, 42);
  for (int i = 0; i < 10; ++i) {
    Eigen::VectorXd probe(4);
    for (int j = 0; j < 4; ++j) probe[j] = rng.next_double(-10.0, 10.0);
    CHECK(rf.predict(probe) == 2.75);
  }
}

TEST_CASE("single deep tree reaches zero training error on distinct rows") {
  Rng rng(2);
  auto [x, y] = make_data(rng, 80, 3);
  ForestParams p;
  p.n_estimators = 1;
  p.bootstrap = false;
  p.max_depth = 0;
  p.min_samples_split = 2;
  const auto rf = RandomForest::fit(x, y, p, 7);
  for (int i = 0; i < x.rows(); ++i)
    CHECK(rf.predict(x.row(i).transpose()) == doctest::Approx(y[i]).epsilon(1e-12));
}

TEST_CASE("a single-feature target trains to high R2") {
  Rng rng(3);
  const int n = 200;
  Eigen::MatrixXd x(n, 6);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < 6; ++j) x(i, j) = rng.next_double(-2.0, 2.0);
    y[i] = std::tanh(x(i, 2));
  }
  ForestParams p;
  p.max_depth = 0;
  const auto rf = RandomForest::fit(x, y, p, 11);
  const Eigen::VectorXd pred = rf.predict_many(x);
  const double ss_res = (pred - y).squaredNorm();
  const double ss_tot = (y.array() - y.mean()).matrix().squaredNorm();
  CHECK(1.0 - ss_res / ss_tot >= 0.95);
  // the informative feature dominates the importances
  int best = 0;
  rf.feature_importances().maxCoeff(&best);
  CHECK(best == 2);
}

TEST_CASE("importances are normalized") {
  Rng rng(4);
  auto [x, y] = make_data(rng, 100, 5);
  const auto rf = RandomForest::fit(x, y, {}, 1);
  CHECK(rf.feature_importances().sum() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rf.feature_importances().minCoeff() >= 0.0);
}

TEST_CASE("the hyperparameter grid is exactly the 72-point lattice") {
  const auto grid = hyper_grid();
  CHECK(grid.size() == 72);
  std::set<std::string> distinct;
  for (const auto& p : grid) distinct.insert(p.describe());
  CHECK(distinct.size() == 72);
  // preference order: the very first entry is the most-preferred tie winner
  CHECK(grid.front().n_estimators == 100);
  CHECK(grid.front().max_depth == 3);
  CHECK(grid.front().min_samples_split == 10);
}

TEST_CASE("grid search returns the CV argmin and is reproducible") {
  Rng rng(5);
  auto [x, y] = make_data(rng, 60, 3);
  const auto r1 = grid_search(x, y, {}, 3, 99, 2);
  const auto r2 = grid_search(x, y, {}, 3, 99, 1);
  CHECK(r1.best == r2.best);
  CHECK(r1.best_cv_mse == r2.best_cv_mse);
  CHECK(r1.cv_mse.size() == 72);
  for (double mse : r1.cv_mse) CHECK(r1.best_cv_mse <= mse);
}

TEST_CASE("grouped folds keep a group on one side") {
  Rng rng(6);
  auto [x, y] = make_data(rng, 40, 3);
  std::vector<int> groups;
  for (int i = 0; i < 40; ++i) groups.push_back(i / 10);  // 4 groups
  // runs without throwing and still scores all configurations
  const auto r = grid_search(x, y, groups, 5, 1, 2);
  CHECK(r.cv_mse.size() == 72);
}

TEST_CASE("prediction stays inside the mean-of-trees sandwich and range") {
  Rng rng(7);
  auto [x, y] = make_data(rng, 120, 4);
  y = y.unaryExpr([](double v) { return target_transform(std::abs(v)); });
  const auto rf = RandomForest::fit(x, y, {}, 3);
  for (int t = 0; t < 50; ++t) {
    Eigen::VectorXd probe(4);
    for (int j = 0; j < 4; ++j) probe[j] = rng.next_double(-20.0, 20.0);
    const auto [lo, hi] = rf.prediction_range(probe);
    const double pred = rf.predict(probe);
    CHECK(pred >= lo - 1e-12);
    CHECK(pred <= hi + 1e-12);
    CHECK(pred >= -12.0 - 1e-9);
    CHECK(pred <= y.maxCoeff() + 1.0);
  }
}

TEST_CASE("fixed seed yields identical forests; row order does not matter") {
  Rng rng(8);
  auto [x, y] = make_data(rng, 70, 3);
  const auto a = RandomForest::fit(x, y, {}, 17);
  const auto b = RandomForest::fit(x, y, {}, 17);
  Eigen::VectorXd probe(3);
  probe << 0.3, -0.4, 0.9;
  CHECK(a.predict(probe) == b.predict(probe));

  // permuted rows, bootstrap off: same multiset of rows -> same tree
  ForestParams p;
  p.n_estimators = 1;
  p.bootstrap = false;
  std::vector<int> perm(70);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), std::mt19937(4));
  Eigen::MatrixXd xp(70, 3);
  Eigen::VectorXd yp(70);
  for (int i = 0; i < 70; ++i) {
    xp.row(i) = x.row(perm[static_cast<std::size_t>(i)]);
    yp[i] = y[perm[static_cast<std::size_t>(i)]];
  }
  const auto t1 = RandomForest::fit(x, y, p, 5);
  const auto t2 = RandomForest::fit(xp, yp, p, 5);
  for (int t = 0; t < 20; ++t) {
    Eigen::VectorXd q(3);
    for (int j = 0; j < 3; ++j) q[j] = rng.next_double(-1.0, 1.0);
    CHECK(t1.predict(q) == t2.predict(q));
  }
}

TEST_CASE("forest serialization round-trips bit-exactly") {
  Rng rng(9);
  auto [x, y] = make_data(rng, 50, 4);
  const auto rf = RandomForest::fit(x, y, {}, 23);
  std::stringstream buf;
  rf.save(buf);
  const auto back = RandomForest::load(buf);
  for (int t = 0; t < 20; ++t) {
    Eigen::VectorXd q(4);
    for (int j = 0; j < 4; ++j) q[j] = rng.next_double(-1.5, 1.5);
    CHECK(rf.predict(q) == back.predict(q));
  }
  CHECK(rf.feature_importances() == back.feature_importances());
}

TEST_CASE("classification forest separates labeled clusters") {
  Rng rng(10);
  const int n = 120;
  Eigen::MatrixXd x(n, 2);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    const int cls = i % 3;
    x(i, 0) = cls * 4.0 + 0.3 * rng.next_gauss();
    x(i, 1) = rng.next_gauss();
    y[i] = cls;
  }
  const auto rf =
      RandomForest::fit(x, y, {}, 5, RandomForest::Task::kClassification);
  int correct = 0;
  for (int i = 0; i < n; ++i)
    correct += rf.predict(x.row(i).transpose()) == y[i];
  CHECK(correct >= n - 2);
  CHECK(rf.feature_importances()[0] > rf.feature_importances()[1]);
}

TEST_CASE("feature matrix: medians, imputation, selection, csv round-trip") {
  FeatureMatrix m;
  m.names = {"a", "b"};
  for (int i = 0; i < 4; ++i)
    m.keys.push_back(RunKey{Suite::kTrain, 1, 1, 5, i, 100ULL + i});
  m.values.resize(4, 2);
  m.values << 1.0, 10.0, 3.0, std::nan(""), 2.0, 30.0, 4.0, 20.0;

  const Eigen::VectorXd med = m.column_medians();
  CHECK(med[0] == 2.5);
  CHECK(med[1] == 20.0);

  const auto tmp = std::filesystem::temp_directory_path() / "trajsel_fm.csv";
  write_feature_csv(tmp, m);
  const auto back = read_feature_csv(tmp);
  CHECK(back.names == m.names);
  REQUIRE(back.keys.size() == m.keys.size());
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 2; ++j) {
      if (std::isnan(m.values(i, j)))
        CHECK(std::isnan(back.values(i, j)));
      else
        CHECK(back.values(i, j) == m.values(i, j));
    }
  std::filesystem::remove(tmp);

  FeatureMatrix imputed = m;
  imputed.impute(med);
  CHECK(imputed.values(1, 1) == 20.0);

  const auto sel = m.select_columns({"b"});
  CHECK(sel.n_cols() == 1);
  CHECK(sel.values(0, 0) == 10.0);
  CHECK_THROWS_AS(m.select_columns({"zzz"}), ConfigError);
}

TEST_CASE("model bundle: schema checks and persistence") {
  Rng rng(11);
  const int n = 40;
  Eigen::MatrixXd x(n, 3);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < 3; ++j) x(i, j) = rng.next_double();
    y[i] = x(i, 0);
  }

  ModelBundle bundle;
  bundle.dataset_hash = 777;
  bundle.seed = 13;
  for (AlgorithmId a : kAllAlgorithms) {
    TrainedModel model;
    ForestParams p;
    p.n_estimators = 10;
    model.forest = RandomForest::fit(x, y, p, 13 + static_cast<int>(a));
    model.feature_names = {"f0", "f1", "f2"};
    model.imputation = Eigen::VectorXd::Zero(3);
    model.chosen = p;
    bundle.put("ela", 100, a, std::move(model));
  }

  Eigen::VectorXd probe(3);
  probe << 0.5, 0.5, 0.5;
  const auto preds = bundle.predict_all("ela", 100, {"f0", "f1", "f2"}, probe);
  for (double v : preds) CHECK(std::isfinite(v));

  CHECK_THROWS_AS(bundle.predict_all("ela", 100, {"f0", "f1"},
                                     Eigen::VectorXd::Zero(2)),
                  SchemaMismatchError);
  CHECK_THROWS_AS(bundle.predict_all("ela", 100, {"f0", "f1", "f2", "f2"},
                                     Eigen::VectorXd::Zero(4)),
                  SchemaMismatchError);
  CHECK_THROWS_AS(bundle.predict_all("ts", 100, {"f0", "f1", "f2"}, probe),
                  NotFoundError);

  // NaN input falls back to the stored imputation value
  Eigen::VectorXd with_nan = probe;
  with_nan[1] = std::nan("");
  const auto imputed = bundle.predict_all("ela", 100, {"f0", "f1", "f2"}, with_nan);
  for (double v : imputed) CHECK(std::isfinite(v));

  const auto tmp = std::filesystem::temp_directory_path() / "trajsel_bundle.rfb";
  bundle.save(tmp);
  const auto back = ModelBundle::load(tmp);
  CHECK(back.dataset_hash == 777);
  const auto preds2 = back.predict_all("ela", 100, {"f0", "f1", "f2"}, probe);
  for (int i = 0; i < kNumAlgorithms; ++i) CHECK(preds[i] == preds2[i]);
  std::filesystem::remove(tmp);
}
