#include "trajsel/cma_es.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

namespace trajsel {

namespace {

constexpr double kEigenFloor = 1e-14;
constexpr double kTwoPi = 6.283185307179586;

// Eigendecomposition with flooring; returns true when flooring was needed.
bool floored_eigen(const Eigen::MatrixXd& cov, Eigen::MatrixXd& vecs,
                   Eigen::VectorXd& vals) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  vecs = es.eigenvectors();
  vals = es.eigenvalues();
  bool repaired = false;
  for (int i = 0; i < vals.size(); ++i) {
    if (vals[i] < kEigenFloor) {
      vals[i] = kEigenFloor;
      repaired = true;
    }
  }
  return repaired;
}

}  // namespace

std::vector<double> CmaStateSeries::channel(int i) const {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[i]);
  return out;
}

const std::array<std::string, kPsiWidth>& psi_channel_names() {
  static const std::array<std::string, kPsiWidth> names = {
      "sigma",   "loglik",  "v_norm",  "ps_norm", "pc_norm",
      "gamma_norm", "v_mean", "ps_mean", "pc_mean", "gamma_mean"};
  return names;
}

PsiRow snapshot_state(const Eigen::VectorXd& mean, double sigma,
                      const Eigen::MatrixXd& cov,
                      const Eigen::VectorXd& path_sigma,
                      const Eigen::VectorXd& path_c,
                      const Eigen::MatrixXd& population) {
  const int d = static_cast<int>(mean.size());
  const int n = static_cast<int>(population.cols());

  Eigen::MatrixXd vecs;
  Eigen::VectorXd vals;
  const bool repaired = floored_eigen(cov, vecs, vals);

  // Mahalanobis distances under N(mean, sigma^2 cov) via the eigen basis.
  Eigen::VectorXd gamma(n);
  for (int k = 0; k < n; ++k) {
    const Eigen::VectorXd u = vecs.transpose() * (population.col(k) - mean);
    double q = 0.0;
    for (int i = 0; i < d; ++i) q += u[i] * u[i] / vals[i];
    gamma[k] = std::sqrt(q) / sigma;
  }

  double log_det = d * std::log(sigma * sigma);
  for (int i = 0; i < d; ++i) log_det += std::log(vals[i]);
  const double loglik =
      -0.5 * n * d * std::log(kTwoPi) - 0.5 * n * log_det -
      0.5 * gamma.squaredNorm();

  PsiRow row;
  row.repaired = repaired;
  row.values[0] = sigma;
  row.values[1] = loglik;
  row.values[2] = vals.norm();
  row.values[3] = path_sigma.norm();
  row.values[4] = path_c.norm();
  row.values[5] = gamma.norm();
  row.values[6] = vals.mean();
  row.values[7] = path_sigma.mean();
  row.values[8] = path_c.mean();
  row.values[9] = gamma.mean();
  return row;
}

double mahalanobis_direct(const Eigen::VectorXd& mean, double sigma,
                          const Eigen::MatrixXd& cov,
                          const Eigen::VectorXd& x) {
  const Eigen::MatrixXd scaled = sigma * sigma * cov;
  const Eigen::VectorXd diff = x - mean;
  const Eigen::VectorXd sol = scaled.ldlt().solve(diff);
  return std::sqrt(diff.dot(sol));
}

CmaEs::CmaEs(int dimension, Rng rng, Options opt)
    : dim_(dimension), lambda_(opt.lambda), rng_(rng), elitist_(opt.elitist) {
  if (lambda_ <= 0)
    lambda_ = 4 + static_cast<int>(std::floor(3.0 * std::log(dimension)));
  init_constants();

  mean_.resize(dim_);
  for (int i = 0; i < dim_; ++i) mean_[i] = rng_.next_double(-4.0, 4.0);
  sigma_ = opt.sigma0;
  cov_ = Eigen::MatrixXd::Identity(dim_, dim_);
  path_c_ = Eigen::VectorXd::Zero(dim_);
  path_sigma_ = Eigen::VectorXd::Zero(dim_);
  best_.f = std::numeric_limits<double>::infinity();
  refresh_eigen();
}

CmaEs::CmaEs(const CmaCheckpoint& cp)
    : dim_(static_cast<int>(cp.mean.size())),
      lambda_(cp.lambda),
      mean_(cp.mean),
      path_c_(cp.path_c),
      path_sigma_(cp.path_sigma),
      cov_(cp.cov),
      sigma_(cp.sigma),
      generation_(cp.generation),
      rng_(cp.rng_state),
      elitist_(cp.elitist),
      pending_x_(cp.pending_x),
      pending_f_(cp.pending_f),
      pending_evaluated_(cp.pending_evaluated),
      has_pending_(cp.has_pending),
      parent_x_(cp.parent_x),
      parent_f_(cp.parent_f),
      best_(cp.best) {
  init_constants();
  refresh_eigen();
}

CmaCheckpoint CmaEs::checkpoint() const {
  CmaCheckpoint cp;
  cp.mean = mean_;
  cp.sigma = sigma_;
  cp.cov = cov_;
  cp.path_c = path_c_;
  cp.path_sigma = path_sigma_;
  cp.eigenvalues = eigvals_;
  cp.generation = generation_;
  cp.rng_state = rng_.state();
  cp.lambda = lambda_;
  cp.best = best_;
  cp.pending_x = pending_x_;
  cp.pending_f = pending_f_;
  cp.pending_evaluated = pending_evaluated_;
  cp.has_pending = has_pending_;
  cp.elitist = elitist_;
  cp.parent_x = parent_x_;
  cp.parent_f = parent_f_;
  return cp;
}

void CmaEs::seed_parents(const Eigen::MatrixXd& x, const Eigen::VectorXd& f) {
  parent_x_ = x;
  parent_f_ = f;
}

void CmaEs::init_constants() {
  mu_ = lambda_ / 2;
  weights_.resize(mu_);
  for (int i = 0; i < mu_; ++i)
    weights_[i] = std::log((lambda_ + 1) / 2.0) - std::log(i + 1.0);
  weights_ /= weights_.sum();
  mueff_ = 1.0 / weights_.squaredNorm();

  const double d = dim_;
  c_sigma_ = (mueff_ + 2.0) / (d + mueff_ + 5.0);
  d_sigma_ = 1.0 +
             2.0 * std::max(0.0, std::sqrt((mueff_ - 1.0) / (d + 1.0)) - 1.0) +
             c_sigma_;
  c_c_ = (4.0 + mueff_ / d) / (d + 4.0 + 2.0 * mueff_ / d);
  c_1_ = 2.0 / ((d + 1.3) * (d + 1.3) + mueff_);
  c_mu_ = std::min(1.0 - c_1_, 2.0 * (mueff_ - 2.0 + 1.0 / mueff_) /
                                   ((d + 2.0) * (d + 2.0) + mueff_));
  chi_n_ = std::sqrt(d) * (1.0 - 1.0 / (4.0 * d) + 1.0 / (21.0 * d * d));
}

void CmaEs::refresh_eigen() { floored_eigen(cov_, eigvecs_, eigvals_); }

void CmaEs::sample_population() {
  pending_x_.resize(dim_, lambda_);
  pending_f_.resize(lambda_);
  pending_evaluated_ = 0;
  has_pending_ = true;

  const Eigen::VectorXd scale = eigvals_.cwiseSqrt();
  for (int k = 0; k < lambda_; ++k) {
    Eigen::VectorXd x(dim_);
    // box handling by resampling, with a clamp fallback
    for (int attempt = 0; attempt < 100; ++attempt) {
      Eigen::VectorXd z(dim_);
      for (int i = 0; i < dim_; ++i) z[i] = rng_.next_gauss();
      x = mean_ + sigma_ * (eigvecs_ * scale.cwiseProduct(z).eval());
      if ((x.array() >= kDomainLo).all() && (x.array() <= kDomainHi).all())
        break;
      if (attempt == 99)
        x = x.cwiseMax(kDomainLo).cwiseMin(kDomainHi);
    }
    pending_x_.col(k) = x;
  }
}

void CmaEs::select_and_update() {
  // Selection pool: offspring, plus retained parents under (mu+lambda).
  const int n_parents =
      elitist_ ? static_cast<int>(parent_f_.size()) : 0;
  const int pool = lambda_ + n_parents;
  std::vector<int> order(pool);
  std::iota(order.begin(), order.end(), 0);
  auto fitness = [&](int i) {
    return i < lambda_ ? pending_f_[i] : parent_f_[i - lambda_];
  };
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return fitness(a) < fitness(b); });

  Eigen::MatrixXd selected(dim_, mu_);
  Eigen::VectorXd selected_f(mu_);
  for (int i = 0; i < mu_; ++i) {
    const int j = order[i];
    selected.col(i) =
        j < lambda_ ? pending_x_.col(j) : parent_x_.col(j - lambda_);
    selected_f[i] = fitness(j);
  }
  if (elitist_) {
    parent_x_ = selected;
    parent_f_ = selected_f;
  }

  const Eigen::VectorXd mean_old = mean_;
  mean_ = selected * weights_;
  const Eigen::VectorXd y_w = (mean_ - mean_old) / sigma_;

  // C^{-1/2} y_w in the cached eigenbasis of the sampling covariance
  const Eigen::VectorXd inv_sqrt =
      eigvals_.cwiseSqrt().cwiseInverse();
  const Eigen::VectorXd c_inv_half_yw =
      eigvecs_ * inv_sqrt.cwiseProduct(eigvecs_.transpose() * y_w).eval();

  path_sigma_ = (1.0 - c_sigma_) * path_sigma_ +
                std::sqrt(c_sigma_ * (2.0 - c_sigma_) * mueff_) * c_inv_half_yw;

  const double ps_norm = path_sigma_.norm();
  const double denom = std::sqrt(
      1.0 - std::pow(1.0 - c_sigma_, 2.0 * static_cast<double>(generation_ + 1)));
  const bool hsig =
      ps_norm / denom / chi_n_ < 1.4 + 2.0 / (dim_ + 1.0);

  path_c_ = (1.0 - c_c_) * path_c_ +
            (hsig ? std::sqrt(c_c_ * (2.0 - c_c_) * mueff_) : 0.0) * y_w;

  Eigen::MatrixXd rank_mu = Eigen::MatrixXd::Zero(dim_, dim_);
  for (int i = 0; i < mu_; ++i) {
    const Eigen::VectorXd y = (selected.col(i) - mean_old) / sigma_;
    rank_mu.noalias() += weights_[i] * y * y.transpose();
  }

  const double delta_hsig = (1.0 - (hsig ? 1.0 : 0.0)) * c_c_ * (2.0 - c_c_);
  cov_ = (1.0 - c_1_ - c_mu_) * cov_ +
         c_1_ * (path_c_ * path_c_.transpose() + delta_hsig * cov_) +
         c_mu_ * rank_mu;
  cov_ = 0.5 * (cov_ + cov_.transpose()).eval();

  sigma_ *= std::exp(c_sigma_ / d_sigma_ * (ps_norm / chi_n_ - 1.0));

  ++generation_;
  has_pending_ = false;
  refresh_eigen();
}

void CmaEs::run(Evaluator& eval, CmaStateSeries* series) {
  while (!eval.exhausted()) {
    if (!has_pending_) sample_population();
    const auto f = eval(pending_x_.col(pending_evaluated_));
    if (!f) break;
    pending_f_[pending_evaluated_] = *f;
    if (*f < best_.f) best_ = {pending_x_.col(pending_evaluated_), *f};
    ++pending_evaluated_;

    if (pending_evaluated_ == lambda_) {
      const Eigen::MatrixXd population = pending_x_;
      select_and_update();
      if (series)
        series->rows.push_back(snapshot_state(mean_, sigma_, cov_, path_sigma_,
                                              path_c_, population));
    }
  }
}

}  // namespace trajsel
