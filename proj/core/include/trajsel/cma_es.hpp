#ifndef TRAJSEL_CMA_ES_HPP
#define TRAJSEL_CMA_ES_HPP

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <vector>

#include "trajsel/bench_suite.hpp"
#include "trajsel/rng.hpp"

namespace trajsel {

inline constexpr int kPsiWidth = 10;

/// One per-iteration internal-state snapshot:
/// (sigma, loglik, ||v||, ||p_sigma||, ||p_c||, ||gamma||,
///  mean v, mean p_sigma, mean p_c, mean gamma)
/// where v are the eigenvalues of C and gamma the Mahalanobis distances of
/// the population under N(m, sigma^2 C).
struct PsiRow {
  std::array<double, kPsiWidth> values{};
  bool repaired = false;  // covariance needed eigenvalue flooring

  double operator[](int i) const { return values[static_cast<std::size_t>(i)]; }
};

struct CmaStateSeries {
  std::vector<PsiRow> rows;

  std::size_t size() const { return rows.size(); }
  /// One channel as a plain series, row order preserved.
  std::vector<double> channel(int i) const;
};

/// Channel names, index-aligned with PsiRow::values.
const std::array<std::string, kPsiWidth>& psi_channel_names();

/// Pure snapshot over explicit state; the engine calls this once per
/// completed generation, after adaptation, with the population sampled in
/// that generation. Columns of `population` are the lambda search points.
PsiRow snapshot_state(const Eigen::VectorXd& mean, double sigma,
                      const Eigen::MatrixXd& cov,
                      const Eigen::VectorXd& path_sigma,
                      const Eigen::VectorXd& path_c,
                      const Eigen::MatrixXd& population);

/// Mahalanobis distance of x from N(mean, sigma^2 cov) via an explicit
/// linear solve; the independent second route used to validate the eigen
/// path in snapshot_state.
double mahalanobis_direct(const Eigen::VectorXd& mean, double sigma,
                          const Eigen::MatrixXd& cov, const Eigen::VectorXd& x);

/// Full resumable state. `pending_*` carries the in-flight generation so a
/// run interrupted mid-generation (budgets are rarely multiples of lambda)
/// resumes bit-exactly.
struct CmaCheckpoint {
  Eigen::VectorXd mean;
  double sigma = 0.0;
  Eigen::MatrixXd cov;
  Eigen::VectorXd path_c;
  Eigen::VectorXd path_sigma;
  Eigen::VectorXd eigenvalues;
  std::int64_t generation = 0;
  Rng::State rng_state;
  int lambda = 0;
  Evaluation best;

  Eigen::MatrixXd pending_x;  // D x lambda, columns [0, pending_evaluated) done
  Eigen::VectorXd pending_f;
  int pending_evaluated = 0;
  bool has_pending = false;

  bool elitist = false;
  Eigen::MatrixXd parent_x;  // (mu+lambda) selection pool carry-over
  Eigen::VectorXd parent_f;
};

/// (mu/mu_w, lambda) CMA-ES with optional (mu+lambda) elitist selection,
/// default weights and lambda = 4 + floor(3 ln D). Steps one evaluation at a
/// time so any budget is consumed exactly.
class CmaEs {
 public:
  struct Options {
    bool elitist = false;
    double sigma0 = 2.0;
    int lambda = 0;  // 0: default population size
  };

  /// Fresh start; the initial mean is drawn uniformly in [-4,4]^D from rng.
  CmaEs(int dimension, Rng rng) : CmaEs(dimension, rng, Options()) {}
  CmaEs(int dimension, Rng rng, Options opt);

  /// Resume from a checkpoint; `elitist` in the checkpoint wins over opt.
  explicit CmaEs(const CmaCheckpoint& cp);

  /// Runs until the meter is exhausted. Appends one PsiRow per completed
  /// generation to `series` when given.
  void run(Evaluator& eval, CmaStateSeries* series = nullptr);

  CmaCheckpoint checkpoint() const;

  void set_elitist(bool on) { elitist_ = on; }
  /// Seeds the elitist selection pool (used when warm-starting from an
  /// archive rather than a live parent set).
  void seed_parents(const Eigen::MatrixXd& x, const Eigen::VectorXd& f);

  int lambda() const { return lambda_; }
  std::int64_t generation() const { return generation_; }
  const Evaluation& best() const { return best_; }
  double sigma() const { return sigma_; }
  double min_eigenvalue() const { return eigvals_.minCoeff(); }
  const Eigen::MatrixXd& covariance() const { return cov_; }

 private:
  void init_constants();
  void refresh_eigen();
  void sample_population();
  void select_and_update();

  int dim_ = 0;
  int lambda_ = 0;
  int mu_ = 0;
  Eigen::VectorXd weights_;
  double mueff_ = 0, c_sigma_ = 0, d_sigma_ = 0, c_c_ = 0, c_1_ = 0, c_mu_ = 0,
         chi_n_ = 0;

  Eigen::VectorXd mean_, path_c_, path_sigma_;
  Eigen::MatrixXd cov_;
  double sigma_ = 0;
  std::int64_t generation_ = 0;
  Rng rng_;
  bool elitist_ = false;

  Eigen::MatrixXd eigvecs_;
  Eigen::VectorXd eigvals_;

  Eigen::MatrixXd pending_x_;
  Eigen::VectorXd pending_f_;
  int pending_evaluated_ = 0;
  bool has_pending_ = false;

  Eigen::MatrixXd parent_x_;
  Eigen::VectorXd parent_f_;

  Evaluation best_;
};

}  // namespace trajsel

#endif
