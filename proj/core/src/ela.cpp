#include "trajsel/ela.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

namespace trajsel {

namespace {

// All feature sets operate on a canonical row order (sorted by y, ties by
// lexicographic x). This makes every feature, including fold assignment and
// the tour start, invariant under permutations of the input rows.
Sample canonicalize(const Sample& s) {
  const int n = s.n();
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (s.y[a] != s.y[b]) return s.y[a] < s.y[b];
    for (int j = 0; j < s.d(); ++j)
      if (s.x(a, j) != s.x(b, j)) return s.x(a, j) < s.x(b, j);
    return false;
  });
  Sample out;
  out.x.resize(n, s.d());
  out.y.resize(n);
  for (int i = 0; i < n; ++i) {
    out.x.row(i) = s.x.row(order[i]);
    out.y[i] = s.y[order[i]];
  }
  return out;
}

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_sd(const std::vector<double>& v) {
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / (static_cast<double>(v.size()) - 1.0));
}

double median_of(std::vector<double> v) {
  const std::size_t n = v.size();
  std::sort(v.begin(), v.end());
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double ma = mean_of(a), mb = mean_of(b);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return sab / std::sqrt(saa * sbb);
}

// type-7 quantile of an already sorted series
double quantile_sorted(const Eigen::VectorXd& y, double q) {
  const int n = static_cast<int>(y.size());
  const double h = (n - 1) * q;
  const int lo = static_cast<int>(std::floor(h));
  if (lo + 1 >= n) return y[n - 1];
  return y[lo] + (h - lo) * (y[lo + 1] - y[lo]);
}

// ---------------------------------------------------------------- levelset

struct Discriminant {
  // common interface over LDA/QDA: score(x, class) to maximize
  Eigen::MatrixXd mean;          // 2 x d
  std::vector<Eigen::MatrixXd> cov_inv;
  std::vector<double> log_det;
  Eigen::Vector2d log_prior;
  bool pooled = false;
  bool ok = false;

  double score(const Eigen::VectorXd& x, int c) const {
    const Eigen::VectorXd diff = x - mean.row(c).transpose();
    const auto& ci = cov_inv[pooled ? 0 : static_cast<std::size_t>(c)];
    const double ld = log_det[pooled ? 0 : static_cast<std::size_t>(c)];
    return -0.5 * diff.dot(ci * diff) - 0.5 * ld + log_prior[c];
  }
};

// Inverts a covariance, ridge-regularizing a singular one once. Returns
// false when it stays numerically singular.
bool safe_inverse(Eigen::MatrixXd cov, int d, Eigen::MatrixXd& inv,
                  double& log_det) {
  for (int attempt = 0; attempt < 2; ++attempt) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    const double max_ev = es.eigenvalues().maxCoeff();
    if (es.eigenvalues().minCoeff() > 1e-12 * std::max(1.0, max_ev)) {
      const Eigen::VectorXd inv_ev = es.eigenvalues().cwiseInverse();
      inv = es.eigenvectors() * inv_ev.asDiagonal() *
            es.eigenvectors().transpose();
      log_det = es.eigenvalues().array().log().sum();
      return true;
    }
    cov.diagonal().array() += 1e-6 * cov.trace() / d + 1e-12;
  }
  return false;
}

Discriminant fit_lda(const Eigen::MatrixXd& x, const std::vector<int>& labels,
                     const std::vector<int>& train) {
  const int d = static_cast<int>(x.cols());
  Discriminant m;
  m.pooled = true;
  m.mean = Eigen::MatrixXd::Zero(2, d);
  int counts[2] = {0, 0};
  for (int i : train) {
    m.mean.row(labels[i]) += x.row(i);
    ++counts[labels[i]];
  }
  if (counts[0] < 2 || counts[1] < 2) return m;
  for (int c = 0; c < 2; ++c) m.mean.row(c) /= counts[c];

  Eigen::MatrixXd pooled = Eigen::MatrixXd::Zero(d, d);
  for (int i : train) {
    const Eigen::VectorXd diff = x.row(i).transpose() - m.mean.row(labels[i]).transpose();
    pooled += diff * diff.transpose();
  }
  pooled /= static_cast<double>(train.size() - 2);

  Eigen::MatrixXd inv;
  double log_det;
  if (!safe_inverse(pooled, d, inv, log_det)) return m;
  m.cov_inv = {inv};
  m.log_det = {log_det};
  const double total = counts[0] + counts[1];
  m.log_prior = {std::log(counts[0] / total), std::log(counts[1] / total)};
  m.ok = true;
  return m;
}

Discriminant fit_qda(const Eigen::MatrixXd& x, const std::vector<int>& labels,
                     const std::vector<int>& train) {
  const int d = static_cast<int>(x.cols());
  Discriminant m;
  m.mean = Eigen::MatrixXd::Zero(2, d);
  int counts[2] = {0, 0};
  for (int i : train) {
    m.mean.row(labels[i]) += x.row(i);
    ++counts[labels[i]];
  }
  if (counts[0] < 2 || counts[1] < 2) return m;
  for (int c = 0; c < 2; ++c) m.mean.row(c) /= counts[c];

  m.cov_inv.resize(2);
  m.log_det.resize(2);
  for (int c = 0; c < 2; ++c) {
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
    for (int i : train) {
      if (labels[i] != c) continue;
      const Eigen::VectorXd diff = x.row(i).transpose() - m.mean.row(c).transpose();
      cov += diff * diff.transpose();
    }
    cov /= static_cast<double>(counts[c] - 1);
    if (!safe_inverse(cov, d, m.cov_inv[c], m.log_det[c])) return m;
  }
  const double total = counts[0] + counts[1];
  m.log_prior = {std::log(counts[0] / total), std::log(counts[1] / total)};
  m.ok = true;
  return m;
}

// 5-fold stratified CV misclassification rate; nullopt when any fold's
// classifier cannot be fit.
template <typename FitFn>
std::optional<double> cv_mmce(const Eigen::MatrixXd& x,
                              const std::vector<int>& labels, FitFn fit) {
  const int n = static_cast<int>(labels.size());
  constexpr int kFolds = 5;
  // round-robin within each class over the canonical order
  std::vector<int> fold(n);
  int seen[2] = {0, 0};
  for (int i = 0; i < n; ++i) fold[i] = seen[labels[i]]++ % kFolds;

  int errors = 0;
  for (int f = 0; f < kFolds; ++f) {
    std::vector<int> train, test;
    for (int i = 0; i < n; ++i) (fold[i] == f ? test : train).push_back(i);
    const Discriminant m = fit(x, labels, train);
    if (!m.ok) return std::nullopt;
    for (int i : test) {
      const int pred = m.score(x.row(i).transpose(), 1) >
                               m.score(x.row(i).transpose(), 0)
                           ? 1
                           : 0;
      if (pred != labels[i]) ++errors;
    }
  }
  return static_cast<double>(errors) / n;
}

// --------------------------------------------------------------- regression

struct Fit {
  Eigen::VectorXd beta;
  double adj_r2 = std::numeric_limits<double>::quiet_NaN();
  bool ok = false;
  bool rank_deficient = false;
};

Fit least_squares(const Eigen::MatrixXd& design, const Eigen::VectorXd& y) {
  Fit f;
  const int n = static_cast<int>(design.rows());
  const int p = static_cast<int>(design.cols());
  if (n <= p) return f;

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  f.rank_deficient = qr.rank() < p;
  f.beta = qr.solve(y);

  const double ss_res = (y - design * f.beta).squaredNorm();
  const double ss_tot = (y.array() - y.mean()).matrix().squaredNorm();
  if (ss_tot == 0.0) return f;
  const double r2 = 1.0 - ss_res / ss_tot;
  f.adj_r2 = 1.0 - (1.0 - r2) * (n - 1.0) / (n - p);
  f.ok = true;
  return f;
}

}  // namespace

Sample Sample::from_log(const RunLog& log) {
  Sample s;
  const int n = static_cast<int>(log.size());
  if (n == 0) throw ConfigError("empty run log");
  const int d = static_cast<int>(log.evaluations.front().x.size());
  s.x.resize(n, d);
  s.y.resize(n);
  for (int i = 0; i < n; ++i) {
    s.x.row(i) = log.evaluations[static_cast<std::size_t>(i)].x.transpose();
    s.y[i] = log.evaluations[static_cast<std::size_t>(i)].f;
  }
  return s;
}

Sample Sample::from_log_prefix(const RunLog& log) {
  if (!log.split_index) return from_log(log);
  RunLog prefix;
  prefix.problem = log.problem;
  prefix.seed = log.seed;
  prefix.evaluations.assign(log.evaluations.begin(),
                            log.evaluations.begin() +
                                static_cast<std::ptrdiff_t>(*log.split_index));
  return from_log(prefix);
}

FeatureSet ela_distribution(const Sample& input) {
  const Sample s = canonicalize(input);
  const int n = s.n();
  FeatureSet out;
  if (n < 4) {
    out.push("ela_distr.skewness", FeatureValue::invalid("n<4"));
    out.push("ela_distr.kurtosis", FeatureValue::invalid("n<4"));
    out.push("ela_distr.number_of_peaks", FeatureValue::invalid("n<4"));
    return out;
  }

  const double mean = s.y.mean();
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double c = s.y[i] - mean;
    m2 += c * c;
    m3 += c * c * c;
    m4 += c * c * c * c;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;

  if (m2 == 0.0) {
    out.push("ela_distr.skewness", FeatureValue::invalid("constant_y"));
    out.push("ela_distr.kurtosis", FeatureValue::invalid("constant_y"));
    out.push("ela_distr.number_of_peaks", FeatureValue::ok(1.0));
    return out;
  }
  out.push("ela_distr.skewness", FeatureValue::ok(m3 / std::pow(m2, 1.5)));
  out.push("ela_distr.kurtosis", FeatureValue::ok(m4 / (m2 * m2) - 3.0));

  // peak count of a Gaussian KDE with Silverman bandwidth
  Eigen::VectorXd sorted = s.y;  // already sorted by canonical order
  const double sd = std::sqrt(m2 * n / (n - 1.0));
  const double iqr =
      quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
  double spread = std::min(sd, iqr / 1.34);
  if (spread <= 0.0) spread = sd;
  const double h = 0.9 * spread * std::pow(n, -0.2);

  constexpr int kGrid = 512;
  const double lo = sorted[0] - 3.0 * h;
  const double hi = sorted[n - 1] + 3.0 * h;
  std::vector<double> dens(kGrid, 0.0);
  double peak_max = 0.0;
  for (int g = 0; g < kGrid; ++g) {
    const double t = lo + (hi - lo) * g / (kGrid - 1);
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      const double u = (t - s.y[i]) / h;
      acc += std::exp(-0.5 * u * u);
    }
    dens[g] = acc;
    peak_max = std::max(peak_max, acc);
  }
  int peaks = 0;
  const double floor_level = 0.1 * peak_max;
  for (int g = 0; g < kGrid; ++g) {
    const bool up = g == 0 || dens[g] > dens[g - 1];
    const bool down = g == kGrid - 1 || dens[g] > dens[g + 1];
    if (up && down && dens[g] > floor_level) ++peaks;
  }
  out.push("ela_distr.number_of_peaks", FeatureValue::ok(peaks));
  return out;
}

FeatureSet ela_levelset(const Sample& input) {
  const Sample s = canonicalize(input);
  const int n = s.n();
  FeatureSet out;
  constexpr double kQuantiles[3] = {0.10, 0.25, 0.50};
  constexpr int kFolds = 5;

  for (double q : kQuantiles) {
    const int tag = static_cast<int>(std::lround(q * 100));
    const std::string suffix = (tag < 10 ? "0" : "") + std::to_string(tag);
    auto name = [&](const char* stem) {
      return std::string("ela_level.") + stem + "_" + suffix;
    };

    if (n < 20) {
      for (const char* stem : {"mmce_lda", "mmce_qda", "lda_qda_ratio"})
        out.push(name(stem), FeatureValue::invalid("n<20"));
      continue;
    }

    const double threshold = quantile_sorted(s.y, q);
    std::vector<int> labels(n);
    int low = 0;
    for (int i = 0; i < n; ++i) {
      labels[i] = s.y[i] <= threshold ? 0 : 1;
      low += labels[i] == 0;
    }
    if (low < kFolds || n - low < kFolds) {
      for (const char* stem : {"mmce_lda", "mmce_qda", "lda_qda_ratio"})
        out.push(name(stem), FeatureValue::invalid("degenerate_class"));
      continue;
    }

    const auto lda = cv_mmce(s.x, labels, fit_lda);
    const auto qda = cv_mmce(s.x, labels, fit_qda);
    out.push(name("mmce_lda"), lda ? FeatureValue::ok(*lda)
                                   : FeatureValue::invalid("singular_cov"));
    out.push(name("mmce_qda"), qda ? FeatureValue::ok(*qda)
                                   : FeatureValue::invalid("singular_cov"));
    if (lda && qda && *qda > 0.0)
      out.push(name("lda_qda_ratio"), FeatureValue::ok(*lda / *qda));
    else
      out.push(name("lda_qda_ratio"),
               FeatureValue::invalid(lda && qda ? "zero_qda" : "singular_cov"));
  }
  return out;
}

FeatureSet ela_meta_model(const Sample& input) {
  const Sample s = canonicalize(input);
  const int n = s.n();
  const int d = s.d();
  FeatureSet out;

  const int n_int = d * (d - 1) / 2;
  Eigen::MatrixXd lin(n, 1 + d);
  lin.col(0).setOnes();
  lin.rightCols(d) = s.x;

  Eigen::MatrixXd quad(n, 1 + 2 * d);
  quad.leftCols(1 + d) = lin;
  quad.rightCols(d) = s.x.cwiseProduct(s.x);

  Eigen::MatrixXd lin_int(n, 1 + d + n_int);
  lin_int.leftCols(1 + d) = lin;
  Eigen::MatrixXd quad_int(n, 1 + 2 * d + n_int);
  quad_int.leftCols(1 + 2 * d) = quad;
  {
    int c = 0;
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j, ++c) {
        lin_int.col(1 + d + c) = s.x.col(i).cwiseProduct(s.x.col(j));
        quad_int.col(1 + 2 * d + c) = s.x.col(i).cwiseProduct(s.x.col(j));
      }
  }

  const Fit f_lin = least_squares(lin, s.y);
  const Fit f_lin_int = least_squares(lin_int, s.y);
  const Fit f_quad = least_squares(quad, s.y);
  const Fit f_quad_int = least_squares(quad_int, s.y);

  auto adj = [](const Fit& f) {
    if (!f.ok) return FeatureValue::invalid("underdetermined");
    return f.rank_deficient ? FeatureValue::ok_flagged(f.adj_r2, "rank_deficient")
                            : FeatureValue::ok(f.adj_r2);
  };
  out.push("ela_meta.adj_r2_lin", adj(f_lin));
  out.push("ela_meta.adj_r2_lin_int", adj(f_lin_int));
  out.push("ela_meta.adj_r2_quad", adj(f_quad));
  out.push("ela_meta.adj_r2_quad_int", adj(f_quad_int));

  if (f_lin.ok) {
    const Eigen::VectorXd coef = f_lin.beta.tail(d).cwiseAbs();
    const double cmin = coef.minCoeff(), cmax = coef.maxCoeff();
    out.push("ela_meta.lin_coef_min", FeatureValue::ok(cmin));
    out.push("ela_meta.lin_coef_max", FeatureValue::ok(cmax));
    out.push("ela_meta.lin_coef_max_by_min",
             cmin > 0.0 ? FeatureValue::ok(cmax / cmin)
                        : FeatureValue::invalid("zero_min_coef"));
  } else {
    out.push("ela_meta.lin_coef_min", FeatureValue::invalid("underdetermined"));
    out.push("ela_meta.lin_coef_max", FeatureValue::invalid("underdetermined"));
    out.push("ela_meta.lin_coef_max_by_min",
             FeatureValue::invalid("underdetermined"));
  }

  if (f_quad.ok) {
    const Eigen::VectorXd qc = f_quad.beta.tail(d).cwiseAbs();
    const double qmin = qc.minCoeff(), qmax = qc.maxCoeff();
    out.push("ela_meta.quad_cond", qmin > 0.0
                                       ? FeatureValue::ok(qmax / qmin)
                                       : FeatureValue::invalid("zero_quad_coef"));
  } else {
    out.push("ela_meta.quad_cond", FeatureValue::invalid("underdetermined"));
  }
  return out;
}

FeatureSet ela_dispersion(const Sample& input) {
  const Sample s = canonicalize(input);
  const int n = s.n();
  FeatureSet out;
  constexpr double kQuantiles[4] = {0.02, 0.05, 0.10, 0.25};

  // all pairwise distances once; subsets reuse the prefix structure because
  // the canonical order sorts by y
  Eigen::MatrixXd dist(n, n);
  for (int i = 0; i < n; ++i) {
    dist(i, i) = 0.0;
    for (int j = i + 1; j < n; ++j) {
      const double dd = (s.x.row(i) - s.x.row(j)).norm();
      dist(i, j) = dd;
      dist(j, i) = dd;
    }
  }
  std::vector<double> all;
  all.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) all.push_back(dist(i, j));
  const double mean_all = all.empty() ? 0.0 : mean_of(all);
  const double median_all = all.empty() ? 0.0 : median_of(all);

  for (double q : kQuantiles) {
    const int tag = static_cast<int>(std::lround(q * 100));
    const std::string suffix = (tag < 10 ? "0" : "") + std::to_string(tag);
    const int k = static_cast<int>(std::ceil(q * n));

    if (k < 2) {
      for (const char* stem :
           {"ratio_mean_", "ratio_median_", "diff_mean_", "diff_median_"})
        out.push("disp." + std::string(stem) + suffix,
                 FeatureValue::invalid("subset<2"));
      continue;
    }
    std::vector<double> best;
    best.reserve(static_cast<std::size_t>(k) * (k - 1) / 2);
    for (int i = 0; i < k; ++i)
      for (int j = i + 1; j < k; ++j) best.push_back(dist(i, j));
    const double mean_best = mean_of(best);
    const double median_best = median_of(best);

    out.push("disp.ratio_mean_" + suffix,
             mean_all > 0.0 ? FeatureValue::ok(mean_best / mean_all)
                            : FeatureValue::invalid("zero_spread"));
    out.push("disp.ratio_median_" + suffix,
             median_all > 0.0 ? FeatureValue::ok(median_best / median_all)
                              : FeatureValue::invalid("zero_spread"));
    out.push("disp.diff_mean_" + suffix, FeatureValue::ok(mean_best - mean_all));
    out.push("disp.diff_median_" + suffix,
             FeatureValue::ok(median_best - median_all));
  }
  return out;
}

FeatureSet ela_information_content(const Sample& input) {
  const Sample s = canonicalize(input);
  const int n = s.n();
  FeatureSet out;
  const char* names[5] = {"ic.h_max", "ic.eps_s", "ic.eps_max", "ic.eps_ratio",
                          "ic.m0"};
  auto all_invalid = [&](const char* why) {
    for (const char* nm : names) out.push(nm, FeatureValue::invalid(why));
  };
  if (n < 10) {
    all_invalid("n<10");
    return out;
  }

  // nearest-neighbour tour from the canonical first point (the incumbent)
  std::vector<int> tour;
  tour.reserve(n);
  std::vector<bool> used(n, false);
  int cur = 0;
  used[0] = true;
  tour.push_back(0);
  for (int step = 1; step < n; ++step) {
    int nxt = -1;
    double best = 0.0;
    for (int j = 0; j < n; ++j) {
      if (used[j]) continue;
      const double dd = (s.x.row(cur) - s.x.row(j)).norm();
      if (nxt < 0 || dd < best) {
        nxt = j;
        best = dd;
      }
    }
    used[nxt] = true;
    tour.push_back(nxt);
    cur = nxt;
  }

  std::vector<double> slope;  // dy / ||dx|| along the tour
  slope.reserve(n - 1);
  for (int i = 0; i + 1 < n; ++i) {
    const double dx = (s.x.row(tour[i + 1]) - s.x.row(tour[i])).norm();
    if (dx == 0.0) continue;
    slope.push_back((s.y[tour[i + 1]] - s.y[tour[i]]) / dx);
  }
  if (slope.size() < 5) {
    all_invalid("too_few_steps");
    return out;
  }

  auto entropy_at = [&](double eps) {
    // symbol pairs over {-1,0,1}; base-6 entropy of the 6 unequal pairs
    int counts[3][3] = {};
    int prev = -2;
    int pairs = 0;
    for (double r : slope) {
      const int sym = r < -eps ? -1 : (r > eps ? 1 : 0);
      if (prev != -2) {
        ++counts[prev + 1][sym + 1];
        ++pairs;
      }
      prev = sym;
    }
    double h = 0.0;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        if (a == b) continue;
        const double p = static_cast<double>(counts[a][b]) / pairs;
        if (p > 0.0) h -= p * std::log(p) / std::log(6.0);
      }
    return h;
  };
  auto partial_information_at = [&](double eps) {
    // zeros dropped, consecutive repeats collapsed
    int len = 0;
    int prev = 0;
    for (double r : slope) {
      const int sym = r < -eps ? -1 : (r > eps ? 1 : 0);
      if (sym != 0 && sym != prev) {
        ++len;
        prev = sym;
      }
    }
    return static_cast<double>(len) / static_cast<double>(slope.size());
  };

  // epsilon sweep: {0} then a 1000-point log grid over [1e-5, 1e15]
  std::vector<double> grid;
  grid.push_back(0.0);
  constexpr int kGridPoints = 1000;
  for (int i = 0; i < kGridPoints; ++i)
    grid.push_back(std::pow(10.0, -5.0 + 20.0 * i / (kGridPoints - 1)));

  double h_max = -1.0, eps_max = 0.0;
  double eps_s = -1.0;
  for (double eps : grid) {
    const double h = entropy_at(eps);
    if (h > h_max) {
      h_max = h;
      eps_max = eps;
    }
    if (eps_s < 0.0 && h < 0.05) eps_s = eps;
  }

  out.push(names[0], FeatureValue::ok(h_max));
  out.push(names[1], eps_s >= 0.0 ? FeatureValue::ok(eps_s)
                                  : FeatureValue::invalid("no_settling"));
  out.push(names[2], FeatureValue::ok(eps_max));
  out.push(names[3], (eps_s > 0.0 && eps_max > 0.0)
                         ? FeatureValue::ok(std::log10(eps_max / eps_s))
                         : FeatureValue::invalid("undefined_ratio"));
  out.push(names[4], FeatureValue::ok(partial_information_at(0.0)));
  return out;
}

FeatureSet ela_nbc(const Sample& input) {
  const Sample s = canonicalize(input);
  const int n = s.n();
  FeatureSet out;
  const char* names[5] = {"nbc.nn_nb_sd_ratio", "nbc.nn_nb_mean_ratio",
                          "nbc.nn_nb_cor", "nbc.dist_ratio_coeff_var",
                          "nbc.nb_fitness_cor"};
  auto all_invalid = [&](const char* why) {
    for (const char* nm : names) out.push(nm, FeatureValue::invalid(why));
  };
  if (n < 5) {
    all_invalid("n<5");
    return out;
  }

  // canonical order sorts by (y, x), so "strictly better with index
  // tie-break" is exactly "earlier row"
  std::vector<double> d_nn(n), d_nb(n);
  std::vector<int> nb_target(n, -1);
  bool duplicate_points = false;
  for (int i = 0; i < n; ++i) {
    double dnn = -1.0, dnb = -1.0;
    int target = -1;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      const double dd = (s.x.row(i) - s.x.row(j)).norm();
      if (dnn < 0.0 || dd < dnn) dnn = dd;
      if (j < i && (dnb < 0.0 || dd < dnb)) {
        dnb = dd;
        target = j;
      }
    }
    d_nn[i] = dnn;
    if (dnn == 0.0) duplicate_points = true;
    d_nb[i] = dnb;  // row 0 fixed below
    nb_target[i] = target;
  }
  double max_nb = 0.0;
  for (int i = 1; i < n; ++i) max_nb = std::max(max_nb, d_nb[i]);
  d_nb[0] = max_nb;

  if (duplicate_points) {
    all_invalid("duplicate_points");
    return out;
  }

  const double sd_nn = sample_sd(d_nn), sd_nb = sample_sd(d_nb);
  const double mean_nn = mean_of(d_nn), mean_nb = mean_of(d_nb);
  out.push(names[0], sd_nb > 0.0 ? FeatureValue::ok(sd_nn / sd_nb)
                                 : FeatureValue::invalid("zero_sd"));
  out.push(names[1], mean_nb > 0.0 ? FeatureValue::ok(mean_nn / mean_nb)
                                   : FeatureValue::invalid("zero_mean"));
  const double cor = pearson(d_nn, d_nb);
  out.push(names[2], std::isfinite(cor) ? FeatureValue::ok(cor)
                                        : FeatureValue::invalid("zero_var"));

  std::vector<double> ratio(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) ratio[static_cast<std::size_t>(i)] = d_nb[i] / d_nn[i];
  const double mean_ratio = mean_of(ratio);
  out.push(names[3], mean_ratio != 0.0
                         ? FeatureValue::ok(sample_sd(ratio) / mean_ratio)
                         : FeatureValue::invalid("zero_mean_ratio"));

  std::vector<double> indegree(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i)
    if (nb_target[i] >= 0) indegree[static_cast<std::size_t>(nb_target[i])] += 1.0;
  std::vector<double> rank(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) rank[static_cast<std::size_t>(i)] = i;
  const double fcor = pearson(indegree, rank);
  out.push(names[4], std::isfinite(fcor) ? FeatureValue::ok(fcor)
                                         : FeatureValue::invalid("zero_var"));
  return out;
}

const std::vector<std::string>& ela_catalog() {
  static const std::vector<std::string> catalog = [] {
    std::vector<std::string> names;
    names.insert(names.end(), {"ela_distr.skewness", "ela_distr.kurtosis",
                               "ela_distr.number_of_peaks"});
    for (const char* q : {"10", "25", "50"}) {
      names.push_back(std::string("ela_level.mmce_lda_") + q);
      names.push_back(std::string("ela_level.mmce_qda_") + q);
      names.push_back(std::string("ela_level.lda_qda_ratio_") + q);
    }
    names.insert(names.end(),
                 {"ela_meta.adj_r2_lin", "ela_meta.adj_r2_lin_int",
                  "ela_meta.adj_r2_quad", "ela_meta.adj_r2_quad_int",
                  "ela_meta.lin_coef_min", "ela_meta.lin_coef_max",
                  "ela_meta.lin_coef_max_by_min", "ela_meta.quad_cond"});
    for (const char* q : {"02", "05", "10", "25"})
      names.push_back(std::string("disp.ratio_mean_") + q);
    for (const char* q : {"02", "05", "10", "25"})
      names.push_back(std::string("disp.ratio_median_") + q);
    names.insert(names.end(),
                 {"ic.h_max", "ic.eps_s", "ic.eps_max", "ic.eps_ratio", "ic.m0"});
    names.insert(names.end(),
                 {"nbc.nn_nb_sd_ratio", "nbc.nn_nb_mean_ratio", "nbc.nn_nb_cor",
                  "nbc.dist_ratio_coeff_var", "nbc.nb_fitness_cor"});
    return names;
  }();
  return catalog;
}

ElaVector compute_ela(const Sample& s) {
  const FeatureSet sets[] = {ela_distribution(s), ela_levelset(s),
                             ela_meta_model(s),   ela_dispersion(s),
                             ela_information_content(s), ela_nbc(s)};
  std::vector<std::pair<std::string, FeatureValue>> by_name;
  for (const auto& set : sets)
    for (std::size_t i = 0; i < set.names.size(); ++i)
      by_name.emplace_back(set.names[i], set.values[i]);

  ElaVector out;
  out.values.reserve(ela_catalog().size());
  for (const auto& name : ela_catalog()) {
    bool found = false;
    for (const auto& [nm, v] : by_name) {
      if (nm == name) {
        out.values.push_back(v);
        found = true;
        break;
      }
    }
    if (!found)
      throw ConfigError("catalog feature missing from computation: " + name);
  }
  return out;
}

}  // namespace trajsel
