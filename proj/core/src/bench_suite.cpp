#include "trajsel/bench_suite.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <numbers>

#include "trajsel/rng.hpp"

namespace trajsel {

namespace {

constexpr double kPi = std::numbers::pi;

// Stream tags for the per-instance parameter draws.
enum : std::uint64_t {
  kTagXopt = 1,
  kTagFopt = 2,
  kTagRotR = 3,
  kTagRotQ = 4,
  kTagPeaks = 5,
  kTagTransfer = 6,
};

Rng instance_rng(Suite suite, int fid, int iid) {
  return Rng(0x74726a73u)  // project-wide suite constant
      .fork(static_cast<std::uint64_t>(suite))
      .fork(static_cast<std::uint64_t>(fid))
      .fork(static_cast<std::uint64_t>(iid));
}

// Orthogonal matrix from a QR factorization of a Gaussian draw, diagonal
// signs fixed so the factorization is unique.
Eigen::MatrixXd random_rotation(Rng rng, int d) {
  Eigen::MatrixXd g(d, d);
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) g(r, c) = rng.next_gauss();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < d; ++j)
    if (r(j, j) < 0) q.col(j) = -q.col(j);
  return q;
}

double osz(double x) {
  if (x == 0.0) return 0.0;
  const double xhat = std::log(std::abs(x));
  const double c1 = x > 0 ? 10.0 : 5.5;
  const double c2 = x > 0 ? 7.9 : 3.1;
  const double sgn = x > 0 ? 1.0 : -1.0;
  return sgn * std::exp(xhat + 0.049 * (std::sin(c1 * xhat) + std::sin(c2 * xhat)));
}

Eigen::VectorXd osz(const Eigen::VectorXd& v) {
  Eigen::VectorXd out(v.size());
  for (int i = 0; i < v.size(); ++i) out[i] = osz(v[i]);
  return out;
}

Eigen::VectorXd asy(const Eigen::VectorXd& v, double beta) {
  const int d = static_cast<int>(v.size());
  Eigen::VectorXd out(d);
  for (int i = 0; i < d; ++i) {
    if (v[i] > 0) {
      const double e = 1.0 + beta * (static_cast<double>(i) / (d - 1)) * std::sqrt(v[i]);
      out[i] = std::pow(v[i], e);
    } else {
      out[i] = v[i];
    }
  }
  return out;
}

Eigen::VectorXd lambda_diag(double alpha, int d) {
  Eigen::VectorXd out(d);
  for (int i = 0; i < d; ++i)
    out[i] = std::pow(alpha, 0.5 * static_cast<double>(i) / (d - 1));
  return out;
}

double boundary_penalty(const Eigen::VectorXd& x) {
  double s = 0.0;
  for (int i = 0; i < x.size(); ++i) {
    const double e = std::abs(x[i]) - 5.0;
    if (e > 0) s += e * e;
  }
  return s;
}

double rosenbrock_sum(const Eigen::VectorXd& z) {
  double s = 0.0;
  for (int i = 0; i + 1 < z.size(); ++i) {
    const double a = z[i] * z[i] - z[i + 1];
    const double b = z[i] - 1.0;
    s += 100.0 * a * a + b * b;
  }
  return s;
}

// Injective-in-instance sign pattern for the sign-based functions; distinct
// instances below 2^D get distinct patterns.
Eigen::VectorXd sign_pattern(int iid, int d) {
  const std::uint64_t bits =
      0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(iid) + 1);
  Eigen::VectorXd s(d);
  for (int i = 0; i < d; ++i) s[i] = ((bits >> i) & 1u) ? 1.0 : -1.0;
  return s;
}

Eigen::VectorXd uniform_vec(Rng& rng, int d, double lo, double hi) {
  Eigen::VectorXd v(d);
  for (int i = 0; i < d; ++i) v[i] = rng.next_double(lo, hi);
  return v;
}

void setup_gallagher(ProblemInstance::Transforms& tf, Rng rng, int d, int peaks) {
  const int k = peaks;
  tf.peak_centers.resize(k, d);
  tf.peak_weights.resize(k);
  tf.peak_scales.resize(k, d);

  // Peak 1 is the optimum; its box is slightly retracted for the 21-peak set.
  const double y1_range = (k == 101) ? 4.0 : 3.92;
  tf.x_opt = uniform_vec(rng, d, -y1_range, y1_range);
  tf.peak_centers.row(0) = tf.x_opt.transpose();
  for (int i = 1; i < k; ++i)
    tf.peak_centers.row(i) = uniform_vec(rng, d, -4.9, 4.9).transpose();

  tf.peak_weights[0] = 10.0;
  for (int i = 1; i < k; ++i)
    tf.peak_weights[i] = 1.1 + 8.0 * (i - 1.0) / (k - 2.0);

  // Condition numbers 1000^{2j/(k-2)} drawn without replacement for the
  // secondary peaks; the first peak is fixed at 1000^2.
  std::vector<double> alphas(k - 1);
  for (int j = 0; j < k - 1; ++j)
    alphas[j] = std::pow(1000.0, 2.0 * j / (k - 2.0));
  for (int j = static_cast<int>(alphas.size()) - 1; j > 0; --j) {
    const int m = static_cast<int>(rng.next_below(j + 1));
    std::swap(alphas[j], alphas[m]);
  }

  for (int i = 0; i < k; ++i) {
    const double alpha = (i == 0) ? 1.0e6 : alphas[i - 1];
    Eigen::VectorXd diag = lambda_diag(alpha, d) / std::pow(alpha, 0.25);
    // random permutation of the diagonal, per peak
    for (int j = d - 1; j > 0; --j) {
      const int m = static_cast<int>(rng.next_below(j + 1));
      std::swap(diag[j], diag[m]);
    }
    tf.peak_scales.row(i) = diag.transpose();
  }
}

// Transfer catalog. Each entry is one canonical shifted/rescaled classical
// function with a known optimum inside [-5,5]^D.
const std::vector<std::string> kTransferNames = {
    "ackley",   "griewank", "rastrigin",       "rosenbrock", "schwefel",
    "levy",     "zakharov", "styblinski_tang", "alpine1",    "dixon_price"};

int transfer_index(const std::string& name) {
  for (std::size_t i = 0; i < kTransferNames.size(); ++i)
    if (kTransferNames[i] == name) return static_cast<int>(i);
  throw ConfigError("unknown transfer function '" + name + "'");
}

}  // namespace

const std::vector<std::string>& transfer_catalog() { return kTransferNames; }

double ProblemInstance::value(const Eigen::VectorXd& x) const {
  if (x.size() != id_.dimension)
    throw ConfigError("evaluate: point has dimension " + std::to_string(x.size()) +
                      ", problem expects " + std::to_string(id_.dimension));
  const int d = id_.dimension;
  const Transforms& t = tf_;
  double raw = 0.0;

  switch (kind_) {
    case 1: {  // sphere
      raw = (x - t.x_opt).squaredNorm();
      break;
    }
    case 2: {  // separable ellipsoid
      const Eigen::VectorXd z = osz(x - t.x_opt);
      for (int i = 0; i < d; ++i)
        raw += std::pow(10.0, 6.0 * i / (d - 1)) * z[i] * z[i];
      break;
    }
    case 3: {  // separable Rastrigin
      const Eigen::VectorXd z =
          lambda_diag(10.0, d).cwiseProduct(asy(osz(x - t.x_opt), 0.2));
      double c = 0.0;
      for (int i = 0; i < d; ++i) c += std::cos(2.0 * kPi * z[i]);
      raw = 10.0 * (d - c) + z.squaredNorm();
      break;
    }
    case 4: {  // Buche-Rastrigin
      const Eigen::VectorXd u = osz(x - t.x_opt);
      Eigen::VectorXd z(d);
      for (int i = 0; i < d; ++i) {
        double s = std::pow(10.0, 0.5 * i / (d - 1));
        if (u[i] > 0 && i % 2 == 0) s *= 10.0;
        z[i] = s * u[i];
      }
      double c = 0.0;
      for (int i = 0; i < d; ++i) c += std::cos(2.0 * kPi * z[i]);
      raw = 10.0 * (d - c) + z.squaredNorm() + 100.0 * boundary_penalty(x);
      break;
    }
    case 5: {  // linear slope
      raw = 0.0;
      for (int i = 0; i < d; ++i) {
        const double s = t.signs[i] * std::pow(10.0, static_cast<double>(i) / (d - 1));
        const double z = (t.x_opt[i] * x[i] < 25.0) ? x[i] : t.x_opt[i];
        raw += 5.0 * std::abs(s) - s * z;
      }
      break;
    }
    case 6: {  // attractive sector
      const Eigen::VectorXd z =
          t.rot_q * lambda_diag(10.0, d).cwiseProduct(t.rot_r * (x - t.x_opt)).eval();
      double s = 0.0;
      for (int i = 0; i < d; ++i) {
        const double w = (z[i] * t.x_opt[i] > 0) ? 100.0 : 1.0;
        s += w * z[i] * w * z[i];
      }
      raw = std::pow(osz(s), 0.9);
      break;
    }
    case 7: {  // step ellipsoid
      const Eigen::VectorXd zhat =
          lambda_diag(10.0, d).cwiseProduct(t.rot_r * (x - t.x_opt)).eval();
      Eigen::VectorXd ztilde(d);
      for (int i = 0; i < d; ++i)
        ztilde[i] = (std::abs(zhat[i]) > 0.5)
                        ? std::floor(0.5 + zhat[i])
                        : std::floor(0.5 + 10.0 * zhat[i]) / 10.0;
      const Eigen::VectorXd z = t.rot_q * ztilde;
      double s = 0.0;
      for (int i = 0; i < d; ++i)
        s += std::pow(10.0, 2.0 * i / (d - 1)) * z[i] * z[i];
      raw = 0.1 * std::max(std::abs(zhat[0]) / 1.0e4, s) + boundary_penalty(x);
      break;
    }
    case 8: {  // Rosenbrock
      const double g = std::max(1.0, std::sqrt(static_cast<double>(d)) / 8.0);
      const Eigen::VectorXd z =
          ((g * (x - t.x_opt)).array() + 1.0).matrix();
      raw = rosenbrock_sum(z);
      break;
    }
    case 9: {  // Rosenbrock rotated
      const double g = std::max(1.0, std::sqrt(static_cast<double>(d)) / 8.0);
      const Eigen::VectorXd z = ((g * (t.rot_r * x)).array() + 0.5).matrix();
      raw = rosenbrock_sum(z);
      break;
    }
    case 10: {  // rotated ellipsoid
      const Eigen::VectorXd z = osz(t.rot_r * (x - t.x_opt));
      for (int i = 0; i < d; ++i)
        raw += std::pow(10.0, 6.0 * i / (d - 1)) * z[i] * z[i];
      break;
    }
    case 11: {  // discus
      const Eigen::VectorXd z = osz(t.rot_r * (x - t.x_opt));
      raw = 1.0e6 * z[0] * z[0];
      for (int i = 1; i < d; ++i) raw += z[i] * z[i];
      break;
    }
    case 12: {  // bent cigar
      const Eigen::VectorXd z = t.rot_r * asy(t.rot_r * (x - t.x_opt), 0.5);
      raw = z[0] * z[0];
      for (int i = 1; i < d; ++i) raw += 1.0e6 * z[i] * z[i];
      break;
    }
    case 13: {  // sharp ridge
      const Eigen::VectorXd z =
          t.rot_q * lambda_diag(10.0, d).cwiseProduct(t.rot_r * (x - t.x_opt)).eval();
      double tail = 0.0;
      for (int i = 1; i < d; ++i) tail += z[i] * z[i];
      raw = z[0] * z[0] + 100.0 * std::sqrt(tail);
      break;
    }
    case 14: {  // different powers
      const Eigen::VectorXd z = t.rot_r * (x - t.x_opt);
      double s = 0.0;
      for (int i = 0; i < d; ++i)
        s += std::pow(std::abs(z[i]), 2.0 + 4.0 * i / (d - 1));
      raw = std::sqrt(s);
      break;
    }
    case 15: {  // rotated Rastrigin
      const Eigen::VectorXd z =
          t.rot_r *
          lambda_diag(10.0, d)
              .cwiseProduct(t.rot_q * asy(osz(t.rot_r * (x - t.x_opt)), 0.2))
              .eval();
      double c = 0.0;
      for (int i = 0; i < d; ++i) c += std::cos(2.0 * kPi * z[i]);
      raw = 10.0 * (d - c) + z.squaredNorm();
      break;
    }
    case 16: {  // Weierstrass
      const Eigen::VectorXd z =
          t.rot_r * lambda_diag(0.01, d)
                        .cwiseProduct(t.rot_q * osz(t.rot_r * (x - t.x_opt)))
                        .eval();
      double f0 = 0.0;
      for (int k = 0; k <= 11; ++k)
        f0 += std::pow(0.5, k) * std::cos(2.0 * kPi * std::pow(3.0, k) * 0.5);
      double s = 0.0;
      for (int i = 0; i < d; ++i)
        for (int k = 0; k <= 11; ++k)
          s += std::pow(0.5, k) * std::cos(2.0 * kPi * std::pow(3.0, k) * (z[i] + 0.5));
      const double m = s / d - f0;
      raw = 10.0 * m * m * m + (10.0 / d) * boundary_penalty(x);
      break;
    }
    case 17:    // Schaffers F7
    case 18: {  // Schaffers F7, ill-conditioned
      const double alpha = (kind_ == 17) ? 10.0 : 1000.0;
      const Eigen::VectorXd z =
          lambda_diag(alpha, d)
              .cwiseProduct(t.rot_q * asy(t.rot_r * (x - t.x_opt), 0.5))
              .eval();
      double s = 0.0;
      for (int i = 0; i + 1 < d; ++i) {
        const double si = std::sqrt(z[i] * z[i] + z[i + 1] * z[i + 1]);
        const double ss = std::sin(50.0 * std::pow(si, 0.2));
        s += std::sqrt(si) * (1.0 + ss * ss);
      }
      s /= (d - 1);
      raw = s * s + 10.0 * boundary_penalty(x);
      break;
    }
    case 19: {  // composite Griewank-Rosenbrock
      const double g = std::max(1.0, std::sqrt(static_cast<double>(d)) / 8.0);
      const Eigen::VectorXd z = ((g * (t.rot_r * x)).array() + 0.5).matrix();
      double s = 0.0;
      for (int i = 0; i + 1 < d; ++i) {
        const double a = z[i] * z[i] - z[i + 1];
        const double b = z[i] - 1.0;
        const double si = 100.0 * a * a + b * b;
        s += si / 4000.0 - std::cos(si);
      }
      raw = 10.0 * s / (d - 1) + 10.0;
      break;
    }
    case 20: {  // Schwefel
      Eigen::VectorXd xhat(d);
      for (int i = 0; i < d; ++i) xhat[i] = 2.0 * t.signs[i] * x[i];
      Eigen::VectorXd zhat(d);
      zhat[0] = xhat[0];
      for (int i = 1; i < d; ++i)
        zhat[i] = xhat[i] + 0.25 * (xhat[i - 1] - 2.0 * std::abs(t.x_opt[i - 1]));
      const Eigen::VectorXd two_abs = 2.0 * t.x_opt.cwiseAbs();
      const Eigen::VectorXd z =
          100.0 * (lambda_diag(10.0, d).cwiseProduct(zhat - two_abs) + two_abs);
      double s = 0.0;
      for (int i = 0; i < d; ++i)
        s += z[i] * std::sin(std::sqrt(std::abs(z[i])));
      raw = -s / (100.0 * d) + 4.189828872724339 +
            100.0 * boundary_penalty(z / 100.0);
      break;
    }
    case 21:    // Gallagher 101 peaks
    case 22: {  // Gallagher 21 peaks
      const int k = static_cast<int>(t.peak_weights.size());
      double m = 0.0;
      for (int i = 0; i < k; ++i) {
        const Eigen::VectorXd u = t.rot_r * (x - t.peak_centers.row(i).transpose());
        double q = 0.0;
        for (int j = 0; j < d; ++j) q += t.peak_scales(i, j) * u[j] * u[j];
        m = std::max(m, t.peak_weights[i] * std::exp(-q / (2.0 * d)));
      }
      const double o = osz(10.0 - m);
      raw = o * o + boundary_penalty(x);
      break;
    }
    case 23: {  // Katsuura
      const Eigen::VectorXd z =
          t.rot_q * lambda_diag(100.0, d).cwiseProduct(t.rot_r * (x - t.x_opt)).eval();
      double prod = 1.0;
      for (int i = 0; i < d; ++i) {
        double s = 0.0;
        for (int j = 1; j <= 32; ++j) {
          const double p = std::pow(2.0, j) * z[i];
          s += std::abs(p - std::round(p)) / std::pow(2.0, j);
        }
        prod *= std::pow(1.0 + (i + 1) * s, 10.0 / std::pow(d, 1.2));
      }
      const double c = 10.0 / (d * d);
      raw = c * prod - c + boundary_penalty(x);
      break;
    }
    case 24: {  // Lunacek bi-Rastrigin
      const double mu0 = 2.5;
      const double s = 1.0 - 1.0 / (2.0 * std::sqrt(d + 20.0) - 8.2);
      const double mu1 = -std::sqrt((mu0 * mu0 - 1.0) / s);
      Eigen::VectorXd xhat(d);
      for (int i = 0; i < d; ++i) xhat[i] = 2.0 * t.signs[i] * x[i];
      const Eigen::VectorXd z =
          t.rot_q *
          lambda_diag(100.0, d).cwiseProduct(t.rot_r * (xhat.array() - mu0).matrix()).eval();
      double s0 = 0.0, s1 = 0.0, c = 0.0;
      for (int i = 0; i < d; ++i) {
        s0 += (xhat[i] - mu0) * (xhat[i] - mu0);
        s1 += (xhat[i] - mu1) * (xhat[i] - mu1);
        c += std::cos(2.0 * kPi * z[i]);
      }
      raw = std::min(s0, 1.0 * d + s * s1) + 10.0 * (d - c) +
            1.0e4 * boundary_penalty(x);
      break;
    }

    // ---- transfer catalog ----
    case 100: {  // ackley
      const Eigen::VectorXd z = x - t.x_opt;
      double sc = 0.0;
      for (int i = 0; i < d; ++i) sc += std::cos(2.0 * kPi * z[i]);
      raw = -20.0 * std::exp(-0.2 * std::sqrt(z.squaredNorm() / d)) -
            std::exp(sc / d) + 20.0 + std::numbers::e;
      break;
    }
    case 101: {  // griewank, native domain scaled into the box
      const Eigen::VectorXd z = 120.0 * (x - t.x_opt);
      double prod = 1.0;
      for (int i = 0; i < d; ++i) prod *= std::cos(z[i] / std::sqrt(i + 1.0));
      raw = z.squaredNorm() / 4000.0 - prod + 1.0;
      break;
    }
    case 102: {  // rastrigin, unrotated
      const Eigen::VectorXd z = x - t.x_opt;
      double c = 0.0;
      for (int i = 0; i < d; ++i) c += std::cos(2.0 * kPi * z[i]);
      raw = 10.0 * (d - c) + z.squaredNorm();
      break;
    }
    case 103: {  // rosenbrock, unrotated
      const Eigen::VectorXd z = ((x - t.x_opt).array() + 1.0).matrix();
      raw = rosenbrock_sum(z);
      break;
    }
    case 104: {  // schwefel, native domain scaled into the box
      const Eigen::VectorXd z = 100.0 * x;
      double sv = 0.0;
      for (int i = 0; i < d; ++i)
        sv += z[i] * std::sin(std::sqrt(std::abs(z[i])));
      raw = 418.9828872724339 * d - sv;
      break;
    }
    case 105: {  // levy
      const Eigen::VectorXd z = (2.0 * (x - t.x_opt).array() + 1.0).matrix();
      const Eigen::VectorXd w = (1.0 + (z.array() - 1.0) / 4.0).matrix();
      const double s1 = std::sin(kPi * w[0]);
      raw = s1 * s1;
      for (int i = 0; i + 1 < d; ++i) {
        const double si = std::sin(kPi * w[i] + 1.0);
        raw += (w[i] - 1.0) * (w[i] - 1.0) * (1.0 + 10.0 * si * si);
      }
      const double sd = std::sin(2.0 * kPi * w[d - 1]);
      raw += (w[d - 1] - 1.0) * (w[d - 1] - 1.0) * (1.0 + sd * sd);
      break;
    }
    case 106: {  // zakharov
      const Eigen::VectorXd z = x - t.x_opt;
      double lin = 0.0;
      for (int i = 0; i < d; ++i) lin += 0.5 * (i + 1) * z[i];
      raw = z.squaredNorm() + lin * lin + lin * lin * lin * lin;
      break;
    }
    case 107: {  // styblinski-tang
      const Eigen::VectorXd z = x - t.shift;
      double s = 0.0;
      for (int i = 0; i < d; ++i) {
        const double v = z[i];
        s += v * v * v * v - 16.0 * v * v + 5.0 * v;
      }
      raw = 0.5 * s + 39.16616570377142 * d;
      break;
    }
    case 108: {  // alpine1
      const Eigen::VectorXd z = x - t.x_opt;
      for (int i = 0; i < d; ++i)
        raw += std::abs(z[i] * std::sin(z[i]) + 0.1 * z[i]);
      break;
    }
    case 109: {  // dixon-price, native domain scaled into the box
      const Eigen::VectorXd z = 2.0 * (x - t.shift);
      raw = (z[0] - 1.0) * (z[0] - 1.0);
      for (int i = 1; i < d; ++i) {
        const double a = 2.0 * z[i] * z[i] - z[i - 1];
        raw += (i + 1) * a * a;
      }
      break;
    }
    default:
      throw ConfigError("unknown function kind");
  }

  return raw - t.raw_offset + t.f_opt;
}

std::optional<double> ProblemInstance::evaluate(const Eigen::VectorXd& x,
                                                EvalBudgetMeter& meter,
                                                RunLog* log) const {
  if (meter.exhausted()) return std::nullopt;
  const double f = value(x);
  ++meter.used;
  if (log) log->append(x, f);
  return f;
}

ProblemInstance make_problem(ProblemId id) {
  if (id.dimension < 2 || id.dimension > 40)
    throw ConfigError("unsupported dimension " + std::to_string(id.dimension) +
                      " (valid: 2..40)");
  if (id.instance_id < 0)
    throw ConfigError("instance id must be non-negative");

  if (id.suite == Suite::kTransfer) {
    if (id.function_id < 1 ||
        id.function_id > static_cast<int>(kTransferNames.size()))
      throw ConfigError("unknown transfer function id " +
                        std::to_string(id.function_id));
    if (id.instance_id != 0)
      throw ConfigError("transfer suite has a single canonical instance (0)");
    return make_transfer_problem(kTransferNames[id.function_id - 1],
                                 id.dimension);
  }

  if (id.function_id < 1 || id.function_id > kNumTrainFunctions)
    throw ConfigError("unknown function id " + std::to_string(id.function_id) +
                      " (TRAIN suite: 1..24)");

  const int d = id.dimension;
  const int fid = id.function_id;
  ProblemInstance p;
  p.id_ = id;
  p.kind_ = fid;
  p.name_ = "f" + std::to_string(fid);
  ProblemInstance::Transforms& t = p.tf_;

  Rng base = instance_rng(id.suite, fid, id.instance_id);
  {
    Rng r = base.fork(kTagFopt);
    t.f_opt = std::round(r.next_double(-1000.0, 1000.0) * 100.0) / 100.0;
  }
  Rng rx = base.fork(kTagXopt);

  const bool needs_r = fid >= 6 && fid != 8;
  const bool needs_q =
      fid == 6 || fid == 7 || fid == 13 || fid == 15 || fid == 16 ||
      fid == 17 || fid == 18 || fid == 23 || fid == 24;
  t.rot_r = needs_r ? random_rotation(base.fork(kTagRotR), d)
                    : Eigen::MatrixXd::Identity(d, d);
  t.rot_q = needs_q ? random_rotation(base.fork(kTagRotQ), d)
                    : Eigen::MatrixXd::Identity(d, d);

  switch (fid) {
    case 5:
      t.signs = sign_pattern(id.instance_id, d);
      t.x_opt = 5.0 * t.signs;
      break;
    case 8:
      t.x_opt = uniform_vec(rx, d, -3.0, 3.0);
      break;
    case 9:
    case 19: {
      const double g = std::max(1.0, std::sqrt(static_cast<double>(d)) / 8.0);
      t.x_opt = t.rot_r.transpose() *
                Eigen::VectorXd::Constant(d, 0.5 / g);
      break;
    }
    case 20:
      t.signs = sign_pattern(id.instance_id, d);
      t.x_opt = (4.2096874633 / 2.0) * t.signs;
      break;
    case 21:
      setup_gallagher(t, base.fork(kTagPeaks), d, 101);
      break;
    case 22:
      setup_gallagher(t, base.fork(kTagPeaks), d, 21);
      break;
    case 24:
      t.signs = sign_pattern(id.instance_id, d);
      t.x_opt = 1.25 * t.signs;
      break;
    default:
      t.x_opt = uniform_vec(rx, d, -4.0, 4.0);
      break;
  }

  // Normalize so that evaluate(x_opt) returns f_opt exactly.
  t.raw_offset = 0.0;
  const double at_opt = p.value(t.x_opt);
  t.raw_offset = at_opt - t.f_opt;
  return p;
}

ProblemInstance make_transfer_problem(const std::string& name, int dimension) {
  if (dimension < 2 || dimension > 40)
    throw ConfigError("unsupported dimension " + std::to_string(dimension) +
                      " (valid: 2..40)");
  const int idx = transfer_index(name);

  ProblemInstance p;
  p.id_ = ProblemId{Suite::kTransfer, idx + 1, 0, dimension};
  p.kind_ = 100 + idx;
  p.name_ = name;
  ProblemInstance::Transforms& t = p.tf_;
  t.rot_r = Eigen::MatrixXd::Identity(dimension, dimension);
  t.rot_q = Eigen::MatrixXd::Identity(dimension, dimension);
  t.f_opt = 0.0;

  // Canonical shift per function, drawn once from a fixed stream. Kept small
  // so each optimum stays well inside the box.
  Rng rs = instance_rng(Suite::kTransfer, idx + 1, 0).fork(kTagTransfer);
  const int d = dimension;
  switch (p.kind_) {
    case 100: t.x_opt = uniform_vec(rs, d, -2.0, 2.0); break;
    case 101: t.x_opt = uniform_vec(rs, d, -1.0, 1.0); break;
    case 102: t.x_opt = uniform_vec(rs, d, -1.0, 1.0); break;
    case 103: t.x_opt = uniform_vec(rs, d, -1.5, 1.5); break;
    case 104:  // optimum fixed by the native definition
      t.x_opt = Eigen::VectorXd::Constant(d, 4.2096874633);
      break;
    case 105: {
      const Eigen::VectorXd s = uniform_vec(rs, d, -1.0, 1.0);
      t.x_opt = s;  // z = 2(x - s) + 1 has w = 1 at x = s
      break;
    }
    case 106: t.x_opt = uniform_vec(rs, d, -1.0, 1.0); break;
    case 107: {
      const Eigen::VectorXd s = uniform_vec(rs, d, -0.5, 0.5);
      t.shift = s;
      t.x_opt = (s.array() - 2.903534018185960).matrix();
      break;
    }
    case 108: t.x_opt = uniform_vec(rs, d, -1.0, 1.0); break;
    case 109: {
      // optimum of the native recurrence z_i = 2^{-(2^i - 2)/2^i}, mapped back
      const Eigen::VectorXd s = uniform_vec(rs, d, -1.0, 1.0);
      Eigen::VectorXd zopt(d);
      zopt[0] = 1.0;
      for (int i = 1; i < d; ++i) zopt[i] = std::sqrt(zopt[i - 1] / 2.0);
      t.x_opt = s + zopt / 2.0;
      t.shift = s;
      break;
    }
  }

  t.raw_offset = 0.0;
  const double at_opt = p.value(t.x_opt);
  t.raw_offset = at_opt - t.f_opt;
  return p;
}

}  // namespace trajsel
