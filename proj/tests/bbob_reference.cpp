#include "bbob_reference.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <vector>

namespace trajsel_test {

namespace {

using Vec = std::vector<double>;

constexpr double PI = 3.141592653589793238462643383279502884;

double ref_osz(double x) {
  if (x == 0.0) return 0.0;
  double xhat = std::log(std::fabs(x));
  double c1 = x > 0.0 ? 10.0 : 5.5;
  double c2 = x > 0.0 ? 7.9 : 3.1;
  double s = x > 0.0 ? 1.0 : -1.0;
  return s * std::exp(xhat + 0.049 * (std::sin(c1 * xhat) + std::sin(c2 * xhat)));
}

Vec ref_osz(const Vec& v) {
  Vec r(v.size());
  for (size_t i = 0; i < v.size(); ++i) r[i] = ref_osz(v[i]);
  return r;
}

Vec ref_asy(const Vec& v, double beta) {
  const int d = (int)v.size();
  Vec r(v.size());
  for (int i = 0; i < d; ++i) {
    if (v[i] > 0.0)
      r[i] = std::pow(v[i], 1.0 + beta * i / double(d - 1) * std::sqrt(v[i]));
    else
      r[i] = v[i];
  }
  return r;
}

Vec ref_lambda_mul(double alpha, const Vec& v) {
  const int d = (int)v.size();
  Vec r(v.size());
  for (int i = 0; i < d; ++i)
    r[i] = std::pow(alpha, 0.5 * i / double(d - 1)) * v[i];
  return r;
}

double ref_pen(const Vec& x) {
  double s = 0.0;
  for (double xi : x) {
    double e = std::fabs(xi) - 5.0;
    if (e > 0.0) s += e * e;
  }
  return s;
}

Vec ref_rot(const Eigen::MatrixXd& m, const Vec& v) {
  const int d = (int)v.size();
  Vec r(d, 0.0);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) r[i] += m(i, j) * v[j];
  return r;
}

Vec ref_sub(const Vec& a, const Eigen::VectorXd& b) {
  Vec r(a.size());
  for (size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[(int)i];
  return r;
}

double ref_sq(const Vec& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

double ref_rosen(const Vec& z) {
  double s = 0.0;
  for (size_t i = 0; i + 1 < z.size(); ++i) {
    double a = z[i] * z[i] - z[i + 1];
    double b = z[i] - 1.0;
    s += 100.0 * a * a + b * b;
  }
  return s;
}

}  // namespace

double reference_value(const trajsel::ProblemInstance& p,
                       const Eigen::VectorXd& xin) {
  const auto& t = p.transforms();
  const int d = p.dimension();
  const int fid = p.id().function_id;
  if (p.id().suite != trajsel::Suite::kTrain)
    throw std::invalid_argument("reference covers the TRAIN suite only");

  Vec x(xin.data(), xin.data() + d);
  double raw = 0.0;

  switch (fid) {
    case 1: {
      raw = ref_sq(ref_sub(x, t.x_opt));
      break;
    }
    case 2: {
      Vec z = ref_osz(ref_sub(x, t.x_opt));
      for (int i = 0; i < d; ++i)
        raw += std::pow(10.0, 6.0 * i / double(d - 1)) * z[i] * z[i];
      break;
    }
    case 3: {
      Vec z = ref_lambda_mul(10.0, ref_asy(ref_osz(ref_sub(x, t.x_opt)), 0.2));
      double c = 0.0;
      for (int i = 0; i < d; ++i) c += std::cos(2.0 * PI * z[i]);
      raw = 10.0 * (d - c) + ref_sq(z);
      break;
    }
    case 4: {
      Vec u = ref_osz(ref_sub(x, t.x_opt));
      double c = 0.0, sq = 0.0;
      for (int i = 0; i < d; ++i) {
        double s = std::pow(10.0, 0.5 * i / double(d - 1));
        if (u[i] > 0.0 && i % 2 == 0) s *= 10.0;
        double zi = s * u[i];
        c += std::cos(2.0 * PI * zi);
        sq += zi * zi;
      }
      raw = 10.0 * (d - c) + sq + 100.0 * ref_pen(x);
      break;
    }
    case 5: {
      for (int i = 0; i < d; ++i) {
        double s = t.signs[i] * std::pow(10.0, i / double(d - 1));
        double z = (t.x_opt[i] * x[i] < 25.0) ? x[i] : t.x_opt[i];
        raw += 5.0 * std::fabs(s) - s * z;
      }
      break;
    }
    case 6: {
      Vec z = ref_rot(t.rot_q,
                      ref_lambda_mul(10.0, ref_rot(t.rot_r, ref_sub(x, t.x_opt))));
      double s = 0.0;
      for (int i = 0; i < d; ++i) {
        double w = (z[i] * t.x_opt[i] > 0.0) ? 100.0 : 1.0;
        s += (w * z[i]) * (w * z[i]);
      }
      raw = std::pow(ref_osz(s), 0.9);
      break;
    }
    case 7: {
      Vec zhat = ref_lambda_mul(10.0, ref_rot(t.rot_r, ref_sub(x, t.x_opt)));
      Vec ztil(d);
      for (int i = 0; i < d; ++i) {
        if (std::fabs(zhat[i]) > 0.5)
          ztil[i] = std::floor(0.5 + zhat[i]);
        else
          ztil[i] = std::floor(0.5 + 10.0 * zhat[i]) / 10.0;
      }
      Vec z = ref_rot(t.rot_q, ztil);
      double s = 0.0;
      for (int i = 0; i < d; ++i)
        s += std::pow(10.0, 2.0 * i / double(d - 1)) * z[i] * z[i];
      raw = 0.1 * std::max(std::fabs(zhat[0]) / 1.0e4, s) + ref_pen(x);
      break;
    }
    case 8: {
      double g = std::max(1.0, std::sqrt(double(d)) / 8.0);
      Vec z(d);
      for (int i = 0; i < d; ++i) z[i] = g * (x[i] - t.x_opt[i]) + 1.0;
      raw = ref_rosen(z);
      break;
    }
    case 9: {
      double g = std::max(1.0, std::sqrt(double(d)) / 8.0);
      Vec rx = ref_rot(t.rot_r, x);
      Vec z(d);
      for (int i = 0; i < d; ++i) z[i] = g * rx[i] + 0.5;
      raw = ref_rosen(z);
      break;
    }
    case 10: {
      Vec z = ref_osz(ref_rot(t.rot_r, ref_sub(x, t.x_opt)));
      for (int i = 0; i < d; ++i)
        raw += std::pow(10.0, 6.0 * i / double(d - 1)) * z[i] * z[i];
      break;
    }
    case 11: {
      Vec z = ref_osz(ref_rot(t.rot_r, ref_sub(x, t.x_opt)));
      raw = 1.0e6 * z[0] * z[0];
      for (int i = 1; i < d; ++i) raw += z[i] * z[i];
      break;
    }
    case 12: {
      Vec z = ref_rot(t.rot_r, ref_asy(ref_rot(t.rot_r, ref_sub(x, t.x_opt)), 0.5));
      raw = z[0] * z[0];
      for (int i = 1; i < d; ++i) raw += 1.0e6 * z[i] * z[i];
      break;
    }
    case 13: {
      Vec z = ref_rot(t.rot_q,
                      ref_lambda_mul(10.0, ref_rot(t.rot_r, ref_sub(x, t.x_opt))));
      double tail = 0.0;
      for (int i = 1; i < d; ++i) tail += z[i] * z[i];
      raw = z[0] * z[0] + 100.0 * std::sqrt(tail);
      break;
    }
    case 14: {
      Vec z = ref_rot(t.rot_r, ref_sub(x, t.x_opt));
      double s = 0.0;
      for (int i = 0; i < d; ++i)
        s += std::pow(std::fabs(z[i]), 2.0 + 4.0 * i / double(d - 1));
      raw = std::sqrt(s);
      break;
    }
    case 15: {
      Vec z = ref_rot(
          t.rot_r,
          ref_lambda_mul(10.0, ref_rot(t.rot_q,
                                       ref_asy(ref_osz(ref_rot(t.rot_r,
                                                               ref_sub(x, t.x_opt))),
                                               0.2))));
      double c = 0.0;
      for (int i = 0; i < d; ++i) c += std::cos(2.0 * PI * z[i]);
      raw = 10.0 * (d - c) + ref_sq(z);
      break;
    }
    case 16: {
      Vec z = ref_rot(
          t.rot_r,
          ref_lambda_mul(0.01,
                         ref_rot(t.rot_q, ref_osz(ref_rot(t.rot_r,
                                                          ref_sub(x, t.x_opt))))));
      double f0 = 0.0;
      for (int k = 0; k <= 11; ++k)
        f0 += std::pow(0.5, k) * std::cos(2.0 * PI * std::pow(3.0, k) * 0.5);
      double s = 0.0;
      for (int i = 0; i < d; ++i)
        for (int k = 0; k <= 11; ++k)
          s += std::pow(0.5, k) * std::cos(2.0 * PI * std::pow(3.0, k) * (z[i] + 0.5));
      double m = s / d - f0;
      raw = 10.0 * m * m * m + 10.0 / d * ref_pen(x);
      break;
    }
    case 17:
    case 18: {
      double alpha = fid == 17 ? 10.0 : 1000.0;
      Vec z = ref_lambda_mul(
          alpha, ref_rot(t.rot_q, ref_asy(ref_rot(t.rot_r, ref_sub(x, t.x_opt)), 0.5)));
      double s = 0.0;
      for (int i = 0; i + 1 < d; ++i) {
        double si = std::sqrt(z[i] * z[i] + z[i + 1] * z[i + 1]);
        double sn = std::sin(50.0 * std::pow(si, 0.2));
        s += std::sqrt(si) + std::sqrt(si) * sn * sn;
      }
      s /= double(d - 1);
      raw = s * s + 10.0 * ref_pen(x);
      break;
    }
    case 19: {
      double g = std::max(1.0, std::sqrt(double(d)) / 8.0);
      Vec rx = ref_rot(t.rot_r, x);
      double s = 0.0;
      for (int i = 0; i + 1 < d; ++i) {
        double zi = g * rx[i] + 0.5;
        double zn = g * rx[i + 1] + 0.5;
        double a = zi * zi - zn;
        double b = zi - 1.0;
        double si = 100.0 * a * a + b * b;
        s += si / 4000.0 - std::cos(si);
      }
      raw = 10.0 / double(d - 1) * s + 10.0;
      break;
    }
    case 20: {
      Vec xhat(d), zhat(d);
      for (int i = 0; i < d; ++i) xhat[i] = 2.0 * t.signs[i] * x[i];
      zhat[0] = xhat[0];
      for (int i = 1; i < d; ++i)
        zhat[i] = xhat[i] + 0.25 * (xhat[i - 1] - 2.0 * std::fabs(t.x_opt[i - 1]));
      Vec diff(d);
      for (int i = 0; i < d; ++i) diff[i] = zhat[i] - 2.0 * std::fabs(t.x_opt[i]);
      Vec lam = ref_lambda_mul(10.0, diff);
      Vec z(d), z100(d);
      for (int i = 0; i < d; ++i) {
        z[i] = 100.0 * (lam[i] + 2.0 * std::fabs(t.x_opt[i]));
        z100[i] = z[i] / 100.0;
      }
      double s = 0.0;
      for (int i = 0; i < d; ++i) s += z[i] * std::sin(std::sqrt(std::fabs(z[i])));
      raw = -1.0 / (100.0 * d) * s + 4.189828872724339 + 100.0 * ref_pen(z100);
      break;
    }
    case 21:
    case 22: {
      const int k = (int)t.peak_weights.size();
      double m = 0.0;
      for (int i = 0; i < k; ++i) {
        Vec diff(d);
        for (int j = 0; j < d; ++j) diff[j] = x[j] - t.peak_centers(i, j);
        Vec u = ref_rot(t.rot_r, diff);
        double q = 0.0;
        for (int j = 0; j < d; ++j) q += t.peak_scales(i, j) * u[j] * u[j];
        double v = t.peak_weights[i] * std::exp(-q / (2.0 * d));
        if (v > m) m = v;
      }
      double o = ref_osz(10.0 - m);
      raw = o * o + ref_pen(x);
      break;
    }
    case 23: {
      Vec z = ref_rot(t.rot_q,
                      ref_lambda_mul(100.0, ref_rot(t.rot_r, ref_sub(x, t.x_opt))));
      double prod = 1.0;
      for (int i = 0; i < d; ++i) {
        double s = 0.0;
        for (int j = 1; j <= 32; ++j) {
          double p2 = std::pow(2.0, j) * z[i];
          s += std::fabs(p2 - std::round(p2)) / std::pow(2.0, j);
        }
        prod *= std::pow(1.0 + (i + 1) * s, 10.0 / std::pow(double(d), 1.2));
      }
      raw = 10.0 / (d * d) * prod - 10.0 / (d * d) + ref_pen(x);
      break;
    }
    case 24: {
      double mu0 = 2.5;
      double s = 1.0 - 1.0 / (2.0 * std::sqrt(d + 20.0) - 8.2);
      double mu1 = -std::sqrt((mu0 * mu0 - 1.0) / s);
      Vec xhat(d), cent(d);
      for (int i = 0; i < d; ++i) {
        xhat[i] = 2.0 * t.signs[i] * x[i];
        cent[i] = xhat[i] - mu0;
      }
      Vec z = ref_rot(t.rot_q, ref_lambda_mul(100.0, ref_rot(t.rot_r, cent)));
      double s0 = 0.0, s1 = 0.0, c = 0.0;
      for (int i = 0; i < d; ++i) {
        s0 += (xhat[i] - mu0) * (xhat[i] - mu0);
        s1 += (xhat[i] - mu1) * (xhat[i] - mu1);
        c += std::cos(2.0 * PI * z[i]);
      }
      raw = std::min(s0, 1.0 * d + s * s1) + 10.0 * (d - c) + 1.0e4 * ref_pen(x);
      break;
    }
    default:
      throw std::invalid_argument("reference: unknown function id");
  }

  return raw - t.raw_offset + t.f_opt;
}

}  // namespace trajsel_test
