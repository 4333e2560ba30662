#include "oracles.hpp"

#include <cmath>
#include <limits>
#include <random>

namespace oracle {

using Eigen::Index;

long double exp_loss_ld(const Vector& w, const Dataset& data) {
  long double total = 0.0L;
  for (Index i = 0; i < data.x.rows(); ++i) {
    long double z = 0.0L;
    for (Index k = 0; k < data.x.cols(); ++k) z += static_cast<long double>(w[k]) * data.x(i, k);
    total += std::exp(-z);
  }
  return total / static_cast<long double>(data.x.rows());
}

long double c_inc_ld(double beta1, double beta2, std::size_t n) {
  // (1-b1)/(1-b1^N) = 1 / sum_{j<N} b1^j and (1-b2^N)/(1-b2) = sum_{j<N} b2^j.
  long double s1 = 0.0L, s2 = 0.0L, p1 = 1.0L, p2 = 1.0L;
  for (std::size_t j = 0; j < n; ++j) {
    s1 += p1;
    s2 += p2;
    p1 *= beta1;
    p2 *= beta2;
  }
  return std::sqrt(s2) / s1;
}

Vector fd_gradient(const Vector& w, const Dataset& data, ibl::LossKind kind) {
  Vector g(w.size());
  for (Index k = 0; k < w.size(); ++k) {
    const double h = 1e-6 * (1.0 + std::abs(w[k]));
    Vector wp = w, wm = w;
    wp[k] += h;
    wm[k] -= h;
    g[k] = (ibl::loss_full(wp, data, kind) - ibl::loss_full(wm, data, kind)) / (2.0 * h);
  }
  return g;
}

namespace {

long double powi(long double b, std::size_t e) {
  long double r = 1.0L;
  for (std::size_t k = 0; k < e; ++k) r *= b;
  return r;
}

}  // namespace

Vector gr_epoch_weights(const Vector& w, const Dataset& data, double beta1, double beta2) {
  const std::size_t n = data.n();
  std::vector<long double> lp(n), mag(n);
  Vector grad = Vector::Zero(w.size());
  for (std::size_t i = 0; i < n; ++i) {
    const double z = data.point(i).dot(w.transpose());
    lp[i] = -std::exp(static_cast<long double>(-z));
    mag[i] = std::abs(data.x(static_cast<Index>(i), 0));
    grad += static_cast<double>(lp[i]) * data.point(i).transpose();
  }
  grad /= static_cast<double>(n);
  std::vector<long double> s(n);
  for (std::size_t i = 0; i < n; ++i) {
    long double acc = 0.0L;
    for (std::size_t l = 0; l < n; ++l) {
      acc += powi(beta2, (i + n - l) % n) * lp[l] * lp[l] * mag[l] * mag[l];
    }
    s[i] = std::sqrt(acc);
  }
  const long double cinc = c_inc_ld(beta1, beta2, n);
  Vector a(static_cast<Index>(n));
  for (std::size_t j = 0; j < n; ++j) {
    long double acc = 0.0L;
    for (std::size_t i = 0; i < n; ++i) acc += powi(beta1, (i + n - j) % n) / s[i];
    a[static_cast<Index>(j)] = static_cast<double>(cinc * acc * grad.norm());
  }
  return a;
}

Vector gr_weighted_epoch_update(const Vector& w, const Dataset& data, double beta1, double beta2,
                                double eta) {
  const Vector a = gr_epoch_weights(w, data, beta1, beta2);
  Vector grad = Vector::Zero(w.size());
  Vector combo = Vector::Zero(w.size());
  for (std::size_t j = 0; j < data.n(); ++j) {
    const double z = data.point(j).dot(w.transpose());
    const Vector gj = -std::exp(-z) * data.point(j).transpose();
    grad += gj / static_cast<double>(data.n());
    combo += a[static_cast<Index>(j)] * gj;
  }
  return -eta * combo / grad.norm();
}

AdamEpoch simulate_inc_adam_epoch(AdamEpoch st, const Dataset& data, double beta1, double beta2,
                                  double eta0, double a, std::size_t t0) {
  const std::size_t n = data.n();
  for (std::size_t s = 0; s < n; ++s) {
    const std::size_t t = t0 + s;
    const std::size_t i = t % n;
    const double z = data.point(i).dot(st.w.transpose());
    const Vector g = -std::exp(-z) * data.point(i).transpose();
    const double eta = eta0 / std::pow(static_cast<double>(t) + 2.0, a);
    for (Index k = 0; k < st.w.size(); ++k) {
      st.m[k] = beta1 * st.m[k] + (1.0 - beta1) * g[k];
      st.v[k] = beta2 * st.v[k] + (1.0 - beta2) * g[k] * g[k];
      if (st.v[k] > 0.0) st.w[k] -= eta * st.m[k] / std::sqrt(st.v[k]);
    }
  }
  return st;
}

LpVertex linf_vertex_enumeration(const Dataset& data) {
  const Index n = static_cast<Index>(data.n());
  const Index d = static_cast<Index>(data.d());
  // Rows of G z >= h with z = (w, t).
  const Index rows = n + 2 * d;
  Matrix g = Matrix::Zero(rows, d + 1);
  Vector h = Vector::Zero(rows);
  for (Index i = 0; i < n; ++i) {
    g.block(i, 0, 1, d) = data.x.row(i);
    h[i] = 1.0;
  }
  for (Index k = 0; k < d; ++k) {
    g(n + k, k) = -1.0;  // t - w_k >= 0
    g(n + k, d) = 1.0;
    g(n + d + k, k) = 1.0;  // t + w_k >= 0
    g(n + d + k, d) = 1.0;
  }
  LpVertex best;
  best.t = std::numeric_limits<double>::infinity();
  std::vector<Vector> optima;
  std::vector<Index> pick(static_cast<std::size_t>(d + 1));
  for (Index k = 0; k <= d; ++k) pick[static_cast<std::size_t>(k)] = k;
  const Index m = d + 1;
  while (true) {
    Matrix a(m, m);
    Vector b(m);
    for (Index r = 0; r < m; ++r) {
      a.row(r) = g.row(pick[static_cast<std::size_t>(r)]);
      b[r] = h[pick[static_cast<std::size_t>(r)]];
    }
    Eigen::FullPivLU<Matrix> lu(a);
    if (lu.isInvertible()) {
      const Vector z = lu.solve(b);
      if ((g * z - h).minCoeff() >= -1e-9) {
        const double t = z[d];
        if (t < best.t - 1e-9) {
          best.t = t;
          best.w = z.head(d);
          optima.assign(1, z.head(d));
        } else if (std::abs(t - best.t) <= 1e-9) {
          optima.push_back(z.head(d));
        }
      }
    }
    // Next combination.
    Index pos = m - 1;
    while (pos >= 0 && pick[static_cast<std::size_t>(pos)] == rows - m + pos) --pos;
    if (pos < 0) break;
    ++pick[static_cast<std::size_t>(pos)];
    for (Index r = pos + 1; r < m; ++r) pick[static_cast<std::size_t>(r)] = pick[static_cast<std::size_t>(r - 1)] + 1;
  }
  for (const Vector& o : optima) {
    if ((o - best.w).lpNorm<Eigen::Infinity>() > 1e-7) best.unique = false;
  }
  return best;
}

Dataset random_separable(std::size_t n, std::size_t d, unsigned seed) {
  std::mt19937 gen(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector u(static_cast<Index>(d));
  for (Index k = 0; k < u.size(); ++k) u[k] = normal(gen);
  Matrix x(static_cast<Index>(n), static_cast<Index>(d));
  for (Index i = 0; i < x.rows(); ++i) {
    while (true) {
      for (Index k = 0; k < x.cols(); ++k) {
        double v = normal(gen);
        while (std::abs(v) < 1e-3) v = normal(gen);
        x(i, k) = v;
      }
      const double s = x.row(i).dot(u.transpose());
      if (std::abs(s) < 1e-2) continue;
      if (s < 0) x.row(i) *= -1.0;
      break;
    }
  }
  return ibl::make_dataset(std::move(x));
}

}  // namespace oracle
