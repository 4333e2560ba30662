#include "ibl/optim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "ibl/rng.hpp"

namespace ibl {

void validate(const Schedule& s) {
  if (!(s.eta0 > 0.0) || !std::isfinite(s.eta0)) throw ConfigError("schedule: eta0 must be positive");
  if (s.kind == ScheduleKind::polynomial && !(s.a > 0.0 && s.a <= 1.0)) {
    throw ConfigError("schedule: exponent a must lie in (0, 1]");
  }
}

double schedule_eta(const Schedule& s, std::uint64_t t) {
  validate(s);
  if (s.kind == ScheduleKind::constant) return s.eta0;
  return s.eta0 * std::pow(static_cast<double>(t) + 2.0, -s.a);
}

namespace {

void require_beta(double beta, const char* name) {
  if (!(beta >= 0.0 && beta < 1.0)) {
    throw ConfigError(std::string(name) + " must lie in [0, 1)");
  }
}

void require_finite(const Vector& g) {
  if (!g.allFinite()) throw NumericError("gradient contains NaN or inf");
}

inline double sign0(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

// 1 - beta^n, accurate for beta close to 1.
double one_minus_pow(double beta, std::size_t n) {
  if (beta == 0.0) return 1.0;
  return -std::expm1(static_cast<double>(n) * std::log(beta));
}

}  // namespace

AdamState AdamState::init(Vector w0, double beta1, double beta2) {
  require_beta(beta1, "beta1");
  require_beta(beta2, "beta2");
  const auto d = w0.size();
  return AdamState{std::move(w0), Vector::Zero(d), Vector::Zero(d), 0, beta1, beta2};
}

void adam_step_inplace(AdamState& s, const Vector& g, double eta) {
  if (g.size() != s.w.size()) throw ConfigError("adam_step: gradient dimension mismatch");
  require_finite(g);
  const double b1 = s.beta1;
  const double b2 = s.beta2;
  for (Eigen::Index k = 0; k < g.size(); ++k) {
    s.m[k] = b1 * s.m[k] + (1.0 - b1) * g[k];
    s.v[k] = b2 * s.v[k] + (1.0 - b2) * g[k] * g[k];
    if (s.v[k] > 0.0) s.w[k] -= eta * s.m[k] / std::sqrt(s.v[k]);
  }
  ++s.t;
}

AdamState adam_step(AdamState state, const Vector& g, double eta) {
  adam_step_inplace(state, g, eta);
  return state;
}

SignumState SignumState::init(Vector w0, double beta, std::size_t batch_size) {
  require_beta(beta, "beta");
  if (batch_size == 0) throw ConfigError("batch size must be positive");
  const auto d = w0.size();
  return SignumState{std::move(w0), Vector::Zero(d), 0, beta, batch_size};
}

void signum_step_inplace(SignumState& s, const Vector& g, double eta) {
  if (g.size() != s.w.size()) throw ConfigError("signum_step: gradient dimension mismatch");
  require_finite(g);
  for (Eigen::Index k = 0; k < g.size(); ++k) {
    s.m[k] = s.beta * s.m[k] + (1.0 - s.beta) * g[k];
    s.w[k] -= eta * sign0(s.m[k]);
  }
  ++s.t;
}

SignumState signum_step(SignumState state, const Vector& g, double eta) {
  signum_step_inplace(state, g, eta);
  return state;
}

Vector adamproxy_direction(const Vector& w, const Dataset& data, LossKind kind) {
  const Matrix g = grad_samples(w, data, kind);
  if (!g.allFinite()) throw NumericError("adamproxy: non-finite per-sample gradient");
  const Vector mean = g.colwise().mean().transpose();
  const Vector denom = g.colwise().norm().transpose();
  for (Eigen::Index k = 0; k < denom.size(); ++k) {
    if (!(denom[k] > 0.0)) {
      std::ostringstream msg;
      msg << "adamproxy: zero denominator at coordinate " << k;
      throw NumericError(msg.str());
    }
  }
  return mean.cwiseQuotient(denom);
}

Vector adamproxy_step(const Vector& w, const Dataset& data, LossKind kind, double eta) {
  return w - eta * adamproxy_direction(w, data, kind);
}

double c_inc(double beta1, double beta2, std::size_t n) {
  require_beta(beta1, "beta1");
  require_beta(beta2, "beta2");
  if (n == 0) throw ConfigError("c_inc: N must be positive");
  return (1.0 - beta1) / one_minus_pow(beta1, n) *
         std::sqrt(one_minus_pow(beta2, n) / (1.0 - beta2));
}

Vector epoch_update_oracle(const Vector& w, const Dataset& data, LossKind kind, double beta1,
                           double beta2, double eta) {
  const std::size_t n = data.n();
  const Matrix g = grad_samples(w, data, kind);
  const Matrix g2 = g.array().square().matrix();
  Vector pw1(n), pw2(n);
  for (std::size_t p = 0; p < n; ++p) {
    pw1[p] = std::pow(beta1, static_cast<double>(p));
    pw2[p] = std::pow(beta2, static_cast<double>(p));
  }
  Vector total = Vector::Zero(data.d());
  Vector num(data.d()), den(data.d());
  for (std::size_t i = 0; i < n; ++i) {
    num.setZero();
    den.setZero();
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t lag = (i + n - j) % n;
      num += pw1[lag] * g.row(j).transpose();
      den += pw2[lag] * g2.row(j).transpose();
    }
    for (Eigen::Index k = 0; k < den.size(); ++k) {
      if (!(den[k] > 0.0)) {
        std::ostringstream msg;
        msg << "epoch_update_oracle: zero denominator at coordinate " << k;
        throw NumericError(msg.str());
      }
      total[k] += num[k] / std::sqrt(den[k]);
    }
  }
  return -eta * c_inc(beta1, beta2, n) * total;
}

Vector proxy_limit_update(const Vector& w, const Dataset& data, LossKind kind, double beta2,
                          double eta) {
  require_beta(beta2, "beta2");
  const std::size_t n = data.n();
  const Matrix g = grad_samples(w, data, kind);
  const Vector sum = g.colwise().sum().transpose();
  const Vector denom = g.colwise().norm().transpose();
  for (Eigen::Index k = 0; k < denom.size(); ++k) {
    if (!(denom[k] > 0.0)) {
      std::ostringstream msg;
      msg << "proxy_limit_update: zero denominator at coordinate " << k;
      throw NumericError(msg.str());
    }
  }
  const double scale = std::sqrt(one_minus_pow(beta2, n) / (1.0 - beta2));
  return -eta * scale * sum.cwiseQuotient(denom);
}

double momentum_alpha(double beta1, double beta2) {
  require_beta(beta1, "beta1");
  require_beta(beta2, "beta2");
  if (!(beta2 > 0.0)) throw ConfigError("momentum_alpha: beta2 must be positive");
  if (beta1 * beta1 > beta2) throw ConfigError("momentum_alpha: requires beta1^2 <= beta2");
  const double r = 1.0 - beta1;
  return std::sqrt(beta2 * r * r / ((1.0 - beta2) * (beta2 - beta1 * beta1)));
}

double signum_epsilon(double delta, double gamma_inf, double max_l1, std::size_t n,
                      std::size_t batch) {
  if (!(delta > 0.0) || !(gamma_inf > 0.0) || !(max_l1 > 0.0)) {
    throw ConfigError("signum_epsilon: delta, gamma_inf and D must be positive");
  }
  if (batch == 0 || batch > n || n % batch != 0) {
    throw ConfigError("signum_epsilon: batch size must divide N");
  }
  if (batch == n) return 1.0;
  const double q = static_cast<double>(n / batch);
  return std::min(delta, gamma_inf / 2.0) / (2.0 * max_l1 * q * (q - 1.0));
}

// ---------------------------------------------------------------------------

std::string_view to_string(Algo algo) {
  switch (algo) {
    case Algo::adam: return "adam";
    case Algo::signum: return "signum";
    case Algo::signgd: return "signgd";
    case Algo::gd: return "gd";
    case Algo::adamproxy: return "adamproxy";
  }
  return "adam";
}

std::string_view to_string(Sampling sampling) {
  switch (sampling) {
    case Sampling::full_batch: return "full_batch";
    case Sampling::incremental: return "incremental";
    case Sampling::random_reshuffle: return "random_reshuffle";
    case Sampling::with_replacement: return "with_replacement";
  }
  return "incremental";
}

Algo algo_from_string(std::string_view name) {
  for (Algo a : {Algo::adam, Algo::signum, Algo::signgd, Algo::gd, Algo::adamproxy}) {
    if (to_string(a) == name) return a;
  }
  throw ConfigError("unknown algorithm '" + std::string(name) + "'");
}

Sampling sampling_from_string(std::string_view name) {
  for (Sampling s : {Sampling::full_batch, Sampling::incremental, Sampling::random_reshuffle,
                     Sampling::with_replacement}) {
    if (to_string(s) == name) return s;
  }
  throw ConfigError("unknown sampling mode '" + std::string(name) + "'");
}

std::vector<std::uint64_t> checkpoint_steps(const RecordCadence& cadence, std::uint64_t steps) {
  std::vector<std::uint64_t> out;
  if (cadence.every > 0) {
    for (std::uint64_t t = 0; t < steps; t += cadence.every) out.push_back(t);
  } else {
    if (!(cadence.factor > 1.0)) throw ConfigError("record cadence factor must exceed 1");
    std::uint64_t t = 0;
    while (t < steps) {
      out.push_back(t);
      if (t < cadence.dense_until) {
        ++t;
      } else {
        const auto next = static_cast<std::uint64_t>(std::ceil(static_cast<double>(t) * cadence.factor));
        t = std::max(next, t + 1);
      }
    }
  }
  out.push_back(steps);
  return out;
}

void validate(const RunConfig& cfg, const Dataset& data) {
  validate(cfg.schedule);
  require_beta(cfg.beta1, cfg.algo == Algo::signum ? "beta" : "beta1");
  require_beta(cfg.beta2, "beta2");
  if (cfg.w0.size() != 0 && static_cast<std::size_t>(cfg.w0.size()) != data.d()) {
    throw ConfigError("initial weight has the wrong dimension");
  }
  const std::size_t b = cfg.sampling.batch_size;
  if (cfg.sampling.kind != Sampling::full_batch) {
    if (b == 0 || b > data.n()) throw ConfigError("batch size must lie in [1, N]");
    if (cfg.sampling.kind != Sampling::with_replacement && data.n() % b != 0) {
      throw ConfigError("batch size must divide N for cyclic or reshuffled batching");
    }
  }
  if (cfg.algo == Algo::adamproxy && cfg.sampling.kind != Sampling::full_batch) {
    throw ConfigError("adamproxy always uses every sample; set sampling to full_batch");
  }
}

std::uint64_t steps_per_epoch(const RunConfig& cfg, const Dataset& data) {
  if (cfg.sampling.kind == Sampling::full_batch) return 1;
  return std::max<std::uint64_t>(1, data.n() / cfg.sampling.batch_size);
}

namespace {

// Picks the indices of the batch used at step t.
class BatchSampler {
 public:
  BatchSampler(const SamplingMode& mode, std::size_t n, std::uint64_t seed)
      : mode_(mode), n_(n), rng_(Rng::stream(seed, 1)), perm_(n) {
    std::iota(perm_.begin(), perm_.end(), std::size_t{0});
    if (mode_.kind == Sampling::full_batch) mode_.batch_size = n;
    batch_.resize(mode_.batch_size);
  }

  const std::vector<std::size_t>& batch(std::uint64_t t) {
    const std::size_t b = mode_.batch_size;
    switch (mode_.kind) {
      case Sampling::full_batch:
        for (std::size_t i = 0; i < n_; ++i) batch_[i] = i;
        break;
      case Sampling::incremental:
        for (std::size_t i = 0; i < b; ++i) batch_[i] = static_cast<std::size_t>((t * b + i) % n_);
        break;
      case Sampling::random_reshuffle: {
        const std::uint64_t per_epoch = n_ / b;
        const std::uint64_t slot = t % per_epoch;
        if (slot == 0) rng_.shuffle(perm_.begin(), perm_.end());
        for (std::size_t i = 0; i < b; ++i) batch_[i] = perm_[slot * b + i];
        break;
      }
      case Sampling::with_replacement:
        for (std::size_t i = 0; i < b; ++i) batch_[i] = static_cast<std::size_t>(rng_.index(n_));
        break;
    }
    return batch_;
  }

 private:
  SamplingMode mode_;
  std::size_t n_;
  Rng rng_;
  std::vector<std::size_t> perm_;
  std::vector<std::size_t> batch_;
};

// g <- mean over the batch of l'(w . x_i) x_i.
void batch_gradient(const Dataset& data, LossKind kind, const Vector& w,
                    const std::vector<std::size_t>& batch, Vector& g) {
  g.setZero();
  for (std::size_t i : batch) {
    const auto x = data.point(i);
    const double coeff = loss_deriv(kind, x.dot(w.transpose()));
    if (!std::isfinite(coeff)) throw NumericError("loss derivative overflowed");
    g.noalias() += coeff * x.transpose();
  }
  g /= static_cast<double>(batch.size());
}

}  // namespace

RunResult run(const Dataset& data, const RunConfig& cfg, const Recorder& recorder) {
  validate(cfg, data);
  const auto d = static_cast<Eigen::Index>(data.d());
  Vector w0 = cfg.w0.size() == 0 ? Vector::Zero(d) : cfg.w0;

  const auto ticks = checkpoint_steps(cfg.cadence, cfg.steps);
  std::size_t next_tick = 0;

  AdamState adam = AdamState::init(w0, cfg.algo == Algo::signum ? 0.0 : cfg.beta1, cfg.beta2);
  SignumState signum = SignumState::init(w0, cfg.algo == Algo::signum ? cfg.beta1 : 0.0,
                                         std::max<std::size_t>(1, cfg.sampling.batch_size));
  Vector plain = w0;

  const Vector& w_ref = cfg.algo == Algo::adam ? adam.w
                        : cfg.algo == Algo::signum ? signum.w
                                                   : plain;
  const Vector* m_ref = cfg.algo == Algo::adam ? &adam.m : cfg.algo == Algo::signum ? &signum.m : nullptr;
  const Vector* v_ref = cfg.algo == Algo::adam ? &adam.v : nullptr;

  RunResult result;
  auto record = [&](std::uint64_t t) {
    while (next_tick < ticks.size() && ticks[next_tick] == t) {
      result.checkpoints.push_back({t, w_ref});
      if (recorder) recorder(StepView{t, w_ref, m_ref, v_ref});
      ++next_tick;
    }
  };

  BatchSampler sampler(cfg.sampling, data.n(), cfg.seed);
  Vector g(d);
  Vector last_good = w0;

  record(0);
  std::uint64_t t = 0;
  try {
    for (; t < cfg.steps; ++t) {
      const double eta = schedule_eta(cfg.schedule, t);
      last_good = w_ref;
      if (cfg.algo == Algo::adamproxy) {
        plain -= eta * adamproxy_direction(plain, data, cfg.loss);
      } else {
        batch_gradient(data, cfg.loss, w_ref, sampler.batch(t), g);
        switch (cfg.algo) {
          case Algo::adam: adam_step_inplace(adam, g, eta); break;
          case Algo::signum: signum_step_inplace(signum, g, eta); break;
          case Algo::signgd:
            require_finite(g);
            for (Eigen::Index k = 0; k < d; ++k) plain[k] -= eta * sign0(g[k]);
            break;
          case Algo::gd:
            require_finite(g);
            plain.noalias() -= eta * g;
            break;
          case Algo::adamproxy: break;
        }
      }
      if (!w_ref.allFinite()) throw NumericError("iterate became non-finite");
      record(t + 1);
    }
  } catch (const NumericError& e) {
    result.ok = false;
    std::ostringstream msg;
    msg << "step " << t << ": " << e.what();
    result.failure = msg.str();
    result.w = last_good;
    result.steps_completed = t;
    return result;
  }
  result.w = w_ref;
  result.steps_completed = cfg.steps;
  return result;
}

}  // namespace ibl
