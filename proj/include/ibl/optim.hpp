#pragma once

// Optimizers for separable linear classification: Adam without the epsilon
// term (full-batch, incremental and randomly sampled mini-batches), Signum,
// SignGD, GD and the uniform-averaging AdamProxy, together with the closed
// form constants and epoch-level approximations of incremental Adam.

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "ibl/problem.hpp"

namespace ibl {

// ---------------------------------------------------------------------------
// Learning-rate schedules

enum class ScheduleKind { polynomial, constant };

/// polynomial: eta_t = eta0 (t + 2)^(-a), a in (0, 1].  constant: eta_t = eta0.
struct Schedule {
  ScheduleKind kind = ScheduleKind::polynomial;
  double eta0 = 0.1;
  double a = 0.8;

  static Schedule polynomial(double eta0, double a) { return {ScheduleKind::polynomial, eta0, a}; }
  static Schedule constant(double eta0) { return {ScheduleKind::constant, eta0, 0.0}; }
};

void validate(const Schedule& s);
double schedule_eta(const Schedule& s, std::uint64_t t);

// ---------------------------------------------------------------------------
// Steppers

struct AdamState {
  Vector w;
  Vector m;
  Vector v;
  std::uint64_t t = 0;
  double beta1 = 0.9;
  double beta2 = 0.95;

  static AdamState init(Vector w0, double beta1, double beta2);
};

/// One Adam update: m' = b1 m + (1-b1) g, v' = b2 v + (1-b2) g^2,
/// w' = w - eta m'/sqrt(v'). A coordinate with v' = 0 does not move.
AdamState adam_step(AdamState state, const Vector& g, double eta);
void adam_step_inplace(AdamState& state, const Vector& g, double eta);

struct SignumState {
  Vector w;
  Vector m;
  std::uint64_t t = 0;
  double beta = 0.99;
  std::size_t batch_size = 1;

  static SignumState init(Vector w0, double beta, std::size_t batch_size);
};

/// m' = beta m + (1-beta) g, w' = w - eta sign(m') with sign(0) = 0.
SignumState signum_step(SignumState state, const Vector& g, double eta);
void signum_step_inplace(SignumState& state, const Vector& g, double eta);

/// grad L(w) / sqrt(sum_i grad L_i(w)^2), entrywise.
Vector adamproxy_direction(const Vector& w, const Dataset& data, LossKind kind);
Vector adamproxy_step(const Vector& w, const Dataset& data, LossKind kind, double eta);

// ---------------------------------------------------------------------------
// Closed forms and epoch-level oracles

/// (1-b1)/(1-b1^N) * sqrt((1-b2^N)/(1-b2)).
double c_inc(double beta1, double beta2, std::size_t n);

/// Leading term of one Inc-Adam epoch started at w with step eta:
/// -eta C_inc sum_i [sum_j b1^((i-j) mod N) g_j] / sqrt(sum_j b2^((i-j) mod N) g_j^2).
Vector epoch_update_oracle(const Vector& w, const Dataset& data, LossKind kind, double beta1,
                           double beta2, double eta);

/// beta2 -> 1 form of the epoch update:
/// -eta sqrt((1-b2^N)/(1-b2)) sum_i g_i / sqrt(sum_i g_i^2).
Vector proxy_limit_update(const Vector& w, const Dataset& data, LossKind kind, double beta2,
                          double eta);

/// alpha with |m_t[k]| <= alpha sqrt(v_t[k]); requires beta1^2 <= beta2.
double momentum_alpha(double beta1, double beta2);

/// Momentum gap below which Inc-Signum with batch b keeps the l_inf bias:
/// min(delta, gamma_inf/2) / (2 D (N/b)(N/b - 1)) for b < N, 1 for b = N.
double signum_epsilon(double delta, double gamma_inf, double max_l1, std::size_t n,
                      std::size_t batch);

// ---------------------------------------------------------------------------
// Runs

enum class Algo { adam, signum, signgd, gd, adamproxy };
enum class Sampling { full_batch, incremental, random_reshuffle, with_replacement };

std::string_view to_string(Algo algo);
std::string_view to_string(Sampling sampling);
Algo algo_from_string(std::string_view name);
Sampling sampling_from_string(std::string_view name);

struct SamplingMode {
  Sampling kind = Sampling::incremental;
  std::size_t batch_size = 1;
};

/// Checkpoints: every step up to dense_until, then next = ceil(prev * factor).
/// every > 0 switches to a fixed stride instead.
struct RecordCadence {
  std::uint64_t dense_until = 100;
  double factor = 1.05;
  std::uint64_t every = 0;
};

/// Sorted checkpoint steps in [0, steps]; always includes 0 and steps.
std::vector<std::uint64_t> checkpoint_steps(const RecordCadence& cadence, std::uint64_t steps);

struct RunConfig {
  Algo algo = Algo::adam;
  SamplingMode sampling;
  LossKind loss = LossKind::exponential;
  double beta1 = 0.9;  // Signum's beta
  double beta2 = 0.95;
  Schedule schedule;
  std::uint64_t steps = 0;
  std::uint64_t seed = 0;
  Vector w0;  // empty means zero
  RecordCadence cadence;
};

/// Throws ConfigError when the configuration does not fit the dataset.
void validate(const RunConfig& cfg, const Dataset& data);

/// Number of optimizer steps that make up one pass over the data.
std::uint64_t steps_per_epoch(const RunConfig& cfg, const Dataset& data);

struct Checkpoint {
  std::uint64_t t = 0;
  Vector w;
};

/// State exposed to a recorder. m and v are null when the algorithm has no
/// such moment.
struct StepView {
  std::uint64_t t;
  const Vector& w;
  const Vector* m;
  const Vector* v;
};

using Recorder = std::function<void(const StepView&)>;

struct RunResult {
  Vector w;                       // last good iterate
  std::uint64_t steps_completed = 0;
  bool ok = true;
  std::string failure;            // set when ok == false
  std::vector<Checkpoint> checkpoints;
};

/// Runs cfg.steps updates from cfg.w0. Iterates at the cadence's checkpoints
/// are stored in the result and passed to `recorder` if one is given. A
/// non-finite gradient aborts the run, keeping the last good state.
RunResult run(const Dataset& data, const RunConfig& cfg, const Recorder& recorder = {});

}  // namespace ibl
