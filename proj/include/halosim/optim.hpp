#pragma once

#include <cstdint>

#include "halosim/vec.hpp"

namespace halosim {

// Descent-direction pseudo-gradient: old - new. Server steps
// model <- model - lr*g reproduce the displacement when lr=1, beta=0.
Vec pseudo_gradient(const Vec& old_model, const Vec& new_model);

// g unchanged if ||g|| <= max_norm, else rescaled to norm max_norm.
Vec clip_gradient(const Vec& g, double max_norm);

struct NesterovConfig {
  double lr = 1.0;     // full-rate eta; per-step effective rate is lr/delay
  double beta = 0.0;   // momentum in [0,1)
  int delay = 1;       // momentum refresh interval d >= 1
  // Between refreshes apply the scaled gradient step (lr/d)(1-beta)*g.
  // With false, inter-refresh steps touch only the accumulator.
  bool inter_refresh_step = true;
};

// Nesterov momentum with optional delayed refresh. With delay=1 this is the
// plain two-line recursion m <- beta*m + g; model <- model - lr*((1-beta)*g
// + beta*m). With delay=d the momentum folds the averaged accumulator once
// every d applies and each step uses the lr/d-scaled gradient term.
class Nesterov {
 public:
  Nesterov(NesterovConfig cfg, std::size_t dim);

  void apply(Vec& model, const Vec& g);

  const NesterovConfig& config() const noexcept { return cfg_; }
  const Vec& momentum() const noexcept { return m_; }
  const Vec& accumulator() const noexcept { return acc_; }
  uint64_t step_count() const noexcept { return steps_; }

 private:
  NesterovConfig cfg_;
  Vec m_;
  Vec acc_;
  uint64_t steps_ = 0;
};

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.95;
  double eps = 1e-8;
  double weight_decay = 0.1;
};

enum class InnerKind { PlainSgd, AdamW };

// Worker-side optimizer: plain SGD or AdamW with decoupled weight decay.
class InnerOpt {
 public:
  InnerOpt(InnerKind kind, std::size_t dim, AdamConfig adam = {});

  void step(Vec& model, const Vec& grad, double lr);

  InnerKind kind() const noexcept { return kind_; }
  uint64_t step_count() const noexcept { return steps_; }
  const Vec& first_moment() const noexcept { return m_; }
  const Vec& second_moment() const noexcept { return v_; }

 private:
  InnerKind kind_;
  AdamConfig adam_;
  Vec m_;
  Vec v_;
  uint64_t steps_ = 0;
};

// Linear warmup to eta_max over `warmup` steps, then cosine decay to
// floor_frac*eta_max at `total`. total==0 means constant eta_max.
struct LrSchedule {
  double eta_max = 0.0;
  long warmup = 0;
  long total = 0;
  double floor_frac = 0.1;

  double at(long t) const;          // errors on t > total
  double at_clamped(long t) const;  // clamps t into [0, total]
};

}  // namespace halosim
