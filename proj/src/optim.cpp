#include "halosim/optim.hpp"

#include <cmath>
#include <numbers>

namespace halosim {

Vec pseudo_gradient(const Vec& old_model, const Vec& new_model) {
  return sub(old_model, new_model);
}

Vec clip_gradient(const Vec& g, double max_norm) {
  if (!(max_norm > 0.0))
    fail(Errc::invalid_argument, "clip_gradient: max_norm must be positive");
  const double n = l2_norm(g);
  if (n <= max_norm) return g;
  Vec r(g.size());
  const double scale = max_norm / n;
  for (std::size_t i = 0; i < g.size(); ++i) r[i] = g[i] * scale;
  return r;
}

Nesterov::Nesterov(NesterovConfig cfg, std::size_t dim)
    : cfg_(cfg), m_(dim, 0.0), acc_(dim, 0.0) {
  if (!(cfg.lr > 0.0)) fail(Errc::invalid_argument, "nesterov: lr must be > 0");
  if (!(cfg.beta >= 0.0 && cfg.beta < 1.0))
    fail(Errc::invalid_argument, "nesterov: beta must be in [0,1)");
  if (cfg.delay < 1) fail(Errc::invalid_argument, "nesterov: delay must be >= 1");
}

void Nesterov::apply(Vec& model, const Vec& g) {
  check_same_dim(model, g, "nesterov_apply");
  check_same_dim(model, m_, "nesterov_apply");
  check_finite(g, "nesterov_apply gradient");

  const double d = static_cast<double>(cfg_.delay);
  for (std::size_t i = 0; i < acc_.size(); ++i) acc_[i] += g[i];
  ++steps_;

  const double coef_g = (cfg_.lr / d) * (1.0 - cfg_.beta);
  if (steps_ % static_cast<uint64_t>(cfg_.delay) != 0) {
    if (cfg_.inter_refresh_step) {
      for (std::size_t i = 0; i < model.size(); ++i) model[i] -= coef_g * g[i];
    }
  } else {
    const double coef_m = cfg_.lr * cfg_.beta;
    for (std::size_t i = 0; i < m_.size(); ++i)
      m_[i] = cfg_.beta * m_[i] + acc_[i] / d;
    for (std::size_t i = 0; i < model.size(); ++i)
      model[i] -= coef_g * g[i] + coef_m * m_[i];
    for (double& a : acc_) a = 0.0;
  }
  check_finite(model, "nesterov_apply model");
}

InnerOpt::InnerOpt(InnerKind kind, std::size_t dim, AdamConfig adam)
    : kind_(kind), adam_(adam) {
  if (kind_ == InnerKind::AdamW) {
    m_.assign(dim, 0.0);
    v_.assign(dim, 0.0);
  }
}

void InnerOpt::step(Vec& model, const Vec& grad, double lr) {
  check_same_dim(model, grad, "inner_step");
  check_finite(grad, "inner_step gradient");
  if (!(lr > 0.0)) fail(Errc::invalid_argument, "inner_step: lr must be > 0");
  ++steps_;

  if (kind_ == InnerKind::PlainSgd) {
    for (std::size_t i = 0; i < model.size(); ++i) model[i] -= lr * grad[i];
  } else {
    const double b1 = adam_.beta1;
    const double b2 = adam_.beta2;
    const double t = static_cast<double>(steps_);
    const double corr1 = 1.0 - std::pow(b1, t);
    const double corr2 = 1.0 - std::pow(b2, t);
    for (std::size_t i = 0; i < model.size(); ++i) {
      m_[i] = b1 * m_[i] + (1.0 - b1) * grad[i];
      v_[i] = b2 * v_[i] + (1.0 - b2) * grad[i] * grad[i];
      const double mhat = m_[i] / corr1;
      const double vhat = v_[i] / corr2;
      model[i] -= lr * (mhat / (std::sqrt(vhat) + adam_.eps) +
                        adam_.weight_decay * model[i]);
    }
  }
  check_finite(model, "inner_step model");
}

double LrSchedule::at(long t) const {
  if (total == 0) return eta_max;
  if (t < 0) fail(Errc::invalid_argument, "lr_at: negative step");
  if (t > total) fail(Errc::invalid_argument, "lr_at: step beyond schedule end");
  if (t <= warmup) {
    if (warmup == 0) {
      // Fall through to the decay branch, which yields eta_max at t=0.
    } else {
      return eta_max * static_cast<double>(t) / static_cast<double>(warmup);
    }
  }
  const double f = floor_frac;
  const double progress = static_cast<double>(t - warmup) /
                          static_cast<double>(total - warmup);
  return eta_max *
         (f + (1.0 - f) * 0.5 * (1.0 + std::cos(std::numbers::pi * progress)));
}

double LrSchedule::at_clamped(long t) const {
  if (total == 0) return eta_max;
  if (t < 0) t = 0;
  if (t > total) t = total;
  return at(t);
}

}  // namespace halosim
