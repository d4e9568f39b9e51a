#include "halosim/strategies.hpp"

#include <cmath>

namespace halosim {

std::string strategy_name(StrategyKind k) {
  switch (k) {
    case StrategyKind::SyncSgd: return "sync_sgd";
    case StrategyKind::DiLoCo: return "diloco";
    case StrategyKind::DiLoCoDynUpd: return "diloco_dynupd";
    case StrategyKind::AsyncLocalSgd: return "async_local_sgd";
    case StrategyKind::Halos: return "halos";
  }
  fail(Errc::invalid_argument, "unknown strategy kind");
}

StrategyKind strategy_from_name(const std::string& name) {
  if (name == "sync_sgd") return StrategyKind::SyncSgd;
  if (name == "diloco") return StrategyKind::DiLoCo;
  if (name == "diloco_dynupd") return StrategyKind::DiLoCoDynUpd;
  if (name == "async_local_sgd") return StrategyKind::AsyncLocalSgd;
  if (name == "halos") return StrategyKind::Halos;
  fail(Errc::config, "strategy.kind: unknown strategy '" + name + "'");
}

void StrategyConfig::validate() const {
  if (!(global_opt.lr > 0.0))
    fail(Errc::config, "strategy.global_opt.lr: must be positive");
  if (!(global_opt.beta >= 0.0 && global_opt.beta < 1.0))
    fail(Errc::config, "strategy.global_opt.beta: must be in [0,1)");
  if (global_opt.delay < 1)
    fail(Errc::config, "strategy.global_opt.delay: must be >= 1");
  if (hierarchical()) {
    if (!(local_opt.lr > 0.0))
      fail(Errc::config, "strategy.local_opt.lr: must be positive");
    if (!(local_opt.beta >= 0.0 && local_opt.beta < 1.0))
      fail(Errc::config, "strategy.local_opt.beta: must be in [0,1)");
    if (local_opt.delay < 1)
      fail(Errc::config, "strategy.local_opt.delay: must be >= 1");
    if (k < 1) fail(Errc::config, "strategy.k: must be >= 1");
    if (!(alpha >= 0.0 && alpha <= 1.0))
      fail(Errc::config, "strategy.alpha: must be in [0,1]");
  }
  if (h < 1) fail(Errc::config, "strategy.h: must be >= 1");
}

StrategyConfig halos_paper_strategy() {
  StrategyConfig c;
  c.kind = StrategyKind::Halos;
  // Published rates are per-delay-step; the full fold rate is lr*delay.
  c.global_opt = {0.15 * 2, 0.5, 2, true};
  c.local_opt = {0.2 * 16, 0.9, 16, true};
  c.k = 32;
  c.alpha = 0.25;
  c.h = 8;
  c.dyn_local_steps = true;
  return c;
}

StrategyConfig async_paper_strategy() {
  StrategyConfig c;
  c.kind = StrategyKind::AsyncLocalSgd;
  c.global_opt = {0.05 * 32, 0.9, 32, true};
  c.h = 32;
  c.dyn_local_steps = true;
  return c;
}

StrategyConfig diloco_paper_strategy(bool dyn_updates) {
  StrategyConfig c;
  c.kind = dyn_updates ? StrategyKind::DiLoCoDynUpd : StrategyKind::DiLoCo;
  c.global_opt = {0.7, 0.9, 1, true};
  c.h = 32;
  c.dyn_local_steps = dyn_updates;
  return c;
}

StrategyConfig sync_sgd_strategy() {
  StrategyConfig c;
  c.kind = StrategyKind::SyncSgd;
  c.global_opt = {1.0, 0.0, 1, true};
  c.h = 1;
  c.dyn_local_steps = false;
  return c;
}

LpsState::LpsState(Vec init_model, const NesterovConfig& nes, int k,
                   double alpha)
    : model_(std::move(init_model)),
      model_at_t_last_(model_),
      nes_(nes, model_.size()),
      k_(k),
      alpha_(alpha) {
  if (k < 1) fail(Errc::invalid_argument, "lps: k must be >= 1");
  if (!(alpha >= 0.0 && alpha <= 1.0))
    fail(Errc::invalid_argument, "lps: alpha must be in [0,1]");
}

LpsState::ApplyResult LpsState::on_worker_delta(const Vec& delta) {
  check_same_dim(delta, model_, "lps on_worker_delta");
  check_finite(delta, "lps worker delta");
  ++t_;
  // Displacement payloads are negated into descent pseudo-gradients.
  nes_.apply(model_, neg(delta));
  ++version_;

  ApplyResult r;
  r.model_for_worker = std::make_shared<const Vec>(model_);
  if (t_ - t_last_ == static_cast<uint64_t>(k_))
    r.delta_to_gps = sub(model_, model_at_t_last_);
  return r;
}

void LpsState::on_global_model(const Vec& global) {
  check_same_dim(global, model_, "lps on_global_model");
  t_last_ = t_;
  model_ = convex_merge(model_, global, alpha_);
  model_at_t_last_ = model_;
  ++version_;
}

GpsState::GpsState(Vec init_model, const NesterovConfig& nes)
    : model_(std::move(init_model)), nes_(nes, model_.size()) {}

ModelSnapshot GpsState::on_delta(const Vec& delta) {
  check_same_dim(delta, model_, "gps on_delta");
  check_finite(delta, "gps delta");
  ++updates_;
  nes_.apply(model_, neg(delta));
  ++version_;
  return std::make_shared<const Vec>(model_);
}

WorkerRoundResult worker_round(const Workload& task, int worker,
                               const Vec& start_model, InnerOpt& inner,
                               const WorkerOptConfig& opt, uint64_t step0,
                               int steps) {
  check_finite(start_model, "worker_round start model");
  if (steps < 1) fail(Errc::invalid_argument, "worker_round: steps must be >= 1");

  Vec model = start_model;
  double loss_sum = 0.0;
  for (int i = 0; i < steps; ++i) {
    const uint64_t step = step0 + static_cast<uint64_t>(i);
    GradResult gr = task.grad(model, worker, step);
    if (!std::isfinite(gr.loss)) {
      fail(Errc::diverged, "worker " + std::to_string(worker) +
                               ": non-finite loss at step " +
                               std::to_string(step));
    }
    loss_sum += gr.loss;
    const Vec clipped = clip_gradient(gr.grad, opt.clip);
    inner.step(model, clipped, opt.lr_at(static_cast<long>(step)));
  }

  WorkerRoundResult r;
  r.delta = sub(model, start_model);
  r.steps_done = steps;
  r.mean_loss = loss_sum / static_cast<double>(steps);
  return r;
}

void apply_averaged_deltas(Vec& model, Nesterov& outer,
                           const std::vector<Vec>& deltas) {
  outer.apply(model, neg(mean(deltas)));
}

double sync_sgd_step(const Workload& task, Vec& model, InnerOpt& global_opt,
                     const WorkerOptConfig& opt, uint64_t step) {
  const int n = task.num_workers();
  Vec g_sum(model.size(), 0.0);
  double loss_sum = 0.0;
  for (int w = 0; w < n; ++w) {
    GradResult gr = task.grad(model, w, step);
    loss_sum += gr.loss;
    axpy_inplace(1.0, gr.grad, g_sum);
  }
  const double inv = 1.0 / static_cast<double>(n);
  for (double& x : g_sum) x *= inv;
  const Vec clipped = clip_gradient(g_sum, opt.clip);
  global_opt.step(model, clipped, opt.lr_at(static_cast<long>(step)));
  return loss_sum * inv;
}

std::vector<WorkerRoundResult> diloco_round(
    const Workload& task, Vec& outer_model, Nesterov& outer,
    std::vector<InnerOpt>& inner, const WorkerOptConfig& opt,
    const std::vector<int>& steps_per_worker,
    const std::vector<uint64_t>& step0_per_worker) {
  const auto n = static_cast<std::size_t>(task.num_workers());
  if (steps_per_worker.size() != n || step0_per_worker.size() != n ||
      inner.size() != n)
    fail(Errc::invalid_argument, "diloco_round: per-worker arrays mismatch");

  std::vector<WorkerRoundResult> results(n);
  std::vector<Vec> deltas;
  for (std::size_t w = 0; w < n; ++w) {
    if (steps_per_worker[w] == 0) continue;
    results[w] = worker_round(task, static_cast<int>(w), outer_model, inner[w],
                              opt, step0_per_worker[w], steps_per_worker[w]);
    deltas.push_back(results[w].delta);
  }
  if (!deltas.empty()) apply_averaged_deltas(outer_model, outer, deltas);
  return results;
}

}  // namespace halosim
