#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "halosim/optim.hpp"
#include "halosim/vec.hpp"
#include "halosim/workload.hpp"

namespace halosim {

enum class StrategyKind { SyncSgd, DiLoCo, DiLoCoDynUpd, AsyncLocalSgd, Halos };

std::string strategy_name(StrategyKind k);
StrategyKind strategy_from_name(const std::string& name);

struct StrategyConfig {
  StrategyKind kind = StrategyKind::Halos;
  NesterovConfig global_opt;  // GPS / outer optimizer (full-rate lr)
  NesterovConfig local_opt;   // LPS optimizer (hierarchical strategy only)
  int k = 32;                 // LPS updates accumulated per GPS send
  double alpha = 0.25;        // global model merging weight
  int h = 8;                  // max local steps per worker round
  bool dyn_local_steps = true;
  bool use_global_momentum = true;  // false forces beta_g = 0

  void validate() const;
  bool hierarchical() const { return kind == StrategyKind::Halos; }
  bool barrier() const {
    return kind == StrategyKind::SyncSgd || kind == StrategyKind::DiLoCo ||
           kind == StrategyKind::DiLoCoDynUpd;
  }
};

struct WorkerOptConfig {
  InnerKind kind = InnerKind::PlainSgd;
  double lr = 0.05;
  double clip = 1.0;
  LrSchedule schedule;  // total==0: constant lr
  AdamConfig adam;

  double lr_at(long step) const {
    return schedule.total == 0 ? lr : schedule.at_clamped(step);
  }
};

// Fixed table entries so runs resolve to the published tuning byte-for-byte.
StrategyConfig halos_paper_strategy();
StrategyConfig async_paper_strategy();
StrategyConfig diloco_paper_strategy(bool dyn_updates);
StrategyConfig sync_sgd_strategy();

using ModelSnapshot = std::shared_ptr<const Vec>;

// Local parameter server. Applies worker pseudo-gradients with local
// momentum, hands the updated model back to the contributing worker, and
// accumulates K updates between sends to the global server.
class LpsState {
 public:
  LpsState(Vec init_model, const NesterovConfig& nes, int k, double alpha);

  struct ApplyResult {
    ModelSnapshot model_for_worker;   // schedule the worker this model
    std::optional<Vec> delta_to_gps;  // set when t - t_last hits K
  };

  // Worker delta is a displacement (new - old); ingestion negates it into a
  // descent pseudo-gradient before the momentum update.
  ApplyResult on_worker_delta(const Vec& delta);

  // Merge a pulled global model; resets the accumulation window.
  void on_global_model(const Vec& global);

  const Vec& model() const { return model_; }
  uint64_t t() const { return t_; }
  uint64_t t_last() const { return t_last_; }
  uint64_t version() const { return version_; }
  const Nesterov& optimizer() const { return nes_; }

 private:
  Vec model_;
  Vec model_at_t_last_;
  Nesterov nes_;
  int k_;
  double alpha_;
  uint64_t t_ = 0;
  uint64_t t_last_ = 0;
  uint64_t version_ = 0;  // bumps on every state mutation
};

// Global parameter server; also serves as the single-tier server for the
// asynchronous baseline and the outer optimizer state for barrier methods.
class GpsState {
 public:
  GpsState(Vec init_model, const NesterovConfig& nes);

  // Applies an accumulated displacement and returns the snapshot to send
  // back to the originator.
  ModelSnapshot on_delta(const Vec& delta);

  const Vec& model() const { return model_; }
  uint64_t updates() const { return updates_; }
  uint64_t version() const { return version_; }
  const Nesterov& optimizer() const { return nes_; }

 private:
  Vec model_;
  Nesterov nes_;
  uint64_t updates_ = 0;
  uint64_t version_ = 0;
};

struct WorkerRoundResult {
  Vec delta;  // displacement over the round: theta_end - theta_start
  int steps_done = 0;
  double mean_loss = 0.0;
};

// H clipped inner steps from the scheduled model. `step0` is the worker's
// cumulative step count before the round; it keys gradient draws and the
// learning-rate schedule position.
WorkerRoundResult worker_round(const Workload& task, int worker,
                               const Vec& start_model, InnerOpt& inner,
                               const WorkerOptConfig& opt, uint64_t step0,
                               int steps);

// Average worker displacements and fold them into the outer model as one
// pseudo-gradient step (barrier methods).
void apply_averaged_deltas(Vec& model, Nesterov& outer,
                           const std::vector<Vec>& deltas);

// One fully synchronous step: every worker grads the same model, gradients
// are averaged and clipped, one global optimizer step is applied.
// Returns the mean minibatch loss.
double sync_sgd_step(const Workload& task, Vec& model, InnerOpt& global_opt,
                     const WorkerOptConfig& opt, uint64_t step);

// One barrier round of the local-SGD baseline: every worker runs its local
// steps from the shared outer model, displacements are averaged, and the
// outer Nesterov step is applied. steps_per_worker[i] == 0 skips worker i.
std::vector<WorkerRoundResult> diloco_round(
    const Workload& task, Vec& outer_model, Nesterov& outer,
    std::vector<InnerOpt>& inner, const WorkerOptConfig& opt,
    const std::vector<int>& steps_per_worker,
    const std::vector<uint64_t>& step0_per_worker);

}  // namespace halosim
