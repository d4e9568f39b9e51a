#pragma once

#include <memory>
#include <string>

#include "halosim/cluster.hpp"
#include "halosim/engine.hpp"
#include "halosim/strategies.hpp"
#include "halosim/workload.hpp"

namespace halosim {

enum class WorkloadKind { Quadratic, CharLm };

// Fully resolved run description: presets expanded, defaults filled. The
// canonical JSON body (sorted keys, fixed number formatting) is hashed and
// stamped into every artifact the run produces.
struct RunConfig {
  ClusterSpec cluster;
  StrategyConfig strategy;
  WorkerOptConfig worker_opt;
  WorkloadKind workload_kind = WorkloadKind::Quadratic;
  QuadraticSpec quadratic;
  CharLmSpec charlm;
  StopRule stop;
  uint64_t seed = 1;

  double target_loss = 0.0;
  bool has_target_loss = false;
  double loss_every_s = 10.0;
  uint64_t loss_every_updates = 50;
  bool retain_staleness = true;
  int replay_threads = 1;
  bool write_trace = false;
  bool gzip_trace = false;

  std::string canonical_json;
  std::string hash_hex;

  std::unique_ptr<Workload> make_workload() const;
  ReplayOptions replay_options() const;
};

// Parse, expand presets ("paper-default", "halos-paper", "async-paper",
// "diloco-paper", "diloco-dynupd-paper", "sync-sgd"), fill documented
// defaults, and check every invariant. Errors carry the offending field
// path. `overrides` are dotted-path assignments like
// "strategy.alpha=0.5" applied before resolution.
RunConfig load_config(const std::string& path,
                      const std::vector<std::string>& overrides = {});
RunConfig parse_config_text(const std::string& text,
                            const std::vector<std::string>& overrides = {});

}  // namespace halosim
