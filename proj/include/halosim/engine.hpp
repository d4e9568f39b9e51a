#pragma once

#include <cmath>
#include <memory>

#include "halosim/cluster.hpp"
#include "halosim/report.hpp"
#include "halosim/strategies.hpp"
#include "halosim/trace.hpp"
#include "halosim/workload.hpp"

namespace halosim {

// Stop assigning new worker rounds once any configured budget is reached;
// in-flight work drains so no update is lost.
struct StopRule {
  double time_s = 0.0;     // simulated seconds; 0 disables
  uint64_t steps = 0;      // total inner steps across workers; 0 disables
  double samples = 0.0;    // total training samples; 0 disables

  bool enabled() const { return time_s > 0.0 || steps > 0 || samples > 0.0; }
};

// Phase one: timing only. The event order depends on the cluster, the
// strategy's schedule parameters and the stop rule, never on numerics, so
// one trace can be replayed against any workload of matching worker count.
Trace generate_trace(const ClusterSpec& cluster, const StrategyConfig& strategy,
                     const StopRule& stop, double samples_per_step,
                     const std::string& config_hash, uint64_t seed);

struct ReplayOptions {
  bool retain_staleness = true;
  int threads = 1;  // worker-round computations may run on this many threads
  double stop_at_loss = std::nan("");  // truncate once full loss <= target
  double loss_every_s = 10.0;
  uint64_t loss_every_updates = 50;
};

// Phase two: execute the numeric updates in trace order. The trace is
// structurally validated first. `final_model_out` receives the final global
// model when non-null.
RunReport replay(const Trace& trace, const Workload& task,
                 const StrategyConfig& strategy, const WorkerOptConfig& wopt,
                 const ReplayOptions& opts, Vec* final_model_out = nullptr);

// Partition each worker's timeline into compute / blocked-on-transfer /
// barrier-stall fractions, derived purely from the trace.
std::vector<WorkerBreakdown> runtime_breakdown(const Trace& trace);

// Empirical staleness bounds recorded during replay. Throws if the replay
// ran without snapshot retention.
StalenessStats measure_staleness(const RunReport& report);

}  // namespace halosim
