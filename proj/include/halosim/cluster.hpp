#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "halosim/common.hpp"

namespace halosim {

struct WorkerSpec {
  int region = 0;       // index into ClusterSpec::regions
  double speed = 1.0;   // relative speed; highest value defines s_fastest
};

struct LpsPlacement {
  int region = 0;
  std::vector<int> workers;  // worker indices served by this LPS
};

// Cluster topology plus everything the timing formulas need.
struct ClusterSpec {
  std::vector<std::string> regions;
  std::vector<std::vector<double>> bandwidth_gbps;  // symmetric; diag = intra
  std::vector<double> intra_gbps;                   // per region
  std::vector<std::vector<double>> latency_s;       // per pair, default zeros
  std::vector<WorkerSpec> workers;
  std::vector<LpsPlacement> lps_placement;
  int gps_region = 0;
  double profiled_step_s = 0.0;  // one local step on the fastest worker
  uint64_t message_bytes = 0;    // serialized model / pseudo-gradient size

  int region_index(const std::string& name) const;
  double s_fastest() const;
  int lps_of_worker(int worker) const;

  // Throws SimError(Errc::config) describing the first violated invariant.
  void validate() const;

  // Non-fatal setup issues, e.g. unequal worker counts per LPS, which is
  // known to destabilize hierarchical runs tuned for balanced groups.
  std::vector<std::string> consistency_warnings() const;
};

// Point-to-point transfer time: latency + bytes / bandwidth. Same-region
// transfers use the intra-region bandwidth.
double p2p_time(int src_region, int dst_region, uint64_t bytes,
                const ClusterSpec& spec);

// Ring all-reduce over per-worker participant regions:
// 2*(N-1)/N * C / B with B the bottleneck bandwidth of the best ring.
// Rings are enumerated at region level with same-region workers adjacent.
double ring_allreduce_time(const std::vector<int>& participant_regions,
                           uint64_t bytes, const ClusterSpec& spec);

// H local steps scaled by relative speed: H * profiled * s_fastest / speed.
double compute_time(int local_steps, double speed, const ClusterSpec& spec);

// Per-worker step count so all workers finish in about the same wall time:
// max(1, round(h_max * speed / s_fastest)).
int dyn_local_steps(int h_max, double speed, double s_fastest);

// Tables 4-6 style default: 4 regions, 16 heterogeneous workers, one LPS
// per region, GPS in the first region, 140 MB messages, 238.4 ms steps.
ClusterSpec paper_default_cluster();

}  // namespace halosim
