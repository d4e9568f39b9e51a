#include "halosim/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace halosim {

int ClusterSpec::region_index(const std::string& name) const {
  for (std::size_t i = 0; i < regions.size(); ++i)
    if (regions[i] == name) return static_cast<int>(i);
  fail(Errc::invalid_argument, "unknown region: " + name);
}

double ClusterSpec::s_fastest() const {
  double s = 0.0;
  for (const auto& w : workers) s = std::max(s, w.speed);
  if (!(s > 0.0)) fail(Errc::config, "cluster: no worker with positive speed");
  return s;
}

int ClusterSpec::lps_of_worker(int worker) const {
  for (std::size_t l = 0; l < lps_placement.size(); ++l)
    for (int w : lps_placement[l].workers)
      if (w == worker) return static_cast<int>(l);
  fail(Errc::config, "worker " + std::to_string(worker) + " not assigned to any LPS");
}

void ClusterSpec::validate() const {
  const std::size_t r = regions.size();
  if (r == 0) fail(Errc::config, "cluster.regions: empty");
  if (bandwidth_gbps.size() != r)
    fail(Errc::config, "cluster.bandwidth_gbps: wrong row count");
  if (intra_gbps.size() != r)
    fail(Errc::config, "cluster.intra_gbps: wrong length");
  for (std::size_t i = 0; i < r; ++i) {
    if (bandwidth_gbps[i].size() != r)
      fail(Errc::config, "cluster.bandwidth_gbps: row " + std::to_string(i) +
                             " has wrong length");
    for (std::size_t j = 0; j < r; ++j) {
      if (!(bandwidth_gbps[i][j] > 0.0))
        fail(Errc::config, "cluster.bandwidth_gbps[" + std::to_string(i) + "][" +
                               std::to_string(j) + "]: must be positive");
      if (bandwidth_gbps[i][j] != bandwidth_gbps[j][i])
        fail(Errc::config, "cluster.bandwidth_gbps: not symmetric at (" +
                               std::to_string(i) + "," + std::to_string(j) + ")");
    }
    if (bandwidth_gbps[i][i] != intra_gbps[i])
      fail(Errc::config, "cluster.bandwidth_gbps: diagonal entry " +
                             std::to_string(i) + " differs from intra_gbps");
  }
  if (!latency_s.empty()) {
    if (latency_s.size() != r)
      fail(Errc::config, "cluster.latency_s: wrong row count");
    for (std::size_t i = 0; i < r; ++i) {
      if (latency_s[i].size() != r)
        fail(Errc::config, "cluster.latency_s: row " + std::to_string(i) +
                               " has wrong length");
      for (double v : latency_s[i])
        if (!(v >= 0.0)) fail(Errc::config, "cluster.latency_s: negative entry");
    }
  }
  if (workers.empty()) fail(Errc::config, "cluster.workers: empty");
  for (std::size_t w = 0; w < workers.size(); ++w) {
    if (workers[w].region < 0 || workers[w].region >= static_cast<int>(r))
      fail(Errc::config, "cluster.workers[" + std::to_string(w) +
                             "].region: out of range");
    if (!(workers[w].speed > 0.0))
      fail(Errc::config, "cluster.workers[" + std::to_string(w) +
                             "].speed: must be positive");
  }
  if (gps_region < 0 || gps_region >= static_cast<int>(r))
    fail(Errc::config, "cluster.gps_region: out of range");
  if (!(profiled_step_s > 0.0))
    fail(Errc::config, "cluster.profiled_step_s: must be positive");
  if (message_bytes == 0)
    fail(Errc::config, "cluster.message_bytes: must be positive");

  if (lps_placement.empty()) fail(Errc::config, "cluster.lps_placement: empty");
  std::vector<int> owner(workers.size(), -1);
  for (std::size_t l = 0; l < lps_placement.size(); ++l) {
    const auto& p = lps_placement[l];
    if (p.region < 0 || p.region >= static_cast<int>(r))
      fail(Errc::config, "cluster.lps_placement[" + std::to_string(l) +
                             "].region: out of range");
    if (p.workers.empty())
      fail(Errc::config, "cluster.lps_placement[" + std::to_string(l) +
                             "]: no workers assigned");
    for (int w : p.workers) {
      if (w < 0 || w >= static_cast<int>(workers.size()))
        fail(Errc::config, "cluster.lps_placement[" + std::to_string(l) +
                               "]: worker index out of range");
      if (owner[static_cast<std::size_t>(w)] != -1)
        fail(Errc::config, "cluster.lps_placement: worker " + std::to_string(w) +
                               " assigned to more than one LPS");
      owner[static_cast<std::size_t>(w)] = static_cast<int>(l);
    }
  }
  for (std::size_t w = 0; w < owner.size(); ++w)
    if (owner[w] == -1)
      fail(Errc::config, "cluster.lps_placement: worker " + std::to_string(w) +
                             " not assigned to any LPS");
}

std::vector<std::string> ClusterSpec::consistency_warnings() const {
  std::vector<std::string> out;
  std::set<std::size_t> sizes;
  for (const auto& p : lps_placement) sizes.insert(p.workers.size());
  if (sizes.size() > 1) {
    out.push_back(
        "unequal worker counts per LPS; consider consistent grouping "
        "(equal-size groups) to keep per-LPS update progress comparable");
  }
  return out;
}

double p2p_time(int src_region, int dst_region, uint64_t bytes,
                const ClusterSpec& spec) {
  const int r = static_cast<int>(spec.regions.size());
  if (src_region < 0 || src_region >= r || dst_region < 0 || dst_region >= r)
    fail(Errc::invalid_argument, "p2p_time: unknown region index");
  const double bw = src_region == dst_region
                        ? spec.intra_gbps[static_cast<std::size_t>(src_region)]
                        : spec.bandwidth_gbps[static_cast<std::size_t>(
                              src_region)][static_cast<std::size_t>(dst_region)];
  double latency = 0.0;
  if (!spec.latency_s.empty())
    latency = spec.latency_s[static_cast<std::size_t>(src_region)]
                            [static_cast<std::size_t>(dst_region)];
  return latency + 8.0 * static_cast<double>(bytes) / (bw * 1e9);
}

namespace {

// Bottleneck bandwidth of the worker ring induced by a region ordering.
// Consecutive same-region workers use the region's intra bandwidth.
double ring_bottleneck(const std::vector<int>& order,
                       const std::vector<std::size_t>& count,
                       const ClusterSpec& spec) {
  double b = std::numeric_limits<double>::infinity();
  const std::size_t n = order.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto a = static_cast<std::size_t>(order[i]);
    const auto c = static_cast<std::size_t>(order[(i + 1) % n]);
    if (n > 1 || a != c) b = std::min(b, spec.bandwidth_gbps[a][c]);
    if (count[a] > 1) b = std::min(b, spec.intra_gbps[a]);
  }
  return b;
}

}  // namespace

double ring_allreduce_time(const std::vector<int>& participant_regions,
                           uint64_t bytes, const ClusterSpec& spec) {
  if (participant_regions.empty())
    fail(Errc::invalid_argument, "ring_allreduce_time: empty participant list");
  const auto n = static_cast<double>(participant_regions.size());
  if (participant_regions.size() == 1) return 0.0;

  std::vector<std::size_t> count(spec.regions.size(), 0);
  for (int r : participant_regions) {
    if (r < 0 || r >= static_cast<int>(spec.regions.size()))
      fail(Errc::invalid_argument, "ring_allreduce_time: unknown region index");
    ++count[static_cast<std::size_t>(r)];
  }
  std::vector<int> present;
  for (std::size_t r = 0; r < count.size(); ++r)
    if (count[r] > 0) present.push_back(static_cast<int>(r));

  double best = 0.0;
  if (present.size() == 1) {
    best = spec.intra_gbps[static_cast<std::size_t>(present[0])];
  } else {
    // Exhaustive over region orderings with the first region fixed
    // (rotations are equivalent; reflections share the same bottleneck).
    std::vector<int> order(present.begin() + 1, present.end());
    std::sort(order.begin(), order.end());
    do {
      std::vector<int> ring;
      ring.push_back(present[0]);
      ring.insert(ring.end(), order.begin(), order.end());
      best = std::max(best, ring_bottleneck(ring, count, spec));
    } while (std::next_permutation(order.begin(), order.end()));
  }

  const double c_bits = 8.0 * static_cast<double>(bytes);
  return 2.0 * (n - 1.0) * c_bits / (n * best * 1e9);
}

double compute_time(int local_steps, double speed, const ClusterSpec& spec) {
  if (local_steps < 1)
    fail(Errc::invalid_argument, "compute_time: local_steps must be >= 1");
  if (!(speed > 0.0))
    fail(Errc::invalid_argument, "compute_time: speed must be positive");
  return static_cast<double>(local_steps) * spec.profiled_step_s *
         (spec.s_fastest() / speed);
}

int dyn_local_steps(int h_max, double speed, double s_fastest) {
  if (h_max < 1)
    fail(Errc::invalid_argument, "dyn_local_steps: h_max must be >= 1");
  if (!(speed > 0.0) || !(s_fastest > 0.0))
    fail(Errc::invalid_argument, "dyn_local_steps: speeds must be positive");
  const long r = std::lround(static_cast<double>(h_max) * speed / s_fastest);
  return static_cast<int>(std::max(1L, r));
}

ClusterSpec paper_default_cluster() {
  ClusterSpec s;
  s.regions = {"R1", "R2", "R3", "R4"};
  s.bandwidth_gbps = {
      {100.0, 0.537, 0.935, 0.202},
      {0.537, 100.0, 0.386, 0.117},
      {0.935, 0.386, 100.0, 0.127},
      {0.202, 0.117, 0.127, 100.0},
  };
  s.intra_gbps = {100.0, 100.0, 100.0, 100.0};
  s.latency_s.assign(4, std::vector<double>(4, 0.0));
  const double speeds[4][4] = {
      {10.0, 9.1, 3.8, 2.6},
      {9.4, 8.0, 6.3, 5.8},
      {9.9, 5.7, 2.1, 1.5},
      {9.1, 8.7, 5.8, 1.2},
  };
  for (int r = 0; r < 4; ++r) {
    LpsPlacement p;
    p.region = r;
    for (int k = 0; k < 4; ++k) {
      p.workers.push_back(static_cast<int>(s.workers.size()));
      s.workers.push_back({r, speeds[r][k]});
    }
    s.lps_placement.push_back(std::move(p));
  }
  s.gps_region = 0;
  s.profiled_step_s = 0.2384;
  s.message_bytes = 140000000;  // 70M parameters at 2 bytes each
  return s;
}

}  // namespace halosim
