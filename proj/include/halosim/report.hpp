#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace halosim {

struct LossSample {
  double t = 0.0;        // simulated seconds
  double samples = 0.0;  // cumulative training samples consumed
  double loss = 0.0;     // full objective at the global model
};

struct WorkerBreakdown {
  double compute_frac = 0.0;
  double comm_frac = 0.0;
  double stall_frac = 0.0;
};

struct StalenessEvent {
  uint64_t seq = 0;
  int tier = 0;  // 0 = global server, 1 = local server
  double value = 0.0;
};

struct StalenessStats {
  double d_g_max = 0.0;
  double d_l_max = 0.0;
  std::vector<StalenessEvent> series;
};

struct RunReport {
  std::string config_hash;
  uint64_t seed = 0;
  std::string strategy;
  std::vector<LossSample> losses;
  std::vector<WorkerBreakdown> breakdown;
  std::optional<StalenessStats> staleness;
  uint64_t trace_hash = 0;
  uint64_t final_model_hash = 0;
  double final_loss = 0.0;
  double end_time = 0.0;
  double total_samples = 0.0;
  bool diverged = false;
  uint64_t diverged_seq = 0;

  std::string to_json() const;
  static RunReport from_json(const std::string& text);
  void save(const std::string& path) const;
  static RunReport load(const std::string& path);
};

}  // namespace halosim
