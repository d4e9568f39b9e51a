#pragma once

#include <string>
#include <vector>

#include "halosim/analysis.hpp"
#include "halosim/config.hpp"

namespace halosim {

struct RunResult {
  RunReport report;
  Vec final_model;
  std::string report_path;
  std::string trace_path;  // empty unless the trace was written
};

// generate -> replay -> write report.json and model.bin (and the trace when
// requested) under out_dir. Artifacts are written atomically. Pass an empty
// out_dir to skip artifacts.
RunResult run_config(const RunConfig& cfg, const std::string& out_dir);

// Re-execute a previously generated trace. Refuses a trace whose embedded
// config hash differs from cfg.
RunResult replay_from_file(const RunConfig& cfg, const std::string& trace_path,
                           const std::string& out_dir);

// Run the same cluster/workload/budget under each strategy preset and write
// one report per strategy plus a comparison CSV.
SweepSummary compare_strategies(const std::string& config_path,
                                const std::vector<std::string>& presets,
                                const std::string& out_dir,
                                const std::string& csv_path);

// Run the config once per value of a dotted config key and write the
// summary CSV. Values are JSON scalars.
SweepSummary sweep_axis(const std::string& config_path, const std::string& axis,
                        const std::vector<std::string>& values,
                        const std::string& out_dir,
                        const std::string& csv_path);

}  // namespace halosim
