#include "halosim/runner.hpp"

#include <cmath>
#include <filesystem>

namespace halosim {

namespace {

void ensure_dir(const std::string& dir) {
  if (dir.empty()) return;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(Errc::io, "cannot create output directory " + dir);
}

RunResult execute(const RunConfig& cfg, const Trace& trace,
                  const std::string& out_dir) {
  const auto task = cfg.make_workload();
  ReplayOptions opts = cfg.replay_options();
  RunResult out;
  out.report = replay(trace, *task, cfg.strategy, cfg.worker_opt, opts,
                      &out.final_model);
  if (!out_dir.empty()) {
    out.report_path = out_dir + "/report.json";
    out.report.save(out.report_path);
    save_vec(out_dir + "/model.bin", out.final_model);
  }
  return out;
}

}  // namespace

RunResult run_config(const RunConfig& cfg, const std::string& out_dir) {
  ensure_dir(out_dir);
  const auto task = cfg.make_workload();
  Trace trace = generate_trace(cfg.cluster, cfg.strategy, cfg.stop,
                               task->samples_per_step(), cfg.hash_hex,
                               cfg.seed);
  RunResult out = execute(cfg, trace, out_dir);
  if (cfg.write_trace && !out_dir.empty()) {
    out.trace_path =
        out_dir + (cfg.gzip_trace ? "/trace.jsonl.gz" : "/trace.jsonl");
    trace.save(out.trace_path);
  }
  return out;
}

RunResult replay_from_file(const RunConfig& cfg, const std::string& trace_path,
                           const std::string& out_dir) {
  ensure_dir(out_dir);
  const Trace trace = Trace::load(trace_path);
  if (trace.header.config_hash != cfg.hash_hex)
    fail(Errc::config, "replay: trace was generated from config " +
                           trace.header.config_hash + ", not " + cfg.hash_hex);
  if (trace.header.seed != cfg.seed)
    fail(Errc::config, "replay: trace seed mismatch");
  return execute(cfg, trace, out_dir);
}

namespace {

SweepSummary run_variants(const std::string& config_path,
                          const std::string& axis,
                          const std::vector<std::string>& values,
                          const std::string& out_dir,
                          const std::string& csv_path) {
  ensure_dir(out_dir);
  std::vector<RunReport> reports;
  double target = std::nan("");
  bool has_target = false;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const RunConfig cfg = load_config(config_path, {axis + "=" + values[i]});
    if (cfg.has_target_loss) {
      target = cfg.target_loss;
      has_target = true;
    }
    std::string sub;
    if (!out_dir.empty()) {
      std::string label = values[i];
      for (char& c : label)
        if (c == '"' || c == '/' || c == ' ') c = '_';
      sub = out_dir + "/" + axis + "=" + label;
    }
    RunResult r = run_config(cfg, sub);
    reports.push_back(std::move(r.report));
  }
  SweepSummary summary = summarize_sweep(
      axis, values, reports, has_target ? target : std::nan(""));
  if (!csv_path.empty()) write_sweep_csv(csv_path, summary);
  return summary;
}

}  // namespace

SweepSummary compare_strategies(const std::string& config_path,
                                const std::vector<std::string>& presets,
                                const std::string& out_dir,
                                const std::string& csv_path) {
  std::vector<std::string> values;
  for (const std::string& p : presets) values.push_back('"' + p + '"');
  SweepSummary s =
      run_variants(config_path, "strategy", values, out_dir, csv_path);
  s.axis = "strategy";
  for (std::size_t i = 0; i < s.rows.size(); ++i) s.rows[i].value = presets[i];
  if (!csv_path.empty()) write_sweep_csv(csv_path, s);
  return s;
}

SweepSummary sweep_axis(const std::string& config_path, const std::string& axis,
                        const std::vector<std::string>& values,
                        const std::string& out_dir,
                        const std::string& csv_path) {
  return run_variants(config_path, axis, values, out_dir, csv_path);
}

}  // namespace halosim
