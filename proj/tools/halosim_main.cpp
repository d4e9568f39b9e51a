// Command-line front end. Talks to the core exclusively through the C API.

#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "halosim/capi.h"

namespace {

int exit_code_of(int hs_status) {
  switch (hs_status) {
    case HS_OK: return 0;
    case HS_ERR_DIVERGED: return 2;
    case HS_ERR_CONFIG: return 3;
    case HS_ERR_IO: return 4;
    default: return 1;
  }
}

int report_error(int status) {
  std::fprintf(stderr, "error: %s\n", hs_last_error());
  return exit_code_of(status);
}

std::vector<const char*> c_strs(const std::vector<std::string>& v) {
  std::vector<const char*> out;
  for (const auto& s : v) out.push_back(s.c_str());
  return out;
}

std::string default_out_dir() {
  const char* env = std::getenv("HALOSIM_OUT");
  return env ? env : "out";
}

void print_summary(const hs_result* res, double target, bool has_target) {
  char hash[32];
  std::printf("final_loss      %.9g\n", hs_result_final_loss(res));
  std::printf("sim_time_s      %.6f\n", hs_result_end_time(res));
  std::printf("samples         %.0f\n", hs_result_total_samples(res));
  std::printf("trace_hash      %016llx\n",
              static_cast<unsigned long long>(hs_result_trace_hash(res)));
  std::printf("model_hash      %016llx\n",
              static_cast<unsigned long long>(hs_result_model_hash(res)));
  std::printf("diverged        %s\n", hs_result_diverged(res) ? "yes" : "no");
  (void)hash;
  if (has_target) {
    double ttl = 0.0;
    if (hs_result_time_to_loss(res, target, &ttl) == HS_OK)
      std::printf("time_to_loss    %.6f\n", ttl);
    else
      std::printf("time_to_loss    not reached (%s)\n", hs_last_error());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"trace-driven simulator for geo-distributed training strategies"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = default_out_dir();
  std::string trace_path;
  std::vector<std::string> overrides;
  double target = 0.0;
  bool has_target = false;

  auto add_common = [&](CLI::App* cmd, bool need_config = true) {
    if (need_config)
      cmd->add_option("-c,--config", config_path, "run configuration file")
          ->required();
    cmd->add_option("-o,--out", out_dir, "output directory");
    cmd->add_option("-s,--set", overrides,
                    "config override, dotted path (strategy.alpha=0.5)");
  };

  auto* run_cmd = app.add_subcommand("run", "generate a trace and execute it");
  add_common(run_cmd);
  auto* target_opt =
      run_cmd->add_option("--target-loss", target, "report time-to-loss");

  auto* replay_cmd =
      app.add_subcommand("replay", "re-execute a previously written trace");
  add_common(replay_cmd);
  replay_cmd->add_option("-t,--trace", trace_path, "trace file")->required();

  std::string presets_csv;
  auto* compare_cmd = app.add_subcommand(
      "compare", "run each strategy preset and write a comparison CSV");
  add_common(compare_cmd);
  compare_cmd->add_option("--strategies", presets_csv,
                          "comma-separated presets (default: the four "
                          "local-SGD strategies)");

  std::string axis, values_csv;
  auto* sweep_cmd =
      app.add_subcommand("sweep", "run the config across an axis of values");
  add_common(sweep_cmd);
  sweep_cmd->add_option("--axis", axis, "dotted config key")->required();
  sweep_cmd->add_option("--values", values_csv, "comma-separated values")
      ->required();

  auto* breakdown_cmd = app.add_subcommand(
      "breakdown", "timing-only per-worker runtime fractions");
  add_common(breakdown_cmd);

  double f0 = 1.0, eta0 = 0.0, eta_min = 0.0, beta_g = 0.5, beta_l = 0.9;
  double smoothness = 1.0, grad_bound = 0.0, sigma2 = 0.0, dg2 = 0.0, dl2 = 0.0;
  long steps = 1;
  bool squared_variant = false;
  auto* bound_cmd =
      app.add_subcommand("bound", "evaluate the convergence-rate bound");
  bound_cmd->add_option("--f0", f0, "F(theta_0) - F(theta*)")->required();
  bound_cmd->add_option("--eta0", eta0, "largest learning rate")->required();
  bound_cmd->add_option("--eta-min", eta_min, "smallest learning rate")
      ->required();
  bound_cmd->add_option("--steps", steps, "horizon T")->required();
  bound_cmd->add_option("--beta-g", beta_g, "global momentum");
  bound_cmd->add_option("--beta-l", beta_l, "local momentum");
  bound_cmd->add_option("--smoothness", smoothness, "L");
  bound_cmd->add_option("--grad-bound", grad_bound, "G");
  bound_cmd->add_option("--sigma2", sigma2, "heterogeneity variance");
  bound_cmd->add_option("--dg2", dg2, "squared global staleness bound");
  bound_cmd->add_option("--dl2", dl2, "squared local staleness bound");
  bound_cmd->add_flag("--squared-variant", squared_variant,
                      "use the (1-beta_g^2) denominator form");

  CLI11_PARSE(app, argc, argv);
  has_target = target_opt->count() > 0;

  const auto ov = c_strs(overrides);

  if (run_cmd->parsed() || replay_cmd->parsed()) {
    hs_config* cfg = nullptr;
    int st = hs_config_load(config_path.c_str(), ov.data(),
                            static_cast<int>(ov.size()), &cfg);
    if (st != HS_OK) return report_error(st);

    hs_result* res = nullptr;
    st = run_cmd->parsed()
             ? hs_run(cfg, out_dir.c_str(), &res)
             : hs_replay(cfg, trace_path.c_str(), out_dir.c_str(), &res);
    if (st != HS_OK && st != HS_ERR_DIVERGED) {
      hs_config_free(cfg);
      return report_error(st);
    }
    if (st == HS_ERR_DIVERGED)
      std::fprintf(stderr, "warning: %s\n", hs_last_error());
    print_summary(res, target, has_target);
    hs_result_free(res);
    hs_config_free(cfg);
    return exit_code_of(st);
  }

  if (compare_cmd->parsed()) {
    const std::string csv = out_dir + "/compare.csv";
    const int st =
        hs_compare(config_path.c_str(),
                   presets_csv.empty() ? nullptr : presets_csv.c_str(),
                   out_dir.c_str(), csv.c_str());
    if (st != HS_OK) return report_error(st);
    std::printf("wrote %s\n", csv.c_str());
    return 0;
  }

  if (sweep_cmd->parsed()) {
    const std::string csv = out_dir + "/sweep.csv";
    const int st = hs_sweep(config_path.c_str(), axis.c_str(),
                            values_csv.c_str(), out_dir.c_str(), csv.c_str());
    if (st != HS_OK) return report_error(st);
    std::printf("wrote %s\n", csv.c_str());
    return 0;
  }

  if (breakdown_cmd->parsed()) {
    hs_config* cfg = nullptr;
    int st = hs_config_load(config_path.c_str(), ov.data(),
                            static_cast<int>(ov.size()), &cfg);
    if (st != HS_OK) return report_error(st);
    std::vector<double> compute(1024), comm(1024), stall(1024);
    int n = 0;
    st = hs_timing_breakdown(cfg, compute.data(), comm.data(), stall.data(),
                             1024, &n);
    hs_config_free(cfg);
    if (st != HS_OK) return report_error(st);
    double mc = 0.0, mm = 0.0, ms = 0.0;
    std::printf("%-8s %10s %10s %10s\n", "worker", "compute", "comm", "stall");
    for (int i = 0; i < n; ++i) {
      std::printf("w%-7d %10.4f %10.4f %10.4f\n", i, compute[i], comm[i],
                  stall[i]);
      mc += compute[i];
      mm += comm[i];
      ms += stall[i];
    }
    if (n > 0)
      std::printf("%-8s %10.4f %10.4f %10.4f\n", "mean", mc / n, mm / n,
                  ms / n);
    return 0;
  }

  if (bound_cmd->parsed()) {
    double value = 0.0;
    const int st = hs_theorem_bound(f0, eta0, eta_min, steps, beta_g, beta_l,
                                    smoothness, grad_bound, sigma2, dg2, dl2,
                                    squared_variant ? 1 : 0, &value);
    if (st != HS_OK) return report_error(st);
    std::printf("%.12g\n", value);
    return 0;
  }

  return 0;
}
