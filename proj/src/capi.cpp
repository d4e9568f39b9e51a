#include "halosim/capi.h"

#include <cstring>
#include <sstream>
#include <string>
#include <vector>

#include "halosim/analysis.hpp"
#include "halosim/config.hpp"
#include "halosim/runner.hpp"

namespace {

thread_local std::string tl_error;

void set_error(const std::string& msg) { tl_error = msg; }

int code_of(halosim::Errc c) {
  switch (c) {
    case halosim::Errc::invalid_argument: return HS_ERR_INVALID;
    case halosim::Errc::config: return HS_ERR_CONFIG;
    case halosim::Errc::numeric: return HS_ERR_NUMERIC;
    case halosim::Errc::io: return HS_ERR_IO;
    case halosim::Errc::diverged: return HS_ERR_DIVERGED;
  }
  return HS_ERR_INVALID;
}

template <typename Fn>
int guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const halosim::SimError& e) {
    set_error(e.what());
    return code_of(e.code());
  } catch (const std::exception& e) {
    set_error(e.what());
    return HS_ERR_INVALID;
  }
}

std::vector<std::string> to_overrides(const char* const* overrides, int n) {
  std::vector<std::string> v;
  for (int i = 0; i < n; ++i) {
    if (!overrides || !overrides[i]) {
      halosim::fail(halosim::Errc::invalid_argument, "null override entry");
    }
    v.emplace_back(overrides[i]);
  }
  return v;
}

std::vector<std::string> split_csv(const char* csv) {
  std::vector<std::string> out;
  if (!csv) return out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

}  // namespace

struct hs_config {
  halosim::RunConfig cfg;
};

struct hs_result {
  halosim::RunReport report;
};

extern "C" {

const char* hs_version(void) { return "halosim 1.0.0"; }

const char* hs_last_error(void) { return tl_error.c_str(); }

int hs_config_load(const char* path, const char* const* overrides,
                   int n_overrides, hs_config** out) {
  return guarded([&]() {
    if (!path || !out) {
      set_error("null argument");
      return HS_ERR_INVALID;
    }
    auto* h = new hs_config{halosim::load_config(
        path, to_overrides(overrides, n_overrides))};
    *out = h;
    return HS_OK;
  });
}

int hs_config_parse(const char* json_text, const char* const* overrides,
                    int n_overrides, hs_config** out) {
  return guarded([&]() {
    if (!json_text || !out) {
      set_error("null argument");
      return HS_ERR_INVALID;
    }
    auto* h = new hs_config{halosim::parse_config_text(
        json_text, to_overrides(overrides, n_overrides))};
    *out = h;
    return HS_OK;
  });
}

int hs_config_hash(const hs_config* cfg, char* buf, size_t buflen) {
  return guarded([&]() {
    if (!cfg || !buf) {
      set_error("null argument");
      return HS_ERR_INVALID;
    }
    if (buflen < cfg->cfg.hash_hex.size() + 1) {
      set_error("buffer too small");
      return HS_ERR_INVALID;
    }
    std::memcpy(buf, cfg->cfg.hash_hex.c_str(), cfg->cfg.hash_hex.size() + 1);
    return HS_OK;
  });
}

void hs_config_free(hs_config* cfg) { delete cfg; }

int hs_run(const hs_config* cfg, const char* out_dir, hs_result** out) {
  return guarded([&]() {
    if (!cfg || !out) {
      set_error("null argument");
      return HS_ERR_INVALID;
    }
    halosim::RunResult r =
        halosim::run_config(cfg->cfg, out_dir ? out_dir : "");
    auto* h = new hs_result{std::move(r.report)};
    *out = h;
    if (h->report.diverged) {
      set_error("run diverged at event " +
                std::to_string(h->report.diverged_seq));
      return HS_ERR_DIVERGED;
    }
    return HS_OK;
  });
}

int hs_replay(const hs_config* cfg, const char* trace_path,
              const char* out_dir, hs_result** out) {
  return guarded([&]() {
    if (!cfg || !trace_path || !out) {
      set_error("null argument");
      return HS_ERR_INVALID;
    }
    halosim::RunResult r = halosim::replay_from_file(cfg->cfg, trace_path,
                                                     out_dir ? out_dir : "");
    auto* h = new hs_result{std::move(r.report)};
    *out = h;
    if (h->report.diverged) {
      set_error("run diverged at event " +
                std::to_string(h->report.diverged_seq));
      return HS_ERR_DIVERGED;
    }
    return HS_OK;
  });
}

int hs_compare(const char* config_path, const char* presets_csv,
               const char* out_dir, const char* csv_path) {
  return guarded([&]() {
    if (!config_path || !csv_path) {
      set_error("null argument");
      return HS_ERR_INVALID;
    }
    std::vector<std::string> presets = split_csv(presets_csv);
    if (presets.empty())
      presets = {"halos-paper", "async-paper", "diloco-dynupd-paper",
                 "diloco-paper"};
    halosim::compare_strategies(config_path, presets,
                                out_dir ? out_dir : "", csv_path);
    return HS_OK;
  });
}

int hs_sweep(const char* config_path, const char* axis, const char* values_csv,
             const char* out_dir, const char* csv_path) {
  return guarded([&]() {
    if (!config_path || !axis || !values_csv || !csv_path) {
      set_error("null argument");
      return HS_ERR_INVALID;
    }
    const std::vector<std::string> values = split_csv(values_csv);
    if (values.empty()) {
      set_error("empty sweep value list");
      return HS_ERR_INVALID;
    }
    halosim::sweep_axis(config_path, axis, values, out_dir ? out_dir : "",
                        csv_path);
    return HS_OK;
  });
}

int hs_result_diverged(const hs_result* r) {
  return r && r->report.diverged ? 1 : 0;
}

double hs_result_final_loss(const hs_result* r) {
  return r ? r->report.final_loss : 0.0;
}

double hs_result_end_time(const hs_result* r) {
  return r ? r->report.end_time : 0.0;
}

double hs_result_total_samples(const hs_result* r) {
  return r ? r->report.total_samples : 0.0;
}

uint64_t hs_result_trace_hash(const hs_result* r) {
  return r ? r->report.trace_hash : 0;
}

uint64_t hs_result_model_hash(const hs_result* r) {
  return r ? r->report.final_model_hash : 0;
}

int hs_result_num_workers(const hs_result* r) {
  return r ? static_cast<int>(r->report.breakdown.size()) : 0;
}

int hs_result_time_to_loss(const hs_result* r, double target, double* out) {
  return guarded([&]() {
    if (!r || !out) {
      set_error("null argument");
      return HS_ERR_INVALID;
    }
    const auto t = halosim::time_to_loss(r->report, target);
    if (!t) {
      set_error(r->report.diverged ? "run diverged before reaching the target"
                                   : "target loss never reached");
      return HS_ERR_NOT_REACHED;
    }
    *out = *t;
    return HS_OK;
  });
}

int hs_result_samples_to_loss(const hs_result* r, double target, double* out) {
  return guarded([&]() {
    if (!r || !out) {
      set_error("null argument");
      return HS_ERR_INVALID;
    }
    const auto t = halosim::samples_to_loss(r->report, target);
    if (!t) {
      set_error(r->report.diverged ? "run diverged before reaching the target"
                                   : "target loss never reached");
      return HS_ERR_NOT_REACHED;
    }
    *out = *t;
    return HS_OK;
  });
}

int hs_result_breakdown(const hs_result* r, int worker, double* compute,
                        double* comm, double* stall) {
  return guarded([&]() {
    if (!r || !compute || !comm || !stall) {
      set_error("null argument");
      return HS_ERR_INVALID;
    }
    if (worker < 0 ||
        worker >= static_cast<int>(r->report.breakdown.size())) {
      set_error("worker index out of range");
      return HS_ERR_INVALID;
    }
    const auto& b = r->report.breakdown[static_cast<std::size_t>(worker)];
    *compute = b.compute_frac;
    *comm = b.comm_frac;
    *stall = b.stall_frac;
    return HS_OK;
  });
}

int hs_result_staleness(const hs_result* r, double* d_g, double* d_l) {
  return guarded([&]() {
    if (!r || !d_g || !d_l) {
      set_error("null argument");
      return HS_ERR_INVALID;
    }
    if (!r->report.staleness) {
      set_error("replay ran without snapshot retention");
      return HS_ERR_INVALID;
    }
    *d_g = r->report.staleness->d_g_max;
    *d_l = r->report.staleness->d_l_max;
    return HS_OK;
  });
}

void hs_result_free(hs_result* r) { delete r; }

int hs_p2p_time(const hs_config* cfg, const char* src_region,
                const char* dst_region, uint64_t bytes, double* out) {
  return guarded([&]() {
    if (!cfg || !src_region || !dst_region || !out) {
      set_error("null argument");
      return HS_ERR_INVALID;
    }
    const auto& c = cfg->cfg.cluster;
    *out = halosim::p2p_time(c.region_index(src_region),
                             c.region_index(dst_region), bytes, c);
    return HS_OK;
  });
}

int hs_ring_allreduce_time(const hs_config* cfg, uint64_t bytes, double* out) {
  return guarded([&]() {
    if (!cfg || !out) {
      set_error("null argument");
      return HS_ERR_INVALID;
    }
    const auto& c = cfg->cfg.cluster;
    std::vector<int> regions;
    for (const auto& w : c.workers) regions.push_back(w.region);
    *out = halosim::ring_allreduce_time(regions, bytes, c);
    return HS_OK;
  });
}

int hs_compute_time(const hs_config* cfg, int local_steps, double speed,
                    double* out) {
  return guarded([&]() {
    if (!cfg || !out) {
      set_error("null argument");
      return HS_ERR_INVALID;
    }
    *out = halosim::compute_time(local_steps, speed, cfg->cfg.cluster);
    return HS_OK;
  });
}

int hs_dyn_local_steps(int h_max, double speed, double s_fastest, int* out) {
  return guarded([&]() {
    if (!out) {
      set_error("null argument");
      return HS_ERR_INVALID;
    }
    *out = halosim::dyn_local_steps(h_max, speed, s_fastest);
    return HS_OK;
  });
}

int hs_timing_breakdown(const hs_config* cfg, double* compute, double* comm,
                        double* stall, int max_workers, int* n_workers) {
  return guarded([&]() {
    if (!cfg || !compute || !comm || !stall || !n_workers) {
      set_error("null argument");
      return HS_ERR_INVALID;
    }
    const halosim::RunConfig& rc = cfg->cfg;
    const auto task = rc.make_workload();
    const halosim::Trace trace =
        halosim::generate_trace(rc.cluster, rc.strategy, rc.stop,
                                task->samples_per_step(), rc.hash_hex, rc.seed);
    const auto fr = halosim::runtime_breakdown(trace);
    *n_workers = static_cast<int>(fr.size());
    for (int i = 0; i < max_workers && i < *n_workers; ++i) {
      compute[i] = fr[static_cast<std::size_t>(i)].compute_frac;
      comm[i] = fr[static_cast<std::size_t>(i)].comm_frac;
      stall[i] = fr[static_cast<std::size_t>(i)].stall_frac;
    }
    return HS_OK;
  });
}

int hs_theorem_bound(double f0_minus_fstar, double eta0, double eta_min,
                     long steps, double beta_g, double beta_l,
                     double smoothness, double grad_bound, double sigma2,
                     double dg2, double dl2, int squared_variant, double* out) {
  return guarded([&]() {
    if (!out) {
      set_error("null argument");
      return HS_ERR_INVALID;
    }
    halosim::BoundInputs b;
    b.f0_minus_fstar = f0_minus_fstar;
    b.eta0 = eta0;
    b.eta_min = eta_min;
    b.steps = steps;
    b.beta_g = beta_g;
    b.beta_l = beta_l;
    b.smoothness = smoothness;
    b.grad_bound = grad_bound;
    b.sigma2 = sigma2;
    b.dg2 = dg2;
    b.dl2 = dl2;
    *out = halosim::theorem_bound(b, squared_variant != 0);
    return HS_OK;
  });
}

int hs_beta_g_tradeoff(double x, double* out) {
  return guarded([&]() {
    if (!out) {
      set_error("null argument");
      return HS_ERR_INVALID;
    }
    *out = halosim::beta_g_tradeoff(x);
    return HS_OK;
  });
}

}  // extern "C"
