#include "halosim/config.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "json.hpp"

namespace halosim {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& path, const std::string& why) {
  fail(Errc::config, path + ": " + why);
}

double get_num(const json& j, const std::string& path) {
  if (!j.is_number()) bad(path, "expected a number");
  return j.get<double>();
}

long get_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) bad(path, "expected an integer");
  return j.get<long>();
}

bool get_bool(const json& j, const std::string& path) {
  if (!j.is_boolean()) bad(path, "expected a boolean");
  return j.get<bool>();
}

std::string get_str(const json& j, const std::string& path) {
  if (!j.is_string()) bad(path, "expected a string");
  return j.get<std::string>();
}

json cluster_preset_paper_default() {
  json c;
  c["regions"] = {"R1", "R2", "R3", "R4"};
  c["bandwidth_gbps"] = {{100.0, 0.537, 0.935, 0.202},
                         {0.537, 100.0, 0.386, 0.117},
                         {0.935, 0.386, 100.0, 0.127},
                         {0.202, 0.117, 0.127, 100.0}};
  c["intra_gbps"] = {100.0, 100.0, 100.0, 100.0};
  c["latency_s"] = 0.0;
  json workers = json::array();
  const double speeds[16] = {10.0, 9.1, 3.8, 2.6, 9.4, 8.0, 6.3, 5.8,
                             9.9, 5.7, 2.1, 1.5, 9.1, 8.7, 5.8, 1.2};
  for (int i = 0; i < 16; ++i) {
    json w;
    w["region"] = "R" + std::to_string(i / 4 + 1);
    w["speed"] = speeds[i];
    workers.push_back(std::move(w));
  }
  c["workers"] = std::move(workers);
  json placement = json::array();
  for (int r = 0; r < 4; ++r) {
    json p;
    p["region"] = "R" + std::to_string(r + 1);
    p["workers"] = {r * 4, r * 4 + 1, r * 4 + 2, r * 4 + 3};
    placement.push_back(std::move(p));
  }
  c["lps_placement"] = std::move(placement);
  c["gps_region"] = "R1";
  c["profiled_step_s"] = 0.2384;
  c["message_bytes"] = 140000000;
  return c;
}

json opt_block(double lr, double beta, int delay) {
  json o;
  o["lr"] = lr;  // per-delay-step rate; the full fold rate is lr*delay
  o["beta"] = beta;
  o["delay"] = delay;
  return o;
}

json strategy_preset(const std::string& name) {
  json s;
  if (name == "halos-paper") {
    s["kind"] = "halos";
    s["global_opt"] = opt_block(0.15, 0.5, 2);
    s["local_opt"] = opt_block(0.2, 0.9, 16);
    s["k"] = 32;
    s["alpha"] = 0.25;
    s["h"] = 8;
    s["dyn_local_steps"] = true;
    s["use_global_momentum"] = true;
  } else if (name == "async-paper") {
    s["kind"] = "async_local_sgd";
    s["global_opt"] = opt_block(0.05, 0.9, 32);
    s["h"] = 32;
    s["dyn_local_steps"] = true;
  } else if (name == "diloco-paper") {
    s["kind"] = "diloco";
    s["global_opt"] = opt_block(0.7, 0.9, 1);
    s["h"] = 32;
    s["dyn_local_steps"] = false;
  } else if (name == "diloco-dynupd-paper") {
    s["kind"] = "diloco_dynupd";
    s["global_opt"] = opt_block(0.7, 0.9, 1);
    s["h"] = 32;
    s["dyn_local_steps"] = true;
  } else if (name == "sync-sgd") {
    s["kind"] = "sync_sgd";
    s["global_opt"] = opt_block(1.0, 0.0, 1);
    s["h"] = 1;
    s["dyn_local_steps"] = false;
  } else {
    bad("strategy", "unknown preset '" + name + "'");
  }
  return s;
}

void set_default(json& obj, const std::string& key, const json& value) {
  if (!obj.contains(key)) obj[key] = value;
}

// Expand presets and insert every documented default so the resolved body
// is complete and canonical.
json resolve(json j) {
  if (!j.is_object()) bad("config", "top level must be an object");

  if (!j.contains("cluster")) bad("cluster", "missing");
  if (j["cluster"].is_string()) {
    const std::string name = j["cluster"].get<std::string>();
    if (name != "paper-default") bad("cluster", "unknown preset '" + name + "'");
    j["cluster"] = cluster_preset_paper_default();
  }
  json& c = j["cluster"];
  if (!c.is_object()) bad("cluster", "expected an object or preset name");
  set_default(c, "latency_s", 0.0);
  if (c.contains("intra_gbps") && c["intra_gbps"].is_number() &&
      c.contains("regions") && c["regions"].is_array()) {
    const double v = c["intra_gbps"].get<double>();
    c["intra_gbps"] = json::array();
    for (std::size_t i = 0; i < c["regions"].size(); ++i)
      c["intra_gbps"].push_back(v);
  }
  if (!c.contains("lps_placement") && c.contains("regions") &&
      c.contains("workers")) {
    // Default grouping: one LPS per region serving that region's workers.
    json placement = json::array();
    for (const auto& region : c["regions"]) {
      json p;
      p["region"] = region;
      json ws = json::array();
      for (std::size_t w = 0; w < c["workers"].size(); ++w)
        if (c["workers"][w].contains("region") &&
            c["workers"][w]["region"] == region)
          ws.push_back(w);
      if (ws.empty()) continue;
      p["workers"] = std::move(ws);
      placement.push_back(std::move(p));
    }
    c["lps_placement"] = std::move(placement);
  }

  if (!j.contains("strategy")) bad("strategy", "missing");
  if (j["strategy"].is_string())
    j["strategy"] = strategy_preset(j["strategy"].get<std::string>());
  json& s = j["strategy"];
  if (!s.is_object()) bad("strategy", "expected an object or preset name");
  set_default(s, "kind", "halos");
  set_default(s, "global_opt", opt_block(1.0, 0.0, 1));
  set_default(s["global_opt"], "lr", 1.0);
  set_default(s["global_opt"], "beta", 0.0);
  set_default(s["global_opt"], "delay", 1);
  if (s["kind"] == "halos") {
    set_default(s, "local_opt", opt_block(1.0, 0.0, 1));
    set_default(s["local_opt"], "lr", 1.0);
    set_default(s["local_opt"], "beta", 0.0);
    set_default(s["local_opt"], "delay", 1);
    set_default(s, "k", 32);
    set_default(s, "alpha", 0.25);
  }
  set_default(s, "h", 8);
  set_default(s, "dyn_local_steps", false);
  set_default(s, "use_global_momentum", true);

  if (!j.contains("worker_opt")) j["worker_opt"] = json::object();
  json& w = j["worker_opt"];
  set_default(w, "kind", "sgd");
  set_default(w, "lr", 0.05);
  set_default(w, "clip", 1.0);
  if (w.contains("schedule") && !w["schedule"].is_null()) {
    set_default(w["schedule"], "warmup", 0);
    set_default(w["schedule"], "total", 0);
    set_default(w["schedule"], "floor_frac", 0.1);
  } else {
    w["schedule"] = nullptr;
  }
  if (w["kind"] == "adamw") {
    set_default(w, "adam", json::object());
    set_default(w["adam"], "beta1", 0.9);
    set_default(w["adam"], "beta2", 0.95);
    set_default(w["adam"], "eps", 1e-8);
    set_default(w["adam"], "weight_decay", 0.1);
  }

  if (!j.contains("workload")) bad("workload", "missing");
  json& wl = j["workload"];
  if (!wl.is_object()) bad("workload", "expected an object");
  set_default(wl, "kind", "quadratic");
  if (wl["kind"] == "quadratic") {
    set_default(wl, "dim", 16);
    set_default(wl, "cond", 1.0);
    set_default(wl, "hessian_max", 1.0);
    set_default(wl, "zeta", 0.0);
    set_default(wl, "noise_std", 0.0);
    set_default(wl, "init_offset", 1.0);
  } else if (wl["kind"] == "charlm") {
    if (!wl.contains("corpus")) bad("workload.corpus", "missing");
    set_default(wl, "context", 80);
    set_default(wl, "embed", 8);
    set_default(wl, "hidden", 32);
    set_default(wl, "batch", 32);
    set_default(wl, "stride", 1);
    set_default(wl, "shard_mode", "iid");
    set_default(wl, "init_scale", 0.08);
  } else {
    bad("workload.kind", "unknown workload '" +
                             wl["kind"].get<std::string>() + "'");
  }

  if (!j.contains("stop")) bad("stop", "missing");
  json& st = j["stop"];
  set_default(st, "time_s", 0.0);
  set_default(st, "steps", 0);
  set_default(st, "samples", 0.0);

  set_default(j, "seed", 1);

  if (!j.contains("report")) j["report"] = json::object();
  json& r = j["report"];
  set_default(r, "target_loss", nullptr);
  set_default(r, "loss_every_s", 10.0);
  set_default(r, "loss_every_updates", 50);
  set_default(r, "retain_staleness", true);
  set_default(r, "replay_threads", 1);

  if (!j.contains("output")) j["output"] = json::object();
  set_default(j["output"], "write_trace", false);
  set_default(j["output"], "gzip_trace", false);

  return j;
}

ClusterSpec build_cluster(const json& c) {
  ClusterSpec spec;
  if (!c.contains("regions")) bad("cluster.regions", "missing");
  for (const auto& r : c["regions"])
    spec.regions.push_back(get_str(r, "cluster.regions[]"));

  if (!c.contains("bandwidth_gbps")) bad("cluster.bandwidth_gbps", "missing");
  for (const auto& row : c["bandwidth_gbps"]) {
    std::vector<double> v;
    for (const auto& x : row) v.push_back(get_num(x, "cluster.bandwidth_gbps[]"));
    spec.bandwidth_gbps.push_back(std::move(v));
  }
  if (!c.contains("intra_gbps")) bad("cluster.intra_gbps", "missing");
  for (const auto& x : c["intra_gbps"])
    spec.intra_gbps.push_back(get_num(x, "cluster.intra_gbps[]"));

  const auto n = spec.regions.size();
  if (c["latency_s"].is_number()) {
    spec.latency_s.assign(n, std::vector<double>(
                                 n, c["latency_s"].get<double>()));
  } else {
    for (const auto& row : c["latency_s"]) {
      std::vector<double> v;
      for (const auto& x : row) v.push_back(get_num(x, "cluster.latency_s[]"));
      spec.latency_s.push_back(std::move(v));
    }
  }

  if (!c.contains("workers")) bad("cluster.workers", "missing");
  for (const auto& wj : c["workers"]) {
    WorkerSpec w;
    w.region = spec.region_index(get_str(wj.at("region"), "cluster.workers[].region"));
    w.speed = get_num(wj.at("speed"), "cluster.workers[].speed");
    spec.workers.push_back(w);
  }
  if (!c.contains("lps_placement")) bad("cluster.lps_placement", "missing");
  for (const auto& pj : c["lps_placement"]) {
    LpsPlacement p;
    p.region = spec.region_index(
        get_str(pj.at("region"), "cluster.lps_placement[].region"));
    for (const auto& widx : pj.at("workers"))
      p.workers.push_back(static_cast<int>(
          get_int(widx, "cluster.lps_placement[].workers[]")));
    spec.lps_placement.push_back(std::move(p));
  }
  if (!c.contains("gps_region")) bad("cluster.gps_region", "missing");
  spec.gps_region =
      spec.region_index(get_str(c["gps_region"], "cluster.gps_region"));
  if (!c.contains("profiled_step_s")) bad("cluster.profiled_step_s", "missing");
  spec.profiled_step_s = get_num(c["profiled_step_s"], "cluster.profiled_step_s");
  if (!c.contains("message_bytes")) bad("cluster.message_bytes", "missing");
  spec.message_bytes =
      static_cast<uint64_t>(get_int(c["message_bytes"], "cluster.message_bytes"));

  spec.validate();
  for (const std::string& warning : spec.consistency_warnings())
    std::cerr << "warning: " << warning << "\n";
  return spec;
}

NesterovConfig build_opt(const json& o, const std::string& path) {
  NesterovConfig n;
  const double lr_scaled = get_num(o.at("lr"), path + ".lr");
  const long delay = get_int(o.at("delay"), path + ".delay");
  if (!(lr_scaled > 0.0)) bad(path + ".lr", "must be positive");
  if (delay < 1) bad(path + ".delay", "must be >= 1");
  n.lr = lr_scaled * static_cast<double>(delay);
  n.beta = get_num(o.at("beta"), path + ".beta");
  n.delay = static_cast<int>(delay);
  return n;
}

StrategyConfig build_strategy(const json& s) {
  StrategyConfig cfg;
  cfg.kind = strategy_from_name(get_str(s.at("kind"), "strategy.kind"));
  cfg.global_opt = build_opt(s.at("global_opt"), "strategy.global_opt");
  if (cfg.kind == StrategyKind::Halos) {
    cfg.local_opt = build_opt(s.at("local_opt"), "strategy.local_opt");
    cfg.k = static_cast<int>(get_int(s.at("k"), "strategy.k"));
    cfg.alpha = get_num(s.at("alpha"), "strategy.alpha");
  }
  cfg.h = static_cast<int>(get_int(s.at("h"), "strategy.h"));
  cfg.dyn_local_steps = get_bool(s.at("dyn_local_steps"), "strategy.dyn_local_steps");
  cfg.use_global_momentum =
      get_bool(s.at("use_global_momentum"), "strategy.use_global_momentum");
  cfg.validate();
  return cfg;
}

WorkerOptConfig build_worker_opt(const json& w) {
  WorkerOptConfig cfg;
  const std::string kind = get_str(w.at("kind"), "worker_opt.kind");
  if (kind == "sgd")
    cfg.kind = InnerKind::PlainSgd;
  else if (kind == "adamw")
    cfg.kind = InnerKind::AdamW;
  else
    bad("worker_opt.kind", "must be 'sgd' or 'adamw'");
  cfg.lr = get_num(w.at("lr"), "worker_opt.lr");
  if (!(cfg.lr > 0.0)) bad("worker_opt.lr", "must be positive");
  cfg.clip = get_num(w.at("clip"), "worker_opt.clip");
  if (!(cfg.clip > 0.0)) bad("worker_opt.clip", "must be positive");
  if (!w.at("schedule").is_null()) {
    const json& s = w["schedule"];
    cfg.schedule.eta_max = cfg.lr;
    cfg.schedule.warmup = get_int(s.at("warmup"), "worker_opt.schedule.warmup");
    cfg.schedule.total = get_int(s.at("total"), "worker_opt.schedule.total");
    cfg.schedule.floor_frac =
        get_num(s.at("floor_frac"), "worker_opt.schedule.floor_frac");
    if (cfg.schedule.warmup < 0)
      bad("worker_opt.schedule.warmup", "must be >= 0");
    if (cfg.schedule.total < 0) bad("worker_opt.schedule.total", "must be >= 0");
    if (cfg.schedule.total > 0 && cfg.schedule.warmup > cfg.schedule.total)
      bad("worker_opt.schedule.warmup", "must be <= total");
  }
  if (w.contains("adam") && !w["adam"].is_null()) {
    const json& a = w["adam"];
    cfg.adam.beta1 = get_num(a.at("beta1"), "worker_opt.adam.beta1");
    cfg.adam.beta2 = get_num(a.at("beta2"), "worker_opt.adam.beta2");
    cfg.adam.eps = get_num(a.at("eps"), "worker_opt.adam.eps");
    cfg.adam.weight_decay =
        get_num(a.at("weight_decay"), "worker_opt.adam.weight_decay");
  }
  return cfg;
}

json parse_scalar(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error&) {
    return json(text);  // bare strings are allowed
  }
}

void apply_override(json& j, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos)
    bad("override", "expected key=value in '" + assignment + "'");
  const std::string path = assignment.substr(0, eq);
  const json value = parse_scalar(assignment.substr(eq + 1));

  json* node = &j;
  std::size_t begin = 0;
  for (;;) {
    const auto dot = path.find('.', begin);
    const std::string key = path.substr(begin, dot - begin);
    if (key.empty()) bad("override", "empty path segment in '" + path + "'");
    if (dot == std::string::npos) {
      (*node)[key] = value;
      return;
    }
    node = &(*node)[key];
    begin = dot + 1;
  }
}

RunConfig build(const json& resolved) {
  RunConfig cfg;
  cfg.cluster = build_cluster(resolved.at("cluster"));
  cfg.strategy = build_strategy(resolved.at("strategy"));
  cfg.worker_opt = build_worker_opt(resolved.at("worker_opt"));

  const json& wl = resolved.at("workload");
  const int n_workers = static_cast<int>(cfg.cluster.workers.size());
  if (wl.at("kind") == "quadratic") {
    cfg.workload_kind = WorkloadKind::Quadratic;
    QuadraticSpec q;
    q.dim = static_cast<std::size_t>(get_int(wl.at("dim"), "workload.dim"));
    if (wl.contains("hessian_diag"))
      for (const auto& x : wl["hessian_diag"])
        q.hessian_diag.push_back(get_num(x, "workload.hessian_diag[]"));
    q.cond = get_num(wl.at("cond"), "workload.cond");
    q.hessian_max = get_num(wl.at("hessian_max"), "workload.hessian_max");
    q.zeta = get_num(wl.at("zeta"), "workload.zeta");
    if (!(q.zeta >= 0.0)) bad("workload.zeta", "must be >= 0");
    q.noise_std = get_num(wl.at("noise_std"), "workload.noise_std");
    if (!(q.noise_std >= 0.0)) bad("workload.noise_std", "must be >= 0");
    q.init_offset = get_num(wl.at("init_offset"), "workload.init_offset");
    q.num_workers = n_workers;
    cfg.quadratic = std::move(q);
  } else {
    cfg.workload_kind = WorkloadKind::CharLm;
    CharLmSpec c;
    c.corpus_path = get_str(wl.at("corpus"), "workload.corpus");
    c.context = static_cast<int>(get_int(wl.at("context"), "workload.context"));
    c.embed = static_cast<int>(get_int(wl.at("embed"), "workload.embed"));
    c.hidden = static_cast<int>(get_int(wl.at("hidden"), "workload.hidden"));
    c.batch = static_cast<int>(get_int(wl.at("batch"), "workload.batch"));
    c.stride = static_cast<int>(get_int(wl.at("stride"), "workload.stride"));
    const std::string mode = get_str(wl.at("shard_mode"), "workload.shard_mode");
    if (mode == "iid")
      c.shard_mode = ShardMode::Iid;
    else if (mode == "non_iid")
      c.shard_mode = ShardMode::NonIid;
    else
      bad("workload.shard_mode", "must be 'iid' or 'non_iid'");
    c.init_scale = get_num(wl.at("init_scale"), "workload.init_scale");
    c.num_workers = n_workers;
    cfg.charlm = std::move(c);
  }

  const json& st = resolved.at("stop");
  cfg.stop.time_s = get_num(st.at("time_s"), "stop.time_s");
  cfg.stop.steps = static_cast<uint64_t>(get_int(st.at("steps"), "stop.steps"));
  cfg.stop.samples = get_num(st.at("samples"), "stop.samples");
  if (!cfg.stop.enabled())
    bad("stop", "set at least one of time_s, steps, samples");

  cfg.seed = static_cast<uint64_t>(get_int(resolved.at("seed"), "seed"));

  const json& r = resolved.at("report");
  if (!r.at("target_loss").is_null()) {
    cfg.target_loss = get_num(r["target_loss"], "report.target_loss");
    cfg.has_target_loss = true;
  }
  cfg.loss_every_s = get_num(r.at("loss_every_s"), "report.loss_every_s");
  cfg.loss_every_updates = static_cast<uint64_t>(
      get_int(r.at("loss_every_updates"), "report.loss_every_updates"));
  cfg.retain_staleness = get_bool(r.at("retain_staleness"), "report.retain_staleness");
  cfg.replay_threads =
      static_cast<int>(get_int(r.at("replay_threads"), "report.replay_threads"));
  if (cfg.replay_threads < 1) bad("report.replay_threads", "must be >= 1");

  cfg.write_trace = get_bool(resolved.at("output").at("write_trace"),
                             "output.write_trace");
  cfg.gzip_trace = get_bool(resolved.at("output").at("gzip_trace"),
                            "output.gzip_trace");

  // The seed keys the workload's deterministic streams.
  cfg.quadratic.seed = cfg.seed;
  cfg.charlm.seed = cfg.seed;

  cfg.canonical_json = resolved.dump();
  cfg.hash_hex = to_hex(fnv1a(cfg.canonical_json));
  return cfg;
}

}  // namespace

std::unique_ptr<Workload> RunConfig::make_workload() const {
  if (workload_kind == WorkloadKind::Quadratic)
    return std::make_unique<QuadraticTask>(quadratic);
  return std::make_unique<CharLmTask>(charlm);
}

ReplayOptions RunConfig::replay_options() const {
  ReplayOptions o;
  o.retain_staleness = retain_staleness;
  o.threads = replay_threads;
  o.loss_every_s = loss_every_s;
  o.loss_every_updates = loss_every_updates;
  return o;
}

RunConfig parse_config_text(const std::string& text,
                            const std::vector<std::string>& overrides) {
  json j;
  try {
    j = json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    fail(Errc::config, std::string("config: ") + e.what());
  }
  for (const std::string& o : overrides) apply_override(j, o);
  return build(resolve(std::move(j)));
}

RunConfig load_config(const std::string& path,
                      const std::vector<std::string>& overrides) {
  std::ifstream is(path);
  if (!is) fail(Errc::io, "config: cannot open " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config_text(ss.str(), overrides);
}

}  // namespace halosim
