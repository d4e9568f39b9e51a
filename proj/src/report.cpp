#include "halosim/report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "halosim/common.hpp"
#include "json.hpp"

namespace halosim {

using nlohmann::json;

std::string RunReport::to_json() const {
  json j;
  j["config_hash"] = config_hash;
  j["seed"] = seed;
  j["strategy"] = strategy;
  j["final_loss"] = final_loss;
  j["end_time"] = end_time;
  j["total_samples"] = total_samples;
  j["diverged"] = diverged;
  j["diverged_seq"] = diverged_seq;
  j["trace_hash"] = to_hex(trace_hash);
  j["final_model_hash"] = to_hex(final_model_hash);
  json losses_j = json::array();
  for (const LossSample& s : losses)
    losses_j.push_back({s.t, s.samples, s.loss});
  j["losses"] = std::move(losses_j);
  json bd = json::array();
  for (const WorkerBreakdown& b : breakdown)
    bd.push_back({b.compute_frac, b.comm_frac, b.stall_frac});
  j["breakdown"] = std::move(bd);
  if (staleness) {
    json st;
    st["d_g_max"] = staleness->d_g_max;
    st["d_l_max"] = staleness->d_l_max;
    json series = json::array();
    for (const StalenessEvent& e : staleness->series)
      series.push_back({e.seq, e.tier, e.value});
    st["series"] = std::move(series);
    j["staleness"] = std::move(st);
  } else {
    j["staleness"] = nullptr;
  }
  return j.dump(2);
}

RunReport RunReport::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(Errc::io, std::string("report: parse error: ") + e.what());
  }
  RunReport r;
  r.config_hash = j.at("config_hash").get<std::string>();
  r.seed = j.at("seed").get<uint64_t>();
  r.strategy = j.at("strategy").get<std::string>();
  r.final_loss = j.at("final_loss").get<double>();
  r.end_time = j.at("end_time").get<double>();
  r.total_samples = j.at("total_samples").get<double>();
  r.diverged = j.at("diverged").get<bool>();
  r.diverged_seq = j.at("diverged_seq").get<uint64_t>();
  r.trace_hash = from_hex(j.at("trace_hash").get<std::string>());
  r.final_model_hash = from_hex(j.at("final_model_hash").get<std::string>());
  for (const auto& s : j.at("losses"))
    r.losses.push_back({s.at(0).get<double>(), s.at(1).get<double>(),
                        s.at(2).get<double>()});
  for (const auto& b : j.at("breakdown"))
    r.breakdown.push_back({b.at(0).get<double>(), b.at(1).get<double>(),
                           b.at(2).get<double>()});
  if (!j.at("staleness").is_null()) {
    StalenessStats st;
    st.d_g_max = j["staleness"].at("d_g_max").get<double>();
    st.d_l_max = j["staleness"].at("d_l_max").get<double>();
    for (const auto& e : j["staleness"].at("series"))
      st.series.push_back({e.at(0).get<uint64_t>(), e.at(1).get<int>(),
                           e.at(2).get<double>()});
    r.staleness = std::move(st);
  }
  return r;
}

void RunReport::save(const std::string& path) const {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::trunc);
    if (!os) fail(Errc::io, "report: cannot open " + tmp);
    os << to_json() << '\n';
    if (!os) fail(Errc::io, "report: write failed for " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    fail(Errc::io, "report: rename failed for " + path);
}

RunReport RunReport::load(const std::string& path) {
  std::ifstream is(path);
  if (!is) fail(Errc::io, "report: cannot open " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return from_json(ss.str());
}

}  // namespace halosim
