#include "halosim/trace.hpp"

#include <zlib.h>

#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

namespace halosim {

using nlohmann::json;

std::string event_kind_name(EventKind k) {
  switch (k) {
    case EventKind::WorkerStart: return "WorkerStart";
    case EventKind::WorkerFinish: return "WorkerFinish";
    case EventKind::MsgSend: return "MsgSend";
    case EventKind::MsgArrive: return "MsgArrive";
    case EventKind::LpsApplyDelta: return "LpsApplyDelta";
    case EventKind::LpsMerge: return "LpsMerge";
    case EventKind::GpsApply: return "GpsApply";
    case EventKind::Barrier: return "Barrier";
  }
  fail(Errc::invalid_argument, "unknown event kind");
}

EventKind event_kind_from_name(const std::string& s) {
  if (s == "WorkerStart") return EventKind::WorkerStart;
  if (s == "WorkerFinish") return EventKind::WorkerFinish;
  if (s == "MsgSend") return EventKind::MsgSend;
  if (s == "MsgArrive") return EventKind::MsgArrive;
  if (s == "LpsApplyDelta") return EventKind::LpsApplyDelta;
  if (s == "LpsMerge") return EventKind::LpsMerge;
  if (s == "GpsApply") return EventKind::GpsApply;
  if (s == "Barrier") return EventKind::Barrier;
  fail(Errc::io, "trace: unknown event kind '" + s + "'");
}

std::string msg_kind_name(MsgKind k) {
  switch (k) {
    case MsgKind::None: return "none";
    case MsgKind::WorkerDelta: return "wdelta";
    case MsgKind::ModelToWorker: return "model";
    case MsgKind::LpsDelta: return "ldelta";
    case MsgKind::GlobalModel: return "gmodel";
    case MsgKind::AllReduce: return "allreduce";
  }
  fail(Errc::invalid_argument, "unknown message kind");
}

MsgKind msg_kind_from_name(const std::string& s) {
  if (s == "none") return MsgKind::None;
  if (s == "wdelta") return MsgKind::WorkerDelta;
  if (s == "model") return MsgKind::ModelToWorker;
  if (s == "ldelta") return MsgKind::LpsDelta;
  if (s == "gmodel") return MsgKind::GlobalModel;
  if (s == "allreduce") return MsgKind::AllReduce;
  fail(Errc::io, "trace: unknown message kind '" + s + "'");
}

std::string Event::to_json_line() const {
  json payload = json::object();
  if (mk != MsgKind::None) {
    payload["msg"] = msg;
    payload["mk"] = msg_kind_name(mk);
    payload["src"] = src;
    payload["dst"] = dst;
    payload["dur"] = dur;
  }
  if (worker >= 0) payload["worker"] = worker;
  if (lps >= 0) payload["lps"] = lps;
  if (round >= 0) payload["round"] = round;
  if (steps > 0) payload["steps"] = steps;
  if (kind == EventKind::WorkerStart) payload["step0"] = step0;
  if (!ver.empty()) payload["ver"] = ver;
  if (!gver.empty()) payload["gver"] = gver;
  if (kind == EventKind::LpsApplyDelta) {
    payload["tctr"] = tctr;
    payload["sendgps"] = sendgps;
  }

  json j;
  j["seq"] = seq;
  j["t"] = t;
  j["actor"] = actor;
  j["kind"] = event_kind_name(kind);
  j["payload"] = payload;
  return j.dump();
}

Event Event::from_json_line(const std::string& line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    fail(Errc::io, std::string("trace: bad event line: ") + e.what());
  }
  Event e;
  e.seq = j.at("seq").get<uint64_t>();
  e.t = j.at("t").get<double>();
  e.actor = j.at("actor").get<std::string>();
  e.kind = event_kind_from_name(j.at("kind").get<std::string>());
  const json& p = j.at("payload");
  if (p.contains("mk")) {
    e.mk = msg_kind_from_name(p.at("mk").get<std::string>());
    e.msg = p.at("msg").get<uint64_t>();
    e.src = p.at("src").get<std::string>();
    e.dst = p.at("dst").get<std::string>();
    e.dur = p.at("dur").get<double>();
  }
  if (p.contains("worker")) e.worker = p.at("worker").get<int>();
  if (p.contains("lps")) e.lps = p.at("lps").get<int>();
  if (p.contains("round")) e.round = p.at("round").get<int64_t>();
  if (p.contains("steps")) e.steps = p.at("steps").get<int>();
  if (p.contains("step0")) e.step0 = p.at("step0").get<uint64_t>();
  if (p.contains("ver")) e.ver = p.at("ver").get<std::string>();
  if (p.contains("gver")) e.gver = p.at("gver").get<std::string>();
  if (p.contains("tctr")) e.tctr = p.at("tctr").get<uint64_t>();
  if (p.contains("sendgps")) e.sendgps = p.at("sendgps").get<bool>();
  return e;
}

std::string TraceHeader::to_json_line() const {
  json j;
  j["type"] = "header";
  j["version"] = version;
  j["config_hash"] = config_hash;
  j["seed"] = seed;
  j["strategy"] = strategy;
  j["actors"] = actors;
  j["message_bytes"] = message_bytes;
  return j.dump();
}

TraceHeader TraceHeader::from_json_line(const std::string& line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    fail(Errc::io, std::string("trace: bad header line: ") + e.what());
  }
  if (!j.contains("type") || j.at("type") != "header")
    fail(Errc::io, "trace: first record is not a header");
  TraceHeader h;
  h.version = j.at("version").get<int>();
  h.config_hash = j.at("config_hash").get<std::string>();
  h.seed = j.at("seed").get<uint64_t>();
  h.strategy = j.at("strategy").get<std::string>();
  h.actors = j.at("actors").get<std::vector<std::string>>();
  h.message_bytes = j.at("message_bytes").get<uint64_t>();
  return h;
}

uint64_t Trace::hash() const {
  Fnv1a h;
  h.update(header.to_json_line());
  h.update("\n");
  for (const Event& e : events) {
    h.update(e.to_json_line());
    h.update("\n");
  }
  return h.digest();
}

namespace {

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

void Trace::save(const std::string& path) const {
  const std::string tmp = path + ".tmp";
  if (ends_with(path, ".gz")) {
    gzFile f = gzopen(tmp.c_str(), "wb");
    if (!f) fail(Errc::io, "trace: cannot open " + tmp);
    auto put = [&](const std::string& line) {
      if (gzwrite(f, line.data(), static_cast<unsigned>(line.size())) <= 0 ||
          gzwrite(f, "\n", 1) <= 0) {
        gzclose(f);
        fail(Errc::io, "trace: gzip write failed for " + tmp);
      }
    };
    put(header.to_json_line());
    for (const Event& e : events) put(e.to_json_line());
    if (gzclose(f) != Z_OK) fail(Errc::io, "trace: gzip close failed");
  } else {
    std::ofstream os(tmp, std::ios::trunc);
    if (!os) fail(Errc::io, "trace: cannot open " + tmp);
    os << header.to_json_line() << '\n';
    for (const Event& e : events) os << e.to_json_line() << '\n';
    if (!os) fail(Errc::io, "trace: write failed for " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    fail(Errc::io, "trace: rename failed for " + path);
}

Trace Trace::load(const std::string& path) {
  std::vector<std::string> lines;
  if (ends_with(path, ".gz")) {
    gzFile f = gzopen(path.c_str(), "rb");
    if (!f) fail(Errc::io, "trace: cannot open " + path);
    std::string current;
    char buf[1 << 16];
    int n;
    while ((n = gzread(f, buf, sizeof(buf))) > 0) {
      for (int i = 0; i < n; ++i) {
        if (buf[i] == '\n') {
          lines.push_back(std::move(current));
          current.clear();
        } else {
          current.push_back(buf[i]);
        }
      }
    }
    gzclose(f);
    if (!current.empty()) lines.push_back(std::move(current));
  } else {
    std::ifstream is(path);
    if (!is) fail(Errc::io, "trace: cannot open " + path);
    std::string line;
    while (std::getline(is, line))
      if (!line.empty()) lines.push_back(line);
  }
  if (lines.empty()) fail(Errc::io, "trace: empty file " + path);

  Trace tr;
  tr.header = TraceHeader::from_json_line(lines[0]);
  tr.events.reserve(lines.size() - 1);
  for (std::size_t i = 1; i < lines.size(); ++i)
    tr.events.push_back(Event::from_json_line(lines[i]));
  return tr;
}

void validate_trace(const Trace& trace) {
  struct SendInfo {
    double t = 0.0;
    double dur = 0.0;
    bool arrived = false;
  };
  std::map<uint64_t, SendInfo> sends;
  std::set<std::string> versions;
  std::map<std::pair<int, int64_t>, int> delta_sent;     // (worker, round)
  std::map<std::pair<int, int64_t>, int> delta_applied;  // (worker, round)
  int lps_delta_sent = 0;
  int lps_delta_applied = 0;
  const bool hierarchical = trace.header.strategy == "halos";

  for (const std::string& a : trace.header.actors) {
    // Initial model versions exist before any event.
    if (a.rfind("lps", 0) == 0 || a == "gps") versions.insert(a + ":0");
  }

  double prev_t = -1.0;
  uint64_t prev_seq = 0;
  bool first = true;
  for (const Event& e : trace.events) {
    if (!first) {
      if (e.t < prev_t)
        fail(Errc::invalid_argument,
             "trace: time decreases at seq " + std::to_string(e.seq));
      if (e.t == prev_t && e.seq <= prev_seq)
        fail(Errc::invalid_argument,
             "trace: (t, seq) order violated at seq " + std::to_string(e.seq));
    }
    prev_t = e.t;
    prev_seq = e.seq;
    first = false;

    switch (e.kind) {
      case EventKind::MsgSend: {
        sends[e.msg] = {e.t, e.dur, false};
        if (e.mk == MsgKind::WorkerDelta) delta_sent[{e.worker, e.round}]++;
        if (e.mk == MsgKind::LpsDelta) lps_delta_sent++;
        break;
      }
      case EventKind::MsgArrive: {
        auto it = sends.find(e.msg);
        if (it == sends.end())
          fail(Errc::invalid_argument, "trace: arrival without send, msg " +
                                           std::to_string(e.msg));
        if (it->second.arrived)
          fail(Errc::invalid_argument, "trace: duplicate arrival, msg " +
                                           std::to_string(e.msg));
        if (e.t != it->second.t + it->second.dur)
          fail(Errc::invalid_argument,
               "trace: arrival time mismatch, msg " + std::to_string(e.msg));
        it->second.arrived = true;
        break;
      }
      case EventKind::WorkerStart: {
        if (!versions.count(e.ver))
          fail(Errc::invalid_argument, "trace: WorkerStart references unknown "
                                       "version " + e.ver + " at seq " +
                                           std::to_string(e.seq));
        break;
      }
      case EventKind::LpsApplyDelta: {
        delta_applied[{e.worker, e.round}]++;
        versions.insert(e.ver);
        break;
      }
      case EventKind::GpsApply: {
        versions.insert(e.ver);
        if (hierarchical) lps_delta_applied++;
        if (!hierarchical && e.worker >= 0) delta_applied[{e.worker, e.round}]++;
        break;
      }
      case EventKind::LpsMerge: {
        if (!versions.count(e.gver))
          fail(Errc::invalid_argument,
               "trace: merge references unknown version " + e.gver);
        versions.insert(e.ver);
        break;
      }
      default:
        break;
    }
  }

  for (const auto& [msg, info] : sends) {
    if (!info.arrived)
      fail(Errc::invalid_argument,
           "trace: message never arrived, msg " + std::to_string(msg));
  }
  for (const auto& [key, n] : delta_sent) {
    const auto it = delta_applied.find(key);
    const int applied = it == delta_applied.end() ? 0 : it->second;
    if (n != 1 || applied != 1)
      fail(Errc::invalid_argument,
           "trace: worker delta (" + std::to_string(key.first) + ", round " +
               std::to_string(key.second) + ") sent " + std::to_string(n) +
               ", applied " + std::to_string(applied));
  }
  for (const auto& [key, n] : delta_applied) {
    if (!delta_sent.count(key) && trace.header.strategy != "sync_sgd" &&
        trace.header.strategy != "diloco" &&
        trace.header.strategy != "diloco_dynupd")
      fail(Errc::invalid_argument, "trace: delta applied but never sent");
  }
  if (hierarchical && lps_delta_sent != lps_delta_applied)
    fail(Errc::invalid_argument,
         "trace: LPS deltas sent " + std::to_string(lps_delta_sent) +
             " != applied " + std::to_string(lps_delta_applied));
}

}  // namespace halosim
