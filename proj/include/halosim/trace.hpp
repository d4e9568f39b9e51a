#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "halosim/common.hpp"

namespace halosim {

enum class EventKind {
  WorkerStart,
  WorkerFinish,
  MsgSend,
  MsgArrive,
  LpsApplyDelta,
  LpsMerge,
  GpsApply,
  Barrier,
};

enum class MsgKind {
  None,
  WorkerDelta,   // worker -> LPS (or GPS in the single-tier baseline)
  ModelToWorker, // server reply scheduling a worker
  LpsDelta,      // LPS -> GPS accumulated displacement
  GlobalModel,   // GPS -> LPS reply
  AllReduce,     // collective phase of barrier strategies
};

std::string event_kind_name(EventKind k);
EventKind event_kind_from_name(const std::string& s);
std::string msg_kind_name(MsgKind k);
MsgKind msg_kind_from_name(const std::string& s);

// One timed record. Which payload fields are meaningful depends on `kind`;
// unused fields keep their defaults and are omitted from serialization.
struct Event {
  uint64_t seq = 0;
  double t = 0.0;
  std::string actor;
  EventKind kind = EventKind::MsgSend;

  uint64_t msg = 0;  // message id pairing MsgSend with MsgArrive
  MsgKind mk = MsgKind::None;
  std::string src;
  std::string dst;
  double dur = 0.0;  // transfer duration
  int worker = -1;
  int lps = -1;
  int64_t round = -1;
  int steps = 0;
  uint64_t step0 = 0;  // worker's cumulative inner steps before the round
  std::string ver;     // model version produced or consumed, "actor:counter"
  std::string gver;    // global model version consumed by a merge
  uint64_t tctr = 0;   // LPS update counter after an apply
  bool sendgps = false;

  std::string to_json_line() const;
  static Event from_json_line(const std::string& line);
};

struct TraceHeader {
  int version = 1;
  std::string config_hash;
  uint64_t seed = 0;
  std::string strategy;
  std::vector<std::string> actors;  // creation order: workers, LPSs, gps
  uint64_t message_bytes = 0;

  std::string to_json_line() const;
  static TraceHeader from_json_line(const std::string& line);
};

// Replayable total order of simulation events, sorted by (t, seq).
struct Trace {
  TraceHeader header;
  std::vector<Event> events;

  // FNV-1a over the canonical serialization (header line + event lines,
  // each newline-terminated).
  uint64_t hash() const;

  // Newline-delimited JSON; paths ending in ".gz" are gzip-compressed.
  void save(const std::string& path) const;
  static Trace load(const std::string& path);
};

// Structural checks: (t, seq) ordering, send/arrive pairing and timing,
// version references resolving to an already-produced version, and
// conservation (every delta applied exactly once). Throws on violation.
void validate_trace(const Trace& trace);

}  // namespace halosim
