#include <algorithm>
#include <queue>

#include "halosim/engine.hpp"

namespace halosim {

namespace {

struct EventOrder {
  bool operator()(const Event& a, const Event& b) const {
    if (a.t != b.t) return a.t > b.t;  // min-heap
    return a.seq > b.seq;
  }
};

class Generator {
 public:
  Generator(const ClusterSpec& cluster, const StrategyConfig& strat,
            const StopRule& stop, double samples_per_step,
            const std::string& config_hash, uint64_t seed)
      : cluster_(cluster),
        strat_(strat),
        stop_(stop),
        samples_per_step_(samples_per_step),
        s_fastest_(cluster.s_fastest()) {
    if (!stop.enabled())
      fail(Errc::config, "stop: a time, step, or sample budget is required");
    cluster_.validate();
    strat_.validate();

    const auto n_workers = cluster_.workers.size();
    const auto n_lps = cluster_.lps_placement.size();
    for (std::size_t w = 0; w < n_workers; ++w)
      trace_.header.actors.push_back("w" + std::to_string(w));
    if (strat_.hierarchical())
      for (std::size_t l = 0; l < n_lps; ++l)
        trace_.header.actors.push_back("lps" + std::to_string(l));
    trace_.header.actors.push_back("gps");
    trace_.header.config_hash = config_hash;
    trace_.header.seed = seed;
    trace_.header.strategy = strategy_name(strat_.kind);
    trace_.header.message_bytes = cluster_.message_bytes;

    round_of_.assign(n_workers, -1);
    cum_steps_.assign(n_workers, 0);
    lps_t_.assign(n_lps, 0);
    lps_t_last_.assign(n_lps, 0);
    lps_ver_.assign(n_lps, 0);
  }

  Trace run() {
    if (strat_.barrier())
      generate_barrier();
    else
      generate_async();
    std::sort(trace_.events.begin(), trace_.events.end(),
              [](const Event& a, const Event& b) {
                if (a.t != b.t) return a.t < b.t;
                return a.seq < b.seq;
              });
    return std::move(trace_);
  }

 private:
  std::string worker_name(int w) const { return "w" + std::to_string(w); }
  std::string lps_name(int l) const { return "lps" + std::to_string(l); }

  int steps_for(int w) const {
    const double speed = cluster_.workers[static_cast<std::size_t>(w)].speed;
    return strat_.dyn_local_steps ? dyn_local_steps(strat_.h, speed, s_fastest_)
                                  : strat_.h;
  }

  bool budget_allows(double t) const {
    if (stop_.time_s > 0.0 && t >= stop_.time_s) return false;
    if (stop_.steps > 0 && total_steps_ >= stop_.steps) return false;
    if (stop_.samples > 0.0 && total_samples_ >= stop_.samples) return false;
    return true;
  }

  void account_round(int steps) {
    total_steps_ += static_cast<uint64_t>(steps);
    total_samples_ += static_cast<double>(steps) * samples_per_step_;
  }

  Event make(double t, const std::string& actor, EventKind kind) {
    Event e;
    e.seq = next_seq_++;
    e.t = t;
    e.actor = actor;
    e.kind = kind;
    return e;
  }

  void push(Event e) { queue_.push(std::move(e)); }

  // MsgSend at time t plus the paired MsgArrive after the transfer.
  void send(double t, const std::string& src, const std::string& dst,
            MsgKind mk, double dur, int worker, int lps, int64_t round,
            const std::string& ver) {
    const uint64_t id = next_msg_++;
    Event s = make(t, src, EventKind::MsgSend);
    s.msg = id;
    s.mk = mk;
    s.src = src;
    s.dst = dst;
    s.dur = dur;
    s.worker = worker;
    s.lps = lps;
    s.round = round;
    s.ver = ver;
    push(std::move(s));
    Event a = make(t + dur, dst, EventKind::MsgArrive);
    a.msg = id;
    a.mk = mk;
    a.src = src;
    a.dst = dst;
    a.dur = dur;
    a.worker = worker;
    a.lps = lps;
    a.round = round;
    a.ver = ver;
    push(std::move(a));
  }

  double p2p_worker_lps(int w) const {
    const int wr = cluster_.workers[static_cast<std::size_t>(w)].region;
    const int lr = cluster_.lps_placement[static_cast<std::size_t>(
        cluster_.lps_of_worker(w))].region;
    return p2p_time(wr, lr, cluster_.message_bytes, cluster_);
  }

  double p2p_worker_gps(int w) const {
    const int wr = cluster_.workers[static_cast<std::size_t>(w)].region;
    return p2p_time(wr, cluster_.gps_region, cluster_.message_bytes, cluster_);
  }

  double p2p_lps_gps(int l) const {
    const int lr = cluster_.lps_placement[static_cast<std::size_t>(l)].region;
    return p2p_time(lr, cluster_.gps_region, cluster_.message_bytes, cluster_);
  }

  void maybe_start_round(int w, double t, const std::string& ver) {
    if (!budget_allows(t)) return;
    const int steps = steps_for(w);
    Event e = make(t, worker_name(w), EventKind::WorkerStart);
    e.worker = w;
    e.round = ++round_of_[static_cast<std::size_t>(w)];
    e.steps = steps;
    e.step0 = cum_steps_[static_cast<std::size_t>(w)];
    e.ver = ver;
    cum_steps_[static_cast<std::size_t>(w)] += static_cast<uint64_t>(steps);
    account_round(steps);
    push(std::move(e));
  }

  void handle(const Event& e) {
    switch (e.kind) {
      case EventKind::WorkerStart: {
        const double speed =
            cluster_.workers[static_cast<std::size_t>(e.worker)].speed;
        Event f = make(e.t + compute_time(e.steps, speed, cluster_),
                       e.actor, EventKind::WorkerFinish);
        f.worker = e.worker;
        f.round = e.round;
        f.steps = e.steps;
        push(std::move(f));
        break;
      }
      case EventKind::WorkerFinish: {
        if (strat_.hierarchical()) {
          const int l = cluster_.lps_of_worker(e.worker);
          send(e.t, e.actor, lps_name(l), MsgKind::WorkerDelta,
               p2p_worker_lps(e.worker), e.worker, l, e.round, "");
        } else {
          send(e.t, e.actor, "gps", MsgKind::WorkerDelta,
               p2p_worker_gps(e.worker), e.worker, -1, e.round, "");
        }
        break;
      }
      case EventKind::MsgArrive: {
        on_arrive(e);
        break;
      }
      case EventKind::LpsApplyDelta: {
        // Reply to the contributing worker with the freshly updated model.
        send(e.t, e.actor, worker_name(e.worker), MsgKind::ModelToWorker,
             p2p_worker_lps(e.worker), e.worker, e.lps, -1, e.ver);
        if (e.sendgps)
          send(e.t, e.actor, "gps", MsgKind::LpsDelta, p2p_lps_gps(e.lps), -1,
               e.lps, -1, "");
        break;
      }
      case EventKind::GpsApply: {
        if (strat_.kind == StrategyKind::AsyncLocalSgd) {
          send(e.t, "gps", worker_name(e.worker), MsgKind::ModelToWorker,
               p2p_worker_gps(e.worker), e.worker, -1, -1, e.ver);
        } else if (strat_.hierarchical()) {
          send(e.t, "gps", lps_name(e.lps), MsgKind::GlobalModel,
               p2p_lps_gps(e.lps), -1, e.lps, -1, e.ver);
        }
        break;
      }
      case EventKind::LpsMerge:
      case EventKind::MsgSend:
      case EventKind::Barrier:
        break;
    }
  }

  void on_arrive(const Event& e) {
    switch (e.mk) {
      case MsgKind::ModelToWorker: {
        maybe_start_round(e.worker, e.t, e.ver);
        break;
      }
      case MsgKind::WorkerDelta: {
        if (strat_.hierarchical()) {
          const auto l = static_cast<std::size_t>(e.lps);
          Event a = make(e.t, e.actor, EventKind::LpsApplyDelta);
          a.worker = e.worker;
          a.lps = e.lps;
          a.round = e.round;
          a.tctr = ++lps_t_[l];
          a.ver = lps_name(e.lps) + ":" + std::to_string(++lps_ver_[l]);
          a.sendgps =
              lps_t_[l] - lps_t_last_[l] == static_cast<uint64_t>(strat_.k);
          push(std::move(a));
        } else {
          Event a = make(e.t, "gps", EventKind::GpsApply);
          a.worker = e.worker;
          a.round = e.round;
          a.ver = "gps:" + std::to_string(++gps_ver_);
          push(std::move(a));
        }
        break;
      }
      case MsgKind::LpsDelta: {
        Event a = make(e.t, "gps", EventKind::GpsApply);
        a.lps = e.lps;
        a.ver = "gps:" + std::to_string(++gps_ver_);
        push(std::move(a));
        break;
      }
      case MsgKind::GlobalModel: {
        const auto l = static_cast<std::size_t>(e.lps);
        Event m = make(e.t, e.actor, EventKind::LpsMerge);
        m.lps = e.lps;
        m.gver = e.ver;
        m.ver = lps_name(e.lps) + ":" + std::to_string(++lps_ver_[l]);
        lps_t_last_[l] = lps_t_[l];
        push(std::move(m));
        break;
      }
      default:
        break;
    }
  }

  void generate_async() {
    // Initial schedule: the serving tier sends the initial model to every
    // worker; uplink contention is ignored.
    const int n = static_cast<int>(cluster_.workers.size());
    for (int w = 0; w < n; ++w) {
      if (strat_.hierarchical()) {
        const int l = cluster_.lps_of_worker(w);
        send(0.0, lps_name(l), worker_name(w), MsgKind::ModelToWorker,
             p2p_worker_lps(w), w, l, -1, lps_name(l) + ":0");
      } else {
        send(0.0, "gps", worker_name(w), MsgKind::ModelToWorker,
             p2p_worker_gps(w), w, -1, -1, "gps:0");
      }
    }
    while (!queue_.empty()) {
      Event e = queue_.top();
      queue_.pop();
      handle(e);
      trace_.events.push_back(std::move(e));
    }
  }

  void generate_barrier() {
    const int n = static_cast<int>(cluster_.workers.size());
    std::vector<int> participant_regions;
    for (const auto& w : cluster_.workers)
      participant_regions.push_back(w.region);
    const double t_ar =
        ring_allreduce_time(participant_regions, cluster_.message_bytes,
                            cluster_);

    double t = 0.0;
    int64_t round = 0;
    while (budget_allows(t)) {
      double t_bar = t;
      for (int w = 0; w < n; ++w) {
        const int steps = steps_for(w);
        Event s = make(t, worker_name(w), EventKind::WorkerStart);
        s.worker = w;
        s.round = round;
        s.steps = steps;
        s.step0 = cum_steps_[static_cast<std::size_t>(w)];
        s.ver = "gps:" + std::to_string(round);
        cum_steps_[static_cast<std::size_t>(w)] +=
            static_cast<uint64_t>(steps);
        account_round(steps);
        const double speed = cluster_.workers[static_cast<std::size_t>(w)].speed;
        const double fin = t + compute_time(steps, speed, cluster_);
        t_bar = std::max(t_bar, fin);
        trace_.events.push_back(std::move(s));
        Event f = make(fin, worker_name(w), EventKind::WorkerFinish);
        f.worker = w;
        f.round = round;
        f.steps = steps;
        trace_.events.push_back(std::move(f));
      }
      Event b = make(t_bar, "gps", EventKind::Barrier);
      b.round = round;
      trace_.events.push_back(std::move(b));

      const uint64_t id = next_msg_++;
      Event ms = make(t_bar, "gps", EventKind::MsgSend);
      ms.msg = id;
      ms.mk = MsgKind::AllReduce;
      ms.src = "gps";
      ms.dst = "gps";
      ms.dur = t_ar;
      ms.round = round;
      trace_.events.push_back(std::move(ms));
      Event ma = make(t_bar + t_ar, "gps", EventKind::MsgArrive);
      ma.msg = id;
      ma.mk = MsgKind::AllReduce;
      ma.src = "gps";
      ma.dst = "gps";
      ma.dur = t_ar;
      ma.round = round;
      trace_.events.push_back(std::move(ma));

      Event g = make(t_bar + t_ar, "gps", EventKind::GpsApply);
      g.round = round;
      g.ver = "gps:" + std::to_string(round + 1);
      trace_.events.push_back(std::move(g));

      t = t_bar + t_ar;
      ++round;
    }
    if (round == 0)
      fail(Errc::config, "stop: budget too small to schedule any round");
  }

  ClusterSpec cluster_;
  StrategyConfig strat_;
  StopRule stop_;
  double samples_per_step_;
  double s_fastest_;
  Trace trace_;
  std::priority_queue<Event, std::vector<Event>, EventOrder> queue_;
  uint64_t next_seq_ = 0;
  uint64_t next_msg_ = 1;
  std::vector<int64_t> round_of_;
  std::vector<uint64_t> cum_steps_;
  std::vector<uint64_t> lps_t_, lps_t_last_, lps_ver_;
  uint64_t gps_ver_ = 0;
  uint64_t total_steps_ = 0;
  double total_samples_ = 0.0;
};

}  // namespace

Trace generate_trace(const ClusterSpec& cluster, const StrategyConfig& strategy,
                     const StopRule& stop, double samples_per_step,
                     const std::string& config_hash, uint64_t seed) {
  Generator g(cluster, strategy, stop, samples_per_step, config_hash, seed);
  return g.run();
}

}  // namespace halosim
