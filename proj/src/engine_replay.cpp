#include <algorithm>
#include <cmath>
#include <condition_variable>
#include <deque>
#include <functional>
#include <future>
#include <map>
#include <mutex>
#include <thread>

#include "halosim/engine.hpp"

namespace halosim {

namespace {

// Minimal pool for worker-round computations. Rounds of the same worker are
// submitted only after the previous one was joined, so per-worker state
// threads through safely; rounds of different workers run concurrently.
class Pool {
 public:
  explicit Pool(int n) {
    for (int i = 0; i < n; ++i)
      threads_.emplace_back([this] { loop(); });
  }

  ~Pool() {
    {
      std::lock_guard<std::mutex> lock(mu_);
      done_ = true;
    }
    cv_.notify_all();
    for (auto& t : threads_) t.join();
  }

  std::future<WorkerRoundResult> submit(
      std::function<WorkerRoundResult()> fn) {
    if (threads_.empty()) {
      std::promise<WorkerRoundResult> p;
      try {
        p.set_value(fn());
      } catch (...) {
        p.set_exception(std::current_exception());
      }
      return p.get_future();
    }
    auto task = std::make_shared<std::packaged_task<WorkerRoundResult()>>(
        std::move(fn));
    auto fut = task->get_future();
    {
      std::lock_guard<std::mutex> lock(mu_);
      queue_.push_back([task] { (*task)(); });
    }
    cv_.notify_one();
    return fut;
  }

 private:
  void loop() {
    for (;;) {
      std::function<void()> job;
      {
        std::unique_lock<std::mutex> lock(mu_);
        cv_.wait(lock, [this] { return done_ || !queue_.empty(); });
        if (queue_.empty()) return;
        job = std::move(queue_.front());
        queue_.pop_front();
      }
      job();
    }
  }

  std::vector<std::thread> threads_;
  std::deque<std::function<void()>> queue_;
  std::mutex mu_;
  std::condition_variable cv_;
  bool done_ = false;
};

class Replayer {
 public:
  Replayer(const Trace& trace, const Workload& task,
           const StrategyConfig& strategy, const WorkerOptConfig& wopt,
           const ReplayOptions& opts)
      : trace_(trace),
        task_(task),
        strat_(strategy),
        wopt_(wopt),
        opts_(opts) {
    if (trace.header.strategy != strategy_name(strat_.kind))
      fail(Errc::config, "replay: trace strategy '" + trace.header.strategy +
                             "' does not match config '" +
                             strategy_name(strat_.kind) + "'");
    const int n_workers = count_actors("w");
    if (n_workers != task.num_workers())
      fail(Errc::config,
           "replay: workload has " + std::to_string(task.num_workers()) +
               " workers but trace has " + std::to_string(n_workers));

    NesterovConfig gcfg = strat_.global_opt;
    if (!strat_.use_global_momentum) gcfg.beta = 0.0;

    const Vec init = task.initial_model();
    if (strat_.hierarchical()) {
      const int n_lps = count_actors("lps");
      for (int l = 0; l < n_lps; ++l) {
        lps_.push_back(std::make_unique<LpsState>(init, strat_.local_opt,
                                                  strat_.k, strat_.alpha));
        last_merged_global_.push_back(std::make_shared<const Vec>(init));
        pending_lps_delta_.emplace_back();
        snapshots_["lps" + std::to_string(l) + ":0"] =
            std::make_shared<const Vec>(init);
      }
      gps_ = std::make_unique<GpsState>(init, gcfg);
      snapshots_["gps:0"] = std::make_shared<const Vec>(init);
    } else if (strat_.kind == StrategyKind::AsyncLocalSgd) {
      gps_ = std::make_unique<GpsState>(init, gcfg);
      snapshots_["gps:0"] = std::make_shared<const Vec>(init);
    } else {
      outer_model_ = init;
      if (strat_.kind == StrategyKind::SyncSgd) {
        sync_opt_ = std::make_unique<InnerOpt>(wopt_.kind, init.size(),
                                               wopt_.adam);
      } else {
        outer_nes_ = std::make_unique<Nesterov>(gcfg, init.size());
      }
      snapshots_["gps:0"] = std::make_shared<const Vec>(init);
    }
    for (int w = 0; w < n_workers; ++w)
      inner_.emplace_back(wopt_.kind, init.size(), wopt_.adam);

    report_.config_hash = trace.header.config_hash;
    report_.seed = trace.header.seed;
    report_.strategy = trace.header.strategy;
    if (opts_.retain_staleness) report_.staleness = StalenessStats{};
  }

  RunReport run(Vec* final_model_out) {
    record_loss(0.0);
    for (const Event& e : trace_.events) {
      try {
        if (handle(e)) {
          report_.end_time = e.t;  // reached the target loss
          break;
        }
      } catch (const SimError& err) {
        if (err.code() == Errc::numeric || err.code() == Errc::diverged) {
          report_.diverged = true;
          report_.diverged_seq = e.seq;
          report_.end_time = e.t;
          break;
        }
        throw;
      }
      report_.end_time = e.t;
    }
    drain_tasks();

    const Vec& final_model = global_model();
    report_.final_model_hash = hash_vec(final_model);
    if (final_model_out) *final_model_out = final_model;
    if (!report_.diverged) {
      const double fl = task_.full_loss(final_model);
      if (!std::isfinite(fl)) {
        report_.diverged = true;
      } else {
        push_loss_sample(report_.end_time, fl);
      }
    }
    if (!report_.losses.empty())
      report_.final_loss = report_.losses.back().loss;
    report_.total_samples = samples_done_;
    report_.trace_hash = trace_.hash();
    report_.breakdown = runtime_breakdown(trace_);
    return std::move(report_);
  }

 private:
  int count_actors(const std::string& prefix) const {
    int n = 0;
    for (const auto& a : trace_.header.actors)
      if (a.size() > prefix.size() && a.rfind(prefix, 0) == 0) ++n;
    return n;
  }

  const Vec& global_model() const {
    if (gps_) return gps_->model();
    return outer_model_;
  }

  ModelSnapshot lookup_snapshot(const std::string& ver, uint64_t seq) {
    auto it = snapshots_.find(ver);
    if (it == snapshots_.end())
      fail(Errc::invalid_argument, "replay: version " + ver +
                                       " not materialized at seq " +
                                       std::to_string(seq));
    return it->second;
  }

  void consume_snapshot(const std::string& ver) {
    // Initial versions (counter 0) seed several workers; keep them.
    if (ver.size() >= 2 && ver.substr(ver.size() - 2) == ":0") return;
    snapshots_.erase(ver);
  }

  void submit_round(const Event& e) {
    ModelSnapshot snap = lookup_snapshot(e.ver, e.seq);
    // Barrier rounds share one version across workers; it is consumed at
    // the round's GpsApply instead.
    if (!strat_.barrier()) consume_snapshot(e.ver);
    if (opts_.retain_staleness) round_start_[{e.worker, e.round}] = snap;
    InnerOpt* inner = &inner_[static_cast<std::size_t>(e.worker)];
    const Workload* task = &task_;
    const WorkerOptConfig wopt = wopt_;
    const int worker = e.worker;
    const uint64_t step0 = e.step0;
    const int steps = e.steps;
    tasks_[{e.worker, e.round}] = pool_.submit([=]() {
      return worker_round(*task, worker, *snap, *inner, wopt, step0, steps);
    });
  }

  WorkerRoundResult join_round(int worker, int64_t round, uint64_t seq) {
    auto it = tasks_.find({worker, round});
    if (it == tasks_.end())
      fail(Errc::invalid_argument,
           "replay: no computed round for worker " + std::to_string(worker) +
               " round " + std::to_string(round) + " at seq " +
               std::to_string(seq));
    WorkerRoundResult r = it->second.get();
    tasks_.erase(it);
    return r;
  }

  void note_staleness(int tier, uint64_t seq, double value) {
    if (!report_.staleness) return;
    auto& st = *report_.staleness;
    st.series.push_back({seq, tier, value});
    if (tier == 0)
      st.d_g_max = std::max(st.d_g_max, value);
    else
      st.d_l_max = std::max(st.d_l_max, value);
  }

  ModelSnapshot staleness_ref(int worker, int64_t round) {
    auto it = round_start_.find({worker, round});
    if (it == round_start_.end()) return nullptr;
    ModelSnapshot s = it->second;
    round_start_.erase(it);
    return s;
  }

  // Returns true when the target-loss truncation fires.
  bool handle(const Event& e) {
    switch (e.kind) {
      case EventKind::WorkerStart: {
        if (strat_.kind == StrategyKind::SyncSgd) break;  // done at GpsApply
        submit_round(e);
        break;
      }
      case EventKind::WorkerFinish: {
        samples_done_ += static_cast<double>(e.steps) * task_.samples_per_step();
        break;
      }
      case EventKind::LpsApplyDelta: {
        auto& lps = *lps_[static_cast<std::size_t>(e.lps)];
        WorkerRoundResult r = join_round(e.worker, e.round, e.seq);
        if (report_.staleness) {
          ModelSnapshot ref = staleness_ref(e.worker, e.round);
          if (ref) note_staleness(1, e.seq, l2_dist(lps.model(), *ref));
        }
        LpsState::ApplyResult res = lps.on_worker_delta(r.delta);
        if (res.delta_to_gps.has_value() != e.sendgps)
          fail(Errc::invalid_argument,
               "replay: LPS send decision diverged from trace at seq " +
                   std::to_string(e.seq));
        snapshots_[e.ver] = res.model_for_worker;
        if (res.delta_to_gps)
          pending_lps_delta_[static_cast<std::size_t>(e.lps)].push_back(
              std::move(*res.delta_to_gps));
        break;
      }
      case EventKind::GpsApply: {
        return on_gps_apply(e);
      }
      case EventKind::LpsMerge: {
        auto& lps = *lps_[static_cast<std::size_t>(e.lps)];
        ModelSnapshot g = lookup_snapshot(e.gver, e.seq);
        consume_snapshot(e.gver);
        lps.on_global_model(*g);
        last_merged_global_[static_cast<std::size_t>(e.lps)] = g;
        break;
      }
      case EventKind::MsgSend:
      case EventKind::MsgArrive:
      case EventKind::Barrier:
        break;
    }
    return false;
  }

  bool on_gps_apply(const Event& e) {
    if (strat_.hierarchical()) {
      auto& pending = pending_lps_delta_[static_cast<std::size_t>(e.lps)];
      if (pending.empty())
        fail(Errc::invalid_argument,
             "replay: GPS apply without pending LPS delta at seq " +
                 std::to_string(e.seq));
      Vec delta = std::move(pending.front());
      pending.pop_front();
      if (report_.staleness)
        note_staleness(0, e.seq,
                       l2_dist(gps_->model(),
                               *last_merged_global_[static_cast<std::size_t>(
                                   e.lps)]));
      snapshots_[e.ver] = gps_->on_delta(delta);
    } else if (strat_.kind == StrategyKind::AsyncLocalSgd) {
      WorkerRoundResult r = join_round(e.worker, e.round, e.seq);
      if (report_.staleness) {
        ModelSnapshot ref = staleness_ref(e.worker, e.round);
        if (ref) note_staleness(0, e.seq, l2_dist(gps_->model(), *ref));
      }
      snapshots_[e.ver] = gps_->on_delta(r.delta);
    } else if (strat_.kind == StrategyKind::SyncSgd) {
      const auto step = static_cast<uint64_t>(e.round);
      if (report_.staleness) {
        ModelSnapshot ref = lookup_snapshot("gps:" + std::to_string(e.round),
                                            e.seq);
        note_staleness(0, e.seq, l2_dist(outer_model_, *ref));
      }
      sync_sgd_step(task_, outer_model_, *sync_opt_, wopt_, step);
      consume_snapshot("gps:" + std::to_string(e.round));
      snapshots_[e.ver] = std::make_shared<const Vec>(outer_model_);
    } else {
      // Barrier local-SGD round: average every worker displacement.
      std::vector<Vec> deltas;
      for (int w = 0; w < task_.num_workers(); ++w) {
        WorkerRoundResult r = join_round(w, e.round, e.seq);
        if (report_.staleness) {
          ModelSnapshot ref = staleness_ref(w, e.round);
          if (ref) note_staleness(0, e.seq, l2_dist(outer_model_, *ref));
        }
        deltas.push_back(std::move(r.delta));
      }
      apply_averaged_deltas(outer_model_, *outer_nes_, deltas);
      consume_snapshot("gps:" + std::to_string(e.round));
      snapshots_[e.ver] = std::make_shared<const Vec>(outer_model_);
    }

    ++updates_since_sample_;
    if (e.t >= next_sample_t_ ||
        updates_since_sample_ >= opts_.loss_every_updates) {
      const double loss = record_loss(e.t);
      next_sample_t_ = e.t + opts_.loss_every_s;
      updates_since_sample_ = 0;
      if (!std::isnan(opts_.stop_at_loss) && loss <= opts_.stop_at_loss)
        return true;
    }
    return false;
  }

  double record_loss(double t) {
    const double loss = task_.full_loss(global_model());
    if (!std::isfinite(loss))
      fail(Errc::diverged, "full loss non-finite at t=" + std::to_string(t));
    push_loss_sample(t, loss);
    return loss;
  }

  void push_loss_sample(double t, double loss) {
    if (!report_.losses.empty() && report_.losses.back().t == t) {
      report_.losses.back().loss = loss;
      report_.losses.back().samples = samples_done_;
      return;
    }
    report_.losses.push_back({t, samples_done_, loss});
  }

  void drain_tasks() {
    // Rounds scheduled but never consumed (budget drained mid-flight, early
    // stop, divergence) still finish so thread state is settled.
    for (auto& [key, fut] : tasks_) {
      try {
        fut.get();
      } catch (...) {
        // Unconsumed round results cannot affect the model.
      }
    }
    tasks_.clear();
  }

  const Trace& trace_;
  const Workload& task_;
  StrategyConfig strat_;
  WorkerOptConfig wopt_;
  ReplayOptions opts_;

  std::vector<std::unique_ptr<LpsState>> lps_;
  std::unique_ptr<GpsState> gps_;
  Vec outer_model_;
  std::unique_ptr<Nesterov> outer_nes_;
  std::unique_ptr<InnerOpt> sync_opt_;
  std::vector<InnerOpt> inner_;
  std::map<std::string, ModelSnapshot> snapshots_;
  std::map<std::pair<int, int64_t>, std::future<WorkerRoundResult>> tasks_;
  std::map<std::pair<int, int64_t>, ModelSnapshot> round_start_;
  std::vector<ModelSnapshot> last_merged_global_;
  std::vector<std::deque<Vec>> pending_lps_delta_;

  RunReport report_;
  double samples_done_ = 0.0;
  double next_sample_t_ = 0.0;
  uint64_t updates_since_sample_ = 0;

  // Destroyed first: pending jobs reference the members above.
  Pool pool_{opts_.threads > 1 ? opts_.threads : 0};
};

}  // namespace

RunReport replay(const Trace& trace, const Workload& task,
                 const StrategyConfig& strategy, const WorkerOptConfig& wopt,
                 const ReplayOptions& opts, Vec* final_model_out) {
  validate_trace(trace);
  Replayer r(trace, task, strategy, wopt, opts);
  return r.run(final_model_out);
}

std::vector<WorkerBreakdown> runtime_breakdown(const Trace& trace) {
  int n_workers = 0;
  for (const auto& a : trace.header.actors)
    if (a.size() > 1 && a[0] == 'w') ++n_workers;

  std::vector<std::vector<double>> starts(static_cast<std::size_t>(n_workers));
  std::vector<std::vector<double>> finishes(static_cast<std::size_t>(n_workers));
  std::vector<std::vector<double>> delta_arrive(
      static_cast<std::size_t>(n_workers));
  std::vector<double> barriers;
  std::vector<double> allreduce_done;

  for (const Event& e : trace.events) {
    switch (e.kind) {
      case EventKind::WorkerStart:
        starts[static_cast<std::size_t>(e.worker)].push_back(e.t);
        break;
      case EventKind::WorkerFinish:
        finishes[static_cast<std::size_t>(e.worker)].push_back(e.t);
        break;
      case EventKind::Barrier:
        barriers.push_back(e.t);
        break;
      case EventKind::MsgArrive:
        if (e.mk == MsgKind::WorkerDelta && e.worker >= 0)
          delta_arrive[static_cast<std::size_t>(e.worker)].push_back(e.t);
        if (e.mk == MsgKind::AllReduce) allreduce_done.push_back(e.t);
        break;
      default:
        break;
    }
  }

  std::vector<WorkerBreakdown> out(static_cast<std::size_t>(n_workers));
  for (std::size_t w = 0; w < out.size(); ++w) {
    double compute = 0.0, comm = 0.0, stall = 0.0;
    const auto& st = starts[w];
    const auto& fi = finishes[w];
    const std::size_t rounds = std::min(st.size(), fi.size());
    for (std::size_t i = 0; i < rounds; ++i) compute += fi[i] - st[i];
    for (std::size_t i = 0; i + 1 < st.size(); ++i) {
      if (i >= fi.size()) break;
      const double gap_lo = fi[i];
      const double gap_hi = st[i + 1];
      const auto b = std::lower_bound(barriers.begin(), barriers.end(), gap_lo);
      if (b != barriers.end() && *b <= gap_hi) {
        stall += *b - gap_lo;
        comm += gap_hi - *b;
      } else {
        comm += gap_hi - gap_lo;
      }
    }
    // Tail after the last finish.
    if (!fi.empty() && fi.size() >= st.size()) {
      const double last_fin = fi.back();
      const auto b = std::lower_bound(barriers.begin(), barriers.end(), last_fin);
      if (b != barriers.end()) {
        stall += *b - last_fin;
        const auto ar =
            std::lower_bound(allreduce_done.begin(), allreduce_done.end(), *b);
        if (ar != allreduce_done.end()) comm += *ar - *b;
      } else if (barriers.empty()) {
        const auto& da = delta_arrive[w];
        const auto it = std::lower_bound(da.begin(), da.end(), last_fin);
        if (it != da.end()) comm += *it - last_fin;
      }
    }
    const double total = compute + comm + stall;
    if (total > 0.0) {
      out[w].compute_frac = compute / total;
      out[w].comm_frac = comm / total;
      out[w].stall_frac = stall / total;
    }
  }
  return out;
}

StalenessStats measure_staleness(const RunReport& report) {
  if (!report.staleness)
    fail(Errc::invalid_argument,
         "measure_staleness: replay ran without snapshot retention");
  return *report.staleness;
}

}  // namespace halosim
