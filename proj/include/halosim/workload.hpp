#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "halosim/vec.hpp"

namespace halosim {

enum class ShardMode { Iid, NonIid };

struct GradResult {
  Vec grad;
  double loss = 0.0;
};

// A training objective shared by all strategies. Gradients are keyed by
// (worker, step) so draws replay identically regardless of execution order.
class Workload {
 public:
  virtual ~Workload() = default;

  virtual std::size_t dim() const = 0;
  virtual int num_workers() const = 0;
  virtual Vec initial_model() const = 0;
  virtual GradResult grad(const Vec& theta, int worker, uint64_t step) const = 0;
  // Exact mean objective over every worker's full shard; no sampling noise.
  virtual double full_loss(const Vec& theta) const = 0;
  // Samples consumed by one inner step (for token/sample accounting).
  virtual double samples_per_step() const = 0;
};

struct QuadraticSpec {
  std::size_t dim = 16;
  std::vector<double> hessian_diag;  // explicit diagonal; wins over cond
  double cond = 1.0;                 // log-spaced diagonal in [max/cond, max]
  double hessian_max = 1.0;
  double zeta = 0.0;       // heterogeneity scale on per-worker offsets
  double noise_std = 0.0;  // gradient noise stddev
  double init_offset = 1.0;
  int num_workers = 1;
  uint64_t seed = 0;
};

// F_i(theta) = 1/2 (theta - c_i)' A (theta - c_i) with c_i = theta* + zeta*u_i,
// A diagonal. Gradients get N(0, s^2 I) noise from per-(worker, step) streams.
class QuadraticTask final : public Workload {
 public:
  explicit QuadraticTask(const QuadraticSpec& spec);

  std::size_t dim() const override { return a_.size(); }
  int num_workers() const override { return static_cast<int>(centers_.size()); }
  Vec initial_model() const override;
  GradResult grad(const Vec& theta, int worker, uint64_t step) const override;
  double full_loss(const Vec& theta) const override;
  double samples_per_step() const override { return 1.0; }

  const Vec& hessian_diag() const { return a_; }
  const Vec& center(int worker) const;
  // Minimizer of the mean objective: theta* + zeta * mean(u_i).
  Vec global_optimum() const;

 private:
  QuadraticSpec spec_;
  Vec a_;
  Vec theta_star_;
  std::vector<Vec> centers_;
};

struct CharLmSpec {
  std::string corpus_path;  // plain text or TSV "source<TAB>text" lines
  int context = 80;
  int embed = 8;
  int hidden = 32;
  int batch = 32;
  int stride = 1;  // sample every `stride` characters
  ShardMode shard_mode = ShardMode::Iid;
  int num_workers = 1;
  uint64_t seed = 0;
  double init_scale = 0.08;
};

// Next-character prediction with an embedding followed by two ReLU layers.
// Samples are windows over each source's text; shards are either an i.i.d.
// interleave or a partition by source id.
class CharLmTask final : public Workload {
 public:
  explicit CharLmTask(const CharLmSpec& spec);

  std::size_t dim() const override { return dim_; }
  int num_workers() const override { return spec_.num_workers; }
  Vec initial_model() const override;
  GradResult grad(const Vec& theta, int worker, uint64_t step) const override;
  double full_loss(const Vec& theta) const override;
  double samples_per_step() const override {
    return static_cast<double>(spec_.batch);
  }

  int vocab_size() const { return static_cast<int>(vocab_.size()); }
  std::size_t num_samples() const { return samples_.size(); }
  const std::vector<std::vector<uint32_t>>& shards() const { return shards_; }
  // Mean cross-entropy and gradient over an explicit sample set.
  double loss_on(const Vec& theta, const std::vector<uint32_t>& samples) const;

 private:
  struct Sample {
    uint32_t source = 0;
    uint32_t pos = 0;  // window start within the source text
  };

  int char_at(const Sample& s, int k) const;
  int target_of(const Sample& s) const;
  double forward_backward(const Vec& theta, const std::vector<uint32_t>& batch,
                          Vec* grad_out) const;
  void build_shards();

  CharLmSpec spec_;
  std::vector<std::string> source_texts_;
  std::vector<std::string> source_names_;
  std::string vocab_;                 // sorted distinct characters
  std::vector<int> char_to_id_;       // 256-entry lookup
  std::vector<Sample> samples_;
  std::vector<std::vector<uint32_t>> shards_;  // per worker, sample indices
  std::size_t dim_ = 0;
};

// Deterministic shard assignment, exposed for tests and report metadata.
std::vector<std::vector<uint32_t>> shard_indices(std::size_t num_samples,
                                                 const std::vector<uint32_t>& source_of,
                                                 int num_workers, ShardMode mode,
                                                 uint64_t seed);

}  // namespace halosim
