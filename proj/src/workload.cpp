#include "halosim/workload.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>

namespace halosim {

QuadraticTask::QuadraticTask(const QuadraticSpec& spec) : spec_(spec) {
  if (spec.num_workers < 1)
    fail(Errc::config, "quadratic.num_workers: must be >= 1");
  if (!spec.hessian_diag.empty()) {
    a_ = spec.hessian_diag;
  } else {
    if (!(spec.cond >= 1.0)) fail(Errc::config, "quadratic.cond: must be >= 1");
    if (!(spec.hessian_max > 0.0))
      fail(Errc::config, "quadratic.hessian_max: must be positive");
    a_.resize(spec.dim);
    const double lo = spec.hessian_max / spec.cond;
    for (std::size_t j = 0; j < spec.dim; ++j) {
      const double t = spec.dim == 1
                           ? 1.0
                           : static_cast<double>(j) /
                                 static_cast<double>(spec.dim - 1);
      a_[j] = lo * std::pow(spec.hessian_max / lo, t);
    }
  }
  for (double v : a_)
    if (!(v > 0.0)) fail(Errc::config, "quadratic.hessian_diag: must be positive");

  theta_star_.assign(a_.size(), 0.0);
  centers_.resize(static_cast<std::size_t>(spec.num_workers));
  for (int w = 0; w < spec.num_workers; ++w) {
    Rng rng(spec.seed, 0x0ffu, static_cast<uint64_t>(w));
    Vec c = theta_star_;
    for (std::size_t j = 0; j < c.size(); ++j)
      c[j] += spec.zeta * rng.next_normal();
    centers_[static_cast<std::size_t>(w)] = std::move(c);
  }
}

const Vec& QuadraticTask::center(int worker) const {
  if (worker < 0 || worker >= num_workers())
    fail(Errc::invalid_argument, "quadratic: worker index out of range");
  return centers_[static_cast<std::size_t>(worker)];
}

Vec QuadraticTask::initial_model() const {
  Vec v(theta_star_);
  for (double& x : v) x += spec_.init_offset;
  return v;
}

Vec QuadraticTask::global_optimum() const {
  Vec m = mean(centers_);
  return m;
}

GradResult QuadraticTask::grad(const Vec& theta, int worker,
                               uint64_t step) const {
  check_finite(theta, "quadratic grad input");
  const Vec& c = center(worker);
  check_same_dim(theta, c, "quadratic grad");
  GradResult r;
  r.grad.resize(theta.size());
  double loss = 0.0;
  for (std::size_t j = 0; j < theta.size(); ++j) {
    const double d = theta[j] - c[j];
    r.grad[j] = a_[j] * d;
    loss += 0.5 * a_[j] * d * d;
  }
  if (spec_.noise_std > 0.0) {
    Rng rng(spec_.seed, 0x6e01u, static_cast<uint64_t>(worker), step);
    for (std::size_t j = 0; j < r.grad.size(); ++j)
      r.grad[j] += spec_.noise_std * rng.next_normal();
  }
  r.loss = loss;
  return r;
}

double QuadraticTask::full_loss(const Vec& theta) const {
  check_finite(theta, "quadratic full_loss input");
  double total = 0.0;
  for (const Vec& c : centers_) {
    double loss = 0.0;
    for (std::size_t j = 0; j < theta.size(); ++j) {
      const double d = theta[j] - c[j];
      loss += 0.5 * a_[j] * d * d;
    }
    total += loss;
  }
  return total / static_cast<double>(centers_.size());
}

// ---------------------------------------------------------------------------

std::vector<std::vector<uint32_t>> shard_indices(
    std::size_t num_samples, const std::vector<uint32_t>& source_of,
    int num_workers, ShardMode mode, uint64_t seed) {
  if (num_workers < 1) fail(Errc::config, "shard: num_workers must be >= 1");
  std::vector<std::vector<uint32_t>> shards(
      static_cast<std::size_t>(num_workers));

  if (mode == ShardMode::Iid) {
    std::vector<uint32_t> perm(num_samples);
    std::iota(perm.begin(), perm.end(), 0u);
    Rng rng(seed, 0x54a3d1ull);
    for (std::size_t i = num_samples; i > 1; --i) {
      const std::size_t j = rng.next_below(i);
      std::swap(perm[i - 1], perm[j]);
    }
    for (std::size_t i = 0; i < perm.size(); ++i)
      shards[i % static_cast<std::size_t>(num_workers)].push_back(perm[i]);
    return shards;
  }

  if (source_of.size() != num_samples)
    fail(Errc::invalid_argument, "shard: source ids missing for non-iid mode");
  std::set<uint32_t> sources(source_of.begin(), source_of.end());
  if (static_cast<int>(sources.size()) < num_workers)
    fail(Errc::config, "shard: more workers than sources in non-iid mode");
  std::map<uint32_t, int> owner;
  int next = 0;
  for (uint32_t s : sources) owner[s] = next++ % num_workers;
  for (std::size_t i = 0; i < num_samples; ++i)
    shards[static_cast<std::size_t>(owner[source_of[i]])].push_back(
        static_cast<uint32_t>(i));
  return shards;
}

CharLmTask::CharLmTask(const CharLmSpec& spec) : spec_(spec) {
  if (spec.context < 1) fail(Errc::config, "charlm.context: must be >= 1");
  if (spec.embed < 1 || spec.hidden < 1)
    fail(Errc::config, "charlm: embed and hidden must be >= 1");
  if (spec.batch < 1) fail(Errc::config, "charlm.batch: must be >= 1");
  if (spec.stride < 1) fail(Errc::config, "charlm.stride: must be >= 1");

  std::ifstream is(spec.corpus_path);
  if (!is) fail(Errc::io, "charlm: cannot open corpus " + spec.corpus_path);
  std::map<std::string, std::string> by_source;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      by_source["text"] += line;
      by_source["text"] += '\n';
    } else {
      by_source[line.substr(0, tab)] += line.substr(tab + 1);
      by_source[line.substr(0, tab)] += '\n';
    }
  }
  if (by_source.empty()) fail(Errc::config, "charlm: empty corpus");

  std::set<char> chars;
  for (auto& [name, text] : by_source) {
    source_names_.push_back(name);
    for (char c : text) chars.insert(c);
    source_texts_.push_back(std::move(text));
  }
  vocab_.assign(chars.begin(), chars.end());
  char_to_id_.assign(256, -1);
  for (std::size_t i = 0; i < vocab_.size(); ++i)
    char_to_id_[static_cast<unsigned char>(vocab_[i])] = static_cast<int>(i);

  const auto ctx = static_cast<std::size_t>(spec.context);
  for (std::size_t s = 0; s < source_texts_.size(); ++s) {
    const std::string& text = source_texts_[s];
    if (text.size() < ctx + 1) continue;
    for (std::size_t pos = 0; pos + ctx < text.size();
         pos += static_cast<std::size_t>(spec.stride)) {
      samples_.push_back({static_cast<uint32_t>(s), static_cast<uint32_t>(pos)});
    }
  }
  if (samples_.empty())
    fail(Errc::config, "charlm: corpus too short for context length");

  const auto v = vocab_.size();
  const auto e = static_cast<std::size_t>(spec.embed);
  const auto h = static_cast<std::size_t>(spec.hidden);
  dim_ = v * e + ctx * e * h + h + h * h + h + h * v + v;

  build_shards();
}

void CharLmTask::build_shards() {
  std::vector<uint32_t> source_of(samples_.size());
  for (std::size_t i = 0; i < samples_.size(); ++i)
    source_of[i] = samples_[i].source;
  shards_ = shard_indices(samples_.size(), source_of, spec_.num_workers,
                          spec_.shard_mode, spec_.seed);
  for (const auto& s : shards_)
    if (s.empty()) fail(Errc::config, "charlm: a worker received an empty shard");
}

int CharLmTask::char_at(const Sample& s, int k) const {
  const char c = source_texts_[s.source][s.pos + static_cast<std::size_t>(k)];
  return char_to_id_[static_cast<unsigned char>(c)];
}

int CharLmTask::target_of(const Sample& s) const {
  const char c =
      source_texts_[s.source][s.pos + static_cast<std::size_t>(spec_.context)];
  return char_to_id_[static_cast<unsigned char>(c)];
}

Vec CharLmTask::initial_model() const {
  Rng rng(spec_.seed, 0x111ull);
  Vec v(dim_);
  for (double& x : v) x = spec_.init_scale * rng.next_normal();
  return v;
}

// Layout: emb[V*E] | W1[(C*E)*H] | b1[H] | W2[H*H] | b2[H] | W3[H*V] | b3[V]
double CharLmTask::forward_backward(const Vec& theta,
                                    const std::vector<uint32_t>& batch,
                                    Vec* grad_out) const {
  const auto v = vocab_.size();
  const auto e = static_cast<std::size_t>(spec_.embed);
  const auto h = static_cast<std::size_t>(spec_.hidden);
  const auto ctx = static_cast<std::size_t>(spec_.context);
  const auto in = ctx * e;

  const std::size_t off_emb = 0;
  const std::size_t off_w1 = off_emb + v * e;
  const std::size_t off_b1 = off_w1 + in * h;
  const std::size_t off_w2 = off_b1 + h;
  const std::size_t off_b2 = off_w2 + h * h;
  const std::size_t off_w3 = off_b2 + h;
  const std::size_t off_b3 = off_w3 + h * v;

  if (grad_out) grad_out->assign(dim_, 0.0);

  std::vector<double> a0(in), z1(h), a1(h), z2(h), a2(h), z3(v), p(v);
  std::vector<double> dz1(h), dz2(h), da0(in);
  double total_loss = 0.0;

  for (uint32_t idx : batch) {
    const Sample& s = samples_[idx];
    for (std::size_t k = 0; k < ctx; ++k) {
      const auto c = static_cast<std::size_t>(char_at(s, static_cast<int>(k)));
      for (std::size_t j = 0; j < e; ++j)
        a0[k * e + j] = theta[off_emb + c * e + j];
    }
    for (std::size_t j = 0; j < h; ++j) {
      double acc = theta[off_b1 + j];
      for (std::size_t i = 0; i < in; ++i)
        acc += a0[i] * theta[off_w1 + i * h + j];
      z1[j] = acc;
      a1[j] = acc > 0.0 ? acc : 0.0;
    }
    for (std::size_t j = 0; j < h; ++j) {
      double acc = theta[off_b2 + j];
      for (std::size_t i = 0; i < h; ++i)
        acc += a1[i] * theta[off_w2 + i * h + j];
      z2[j] = acc;
      a2[j] = acc > 0.0 ? acc : 0.0;
    }
    double zmax = -1e300;
    for (std::size_t j = 0; j < v; ++j) {
      double acc = theta[off_b3 + j];
      for (std::size_t i = 0; i < h; ++i)
        acc += a2[i] * theta[off_w3 + i * v + j];
      z3[j] = acc;
      zmax = std::max(zmax, acc);
    }
    double zsum = 0.0;
    for (std::size_t j = 0; j < v; ++j) {
      p[j] = std::exp(z3[j] - zmax);
      zsum += p[j];
    }
    for (std::size_t j = 0; j < v; ++j) p[j] /= zsum;
    const auto target = static_cast<std::size_t>(target_of(s));
    total_loss += -std::log(std::max(p[target], 1e-300));

    if (!grad_out) continue;
    Vec& g = *grad_out;
    // dz3 reuses p.
    p[target] -= 1.0;
    for (std::size_t j = 0; j < v; ++j) g[off_b3 + j] += p[j];
    for (std::size_t i = 0; i < h; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < v; ++j) {
        g[off_w3 + i * v + j] += a2[i] * p[j];
        acc += theta[off_w3 + i * v + j] * p[j];
      }
      dz2[i] = z2[i] > 0.0 ? acc : 0.0;
    }
    for (std::size_t j = 0; j < h; ++j) g[off_b2 + j] += dz2[j];
    for (std::size_t i = 0; i < h; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < h; ++j) {
        g[off_w2 + i * h + j] += a1[i] * dz2[j];
        acc += theta[off_w2 + i * h + j] * dz2[j];
      }
      dz1[i] = z1[i] > 0.0 ? acc : 0.0;
    }
    for (std::size_t j = 0; j < h; ++j) g[off_b1 + j] += dz1[j];
    for (std::size_t i = 0; i < in; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < h; ++j) {
        g[off_w1 + i * h + j] += a0[i] * dz1[j];
        acc += theta[off_w1 + i * h + j] * dz1[j];
      }
      da0[i] = acc;
    }
    for (std::size_t k = 0; k < ctx; ++k) {
      const auto c = static_cast<std::size_t>(char_at(s, static_cast<int>(k)));
      for (std::size_t j = 0; j < e; ++j)
        g[off_emb + c * e + j] += da0[k * e + j];
    }
  }

  const double inv = 1.0 / static_cast<double>(batch.size());
  if (grad_out)
    for (double& x : *grad_out) x *= inv;
  return total_loss * inv;
}

GradResult CharLmTask::grad(const Vec& theta, int worker, uint64_t step) const {
  check_finite(theta, "charlm grad input");
  if (theta.size() != dim_)
    fail(Errc::invalid_argument, "charlm: model dimension mismatch");
  if (worker < 0 || worker >= spec_.num_workers)
    fail(Errc::invalid_argument, "charlm: worker index out of range");

  const auto& shard = shards_[static_cast<std::size_t>(worker)];
  Rng rng(spec_.seed, 0xba7c4ull, static_cast<uint64_t>(worker), step);
  std::vector<uint32_t> batch(static_cast<std::size_t>(spec_.batch));
  for (auto& b : batch) b = shard[rng.next_below(shard.size())];

  GradResult r;
  r.loss = forward_backward(theta, batch, &r.grad);
  check_finite(r.grad, "charlm grad");
  return r;
}

double CharLmTask::loss_on(const Vec& theta,
                           const std::vector<uint32_t>& samples) const {
  return forward_backward(theta, samples, nullptr);
}

double CharLmTask::full_loss(const Vec& theta) const {
  check_finite(theta, "charlm full_loss input");
  std::vector<uint32_t> all(samples_.size());
  std::iota(all.begin(), all.end(), 0u);
  return forward_backward(theta, all, nullptr);
}

}  // namespace halosim
