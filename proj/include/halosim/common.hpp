#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace halosim {

enum class Errc {
  invalid_argument,
  config,
  numeric,
  io,
  diverged,
};

class SimError : public std::runtime_error {
 public:
  SimError(Errc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& msg) {
  throw SimError(code, msg);
}

// FNV-1a, 64-bit. Used for trace and model hashes.
class Fnv1a {
 public:
  void update(const void* data, std::size_t n) noexcept {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h_ ^= p[i];
      h_ *= 1099511628211ULL;
    }
  }
  void update(std::string_view s) noexcept { update(s.data(), s.size()); }
  uint64_t digest() const noexcept { return h_; }

 private:
  uint64_t h_ = 14695981039346656037ULL;
};

inline uint64_t fnv1a(std::string_view s) noexcept {
  Fnv1a h;
  h.update(s);
  return h.digest();
}

std::string to_hex(uint64_t v);
uint64_t from_hex(std::string_view s);

inline uint64_t mix64(uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Counter-based RNG. A stream is fully determined by its key tuple, so any
// draw sequence can be replayed independently of thread scheduling.
class Rng {
 public:
  explicit Rng(uint64_t seed, uint64_t k1 = 0, uint64_t k2 = 0,
               uint64_t k3 = 0) noexcept {
    key_ = mix64(seed);
    key_ = mix64(key_ ^ k1);
    key_ = mix64(key_ ^ k2);
    key_ = mix64(key_ ^ k3);
  }

  uint64_t next_u64() noexcept { return mix64(key_ ^ counter_++); }

  // Uniform in [0, 1).
  double next_unit() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller.
  double next_normal() noexcept;

  // Uniform integer in [0, n).
  uint64_t next_below(uint64_t n) noexcept;

 private:
  uint64_t key_ = 0;
  uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace halosim
