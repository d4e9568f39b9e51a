#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "halosim/common.hpp"

namespace halosim {

// Flat dense parameter/gradient vector. All server-side arithmetic is done
// in 64-bit; every operation that produces a Vec re-checks finiteness.
using Vec = std::vector<double>;

void check_finite(const Vec& v, const char* what);
void check_same_dim(const Vec& a, const Vec& b, const char* what);

// a*x + y
Vec axpy(double a, const Vec& x, const Vec& y);
// y += a*x
void axpy_inplace(double a, const Vec& x, Vec& y);

// (1-alpha)*local + alpha*global, alpha in [0,1].
Vec convex_merge(const Vec& local, const Vec& global, double alpha);

// a - b
Vec sub(const Vec& a, const Vec& b);

// -a (exact)
Vec neg(const Vec& a);

double l2_norm(const Vec& v);
double l2_dist(const Vec& a, const Vec& b);

// Elementwise mean of equal-dimension vectors.
Vec mean(const std::vector<Vec>& vs);

// FNV-1a over the little-endian byte image.
uint64_t hash_vec(const Vec& v);

// Snapshot wire format: uint64 length prefix, then 64-bit reals, all
// little-endian.
void write_vec(std::ostream& os, const Vec& v);
Vec read_vec(std::istream& is);
void save_vec(const std::string& path, const Vec& v);
Vec load_vec(const std::string& path);

// Per-actor version stamp. Counters increase by one per state mutation.
struct VersionId {
  std::string actor;
  uint64_t counter = 0;

  bool operator==(const VersionId&) const = default;
  std::string str() const { return actor + ":" + std::to_string(counter); }
  static VersionId parse(const std::string& s);
};

}  // namespace halosim
