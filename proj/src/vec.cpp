#include "halosim/vec.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace halosim {

void check_finite(const Vec& v, const char* what) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) {
      fail(Errc::numeric, std::string(what) + ": non-finite value at index " +
                              std::to_string(i));
    }
  }
}

void check_same_dim(const Vec& a, const Vec& b, const char* what) {
  if (a.size() != b.size()) {
    fail(Errc::invalid_argument,
         std::string(what) + ": dimension mismatch (" +
             std::to_string(a.size()) + " vs " + std::to_string(b.size()) +
             ")");
  }
}

Vec axpy(double a, const Vec& x, const Vec& y) {
  check_same_dim(x, y, "axpy");
  if (!std::isfinite(a)) fail(Errc::invalid_argument, "axpy: non-finite scalar");
  Vec r(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) r[i] = a * x[i] + y[i];
  check_finite(r, "axpy");
  return r;
}

void axpy_inplace(double a, const Vec& x, Vec& y) {
  check_same_dim(x, y, "axpy");
  if (!std::isfinite(a)) fail(Errc::invalid_argument, "axpy: non-finite scalar");
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
  check_finite(y, "axpy");
}

Vec convex_merge(const Vec& local, const Vec& global, double alpha) {
  check_same_dim(local, global, "convex_merge");
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    fail(Errc::invalid_argument,
         "convex_merge: alpha outside [0,1]: " + std::to_string(alpha));
  }
  Vec r(local.size());
  const double one_minus = 1.0 - alpha;
  for (std::size_t i = 0; i < r.size(); ++i)
    r[i] = one_minus * local[i] + alpha * global[i];
  check_finite(r, "convex_merge");
  return r;
}

Vec sub(const Vec& a, const Vec& b) {
  check_same_dim(a, b, "sub");
  Vec r(a.size());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = a[i] - b[i];
  check_finite(r, "sub");
  return r;
}

Vec neg(const Vec& a) {
  Vec r(a.size());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = -a[i];
  return r;
}

double l2_norm(const Vec& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double l2_dist(const Vec& a, const Vec& b) {
  check_same_dim(a, b, "l2_dist");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

Vec mean(const std::vector<Vec>& vs) {
  if (vs.empty()) fail(Errc::invalid_argument, "mean: empty list");
  Vec r(vs[0].size(), 0.0);
  for (const Vec& v : vs) {
    check_same_dim(v, r, "mean");
    for (std::size_t i = 0; i < r.size(); ++i) r[i] += v[i];
  }
  const double inv = 1.0 / static_cast<double>(vs.size());
  for (double& x : r) x *= inv;
  check_finite(r, "mean");
  return r;
}

namespace {

void put_u64_le(unsigned char* out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out[i] = static_cast<unsigned char>(v >> (8 * i));
}

uint64_t get_u64_le(const unsigned char* in) {
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(in[i]) << (8 * i);
  return v;
}

}  // namespace

uint64_t hash_vec(const Vec& v) {
  Fnv1a h;
  unsigned char buf[8];
  for (double x : v) {
    put_u64_le(buf, std::bit_cast<uint64_t>(x));
    h.update(buf, 8);
  }
  return h.digest();
}

void write_vec(std::ostream& os, const Vec& v) {
  unsigned char buf[8];
  put_u64_le(buf, static_cast<uint64_t>(v.size()));
  os.write(reinterpret_cast<const char*>(buf), 8);
  for (double x : v) {
    put_u64_le(buf, std::bit_cast<uint64_t>(x));
    os.write(reinterpret_cast<const char*>(buf), 8);
  }
  if (!os) fail(Errc::io, "write_vec: stream failure");
}

Vec read_vec(std::istream& is) {
  unsigned char buf[8];
  is.read(reinterpret_cast<char*>(buf), 8);
  if (!is) fail(Errc::io, "read_vec: truncated length prefix");
  const uint64_t n = get_u64_le(buf);
  Vec v(n);
  for (uint64_t i = 0; i < n; ++i) {
    is.read(reinterpret_cast<char*>(buf), 8);
    if (!is) fail(Errc::io, "read_vec: truncated payload");
    v[i] = std::bit_cast<double>(get_u64_le(buf));
  }
  return v;
}

void save_vec(const std::string& path, const Vec& v) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) fail(Errc::io, "save_vec: cannot open " + tmp);
    write_vec(os, v);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    fail(Errc::io, "save_vec: rename failed for " + path);
}

Vec load_vec(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(Errc::io, "load_vec: cannot open " + path);
  return read_vec(is);
}

VersionId VersionId::parse(const std::string& s) {
  const auto pos = s.rfind(':');
  if (pos == std::string::npos)
    fail(Errc::invalid_argument, "VersionId: missing ':' in " + s);
  VersionId v;
  v.actor = s.substr(0, pos);
  v.counter = std::stoull(s.substr(pos + 1));
  return v;
}

}  // namespace halosim
