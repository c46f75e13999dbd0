#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <string_view>
#include <vector>

#include "maas/errors.hpp"

namespace maas {

// Counter-based splittable RNG. Every entity/period gets its own stream derived
// from (master seed, tag, ids...), so streams are stable under reordering of
// the surrounding simulation code.

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t hash_tag(std::string_view tag) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {
    // decorrelate trivially close seeds
    next_u64();
    next_u64();
  }

  std::uint64_t next_u64() { return splitmix64(state_); }

  // [0, 1)
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // inclusive bounds
  int uniform_int(int lo, int hi) {
    if (hi < lo) return lo;
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<int>(next_u64() % span);
  }

  bool bernoulli(double p) { return next_double() < p; }

  // Knuth multiplication method, chunked so large rates do not underflow.
  int poisson(double lambda) {
    int count = 0;
    while (lambda > 30.0) {
      // split off a chunk of rate 30
      double l = std::exp(-30.0);
      double p = 1.0;
      int k = 0;
      do {
        ++k;
        p *= next_double();
      } while (p > l);
      count += k - 1;
      lambda -= 30.0;
    }
    double l = std::exp(-lambda);
    double p = 1.0;
    int k = 0;
    do {
      ++k;
      p *= next_double();
    } while (p > l);
    return count + k - 1;
  }

  // index drawn with probability proportional to weights[i]
  std::size_t pick_weighted(const std::vector<double>& weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    if (total <= 0.0) return 0;
    double x = next_double() * total;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      x -= weights[i];
      if (x < 0.0) return i;
    }
    return weights.size() - 1;
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = next_u64() % i;
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t state_;
};

// Derive a stream seed from the master seed plus arbitrary ids. The same ids
// always address the same stream regardless of draw order elsewhere.
inline std::uint64_t stream_seed(std::uint64_t master, std::string_view tag,
                                 std::initializer_list<std::uint64_t> ids = {}) {
  std::uint64_t s = master ^ hash_tag(tag);
  std::uint64_t mixed = splitmix64(s);
  for (std::uint64_t id : ids) {
    s = mixed ^ (id + 0x9e3779b97f4a7c15ULL);
    mixed = splitmix64(s);
  }
  return mixed;
}

inline Rng stream(std::uint64_t master, std::string_view tag,
                  std::initializer_list<std::uint64_t> ids = {}) {
  return Rng(stream_seed(master, tag, ids));
}

}  // namespace maas
