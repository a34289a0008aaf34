#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "fiberatlas/error.hpp"

namespace fiberatlas::varnum {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed for task `index` of a run with master seed `seed`; independent of the
/// order in which tasks execute.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index, std::uint64_t stream = 0) {
  return splitmix64(splitmix64(seed ^ (stream * 0xD1B54A32D192ED03ULL)) + index);
}

inline std::mt19937_64 task_rng(std::uint64_t seed, std::uint64_t index, std::uint64_t stream = 0) {
  return std::mt19937_64(derive_seed(seed, index, stream));
}

/// Halton sequence in [0,1)^dim with a random Cranley-Patterson rotation
/// drawn from the master seed.
class ScrambledHalton {
 public:
  ScrambledHalton(std::size_t dim, std::uint64_t seed) : dim_(dim) {
    static const int primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};
    if (dim > std::size(primes)) throw InvalidArgument("quasi-random sequence supports at most 16 dimensions");
    std::mt19937_64 rng(derive_seed(seed, 0, 0x4a17));
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (std::size_t d = 0; d < dim; ++d) {
      bases_.push_back(primes[d]);
      shift_.push_back(uni(rng));
    }
  }

  std::size_t dim() const noexcept { return dim_; }

  std::vector<double> point(std::uint64_t index) const {
    std::vector<double> out(dim_);
    for (std::size_t d = 0; d < dim_; ++d) {
      double v = radical_inverse(index + 1, bases_[d]) + shift_[d];
      out[d] = v - static_cast<double>(static_cast<long long>(v));
    }
    return out;
  }

 private:
  static double radical_inverse(std::uint64_t n, int base) {
    double inv = 1.0 / base, f = inv, r = 0.0;
    while (n > 0) {
      r += f * static_cast<double>(n % base);
      n /= base;
      f *= inv;
    }
    return r;
  }

  std::size_t dim_;
  std::vector<int> bases_;
  std::vector<double> shift_;
};

}  // namespace fiberatlas::varnum
