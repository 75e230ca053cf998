#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace ppinn {

// splitmix64 step; used to derive independent seed streams from one master
// seed so that adding a consumer never shifts the draws of another.
uint64_t splitmix64(uint64_t& state);

// Hash a (seed, tag) pair into a new seed. Tags identify purposes
// (net init, data generation, training, prediction, per-sample draws).
uint64_t derive_seed(uint64_t seed, uint64_t tag);

// Deterministic random source. mt19937_64 has a fully specified bit stream,
// and the uniform/normal mappings below avoid std::uniform_real_distribution
// and std::normal_distribution, whose outputs differ across standard library
// implementations.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  uint64_t next_u64() { return gen_(); }

  // Uniform on [0, 1): 53 random mantissa bits.
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Standard normal via the Marsaglia polar method (no libm trig).
  double normal();

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  // Fills a buffer with iid standard normals.
  void fill_normal(double* dst, std::size_t n);

  // count distinct indices drawn uniformly from [0, population), by partial
  // Fisher-Yates. Order of the result is the draw order.
  std::vector<int> sample_indices(int population, int count);

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace ppinn
