#include "ppinn/rng.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace ppinn {

uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

uint64_t derive_seed(uint64_t seed, uint64_t tag) {
  uint64_t state = seed ^ (0x9e3779b97f4a7c15ull * (tag + 1));
  uint64_t a = splitmix64(state);
  uint64_t b = splitmix64(state);
  return a ^ (b << 1);
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform01() - 1.0;
    v = 2.0 * uniform01() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double m = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * m;
  has_spare_ = true;
  return u * m;
}

void Rng::fill_normal(double* dst, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dst[i] = normal();
}

std::vector<int> Rng::sample_indices(int population, int count) {
  if (count > population)
    throw std::invalid_argument("sample_indices: count exceeds population");
  std::vector<int> pool(population);
  std::iota(pool.begin(), pool.end(), 0);
  std::vector<int> out(count);
  for (int i = 0; i < count; ++i) {
    const int j = i + static_cast<int>(uniform01() * (population - i));
    std::swap(pool[i], pool[j]);
    out[i] = pool[i];
  }
  return out;
}

}  // namespace ppinn
