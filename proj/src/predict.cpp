#include "ppinn/predict.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "ppinn/rng.hpp"

namespace ppinn {

namespace {

Eigen::VectorXd latent_draw(uint64_t seed, int index, int z_dim) {
  Rng rng(derive_seed(seed, 0x7000u + static_cast<uint64_t>(index)));
  Eigen::VectorXd z(z_dim);
  for (int k = 0; k < z_dim; ++k) z[k] = rng.normal();
  return z;
}

}  // namespace

PredictiveStats predictive_moments(const MlpParams& gen,
                                   const Eigen::MatrixXd& coords,
                                   int n_samples, uint64_t seed) {
  if (n_samples < 1) throw std::invalid_argument("n_samples must be >= 1");
  const int coord_dim = static_cast<int>(coords.rows());
  const int z_dim = gen.spec.input_dim() - coord_dim;
  if (z_dim < 1) throw std::invalid_argument("coords rows exceed generator input");
  const int m = static_cast<int>(coords.cols());

  Eigen::VectorXd mean = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd m2 = Eigen::VectorXd::Zero(m);
  Eigen::MatrixXd input(coord_dim + z_dim, m);
  input.topRows(coord_dim) = coords;
  for (int i = 0; i < n_samples; ++i) {
    const Eigen::VectorXd z = latent_draw(seed, i, z_dim);
    input.bottomRows(z_dim) = z.replicate(1, m);
    const Eigen::VectorXd u = mlp_forward_batch(gen, input).row(0).transpose();
    // Welford update, vectorized over coordinates.
    const Eigen::VectorXd delta = u - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta.cwiseProduct(u - mean);
  }

  PredictiveStats out;
  out.mean = std::move(mean);
  out.stddev = (m2 / static_cast<double>(n_samples)).cwiseSqrt();
  return out;
}

Eigen::VectorXd predictive_samples(const MlpParams& gen,
                                   const Eigen::VectorXd& coord, int n_samples,
                                   uint64_t seed) {
  if (n_samples < 1) throw std::invalid_argument("n_samples must be >= 1");
  const int coord_dim = static_cast<int>(coord.size());
  const int z_dim = gen.spec.input_dim() - coord_dim;
  if (z_dim < 1) throw std::invalid_argument("coord size exceeds generator input");

  Eigen::VectorXd samples(n_samples);
  Eigen::VectorXd input(coord_dim + z_dim);
  input.head(coord_dim) = coord;
  for (int i = 0; i < n_samples; ++i) {
    input.tail(z_dim) = latent_draw(seed, i, z_dim);
    samples[i] = mlp_forward(gen, input)[0];
  }
  return samples;
}

double relative_l2_error(const Eigen::VectorXd& prediction,
                         const Eigen::VectorXd& truth) {
  if (prediction.size() != truth.size())
    throw std::invalid_argument("relative_l2_error: size mismatch");
  const double denom = truth.norm();
  if (denom == 0.0)
    throw std::invalid_argument("relative_l2_error: zero truth norm");
  return (prediction - truth).norm() / denom;
}

Eigen::VectorXd marginal_density(const Eigen::VectorXd& samples,
                                 const Eigen::VectorXd& grid) {
  const int n = static_cast<int>(samples.size());
  if (n < 1) throw std::invalid_argument("marginal_density: empty samples");

  const double mu = samples.mean();
  const double sd = std::sqrt((samples.array() - mu).square().sum() /
                              std::max(1, n - 1));
  std::vector<double> sorted(samples.data(), samples.data() + n);
  std::sort(sorted.begin(), sorted.end());
  auto quantile = [&](double q) {
    const double pos = q * (n - 1);
    const int lo = static_cast<int>(pos);
    const int hi = std::min(lo + 1, n - 1);
    const double w = pos - lo;
    return (1.0 - w) * sorted[lo] + w * sorted[hi];
  };
  const double iqr = quantile(0.75) - quantile(0.25);
  double spread = sd;
  if (iqr > 0.0) spread = std::min(spread, iqr / 1.34);
  double h = 0.9 * spread * std::pow(static_cast<double>(n), -0.2);
  if (!(h > 0.0)) {
    // Degenerate sample set: fall back to a narrow kernel relative to the
    // grid spacing so the density integrates to ~1 instead of dividing by 0.
    const double grid_span = grid.size() > 1 ? grid[grid.size() - 1] - grid[0] : 1.0;
    h = std::max(1e-12, 1e-3 * std::abs(grid_span));
  }

  const double norm = 1.0 / (static_cast<double>(n) * h * std::sqrt(2.0 * std::numbers::pi));
  Eigen::VectorXd density(grid.size());
  for (int g = 0; g < grid.size(); ++g) {
    const Eigen::ArrayXd t = (grid[g] - samples.array()) / h;
    density[g] = norm * (-0.5 * t.square()).exp().sum();
  }
  return density;
}

double density_l1_distance(const Eigen::VectorXd& d1,
                           const Eigen::VectorXd& d2,
                           const Eigen::VectorXd& grid) {
  if (d1.size() != d2.size() || d1.size() != grid.size())
    throw std::invalid_argument("density_l1_distance: size mismatch");
  double acc = 0.0;
  for (int i = 0; i + 1 < grid.size(); ++i) {
    const double a = std::abs(d1[i] - d2[i]);
    const double b = std::abs(d1[i + 1] - d2[i + 1]);
    acc += 0.5 * (a + b) * (grid[i + 1] - grid[i]);
  }
  return acc;
}

}  // namespace ppinn
