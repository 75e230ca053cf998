#pragma once

#include <Eigen/Dense>

#include "ppinn/nets.hpp"

namespace ppinn {

struct PredictiveStats {
  Eigen::VectorXd mean;
  Eigen::VectorXd stddev;  // population normalization (1/N)
};

// Monte Carlo predictive moments of the generator at the given coordinates
// (column-wise). Latent draw i is shared by every coordinate column and
// depends only on (seed, i), so growing n_samples extends the sample stream
// without changing earlier draws.
PredictiveStats predictive_moments(const MlpParams& gen,
                                   const Eigen::MatrixXd& coords,
                                   int n_samples, uint64_t seed);

// Generator samples at a single point: one value per latent draw, with the
// same (seed, i) stream as predictive_moments.
Eigen::VectorXd predictive_samples(const MlpParams& gen,
                                   const Eigen::VectorXd& coord, int n_samples,
                                   uint64_t seed);

// ||prediction - truth||_2 / ||truth||_2. Throws std::invalid_argument when
// the truth norm is zero.
double relative_l2_error(const Eigen::VectorXd& prediction,
                         const Eigen::VectorXd& truth);

// Gaussian kernel density estimate on a fixed evaluation grid with
// Silverman's rule-of-thumb bandwidth. Degenerate samples (zero spread)
// produce a density concentrated at the sample value.
Eigen::VectorXd marginal_density(const Eigen::VectorXd& samples,
                                 const Eigen::VectorXd& grid);

// L1 distance between two densities by the trapezoid rule on their common
// grid.
double density_l1_distance(const Eigen::VectorXd& d1,
                           const Eigen::VectorXd& d2,
                           const Eigen::VectorXd& grid);

}  // namespace ppinn
