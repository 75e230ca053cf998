#pragma once

#include <Eigen/Dense>

#include "ppinn/grad.hpp"
#include "ppinn/problem.hpp"

namespace ppinn {

// Observation minibatch: coordinates column-wise plus measured field values.
struct ObsBatch {
  Eigen::MatrixXd coords;   // (coord_dim x B)
  Eigen::RowVectorXd u;     // (1 x B)

  int size() const { return static_cast<int>(coords.cols()); }
};

// Draws one latent vector per column: (z_dim x B) standard normals.
Eigen::MatrixXd sample_latent(Rng& rng, int z_dim, int cols);

// Generator samples u = f([x; z]) at the given coordinates, one latent
// column per coordinate column. Plain evaluation, no tape.
Eigen::RowVectorXd generator_sample(const MlpParams& gen,
                                    const Eigen::MatrixXd& coords,
                                    const Eigen::MatrixXd& z);

// Log-density of the unit-variance Gaussian posterior surrogate,
// -0.5 ||z - mu(coords, u)||^2 per point, additive constants dropped.
Eigen::RowVectorXd encoder_log_density(const MlpParams& enc,
                                       const Eigen::MatrixXd& coords,
                                       const Eigen::RowVectorXd& u,
                                       const Eigen::MatrixXd& z);

// ---------------------------------------------------------------------------
// Loss builders. Each records the loss on the context's tape so value and
// parameter gradients come from one pass. Generated samples carry the
// positive discriminator label.

// Binary cross-entropy score of the discriminator between generator output
// at the observation coordinates and the observed values:
//   mean log sigmoid(T(x, u_fake)) + mean log sigmoid(-T(x, u_obs)).
// The generator is treated as a fixed sampler here (no gradient through it);
// ascent on this trains the discriminator.
ad::Rev build_discriminator_loss(ad::GradContext& ctx, int disc_id,
                                 const MlpParams& gen, const ObsBatch& obs,
                                 const Eigen::MatrixXd& z);

// Same objective with caller-formed discriminator input columns; used to
// train a discriminator between two plain sample sets.
ad::Rev build_discriminator_loss_from_inputs(ad::GradContext& ctx, int disc_id,
                                             const Eigen::MatrixXd& fake_in,
                                             const Eigen::MatrixXd& real_in);

// Generator/encoder objective at the observation coordinates:
//   mean [ T(x, u_fake) + (1 - entropic_weight) log q(z | x, u_fake) ].
// Descent on this trains generator and encoder; the discriminator must be
// registered untracked.
ad::Rev build_generator_loss(ad::GradContext& ctx, int gen_id, int enc_id,
                             int disc_id, const ObsBatch& obs,
                             const Eigen::MatrixXd& z, double entropic_weight);

// Mean squared PDE residual over the collocation batch (one latent column
// per point), plus the problem's boundary penalty terms. diff_id is the
// diffusion network id or -1.
ad::Rev build_pde_loss(ad::GradContext& ctx, int gen_id, int diff_id,
                       const Problem& problem, const Dataset& ds,
                       const Eigen::MatrixXd& colloc,
                       const Eigen::MatrixXd& z, uint64_t penalty_seed);

// Value-only convenience wrappers.
double loss_discriminator(const MlpParams& disc, const MlpParams& gen,
                          const ObsBatch& obs, const Eigen::MatrixXd& z);
double loss_generator(const MlpParams& gen, const MlpParams& enc,
                      const MlpParams& disc, const ObsBatch& obs,
                      const Eigen::MatrixXd& z, double entropic_weight);
double loss_pde(const MlpParams& gen, const MlpParams* diff,
                const Problem& problem, const Dataset& ds,
                const Eigen::MatrixXd& colloc, const Eigen::MatrixXd& z,
                uint64_t penalty_seed);

}  // namespace ppinn
