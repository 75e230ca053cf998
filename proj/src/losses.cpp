#include "ppinn/losses.hpp"

#include <stdexcept>

namespace ppinn {

using ad::GradContext;
using ad::InRow;
using ad::JetVars;
using ad::Rev;
using ad::RevMat;
using Eigen::MatrixXd;
using Eigen::RowVectorXd;

MatrixXd sample_latent(Rng& rng, int z_dim, int cols) {
  MatrixXd z(z_dim, cols);
  // column-major fill: all of z for one point, then the next point
  rng.fill_normal(z.data(), static_cast<std::size_t>(z_dim) * cols);
  return z;
}

static MatrixXd stack_inputs(const MatrixXd& coords, const MatrixXd& z) {
  if (coords.cols() != z.cols())
    throw std::invalid_argument("latent batch does not match coordinate batch");
  MatrixXd in(coords.rows() + z.rows(), coords.cols());
  in.topRows(coords.rows()) = coords;
  in.bottomRows(z.rows()) = z;
  return in;
}

RowVectorXd generator_sample(const MlpParams& gen, const MatrixXd& coords,
                             const MatrixXd& z) {
  return mlp_forward_batch(gen, stack_inputs(coords, z)).row(0);
}

RowVectorXd encoder_log_density(const MlpParams& enc, const MatrixXd& coords,
                                const RowVectorXd& u, const MatrixXd& z) {
  MatrixXd in(coords.rows() + 1, coords.cols());
  in.topRows(coords.rows()) = coords;
  in.bottomRows(1) = u;
  const MatrixXd mu = mlp_forward_batch(enc, in);
  if (mu.rows() != z.rows())
    throw std::invalid_argument("encoder output dim does not match z_dim");
  return (-0.5 * (z - mu).array().square().colwise().sum()).matrix();
}

static std::vector<InRow> coord_rows(const MatrixXd& coords) {
  std::vector<InRow> rows;
  for (long r = 0; r < coords.rows(); ++r)
    rows.push_back(InRow::of(coords.row(r)));
  return rows;
}

static std::vector<InRow> gen_input_rows(const MatrixXd& coords,
                                         const MatrixXd& z) {
  if (coords.cols() != z.cols())
    throw std::invalid_argument("latent batch does not match coordinate batch");
  auto rows = coord_rows(coords);
  for (long r = 0; r < z.rows(); ++r) rows.push_back(InRow::of(z.row(r)));
  return rows;
}

Rev build_discriminator_loss(GradContext& ctx, int disc_id,
                             const MlpParams& gen, const ObsBatch& obs,
                             const MatrixXd& z) {
  const MatrixXd fake_u = mlp_forward_batch(gen, stack_inputs(obs.coords, z));
  MatrixXd fake_in(obs.coords.rows() + 1, obs.size());
  fake_in.topRows(obs.coords.rows()) = obs.coords;
  fake_in.bottomRows(1) = fake_u;
  MatrixXd real_in = fake_in;
  real_in.bottomRows(1) = obs.u;
  return build_discriminator_loss_from_inputs(ctx, disc_id, fake_in, real_in);
}

Rev build_discriminator_loss_from_inputs(GradContext& ctx, int disc_id,
                                         const MatrixXd& fake_in,
                                         const MatrixXd& real_in) {
  RevMat tf = ctx.call(disc_id, coord_rows(fake_in));
  RevMat tr = ctx.call(disc_id, coord_rows(real_in));
  Rev acc_f = ctx.leaf(0.0);
  for (int c = 0; c < tf.cols; ++c) acc_f += log_sigmoid(tf(0, c));
  Rev acc_r = ctx.leaf(0.0);
  for (int c = 0; c < tr.cols; ++c) acc_r += log_sigmoid(-tr(0, c));
  return acc_f * (1.0 / tf.cols) + acc_r * (1.0 / tr.cols);
}

Rev build_generator_loss(GradContext& ctx, int gen_id, int enc_id, int disc_id,
                         const ObsBatch& obs, const MatrixXd& z,
                         double entropic_weight) {
  const int B = obs.size();
  RevMat uf = ctx.call(gen_id, gen_input_rows(obs.coords, z));
  std::vector<Rev> urow(uf.v.begin(), uf.v.end());

  auto disc_rows = coord_rows(obs.coords);
  disc_rows.push_back(InRow::of(urow));
  RevMat t = ctx.call(disc_id, disc_rows);

  auto enc_rows = coord_rows(obs.coords);
  enc_rows.push_back(InRow::of(urow));
  RevMat mu = ctx.call(enc_id, enc_rows);

  Rev acc = ctx.leaf(0.0);
  for (int c = 0; c < B; ++c) {
    Rev logq = ctx.leaf(0.0);
    for (int k = 0; k < mu.rows; ++k) logq -= 0.5 * square(z(k, c) - mu(k, c));
    acc += t(0, c) + (1.0 - entropic_weight) * logq;
  }
  return acc * (1.0 / B);
}

Rev build_pde_loss(GradContext& ctx, int gen_id, int diff_id,
                   const Problem& problem, const Dataset& ds,
                   const MatrixXd& colloc, const MatrixXd& z,
                   uint64_t penalty_seed) {
  const int B = static_cast<int>(colloc.cols());
  const ad::JetDirs dirs = problem.jet_dirs();
  JetVars jv = ctx.call_jet(gen_id, gen_input_rows(colloc, z), dirs);

  JetVars kv;
  if (problem.has_diffusion()) {
    if (diff_id < 0)
      throw std::invalid_argument("problem has a diffusion net but none was registered");
    std::vector<Rev> urow(jv.val.v.begin(), jv.val.v.end());
    kv = ctx.call_jet(diff_id, {InRow::of(urow)}, ad::JetDirs{{0}, {0}});
  }

  Rev acc = ctx.leaf(0.0);
  for (int c = 0; c < B; ++c) {
    FieldJet<Rev> f;
    f.u = jv.val(0, c);
    int hk = 0;
    for (int d = 0; d < dirs.n(); ++d) {
      f.g[d] = jv.g[d](0, c);
      if (dirs.hess[d]) f.h[d] = jv.h[hk++](0, c);
    }
    if (problem.has_diffusion()) {
      f.k = kv.val(0, c);
      f.kp = kv.g[0](0, c);
    }
    acc += square(problem.residual(f, colloc.col(c).data(), ctx));
  }
  Rev interior = acc * (1.0 / B);
  return interior + problem.boundary_penalty(ctx, gen_id, diff_id, ds,
                                             static_cast<int>(z.rows()),
                                             penalty_seed);
}

double loss_discriminator(const MlpParams& disc, const MlpParams& gen,
                          const ObsBatch& obs, const MatrixXd& z) {
  GradContext ctx;
  const int di = ctx.add_params(&disc, false);
  Rev l = build_discriminator_loss(ctx, di, gen, obs, z);
  return ctx.value(l);
}

double loss_generator(const MlpParams& gen, const MlpParams& enc,
                      const MlpParams& disc, const ObsBatch& obs,
                      const MatrixXd& z, double entropic_weight) {
  GradContext ctx;
  const int gi = ctx.add_params(&gen, false);
  const int ei = ctx.add_params(&enc, false);
  const int di = ctx.add_params(&disc, false);
  Rev l = build_generator_loss(ctx, gi, ei, di, obs, z, entropic_weight);
  return ctx.value(l);
}

double loss_pde(const MlpParams& gen, const MlpParams* diff,
                const Problem& problem, const Dataset& ds,
                const MatrixXd& colloc, const MatrixXd& z,
                uint64_t penalty_seed) {
  GradContext ctx;
  const int gi = ctx.add_params(&gen, false);
  int di = -1;
  if (diff) di = ctx.add_params(diff, false);
  Rev l = build_pde_loss(ctx, gi, di, problem, ds, colloc, z, penalty_seed);
  return ctx.value(l);
}

}  // namespace ppinn
