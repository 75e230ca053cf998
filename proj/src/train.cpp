#include "ppinn/train.hpp"

#include <cmath>

namespace ppinn {

using ad::GradContext;
using ad::Rev;
using Eigen::MatrixXd;
using Eigen::RowVectorXd;
using Eigen::VectorXd;

void GanConfig::validate() const {
  if (entropic_weight < 1.0)
    throw std::invalid_argument("entropic_weight must be >= 1");
  if (residual_weight < 0.0)
    throw std::invalid_argument("residual_weight must be >= 0");
  if (learning_rate <= 0.0)
    throw std::invalid_argument("learning_rate must be positive");
  if (steps < 1) throw std::invalid_argument("steps must be >= 1");
  if (k_disc < 1 || k_gen < 1)
    throw std::invalid_argument("k_disc and k_gen must be >= 1");
  if (z_dim < 1) throw std::invalid_argument("z_dim must be >= 1");
  if (batch_obs < 0 || batch_colloc < 1)
    throw std::invalid_argument("bad batch sizes");
  if (checkpoint_every < 1)
    throw std::invalid_argument("checkpoint_every must be >= 1");
}

namespace {

void check_specs(const Problem& problem, const GanConfig& cfg,
                 const NetworkSpecs& specs) {
  const int cd = problem.coord_dim();
  if (specs.gen.input_dim() != cd + cfg.z_dim || specs.gen.output_dim() != 1)
    throw std::invalid_argument("generator spec must map coord_dim+z_dim -> 1");
  if (specs.enc.input_dim() != cd + 1 || specs.enc.output_dim() != cfg.z_dim)
    throw std::invalid_argument("encoder spec must map coord_dim+1 -> z_dim");
  if (specs.disc.input_dim() != cd + 1 || specs.disc.output_dim() != 1)
    throw std::invalid_argument("discriminator spec must map coord_dim+1 -> 1");
  if (problem.has_diffusion()) {
    if (!specs.diff)
      throw std::invalid_argument("problem needs a diffusion network spec");
    if (specs.diff->input_dim() != 1 || specs.diff->output_dim() != 1)
      throw std::invalid_argument("diffusion spec must map 1 -> 1");
  }
}

ObsBatch subsample_obs(const Dataset& ds, const std::vector<int>& idx) {
  ObsBatch b;
  b.coords.resize(ds.obs_coords.rows(), idx.size());
  b.u.resize(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    b.coords.col(i) = ds.obs_coords.col(idx[i]);
    b.u[i] = ds.obs_u[idx[i]];
  }
  return b;
}

}  // namespace

TrainedModel train(const Problem& problem, const Dataset& ds,
                   const GanConfig& cfg, const NetworkSpecs& specs,
                   uint64_t init_seed, const TrainCallbacks& cb) {
  cfg.validate();
  check_specs(problem, cfg, specs);
  if (ds.n_obs() < 1) throw std::invalid_argument("dataset has no observations");

  TrainedModel model;
  model.gen = xavier_init(specs.gen, derive_seed(init_seed, 0));
  model.enc = xavier_init(specs.enc, derive_seed(init_seed, 1));
  model.disc = xavier_init(specs.disc, derive_seed(init_seed, 2));
  if (problem.has_diffusion())
    model.diff = xavier_init(*specs.diff, derive_seed(init_seed, 3));

  AdamState st_gen = AdamState::init(model.gen.n_params());
  AdamState st_enc = AdamState::init(model.enc.n_params());
  AdamState st_disc = AdamState::init(model.disc.n_params());
  AdamState st_diff =
      model.diff ? AdamState::init(model.diff->n_params()) : AdamState::init(0);
  const AdamSettings adam = cfg.adam();

  Rng rng(cfg.train_seed);
  const Bounds box = problem.bounds();
  const int n_obs = ds.n_obs();
  const bool sub_obs = cfg.batch_obs > 0 && cfg.batch_obs < n_obs;
  const int bc = std::min<int>(cfg.batch_colloc, ds.n_colloc());
  const bool sub_colloc = bc < ds.n_colloc();
  const bool use_pde = cfg.residual_weight > 0.0;

  auto draw_obs = [&]() -> ObsBatch {
    if (!sub_obs) return {ds.obs_coords, ds.obs_u};
    return subsample_obs(ds, rng.sample_indices(n_obs, cfg.batch_obs));
  };
  auto draw_colloc = [&]() -> MatrixXd {
    if (cfg.resample_colloc) {
      MatrixXd c(problem.coord_dim(), bc);
      for (int j = 0; j < bc; ++j)
        for (int r = 0; r < c.rows(); ++r)
          c(r, j) = rng.uniform(box.lo[r], box.hi[r]);
      return c;
    }
    if (!sub_colloc) return ds.colloc;
    const auto idx = rng.sample_indices(ds.n_colloc(), bc);
    MatrixXd c(ds.colloc.rows(), bc);
    for (std::size_t i = 0; i < idx.size(); ++i) c.col(i) = ds.colloc.col(idx[i]);
    return c;
  };

  model.history.reserve(cfg.steps);
  for (long step = 1; step <= cfg.steps; ++step) {
    LossRecord rec{step, 0.0, 0.0, 0.0};

    for (int k = 0; k < cfg.k_disc; ++k) {
      const ObsBatch obs = draw_obs();
      const MatrixXd z = sample_latent(rng, cfg.z_dim, obs.size());
      GradContext ctx;
      const int di = ctx.add_params(&model.disc);
      Rev l = build_discriminator_loss(ctx, di, model.gen, obs, z);
      ctx.backward(l);
      adam_update(st_disc, model.disc, ctx.grad(di), adam, +1);
      rec.loss_d = ctx.value(l);
    }

    for (int k = 0; k < cfg.k_gen; ++k) {
      const ObsBatch obs = draw_obs();
      const MatrixXd z_obs = sample_latent(rng, cfg.z_dim, obs.size());
      GradContext ctx;
      const int gi = ctx.add_params(&model.gen);
      const int ei = ctx.add_params(&model.enc);
      const int di = ctx.add_params(&model.disc, false);
      int fi = -1;
      if (model.diff) fi = ctx.add_params(&*model.diff);

      Rev lg = build_generator_loss(ctx, gi, ei, di, obs, z_obs,
                                    cfg.entropic_weight);
      Rev total = lg;
      double lp_val = 0.0;
      if (use_pde) {
        const MatrixXd colloc = draw_colloc();
        const MatrixXd z_col =
            sample_latent(rng, cfg.z_dim, static_cast<int>(colloc.cols()));
        const uint64_t pseed = rng.next_u64();
        Rev lp = build_pde_loss(ctx, gi, fi, problem, ds, colloc, z_col, pseed);
        total = lg + cfg.residual_weight * lp;
        lp_val = ctx.value(lp);
      }
      ctx.backward(total);
      adam_update(st_gen, model.gen, ctx.grad(gi), adam, -1);
      adam_update(st_enc, model.enc, ctx.grad(ei), adam, -1);
      if (model.diff) adam_update(st_diff, *model.diff, ctx.grad(fi), adam, -1);
      rec.loss_g = ctx.value(lg);
      rec.loss_pde = lp_val;
    }

    if (!std::isfinite(rec.loss_d)) throw TrainDivergence(step, "loss_d");
    if (!std::isfinite(rec.loss_g)) throw TrainDivergence(step, "loss_g");
    if (!std::isfinite(rec.loss_pde)) throw TrainDivergence(step, "loss_pde");
    model.history.push_back(rec);
    if (cb.on_step) cb.on_step(step, rec);
    if (cb.on_checkpoint &&
        (step % cfg.checkpoint_every == 0 || step == cfg.steps))
      cb.on_checkpoint(step, model);
  }
  return model;
}

}  // namespace ppinn
