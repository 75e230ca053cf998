#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ppinn/adam.hpp"
#include "ppinn/losses.hpp"
#include "ppinn/problem.hpp"

namespace ppinn {

// Adversarial training configuration. One step of the loop runs k_disc
// discriminator ascent updates followed by k_gen generator/encoder descent
// updates, each on fresh minibatches and fresh latent draws.
struct GanConfig {
  double entropic_weight = 1.5;
  double residual_weight = 1.0;
  double learning_rate = 1e-4;
  long steps = 30000;
  int k_disc = 1;
  int k_gen = 5;
  int z_dim = 1;
  int batch_obs = 0;      // 0: full observation batch
  int batch_colloc = 1000;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  bool resample_colloc = false;  // fixed collocation set unless enabled
  long checkpoint_every = 1000;
  uint64_t train_seed = 0;

  AdamSettings adam() const {
    return {learning_rate, adam_beta1, adam_beta2, adam_eps};
  }
  void validate() const;
};

struct NetworkSpecs {
  NetworkSpec gen, enc, disc;
  std::optional<NetworkSpec> diff;
};

struct LossRecord {
  long step = 0;
  double loss_d = 0.0, loss_g = 0.0, loss_pde = 0.0;
};

struct TrainedModel {
  MlpParams gen, enc, disc;
  std::optional<MlpParams> diff;
  std::vector<LossRecord> history;
};

// Thrown when a recorded loss stops being finite; carries the step index and
// which loss diverged.
class TrainDivergence : public std::runtime_error {
 public:
  TrainDivergence(long step, const std::string& which)
      : std::runtime_error("training diverged at step " + std::to_string(step) +
                           " (" + which + " not finite)"),
        step(step),
        which(which) {}
  long step;
  std::string which;
};

struct TrainCallbacks {
  // Invoked every checkpoint_every steps and once after the final step.
  std::function<void(long step, const TrainedModel&)> on_checkpoint;
  // Invoked once per step after the loss record is appended.
  std::function<void(long step, const LossRecord&)> on_step;
};

// Runs the adversarial game on one problem and dataset. Network parameters
// are Xavier-initialized from seeds derived from init_seed; all minibatch
// and latent draws come from a stream derived from cfg.train_seed. The same
// inputs always produce the same model and history.
TrainedModel train(const Problem& problem, const Dataset& ds,
                   const GanConfig& cfg, const NetworkSpecs& specs,
                   uint64_t init_seed, const TrainCallbacks& cb = {});

}  // namespace ppinn
