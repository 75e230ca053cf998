#pragma once

#include <Eigen/Dense>

#include "ppinn/nets.hpp"

namespace ppinn {

// First/second moment accumulators over a flat parameter vector, plus the
// update count used for bias correction.
struct AdamState {
  Eigen::VectorXd m, v;
  long t = 0;

  static AdamState init(long n) {
    return {Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n), 0};
  }
};

struct AdamSettings {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// One bias-corrected update on a flat parameter vector. sign = -1 descends,
// +1 ascends.
void adam_update(AdamState& st, Eigen::VectorXd& params,
                 const Eigen::VectorXd& grad, const AdamSettings& s, int sign);

// Same update applied in place to network parameters, walking them in
// canonical flat order.
void adam_update(AdamState& st, MlpParams& params, const Eigen::VectorXd& grad,
                 const AdamSettings& s, int sign);

}  // namespace ppinn
