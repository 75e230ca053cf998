#include "ppinn/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace ppinn {

void adam_update(AdamState& st, Eigen::VectorXd& params,
                 const Eigen::VectorXd& grad, const AdamSettings& s,
                 int sign) {
  if (st.m.size() != grad.size() || params.size() != grad.size())
    throw std::invalid_argument("adam_update: size mismatch");
  st.t += 1;
  st.m = s.beta1 * st.m + (1.0 - s.beta1) * grad;
  st.v = s.beta2 * st.v + (1.0 - s.beta2) * grad.array().square().matrix();
  const double c1 = 1.0 - std::pow(s.beta1, static_cast<double>(st.t));
  const double c2 = 1.0 - std::pow(s.beta2, static_cast<double>(st.t));
  params.array() += sign * s.lr * (st.m.array() / c1) /
                    ((st.v.array() / c2).sqrt() + s.eps);
}

void adam_update(AdamState& st, MlpParams& params, const Eigen::VectorXd& grad,
                 const AdamSettings& s, int sign) {
  if (params.n_params() != grad.size())
    throw std::invalid_argument("adam_update: size mismatch");
  // Route through the flat update so both overloads produce bit-identical
  // parameters, then scatter back in canonical order.
  Eigen::VectorXd flat = params.flatten();
  adam_update(st, flat, grad, s, sign);
  long k = 0;
  for (std::size_t l = 0; l < params.W.size(); ++l) {
    for (long r = 0; r < params.W[l].rows(); ++r)
      for (long c = 0; c < params.W[l].cols(); ++c) params.W[l](r, c) = flat[k++];
    for (long i = 0; i < params.b[l].size(); ++i) params.b[l][i] = flat[k++];
  }
}

}  // namespace ppinn
