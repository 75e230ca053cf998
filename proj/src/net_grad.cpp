#include "ppinn/net_grad.hpp"

#include <stdexcept>

namespace ppinn::ad {

namespace testhook {
double jet_tanh_hess_skew = 0.0;
}

using Eigen::MatrixXd;
using Eigen::VectorXd;

void forward_batch(const MlpParams& p, const MatrixXd& X, MatrixXd& Y,
                   NetCache* cache) {
  if (X.rows() != p.spec.input_dim())
    throw std::invalid_argument("forward_batch: input dim mismatch");
  const int L = p.spec.n_layers();
  NetCache local;
  NetCache& c = cache ? *cache : local;
  c.A.resize(L + 1);
  c.S.clear();
  c.layout = JetLayout(static_cast<int>(X.cols()), JetDirs{});
  c.A[0] = X;
  for (int l = 0; l < L; ++l) {
    MatrixXd& out = c.A[l + 1];
    out.noalias() = p.W[l].transpose() * c.A[l];
    out.colwise() += p.b[l];
    if (l + 1 < L) out = out.array().tanh().matrix();
  }
  Y = std::move(c.A[L]);
  if (cache) cache->A[L] = Y;
}

void backward_batch(const MlpParams& p, const NetCache& cache,
                    const MatrixXd& Ybar, VectorXd* grad, MatrixXd* Xbar) {
  const int L = p.spec.n_layers();
  // sbar: adjoint of the layer's pre-activation; for the linear output layer
  // that is Ybar itself. abar: adjoint of the layer's (post-activation) input.
  MatrixXd sbar = Ybar;
  MatrixXd abar;
  long offset = grad ? grad->size() : 0;
  for (int l = L - 1; l >= 0; --l) {
    if (l < L - 1) {
      const MatrixXd& T = cache.A[l + 1];  // tanh(s)
      sbar = (abar.array() * (1.0 - T.array().square())).matrix();
    }
    if (grad) {
      const long nw = p.W[l].rows() * p.W[l].cols();
      const long nb = p.b[l].size();
      offset -= nw + nb;
      // Canonical flat order is row-major over W (fan_in x fan_out); a
      // column-major map of shape (fan_out x fan_in) lands on the same
      // memory layout.
      Eigen::Map<MatrixXd> dW(grad->data() + offset, p.W[l].cols(),
                              p.W[l].rows());
      dW.noalias() += sbar * cache.A[l].transpose();
      Eigen::Map<VectorXd> db(grad->data() + offset + nw, nb);
      db.noalias() += sbar.rowwise().sum();
    }
    if (l > 0 || Xbar) {
      abar.noalias() = p.W[l] * sbar;
      if (l == 0 && Xbar) *Xbar = abar;
    }
  }
}

void jet_forward_batch(const MlpParams& p, const MatrixXd& X,
                       const JetDirs& dirs, MatrixXd& Y, NetCache* cache) {
  if (X.rows() != p.spec.input_dim())
    throw std::invalid_argument("jet_forward_batch: input dim mismatch");
  if (dirs.rows.size() != dirs.hess.size())
    throw std::invalid_argument("jet_forward_batch: dirs.rows/hess size mismatch");
  for (int r : dirs.rows)
    if (r < 0 || r >= X.rows())
      throw std::invalid_argument("jet_forward_batch: direction row out of range");
  const int B = static_cast<int>(X.cols());
  const JetLayout lay(B, dirs);
  const int L = p.spec.n_layers();

  NetCache local;
  NetCache& c = cache ? *cache : local;
  c.A.resize(L + 1);
  c.S.resize(L);
  c.layout = lay;

  MatrixXd& A0 = c.A[0];
  A0.setZero(X.rows(), lay.cols());
  A0.middleCols(lay.val_off(), B) = X;
  for (int d = 0; d < lay.nd; ++d)
    A0.block(dirs.rows[d], lay.g_off(d), 1, B).setOnes();

  for (int l = 0; l < L; ++l) {
    MatrixXd& s = c.S[l];
    s.noalias() = p.W[l].transpose() * c.A[l];
    s.middleCols(lay.val_off(), B).colwise() += p.b[l];
    MatrixXd& a = c.A[l + 1];
    if (l + 1 < L) {
      a.resize(s.rows(), s.cols());
      auto T = a.middleCols(lay.val_off(), B);
      T = s.middleCols(lay.val_off(), B).array().tanh().matrix();
      const auto Ta = T.array();
      // tanh' = 1 - tanh^2, tanh'' = -2 tanh (1 - tanh^2); the second
      // derivative of a channel composes as f''(s) g^2 + f'(s) h.
      for (int d = 0; d < lay.nd; ++d)
        a.middleCols(lay.g_off(d), B).array() =
            (1.0 - Ta.square()) * s.middleCols(lay.g_off(d), B).array();
      for (int k = 0; k < lay.nh; ++k) {
        const int d = lay.hess_of_dir[k];
        const auto Sg = s.middleCols(lay.g_off(d), B).array();
        const auto Sh = s.middleCols(lay.h_off(k), B).array();
        a.middleCols(lay.h_off(k), B).array() =
            (1.0 - Ta.square()) * Sh +
            (testhook::jet_tanh_hess_skew - 2.0) * Ta * (1.0 - Ta.square()) *
                Sg.square();
      }
    } else {
      a = s;
    }
  }
  Y = c.A[L];
}

Eigen::MatrixXd mlp_jet_forward(const MlpParams& p, const Eigen::VectorXd& x,
                                const JetDirs& dirs) {
  if (x.size() != p.spec.input_dim())
    throw std::invalid_argument("mlp_jet_forward: input dim mismatch");
  const JetLayout lay(1, dirs);
  const int L = p.spec.n_layers();

  // One column per channel; the value column goes through exactly the same
  // expression as mlp_forward.
  std::vector<Eigen::VectorXd> a(lay.channels());
  a[0] = x;
  for (int d = 0; d < lay.nd; ++d) {
    a[1 + d] = Eigen::VectorXd::Zero(x.size());
    a[1 + d][dirs.rows[d]] = 1.0;
  }
  for (int k = 0; k < lay.nh; ++k)
    a[1 + lay.nd + k] = Eigen::VectorXd::Zero(x.size());

  std::vector<Eigen::VectorXd> s(lay.channels());
  for (int l = 0; l < L; ++l) {
    s[0] = p.W[l].transpose() * a[0];
    s[0] += p.b[l];
    for (int c = 1; c < lay.channels(); ++c) s[c] = p.W[l].transpose() * a[c];
    if (l + 1 < L) {
      a[0] = s[0].array().tanh().matrix();
      const auto T = a[0].array();
      for (int d = 0; d < lay.nd; ++d)
        a[1 + d] = ((1.0 - T.square()) * s[1 + d].array()).matrix();
      for (int k = 0; k < lay.nh; ++k) {
        const int d = lay.hess_of_dir[k];
        a[1 + lay.nd + k] =
            ((1.0 - T.square()) * s[1 + lay.nd + k].array() -
             2.0 * T * (1.0 - T.square()) * s[1 + d].array().square())
                .matrix();
      }
    } else {
      a = s;
    }
  }
  Eigen::MatrixXd out(p.spec.output_dim(), lay.channels());
  for (int c = 0; c < lay.channels(); ++c) out.col(c) = a[c];
  return out;
}

void jet_backward_batch(const MlpParams& p, const NetCache& cache,
                        const MatrixXd& Ybar, VectorXd* grad,
                        MatrixXd* Xbar_value) {
  const int L = p.spec.n_layers();
  const JetLayout& lay = cache.layout;
  const int B = lay.B;

  MatrixXd sbar = Ybar;
  MatrixXd abar;
  Eigen::ArrayXXd D;
  long offset = grad ? grad->size() : 0;
  for (int l = L - 1; l >= 0; --l) {
    if (l < L - 1) {
      // Activation pullback from the post-activation adjoint abar to the
      // pre-activation adjoint sbar, using cached S[l] and T. With
      // D = 1 - T^2 the forward rules
      //   v = tanh(s),  g' = D Sg,  h' = D Sh - 2 T D Sg^2
      // have partials
      //   dv/ds = D
      //   dg'/ds = -2 T D Sg               dg'/dSg = D
      //   dh'/ds = -2 T D Sh - 2 D (1 - 3 T^2) Sg^2
      //   dh'/dSg = -4 T D Sg              dh'/dSh = D
      const MatrixXd& S = cache.S[l];
      const auto T = cache.A[l + 1].middleCols(lay.val_off(), B).array();
      D = 1.0 - T.square();
      sbar.resize(abar.rows(), abar.cols());
      auto vbar = sbar.middleCols(lay.val_off(), B).array();
      vbar = abar.middleCols(lay.val_off(), B).array() * D;
      for (int d = 0; d < lay.nd; ++d) {
        const auto Sg = S.middleCols(lay.g_off(d), B).array();
        const auto gbar = abar.middleCols(lay.g_off(d), B).array();
        vbar += gbar * (-2.0 * T * D * Sg);
        sbar.middleCols(lay.g_off(d), B).array() = gbar * D;
      }
      for (int k = 0; k < lay.nh; ++k) {
        const int d = lay.hess_of_dir[k];
        const auto Sg = S.middleCols(lay.g_off(d), B).array();
        const auto Sh = S.middleCols(lay.h_off(k), B).array();
        const auto hbar = abar.middleCols(lay.h_off(k), B).array();
        vbar += hbar * (-2.0 * T * D * Sh -
                        2.0 * D * (1.0 - 3.0 * T.square()) * Sg.square());
        sbar.middleCols(lay.g_off(d), B).array() += hbar * (-4.0 * T * D * Sg);
        sbar.middleCols(lay.h_off(k), B).array() = hbar * D;
      }
    }
    if (grad) {
      const long nw = p.W[l].rows() * p.W[l].cols();
      const long nb = p.b[l].size();
      offset -= nw + nb;
      Eigen::Map<MatrixXd> dW(grad->data() + offset, p.W[l].cols(),
                              p.W[l].rows());
      dW.noalias() += sbar * cache.A[l].transpose();
      Eigen::Map<VectorXd> db(grad->data() + offset + nw, nb);
      db.noalias() += sbar.middleCols(lay.val_off(), B).rowwise().sum();
    }
    if (l > 0 || Xbar_value) {
      abar.noalias() = p.W[l] * sbar;
      if (l == 0 && Xbar_value)
        *Xbar_value = abar.middleCols(lay.val_off(), B);
    }
  }
}

}  // namespace ppinn::ad
