#pragma once

#include <Eigen/Dense>
#include <vector>

#include "ppinn/nets.hpp"

namespace ppinn::ad {

// Tracked derivative directions for a jet pass through a network. Each
// direction is an input row index; hess[d] != 0 additionally tracks the pure
// second derivative along direction d. Mixed second derivatives are never
// formed.
struct JetDirs {
  std::vector<int> rows;
  std::vector<char> hess;

  int n() const { return static_cast<int>(rows.size()); }
  int n_hess() const {
    int k = 0;
    for (char c : hess) k += (c != 0);
    return k;
  }
  // Channels of the stacked representation: value, gradients, tracked
  // second derivatives.
  int channels() const { return 1 + n() + n_hess(); }
};

// Column layout of a channel-stacked batch matrix (dim x channels*B):
// [ value | g_0 .. g_{nd-1} | h_(first tracked) .. ]. All blocks are B wide.
struct JetLayout {
  int B = 0;
  int nd = 0;
  int nh = 0;
  std::vector<int> hess_of_dir;  // direction index of each hess block

  JetLayout() = default;
  JetLayout(int batch, const JetDirs& dirs) : B(batch), nd(dirs.n()), nh(0) {
    for (int d = 0; d < dirs.n(); ++d)
      if (dirs.hess[d]) {
        hess_of_dir.push_back(d);
        ++nh;
      }
  }
  int channels() const { return 1 + nd + nh; }
  int cols() const { return channels() * B; }
  int val_off() const { return 0; }
  int g_off(int d) const { return (1 + d) * B; }
  int h_off(int k) const { return (1 + nd + k) * B; }
};

// Per-call activation cache. A[l] is the stacked input of affine layer l
// (A[0] is the network input, A[L] the output); S[l] is the stacked
// pre-activation of layer l. The plain engine uses the same structure with a
// single channel.
struct NetCache {
  std::vector<Eigen::MatrixXd> A;
  std::vector<Eigen::MatrixXd> S;
  JetLayout layout;
};

// Value-only batched pass. X is (input_dim x B). If cache is non-null it is
// filled for a later backward_batch.
void forward_batch(const MlpParams& p, const Eigen::MatrixXd& X,
                   Eigen::MatrixXd& Y, NetCache* cache);

// Accumulates d(loss)/d(params) into grad (canonical flat order, not
// cleared) given the output adjoint Ybar, and writes the input adjoint to
// Xbar when requested.
void backward_batch(const MlpParams& p, const NetCache& cache,
                    const Eigen::MatrixXd& Ybar, Eigen::VectorXd* grad,
                    Eigen::MatrixXd* Xbar);

// Jet pass: propagates value, first and tracked pure second derivative
// channels through the network in one stacked batch. X holds input values;
// direction channels are seeded with one-hot rows. Y gets shape
// (output_dim x channels*B) in JetLayout order.
void jet_forward_batch(const MlpParams& p, const Eigen::MatrixXd& X,
                       const JetDirs& dirs, Eigen::MatrixXd& Y,
                       NetCache* cache);

// Reverse pass through the jet computation. Ybar is the adjoint of the full
// output stack. Parameter gradients accumulate into grad; if Xbar_value is
// non-null it receives the adjoint of the input value block (the only input
// block that is ever variable).
void jet_backward_batch(const MlpParams& p, const NetCache& cache,
                        const Eigen::MatrixXd& Ybar, Eigen::VectorXd* grad,
                        Eigen::MatrixXd* Xbar_value);

// Single-point jet evaluation. Row r of the result holds
// (value, g..., h...) of output r in JetLayout channel order. The value
// channel runs the same per-layer expressions as mlp_forward and so agrees
// with it bit for bit.
Eigen::MatrixXd mlp_jet_forward(const MlpParams& p, const Eigen::VectorXd& x,
                                const JetDirs& dirs);

namespace testhook {
// Additive skew applied to the tanh second-derivative rule inside
// jet_forward_batch. Always zero in real use; the self-check suite sets it
// to verify that the finite-difference comparison actually detects a broken
// derivative rule.
extern double jet_tanh_hess_skew;
}  // namespace testhook

}  // namespace ppinn::ad
