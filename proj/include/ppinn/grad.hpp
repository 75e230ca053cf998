#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <vector>

#include "ppinn/net_grad.hpp"
#include "ppinn/nets.hpp"
#include "ppinn/tape.hpp"

namespace ppinn::ad {

// Dense grid of tape variables (row-major storage, rows x cols).
struct RevMat {
  int rows = 0, cols = 0;
  std::vector<Rev> v;

  RevMat() = default;
  RevMat(int r, int c) : rows(r), cols(c), v(static_cast<std::size_t>(r) * c) {}
  Rev& operator()(int r, int c) { return v[static_cast<std::size_t>(r) * cols + c]; }
  const Rev& operator()(int r, int c) const {
    return v[static_cast<std::size_t>(r) * cols + c];
  }
};

// One input row of a batched network call: either a fixed row of B values or
// a row of B tape variables (e.g. generator outputs fed to another network).
struct InRow {
  Eigen::RowVectorXd fixed;
  std::vector<Rev> vars;

  static InRow of(const Eigen::RowVectorXd& row) { return {row, {}}; }
  static InRow of(std::vector<Rev> row) { return {{}, std::move(row)}; }
  bool is_var() const { return !vars.empty(); }
  int size() const {
    return is_var() ? static_cast<int>(vars.size())
                    : static_cast<int>(fixed.size());
  }
};

// Jet network call result: per output dimension and batch column, tape
// variables for the value and each tracked first/second derivative channel.
struct JetVars {
  JetDirs dirs;
  RevMat val;
  std::vector<RevMat> g;  // one per direction
  std::vector<RevMat> h;  // one per tracked second derivative, in dir order
};

// Records batched network evaluations on a tape so that scalar loss glue can
// be differentiated end to end. Parameter gradients of registered sets
// accumulate in canonical flat order during backward().
class GradContext {
 public:
  GradContext() = default;
  GradContext(const GradContext&) = delete;
  GradContext& operator=(const GradContext&) = delete;

  // Registers a parameter set. With track=false the set can be evaluated
  // through (and adjoints still flow to variable inputs) but no parameter
  // gradient is accumulated for it.
  int add_params(const MlpParams* p, bool track = true);

  // Batched value call: rows span the network input dimension.
  RevMat call(int set, const std::vector<InRow>& rows);

  // Batched jet call tracking the given directions.
  JetVars call_jet(int set, const std::vector<InRow>& rows, const JetDirs& dirs);

  Rev leaf(double v) { return tape_.leaf(v); }
  double value(Rev x) const { return tape_.value(x); }

  // Seeds d(loss)/d(loss)=1 and accumulates all parameter gradients.
  void backward(Rev loss) { tape_.backward(loss); }

  const Eigen::VectorXd& grad(int set) const { return grads_[set]; }
  const MlpParams& params(int set) const { return *sets_[set]; }
  Tape& tape() { return tape_; }

 private:
  Eigen::MatrixXd materialize(const std::vector<InRow>& rows, int in_dim) const;

  Tape tape_;
  std::vector<const MlpParams*> sets_;
  std::vector<char> track_;
  std::vector<Eigen::VectorXd> grads_;
};

// Loss builders used with grad_params / finite_diff_gradient: given a
// context and the ids of the registered sets (in the order they were
// passed), return the scalar loss on the context's tape.
using LossBuilder = std::function<Rev(GradContext&, const std::vector<int>&)>;

struct ParamGradient {
  double loss = 0.0;
  std::vector<Eigen::VectorXd> grads;  // one per parameter set
};

// Evaluates the loss and its gradient with respect to every set in `sets`.
ParamGradient grad_params(const LossBuilder& build,
                          const std::vector<const MlpParams*>& sets);

// Loss value only (no backward sweep).
double eval_loss(const LossBuilder& build,
                 const std::vector<const MlpParams*>& sets);

// Central finite differences of the loss with respect to set `set_idx`,
// using h = h0 * max(1, |theta_i|) per coordinate.
Eigen::VectorXd finite_diff_gradient(const LossBuilder& build,
                                     std::vector<MlpParams> sets, int set_idx,
                                     double h0 = 1e-6);

// Largest relative discrepancy between analytic and reference gradients over
// coordinates where either exceeds `floor` in magnitude.
double max_rel_gradient_error(const Eigen::VectorXd& analytic,
                              const Eigen::VectorXd& reference,
                              double floor = 1e-8);

}  // namespace ppinn::ad
