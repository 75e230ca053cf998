#include "ppinn/grad.hpp"

#include <cmath>
#include <stdexcept>

namespace ppinn::ad {

using Eigen::MatrixXd;
using Eigen::VectorXd;

int GradContext::add_params(const MlpParams* p, bool track) {
  sets_.push_back(p);
  track_.push_back(track ? 1 : 0);
  grads_.emplace_back(VectorXd::Zero(p->n_params()));
  return static_cast<int>(sets_.size()) - 1;
}

MatrixXd GradContext::materialize(const std::vector<InRow>& rows,
                                  int in_dim) const {
  if (static_cast<int>(rows.size()) != in_dim)
    throw std::invalid_argument("network call: row count != input dim");
  const int B = rows.empty() ? 0 : rows[0].size();
  MatrixXd X(in_dim, B);
  for (int r = 0; r < in_dim; ++r) {
    if (rows[r].size() != B)
      throw std::invalid_argument("network call: ragged input rows");
    if (rows[r].is_var())
      for (int c = 0; c < B; ++c) X(r, c) = tape_.value(rows[r].vars[c]);
    else
      X.row(r) = rows[r].fixed;
  }
  return X;
}

RevMat GradContext::call(int set, const std::vector<InRow>& rows) {
  const MlpParams& p = *sets_[set];
  const MatrixXd X = materialize(rows, p.spec.input_dim());
  const int B = static_cast<int>(X.cols());

  auto cache = std::make_shared<NetCache>();
  MatrixXd Y;
  forward_batch(p, X, Y, cache.get());

  RevMat out(p.spec.output_dim(), B);
  for (int r = 0; r < out.rows; ++r)
    for (int c = 0; c < B; ++c) out(r, c) = tape_.leaf(Y(r, c));

  // Variable input rows whose adjoints must be scattered back.
  std::vector<std::pair<int, std::vector<int32_t>>> var_rows;
  for (int r = 0; r < static_cast<int>(rows.size()); ++r)
    if (rows[r].is_var()) {
      std::vector<int32_t> idx(B);
      for (int c = 0; c < B; ++c) idx[c] = rows[r].vars[c].i;
      var_rows.emplace_back(r, std::move(idx));
    }

  std::vector<int32_t> out_idx(out.v.size());
  for (std::size_t k = 0; k < out.v.size(); ++k) out_idx[k] = out.v[k].i;

  tape_.push_pullback([this, set, cache, out_idx, var_rows, B](Tape& tape) {
    const MlpParams& net = *sets_[set];
    const int od = net.spec.output_dim();
    MatrixXd Ybar(od, B);
    for (int r = 0; r < od; ++r)
      for (int c = 0; c < B; ++c)
        Ybar(r, c) = tape.adjoint({&tape, out_idx[static_cast<std::size_t>(r) * B + c]});
    MatrixXd Xbar;
    backward_batch(net, *cache, Ybar, track_[set] ? &grads_[set] : nullptr,
                   var_rows.empty() ? nullptr : &Xbar);
    for (const auto& [r, idx] : var_rows)
      for (int c = 0; c < B; ++c) tape.add_adjoint(idx[c], Xbar(r, c));
  });
  return out;
}

JetVars GradContext::call_jet(int set, const std::vector<InRow>& rows,
                              const JetDirs& dirs) {
  const MlpParams& p = *sets_[set];
  const MatrixXd X = materialize(rows, p.spec.input_dim());
  const int B = static_cast<int>(X.cols());
  const JetLayout lay(B, dirs);
  const int od = p.spec.output_dim();

  auto cache = std::make_shared<NetCache>();
  MatrixXd Y;
  jet_forward_batch(p, X, dirs, Y, cache.get());

  JetVars out;
  out.dirs = dirs;
  out.val = RevMat(od, B);
  for (int r = 0; r < od; ++r)
    for (int c = 0; c < B; ++c)
      out.val(r, c) = tape_.leaf(Y(r, lay.val_off() + c));
  for (int d = 0; d < lay.nd; ++d) {
    RevMat m(od, B);
    for (int r = 0; r < od; ++r)
      for (int c = 0; c < B; ++c) m(r, c) = tape_.leaf(Y(r, lay.g_off(d) + c));
    out.g.push_back(std::move(m));
  }
  for (int k = 0; k < lay.nh; ++k) {
    RevMat m(od, B);
    for (int r = 0; r < od; ++r)
      for (int c = 0; c < B; ++c) m(r, c) = tape_.leaf(Y(r, lay.h_off(k) + c));
    out.h.push_back(std::move(m));
  }

  std::vector<std::pair<int, std::vector<int32_t>>> var_rows;
  for (int r = 0; r < static_cast<int>(rows.size()); ++r)
    if (rows[r].is_var()) {
      std::vector<int32_t> idx(B);
      for (int c = 0; c < B; ++c) idx[c] = rows[r].vars[c].i;
      var_rows.emplace_back(r, std::move(idx));
    }

  // Flat handle list in stack order for the pullback gather.
  std::vector<int32_t> stack_idx;
  stack_idx.reserve(static_cast<std::size_t>(od) * lay.cols());
  auto push_mat = [&](const RevMat& m) {
    for (const Rev& rv : m.v) stack_idx.push_back(rv.i);
  };
  push_mat(out.val);
  for (const auto& m : out.g) push_mat(m);
  for (const auto& m : out.h) push_mat(m);

  tape_.push_pullback([this, set, cache, stack_idx, var_rows, lay, B](Tape& tape) {
    const MlpParams& net = *sets_[set];
    const int od2 = net.spec.output_dim();
    MatrixXd Ybar = MatrixXd::Zero(od2, lay.cols());
    std::size_t k = 0;
    const int C = lay.channels();
    for (int ch = 0; ch < C; ++ch)
      for (int r = 0; r < od2; ++r)
        for (int c = 0; c < B; ++c)
          Ybar(r, ch * B + c) = tape.adjoint({&tape, stack_idx[k++]});
    MatrixXd Xbar;
    jet_backward_batch(net, *cache, Ybar, track_[set] ? &grads_[set] : nullptr,
                       var_rows.empty() ? nullptr : &Xbar);
    for (const auto& [r, idx] : var_rows)
      for (int c = 0; c < B; ++c) tape.add_adjoint(idx[c], Xbar(r, c));
  });
  return out;
}

ParamGradient grad_params(const LossBuilder& build,
                          const std::vector<const MlpParams*>& sets) {
  GradContext ctx;
  std::vector<int> ids;
  for (const MlpParams* p : sets) ids.push_back(ctx.add_params(p));
  Rev loss = build(ctx, ids);
  ctx.backward(loss);
  ParamGradient out;
  out.loss = ctx.value(loss);
  for (int id : ids) out.grads.push_back(ctx.grad(id));
  return out;
}

double eval_loss(const LossBuilder& build,
                 const std::vector<const MlpParams*>& sets) {
  GradContext ctx;
  std::vector<int> ids;
  for (const MlpParams* p : sets) ids.push_back(ctx.add_params(p, false));
  Rev loss = build(ctx, ids);
  return ctx.value(loss);
}

VectorXd finite_diff_gradient(const LossBuilder& build,
                              std::vector<MlpParams> sets, int set_idx,
                              double h0) {
  std::vector<const MlpParams*> ptrs;
  for (const MlpParams& p : sets) ptrs.push_back(&p);
  MlpParams& target = sets[set_idx];
  VectorXd flat = target.flatten();
  VectorXd g(flat.size());
  for (long i = 0; i < flat.size(); ++i) {
    const double h = h0 * std::max(1.0, std::abs(flat[i]));
    const double saved = flat[i];
    flat[i] = saved + h;
    target = unflatten(target.spec, flat);
    const double fp = eval_loss(build, ptrs);
    flat[i] = saved - h;
    target = unflatten(target.spec, flat);
    const double fm = eval_loss(build, ptrs);
    flat[i] = saved;
    g[i] = (fp - fm) / (2.0 * h);
  }
  target = unflatten(target.spec, flat);
  return g;
}

double max_rel_gradient_error(const VectorXd& analytic,
                              const VectorXd& reference, double floor) {
  double worst = 0.0;
  for (long i = 0; i < analytic.size(); ++i) {
    const double mag = std::max(std::abs(analytic[i]), std::abs(reference[i]));
    if (mag <= floor) continue;
    worst = std::max(worst, std::abs(analytic[i] - reference[i]) / mag);
  }
  return worst;
}

}  // namespace ppinn::ad
