#include <doctest.h>

#include <cmath>
#include <vector>

#include "ppinn/grad.hpp"
#include "ppinn/jet.hpp"
#include "ppinn/net_grad.hpp"
#include "ppinn/nets.hpp"
#include "ppinn/rng.hpp"
#include "ppinn/tape.hpp"

using namespace ppinn;
using namespace ppinn::ad;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

// Independent jet oracle: runs the network with Jet2<double> arithmetic in
// plain loops. Shares no derivative rules with the batched engine (Jet2 uses
// generic composition, the engine uses hand-derived stacked formulas).
std::vector<Jet2<double>> jet2_forward(const MlpParams& p,
                                       const VectorXd& x,
                                       const JetDirs& dirs) {
  const int nd = dirs.n();
  std::vector<Jet2<double>> a;
  for (long i = 0; i < x.size(); ++i) {
    Jet2<double> j = Jet2<double>::constant(x[i], nd);
    for (int d = 0; d < nd; ++d)
      if (dirs.rows[d] == i) j.g[d] = 1.0;
    a.push_back(j);
  }
  const int L = p.spec.n_layers();
  for (int l = 0; l < L; ++l) {
    const int fout = p.spec.layer_sizes[l + 1];
    std::vector<Jet2<double>> s(fout, Jet2<double>::constant(0.0, nd));
    for (int j = 0; j < fout; ++j) {
      Jet2<double> acc = Jet2<double>::constant(p.b[l][j], nd);
      for (long i = 0; i < p.W[l].rows(); ++i)
        acc = acc + p.W[l](i, j) * a[i];
      s[j] = (l + 1 < L) ? tanh(acc) : acc;
    }
    a = std::move(s);
  }
  return a;
}

double rel_err(double a, double b) {
  const double m = std::max(std::abs(a), std::abs(b));
  return m < 1e-10 ? 0.0 : std::abs(a - b) / m;
}

}  // namespace

TEST_CASE("Jet2 composition depth: tanh(tanh(x)) analytic derivatives") {
  const double x = 0.3;
  auto j = tanh(tanh(Jet2<double>::variable(x, 0, 1)));
  const double y = std::tanh(x);
  const double z = std::tanh(y);
  const double dy = 1.0 - y * y;
  const double dz = (1.0 - z * z) * dy;
  const double d2z = -2.0 * z * (1.0 - z * z) * dy * dy +
                     (1.0 - z * z) * (-2.0 * y * dy);
  CHECK(std::abs(j.v - z) < 1e-15);
  CHECK(std::abs(j.g[0] - dz) < 1e-12);
  CHECK(std::abs(j.h[0] - d2z) < 1e-12);
}

TEST_CASE("Jet2 product and trig rules match closed forms") {
  const double x = 0.7;
  auto jx = Jet2<double>::variable(x, 0, 1);
  auto f = sin(jx) * cos(jx) + square(jx) * exp(jx);
  // f = sin x cos x + x^2 e^x; f' = cos 2x + (2x + x^2) e^x;
  // f'' = -2 sin 2x + (2 + 4x + x^2) e^x
  CHECK(f.v == doctest::Approx(std::sin(x) * std::cos(x) +
                               x * x * std::exp(x)).epsilon(1e-14));
  CHECK(f.g[0] == doctest::Approx(std::cos(2 * x) +
                                  (2 * x + x * x) * std::exp(x)).epsilon(1e-13));
  CHECK(f.h[0] == doctest::Approx(-2 * std::sin(2 * x) +
                                  (2 + 4 * x + x * x) * std::exp(x)).epsilon(1e-13));
}

TEST_CASE("Jet2 rejects mismatched direction sets") {
  auto a = Jet2<double>::variable(1.0, 0, 1);
  auto b = Jet2<double>::variable(2.0, 0, 2);
  CHECK_THROWS_AS((void)(a + b), std::invalid_argument);
  CHECK_THROWS_AS((void)(a * b), std::invalid_argument);
}

TEST_CASE("tape gradients match hand-derived expressions") {
  Tape tape;
  Rev x = tape.leaf(0.8), y = tape.leaf(-1.3);
  Rev f = x * y + tanh(x) / y + log_sigmoid(x * 2.0 - y);
  tape.backward(f);
  const double xv = 0.8, yv = -1.3;
  const double t = std::tanh(xv);
  const double sig = 1.0 / (1.0 + std::exp(-(2 * xv - yv)));
  const double dfdx = yv + (1.0 - t * t) / yv + (1.0 - sig) * 2.0;
  const double dfdy = xv - t / (yv * yv) + (1.0 - sig) * (-1.0);
  CHECK(tape.adjoint(x) == doctest::Approx(dfdx).epsilon(1e-12));
  CHECK(tape.adjoint(y) == doctest::Approx(dfdy).epsilon(1e-12));
}

TEST_CASE("log_sigmoid stays finite for extreme arguments") {
  CHECK(log_sigmoid_value(800.0) == doctest::Approx(0.0));
  CHECK(log_sigmoid_value(-800.0) == doctest::Approx(-800.0));
  CHECK(std::isfinite(log_sigmoid_value(-1e8)));
  CHECK(sigmoid_value(-800.0) >= 0.0);
  CHECK(sigmoid_value(800.0) <= 1.0);
}

TEST_CASE("batched jet forward agrees with the Jet2 oracle") {
  Rng rng(11);
  for (int trial = 0; trial < 3; ++trial) {
    NetworkSpec spec{{3, 13, 9, 2}};
    MlpParams p = xavier_init(spec, 100 + trial);
    for (auto& b : p.b) b.setRandom();
    JetDirs dirs{{0, 2}, {1, 1}};
    MatrixXd X(3, 5);
    for (int c = 0; c < 5; ++c)
      for (int r = 0; r < 3; ++r) X(r, c) = rng.uniform(-1.5, 1.5);

    MatrixXd Y;
    jet_forward_batch(p, X, dirs, Y, nullptr);
    JetLayout lay(5, dirs);
    for (int c = 0; c < 5; ++c) {
      auto oracle = jet2_forward(p, X.col(c), dirs);
      for (int r = 0; r < 2; ++r) {
        CHECK(rel_err(Y(r, lay.val_off() + c), oracle[r].v) < 1e-13);
        CHECK(rel_err(Y(r, lay.g_off(0) + c), oracle[r].g[0]) < 1e-12);
        CHECK(rel_err(Y(r, lay.g_off(1) + c), oracle[r].g[1]) < 1e-12);
        CHECK(rel_err(Y(r, lay.h_off(0) + c), oracle[r].h[0]) < 1e-12);
        CHECK(rel_err(Y(r, lay.h_off(1) + c), oracle[r].h[1]) < 1e-12);
      }
    }
  }
}

TEST_CASE("single-point jet value channel is bit-identical to mlp_forward") {
  NetworkSpec spec{{2, 10, 10, 1}};
  MlpParams p = xavier_init(spec, 5);
  for (auto& b : p.b) b.setRandom();
  JetDirs dirs{{0}, {1}};
  Rng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    VectorXd x(2);
    x << rng.normal(), rng.normal();
    MatrixXd jet = mlp_jet_forward(p, x, dirs);
    CHECK(jet(0, 0) == mlp_forward(p, x)[0]);
    auto oracle = jet2_forward(p, x, dirs);
    CHECK(rel_err(jet(0, 1), oracle[0].g[0]) < 1e-12);
    CHECK(rel_err(jet(0, 2), oracle[0].h[0]) < 1e-12);
  }
}

TEST_CASE("batched jet value channel tracks the plain forward pass") {
  NetworkSpec spec{{2, 10, 10, 1}};
  MlpParams p = xavier_init(spec, 5);
  MatrixXd X = MatrixXd::Random(2, 7);
  JetDirs dirs{{0}, {1}};
  MatrixXd Y;
  jet_forward_batch(p, X, dirs, Y, nullptr);
  MatrixXd Yplain = mlp_forward_batch(p, X);
  CHECK((Y.leftCols(7) - Yplain).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("jet derivatives match finite differences of the forward pass") {
  NetworkSpec spec{{2, 20, 20, 1}};
  MlpParams p = xavier_init(spec, 31);
  Rng rng(13);
  JetDirs dirs{{0, 1}, {1, 0}};
  JetLayout lay(1, dirs);
  for (int trial = 0; trial < 10; ++trial) {
    VectorXd x(2);
    x << rng.uniform(-1, 1), rng.uniform(-1, 1);
    MatrixXd Y;
    jet_forward_batch(p, x, dirs, Y, nullptr);

    auto f = [&](double dx, double dt) {
      VectorXd q = x;
      q[0] += dx;
      q[1] += dt;
      return mlp_forward(p, q)[0];
    };
    const double h1 = 1e-6, h2 = 1e-3;
    const double fd_gx = (f(h1, 0) - f(-h1, 0)) / (2 * h1);
    const double fd_gt = (f(0, h1) - f(0, -h1)) / (2 * h1);
    // fourth-order central stencil for the pure second derivative
    const double fd_hxx = (-f(2 * h2, 0) + 16 * f(h2, 0) - 30 * f(0, 0) +
                           16 * f(-h2, 0) - f(-2 * h2, 0)) /
                          (12 * h2 * h2);
    CHECK(rel_err(Y(0, lay.g_off(0)), fd_gx) < 1e-8);
    CHECK(rel_err(Y(0, lay.g_off(1)), fd_gt) < 1e-8);
    CHECK(rel_err(Y(0, lay.h_off(0)), fd_hxx) < 1e-6);
  }
}

TEST_CASE("plain network-call gradients match finite differences") {
  NetworkSpec spec{{3, 8, 8, 2}};
  MlpParams p = xavier_init(spec, 9);
  for (auto& b : p.b) b.setRandom();
  MatrixXd X = MatrixXd::Random(3, 6);

  LossBuilder build = [&X](GradContext& ctx, const std::vector<int>& ids) {
    std::vector<InRow> rows;
    for (int r = 0; r < 3; ++r) rows.push_back(InRow::of(X.row(r)));
    RevMat y = ctx.call(ids[0], rows);
    Rev loss = ctx.leaf(0.0);
    for (const Rev& v : y.v) loss += square(v) + 0.3 * v;
    return loss * (1.0 / static_cast<double>(y.v.size()));
  };
  auto pg = grad_params(build, {&p});
  VectorXd fd = finite_diff_gradient(build, {p}, 0);
  CHECK(max_rel_gradient_error(pg.grads[0], fd) < 1e-6);
}

TEST_CASE("jet network-call gradients match finite differences") {
  NetworkSpec spec{{2, 10, 10, 1}};
  MlpParams p = xavier_init(spec, 14);
  MatrixXd X = MatrixXd::Random(2, 5);
  JetDirs dirs{{0, 1}, {1, 0}};

  // Touches value, gradient and second-derivative channels the way a
  // residual would.
  LossBuilder build = [&](GradContext& ctx, const std::vector<int>& ids) {
    std::vector<InRow> rows{InRow::of(X.row(0)), InRow::of(X.row(1))};
    JetVars jv = ctx.call_jet(ids[0], rows, dirs);
    Rev loss = ctx.leaf(0.0);
    for (int c = 0; c < jv.val.cols; ++c) {
      Rev r = jv.g[1](0, c) + jv.val(0, c) * jv.g[0](0, c) - 0.1 * jv.h[0](0, c);
      loss += square(r);
    }
    return loss * (1.0 / jv.val.cols);
  };
  auto pg = grad_params(build, {&p});
  VectorXd fd = finite_diff_gradient(build, {p}, 0);
  CHECK(max_rel_gradient_error(pg.grads[0], fd) < 1e-6);
}

TEST_CASE("composed calls propagate adjoints through variable inputs") {
  // g(x) feeds both a discriminator-style net and a one-input jet net, the
  // way the losses compose generator, discriminator and diffusion networks.
  NetworkSpec gen_spec{{2, 9, 9, 1}}, disc_spec{{2, 7, 1}}, gam_spec{{1, 8, 1}};
  MlpParams gen = xavier_init(gen_spec, 1);
  MlpParams disc = xavier_init(disc_spec, 2);
  MlpParams gam = xavier_init(gam_spec, 3);
  for (auto& b : gen.b) b.setRandom();
  MatrixXd X = MatrixXd::Random(2, 6);

  LossBuilder build = [&](GradContext& ctx, const std::vector<int>& ids) {
    std::vector<InRow> grows{InRow::of(X.row(0)), InRow::of(X.row(1))};
    RevMat u = ctx.call(ids[0], grows);
    std::vector<Rev> urow(u.v.begin(), u.v.end());
    RevMat t = ctx.call(ids[1], {InRow::of(X.row(0)), InRow::of(urow)});
    JetVars k = ctx.call_jet(ids[2], {InRow::of(urow)}, JetDirs{{0}, {0}});
    Rev loss = ctx.leaf(0.0);
    for (int c = 0; c < 6; ++c)
      loss += log_sigmoid(t(0, c)) + square(k.g[0](0, c)) + k.val(0, c);
    return loss * (1.0 / 6.0);
  };
  auto pg = grad_params(build, {&gen, &disc, &gam});
  for (int s = 0; s < 3; ++s) {
    VectorXd fd = finite_diff_gradient(build, {gen, disc, gam}, s);
    CHECK(max_rel_gradient_error(pg.grads[s], fd) < 1e-6);
  }
}

TEST_CASE("gradient is linear in the loss") {
  NetworkSpec spec{{2, 6, 1}};
  MlpParams p = xavier_init(spec, 8);
  MatrixXd X = MatrixXd::Random(2, 4);
  auto term = [&X](GradContext& ctx, int id, int which) {
    std::vector<InRow> rows{InRow::of(X.row(0)), InRow::of(X.row(1))};
    RevMat y = ctx.call(id, rows);
    Rev loss = ctx.leaf(0.0);
    for (const Rev& v : y.v) loss += which == 0 ? square(v) : tanh(v);
    return loss;
  };
  auto g0 = grad_params([&](GradContext& c, const std::vector<int>& ids) {
    return term(c, ids[0], 0);
  }, {&p});
  auto g1 = grad_params([&](GradContext& c, const std::vector<int>& ids) {
    return term(c, ids[0], 1);
  }, {&p});
  auto gc = grad_params([&](GradContext& c, const std::vector<int>& ids) {
    return 2.0 * term(c, ids[0], 0) + (-0.5) * term(c, ids[0], 1);
  }, {&p});
  VectorXd expect = 2.0 * g0.grads[0] - 0.5 * g1.grads[0];
  CHECK((gc.grads[0] - expect).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("a parameter set the loss never touches gets a zero gradient") {
  NetworkSpec spec{{1, 5, 1}};
  MlpParams used = xavier_init(spec, 1);
  MlpParams unused = xavier_init(spec, 2);
  LossBuilder build = [](GradContext& ctx, const std::vector<int>& ids) {
    Eigen::RowVectorXd x(3);
    x << -0.5, 0.1, 0.9;
    RevMat y = ctx.call(ids[0], {InRow::of(x)});
    Rev loss = ctx.leaf(0.0);
    for (const Rev& v : y.v) loss += square(v);
    return loss;
  };
  auto pg = grad_params(build, {&used, &unused});
  CHECK(pg.grads[0].cwiseAbs().maxCoeff() > 0.0);
  CHECK(pg.grads[1].isZero());
}

TEST_CASE("finite-difference comparison detects a broken jet rule") {
  NetworkSpec spec{{1, 8, 1}};
  MlpParams p = xavier_init(spec, 6);
  Eigen::RowVectorXd x(4);
  x << -0.8, -0.1, 0.4, 0.9;
  LossBuilder build = [&x](GradContext& ctx, const std::vector<int>& ids) {
    JetVars jv = ctx.call_jet(ids[0], {InRow::of(x)}, JetDirs{{0}, {1}});
    Rev loss = ctx.leaf(0.0);
    for (int c = 0; c < 4; ++c) loss += square(jv.h[0](0, c));
    return loss;
  };
  auto clean = grad_params(build, {&p});
  VectorXd fd = finite_diff_gradient(build, {p}, 0);
  REQUIRE(max_rel_gradient_error(clean.grads[0], fd) < 1e-6);

  testhook::jet_tanh_hess_skew = 0.05;
  auto broken = grad_params(build, {&p});
  VectorXd fd_broken = finite_diff_gradient(build, {p}, 0);
  testhook::jet_tanh_hess_skew = 0.0;
  CHECK(max_rel_gradient_error(broken.grads[0], fd_broken) > 1e-4);
}
