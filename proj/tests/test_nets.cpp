#include <doctest.h>

#include <cmath>
#include <sstream>

#include "ppinn/nets.hpp"

using namespace ppinn;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

// Straight-line re-implementation of the forward pass used as an
// independent oracle: plain loops, no shared code with the library path.
VectorXd naive_forward(const MlpParams& p, const VectorXd& x) {
  std::vector<double> a(x.data(), x.data() + x.size());
  const int L = p.spec.n_layers();
  for (int l = 0; l < L; ++l) {
    const int fin = p.spec.layer_sizes[l];
    const int fout = p.spec.layer_sizes[l + 1];
    std::vector<double> s(fout, 0.0);
    for (int j = 0; j < fout; ++j) {
      double acc = p.b[l][j];
      for (int i = 0; i < fin; ++i) acc += p.W[l](i, j) * a[i];
      s[j] = (l + 1 < L) ? std::tanh(acc) : acc;
    }
    a = std::move(s);
  }
  VectorXd out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i];
  return out;
}

}  // namespace

TEST_CASE("n_params counts weights and biases") {
  NetworkSpec spec{{2, 50, 50, 1}};
  CHECK(spec.n_params() == 2 * 50 + 50 + 50 * 50 + 50 + 50 * 1 + 1);
}

TEST_CASE("xavier init is deterministic with the documented scale") {
  NetworkSpec spec{{1, 50, 50, 1}};
  MlpParams p = xavier_init(spec, 0);
  MlpParams q = xavier_init(spec, 0);
  CHECK(p.flatten() == q.flatten());

  const double target = std::sqrt(2.0 / (1 + 50));
  const double mean = p.W[0].mean();
  const double sd = std::sqrt((p.W[0].array() - mean).square().mean());
  CHECK(sd > 0.7 * target);
  CHECK(sd < 1.3 * target);
  for (const auto& b : p.b) CHECK(b.isZero());

  MlpParams r = xavier_init(spec, 1);
  CHECK(p.flatten() != r.flatten());
}

TEST_CASE("flatten/unflatten round trip") {
  NetworkSpec spec{{3, 7, 5, 2}};
  MlpParams p = xavier_init(spec, 99);
  VectorXd flat = p.flatten();
  REQUIRE(flat.size() == spec.n_params());
  MlpParams q = unflatten(spec, flat);
  for (std::size_t l = 0; l < p.W.size(); ++l) {
    CHECK(p.W[l] == q.W[l]);
    CHECK(p.b[l] == q.b[l]);
  }
  CHECK_THROWS_AS(unflatten(spec, VectorXd::Zero(3)), std::invalid_argument);
}

TEST_CASE("forward pass matches an independent straight-line evaluation") {
  NetworkSpec spec{{2, 11, 9, 3}};
  MlpParams p = xavier_init(spec, 4);
  for (auto& b : p.b) b.setRandom();
  Rng rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    VectorXd x(2);
    x << rng.uniform(-2, 2), rng.uniform(-2, 2);
    const VectorXd y = mlp_forward(p, x);
    const VectorXd ref = naive_forward(p, x);
    for (int i = 0; i < 3; ++i)
      CHECK(std::abs(y[i] - ref[i]) <=
            1e-14 * std::max(1.0, std::abs(ref[i])));
  }
}

TEST_CASE("zero-bias networks are odd functions") {
  NetworkSpec spec{{2, 20, 20, 1}};
  MlpParams p = xavier_init(spec, 21);  // biases already zero
  Rng rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    VectorXd x(2);
    x << rng.normal(), rng.normal();
    const double fp = mlp_forward(p, x)[0];
    const double fm = mlp_forward(p, -x)[0];
    CHECK(fp == doctest::Approx(-fm).epsilon(1e-12));
  }
}

TEST_CASE("hidden activations are bounded, so outputs are too") {
  NetworkSpec spec{{1, 30, 1}};
  MlpParams p = xavier_init(spec, 17);
  for (auto& b : p.b) b.setConstant(0.3);
  const double bound = p.W[1].cwiseAbs().sum() + std::abs(p.b[1][0]);
  for (double x : {-1e6, -10.0, 0.0, 10.0, 1e6}) {
    VectorXd in(1);
    in << x;
    CHECK(std::abs(mlp_forward(p, in)[0]) <= bound);
  }
}

TEST_CASE("batched forward agrees with per-point forward") {
  NetworkSpec spec{{3, 16, 8, 2}};
  MlpParams p = xavier_init(spec, 12);
  MatrixXd X = MatrixXd::Random(3, 17);
  MatrixXd Y = mlp_forward_batch(p, X);
  for (int c = 0; c < X.cols(); ++c) {
    VectorXd y = mlp_forward(p, X.col(c));
    CHECK((Y.col(c) - y).cwiseAbs().maxCoeff() < 1e-13);
  }
}

TEST_CASE("checkpoint round trip preserves parameters exactly") {
  NetworkSpec spec{{2, 13, 5, 1}};
  MlpParams p = xavier_init(spec, 77);
  std::stringstream ss;
  save_checkpoint(ss, p, 123, 4567);
  Checkpoint ck = load_checkpoint(ss);
  CHECK(ck.seed == 123);
  CHECK(ck.step == 4567);
  CHECK(ck.params.spec == spec);
  CHECK(ck.params.flatten() == p.flatten());
}

TEST_CASE("checkpoint loader rejects malformed input") {
  {
    std::stringstream ss("garbage\n");
    CHECK_THROWS_AS(load_checkpoint(ss), std::runtime_error);
  }
  {
    std::stringstream ss("mlp-checkpoint v1\nlayers 2 4 1\nseed 0\nstep 0\n1.0\n2.0\n");
    CHECK_THROWS_AS(load_checkpoint(ss), std::runtime_error);  // truncated
  }
  {
    NetworkSpec spec{{2, 3, 1}};
    MlpParams p = xavier_init(spec, 1);
    std::stringstream ss;
    save_checkpoint(ss, p, 0, 0);
    std::string text = ss.str();
    text.replace(text.find("-checkpoint"), 11, "-chexpoint!");
    std::stringstream bad(text);
    CHECK_THROWS_AS(load_checkpoint(bad), std::runtime_error);
  }
}
