#include <cmath>

#include "doctest.h"
#include "ppinn/adam.hpp"

using namespace ppinn;
using Eigen::VectorXd;

TEST_CASE("adam matches a scalar reference over several steps") {
  // independent scalar recurrence, written out longhand
  double m = 0.0, v = 0.0, theta = 0.25;
  const double lr = 0.1, b1 = 0.9, b2 = 0.999, eps = 1e-8;
  const double gs[] = {0.5, -0.25, 0.125, 1.0};

  AdamState st = AdamState::init(1);
  AdamSettings settings{lr, b1, b2, eps};
  VectorXd p(1);
  p[0] = 0.25;

  for (int t = 1; t <= 4; ++t) {
    const double g = gs[t - 1];
    m = b1 * m + (1 - b1) * g;
    v = b2 * v + (1 - b2) * g * g;
    const double mhat = m / (1 - std::pow(b1, t));
    const double vhat = v / (1 - std::pow(b2, t));
    theta -= lr * mhat / (std::sqrt(vhat) + eps);

    VectorXd grad(1);
    grad[0] = g;
    adam_update(st, p, grad, settings, -1);
    CHECK(p[0] == doctest::Approx(theta).epsilon(1e-14));
  }
  CHECK(st.t == 4);
}

TEST_CASE("first step size is close to lr regardless of gradient scale") {
  AdamSettings settings{1e-4, 0.9, 0.999, 1e-8};
  for (double scale : {1e-6, 1.0, 1e6}) {
    AdamState st = AdamState::init(1);
    VectorXd p = VectorXd::Zero(1), g(1);
    g[0] = scale;
    adam_update(st, p, g, settings, -1);
    CHECK(p[0] == doctest::Approx(-1e-4).epsilon(1e-3));
  }
}

TEST_CASE("ascent flips the update direction") {
  AdamSettings settings{0.05, 0.9, 0.999, 1e-8};
  AdamState up = AdamState::init(2), down = AdamState::init(2);
  VectorXd pu = VectorXd::Zero(2), pd = VectorXd::Zero(2), g(2);
  g << 1.0, -2.0;
  adam_update(up, pu, g, settings, +1);
  adam_update(down, pd, g, settings, -1);
  CHECK(pu[0] == doctest::Approx(-pd[0]).epsilon(1e-14));
  CHECK(pu[1] == doctest::Approx(-pd[1]).epsilon(1e-14));
  CHECK(pu[0] > 0.0);
  CHECK(pu[1] < 0.0);
}

TEST_CASE("network update walks parameters in canonical flat order") {
  const NetworkSpec spec{{2, 4, 3}};
  MlpParams net = xavier_init(spec, 5);
  VectorXd flat = net.flatten();

  Rng rng(8);
  VectorXd grad(spec.n_params());
  for (long i = 0; i < grad.size(); ++i) grad[i] = rng.normal();

  AdamSettings settings{0.01, 0.9, 0.999, 1e-8};
  AdamState st_net = AdamState::init(spec.n_params());
  AdamState st_flat = AdamState::init(spec.n_params());
  for (int t = 0; t < 3; ++t) {
    adam_update(st_net, net, grad, settings, -1);
    adam_update(st_flat, flat, grad, settings, -1);
    grad *= -0.5;
  }
  const VectorXd net_flat = net.flatten();
  CHECK((net_flat - flat).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("adam descends a simple quadratic") {
  // minimize (theta - 3)^2 from 0
  AdamSettings settings{0.05, 0.9, 0.999, 1e-8};
  AdamState st = AdamState::init(1);
  VectorXd p = VectorXd::Zero(1);
  for (int t = 0; t < 2000; ++t) {
    VectorXd g(1);
    g[0] = 2.0 * (p[0] - 3.0);
    adam_update(st, p, g, settings, -1);
  }
  CHECK(p[0] == doctest::Approx(3.0).epsilon(1e-3));
}
