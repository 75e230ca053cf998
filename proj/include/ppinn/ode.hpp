#pragma once

#include "ppinn/problem.hpp"

namespace ppinn {

// One-dimensional two-point boundary value problem on [-1, 1]:
//   u_xx - u^2 u_x = f(x),  u(-1) = u(1) = 0 (up to observation noise),
// with f chosen so the noise-free solution is sin(pi x).
double ode_forcing(double x);
double ode_exact(double x);

class OdeProblem : public Problem {
 public:
  std::string name() const override { return "ode"; }
  int coord_dim() const override { return 1; }
  Bounds bounds() const override;
  ad::JetDirs jet_dirs() const override { return {{0}, {1}}; }
  double residual(const FieldJet<double>& f, const double* c) const override;
  ad::Rev residual(const FieldJet<ad::Rev>& f, const double* c,
                   ad::GradContext& ctx) const override;
};

// Observations are the two boundary points, each repeated n_per_boundary
// times; with sigma2 > 0 every copy gets independent N(0, sigma2) noise.
// Collocation points are uniform in (-1, 1).
Dataset make_ode_dataset(int n_per_boundary, int n_colloc, double sigma2,
                         uint64_t seed);

// Solves the deterministic BVP with boundary values (ua, ub) by damped
// Newton iteration on a second-order central finite-difference grid.
// Returns the solution at the n_nodes equispaced grid points.
Eigen::VectorXd ode_bvp_solve(double ua, double ub, int n_nodes = 2001,
                              double tol = 1e-10, int max_iter = 50);

// Evaluates a grid solution from ode_bvp_solve at x by linear interpolation;
// x is clamped to [-1, 1].
double ode_grid_interp(const Eigen::VectorXd& u, double x);

// Monte Carlo reference for the noisy problem: draws boundary pairs
// (ua, ub) ~ N(0, sigma2), solves each BVP, and reports per-point samples,
// mean and standard deviation (1/N normalization) at eval_x.
struct OdeReference {
  Eigen::MatrixXd samples;  // (eval points x draws)
  Eigen::VectorXd mean, stddev;
};
OdeReference ode_reference_mc(double sigma2, int n_draws,
                              const Eigen::VectorXd& eval_x, uint64_t seed,
                              int n_nodes = 2001);

}  // namespace ppinn
