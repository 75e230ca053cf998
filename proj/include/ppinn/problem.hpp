#pragma once

#include <Eigen/Dense>
#include <array>
#include <map>
#include <string>

#include "ppinn/grad.hpp"
#include "ppinn/net_grad.hpp"
#include "ppinn/rng.hpp"

namespace ppinn {

// Derivative bundle of the surrogate field at one point, in the scalar type
// of the evaluation (double for plain values, ad::Rev on a tape). g and h are
// indexed by the problem's jet direction index; h entries exist only for
// directions whose second derivative the problem tracks. k/kp carry the
// diffusion function value and derivative for problems that learn one.
template <typename S>
struct FieldJet {
  S u{};
  std::array<S, 2> g{};
  std::array<S, 2> h{};
  S k{};
  S kp{};
};

struct Bounds {
  Eigen::VectorXd lo, hi;
};

// Training observations and collocation points, in the coordinate and field
// units the trainer sees. penalty_sets holds problem-specific extra
// collocation blocks (e.g. flux boundaries) keyed by name.
struct Dataset {
  Eigen::MatrixXd obs_coords;  // (coord_dim x N_obs)
  Eigen::RowVectorXd obs_u;    // (1 x N_obs)
  Eigen::MatrixXd colloc;      // (coord_dim x N_r)
  std::map<std::string, Eigen::MatrixXd> penalty_sets;

  int n_obs() const { return static_cast<int>(obs_coords.cols()); }
  int n_colloc() const { return static_cast<int>(colloc.cols()); }
};

// What the losses and the trainer need to know about a PDE problem: its
// coordinate box, which derivatives the surrogate jet must carry, and how to
// turn a FieldJet into a pointwise residual. Implementations are stateless.
class Problem {
 public:
  virtual ~Problem() = default;

  virtual std::string name() const = 0;
  virtual int coord_dim() const = 0;
  virtual Bounds bounds() const = 0;
  virtual ad::JetDirs jet_dirs() const = 0;
  virtual bool has_diffusion() const { return false; }

  virtual double residual(const FieldJet<double>& f,
                          const double* coords) const = 0;
  virtual ad::Rev residual(const FieldJet<ad::Rev>& f, const double* coords,
                           ad::GradContext& ctx) const = 0;

  // Additional PDE penalty terms (mean-square, unweighted) built from the
  // dataset's penalty sets; zero for problems without any. z draws for the
  // penalty points must come from an Rng seeded with penalty_seed so the
  // term is reproducible for a fixed seed.
  virtual ad::Rev boundary_penalty(ad::GradContext& ctx, int gen_id,
                                   int diff_id, const Dataset& ds, int z_dim,
                                   uint64_t penalty_seed) const;
};

}  // namespace ppinn
