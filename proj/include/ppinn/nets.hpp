#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ppinn/rng.hpp"

namespace ppinn {

// Layer sizes of a fully connected tanh network, input through output.
// Hidden layers use tanh, the output layer is linear.
struct NetworkSpec {
  std::vector<int> layer_sizes;

  int input_dim() const { return layer_sizes.front(); }
  int output_dim() const { return layer_sizes.back(); }
  int n_layers() const { return static_cast<int>(layer_sizes.size()) - 1; }
  long n_params() const;
  bool operator==(const NetworkSpec&) const = default;
};

// Dense parameters. W[l] has shape (fan_in x fan_out), b[l] has length
// fan_out; a layer maps a to W^T a + b. The canonical flat ordering used by
// flatten/unflatten, initialization, checkpoints and optimizer state is
// layer-major, weights before the layer's biases, row-major within a weight
// matrix (all fan-out entries of one input row are contiguous).
struct MlpParams {
  NetworkSpec spec;
  std::vector<Eigen::MatrixXd> W;
  std::vector<Eigen::VectorXd> b;

  long n_params() const { return spec.n_params(); }
  Eigen::VectorXd flatten() const;
  void add_scaled(const Eigen::VectorXd& flat_delta, double scale);
};

MlpParams zeros_like(const NetworkSpec& spec);

// Unflatten in canonical order. Throws std::invalid_argument on a length
// mismatch.
MlpParams unflatten(const NetworkSpec& spec, const Eigen::VectorXd& flat);

// Normal Xavier/Glorot initialization: weight std sqrt(2/(fan_in+fan_out)),
// biases zero. Draw order equals the canonical flat ordering, so a given
// (spec, seed) pair always produces the same parameters.
MlpParams xavier_init(const NetworkSpec& spec, uint64_t seed);

// Forward pass of a single point.
Eigen::VectorXd mlp_forward(const MlpParams& p, const Eigen::VectorXd& x);

// Forward pass of a batch stored column-wise: X is (input_dim x B).
Eigen::MatrixXd mlp_forward_batch(const MlpParams& p, const Eigen::MatrixXd& X);

// Plain-text checkpoint. Header carries the spec, a seed, and a step count;
// the body is the canonical flat parameter vector, one value per line at
// full precision.
void save_checkpoint(std::ostream& os, const MlpParams& p, uint64_t seed,
                     long step);
void save_checkpoint_file(const std::string& path, const MlpParams& p,
                          uint64_t seed, long step);

struct Checkpoint {
  MlpParams params;
  uint64_t seed = 0;
  long step = 0;
};

// Throws std::runtime_error on malformed input.
Checkpoint load_checkpoint(std::istream& is);
Checkpoint load_checkpoint_file(const std::string& path);

}  // namespace ppinn
