#include "ppinn/nets.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ppinn {

long NetworkSpec::n_params() const {
  long n = 0;
  for (int l = 0; l + 1 < static_cast<int>(layer_sizes.size()); ++l)
    n += static_cast<long>(layer_sizes[l]) * layer_sizes[l + 1] +
         layer_sizes[l + 1];
  return n;
}

static void check_spec(const NetworkSpec& spec) {
  if (spec.layer_sizes.size() < 2)
    throw std::invalid_argument("network spec needs at least two layers");
  for (int s : spec.layer_sizes)
    if (s <= 0) throw std::invalid_argument("network spec has a layer size <= 0");
}

MlpParams zeros_like(const NetworkSpec& spec) {
  check_spec(spec);
  MlpParams p;
  p.spec = spec;
  for (int l = 0; l + 1 < static_cast<int>(spec.layer_sizes.size()); ++l) {
    p.W.push_back(Eigen::MatrixXd::Zero(spec.layer_sizes[l], spec.layer_sizes[l + 1]));
    p.b.push_back(Eigen::VectorXd::Zero(spec.layer_sizes[l + 1]));
  }
  return p;
}

Eigen::VectorXd MlpParams::flatten() const {
  Eigen::VectorXd out(n_params());
  long k = 0;
  for (std::size_t l = 0; l < W.size(); ++l) {
    for (long r = 0; r < W[l].rows(); ++r)
      for (long c = 0; c < W[l].cols(); ++c) out[k++] = W[l](r, c);
    for (long i = 0; i < b[l].size(); ++i) out[k++] = b[l][i];
  }
  return out;
}

void MlpParams::add_scaled(const Eigen::VectorXd& flat_delta, double scale) {
  if (flat_delta.size() != n_params())
    throw std::invalid_argument("add_scaled: length mismatch");
  long k = 0;
  for (std::size_t l = 0; l < W.size(); ++l) {
    for (long r = 0; r < W[l].rows(); ++r)
      for (long c = 0; c < W[l].cols(); ++c) W[l](r, c) += scale * flat_delta[k++];
    for (long i = 0; i < b[l].size(); ++i) b[l][i] += scale * flat_delta[k++];
  }
}

MlpParams unflatten(const NetworkSpec& spec, const Eigen::VectorXd& flat) {
  check_spec(spec);
  if (flat.size() != spec.n_params())
    throw std::invalid_argument("unflatten: flat vector length mismatch");
  MlpParams p = zeros_like(spec);
  long k = 0;
  for (std::size_t l = 0; l < p.W.size(); ++l) {
    for (long r = 0; r < p.W[l].rows(); ++r)
      for (long c = 0; c < p.W[l].cols(); ++c) p.W[l](r, c) = flat[k++];
    for (long i = 0; i < p.b[l].size(); ++i) p.b[l][i] = flat[k++];
  }
  return p;
}

MlpParams xavier_init(const NetworkSpec& spec, uint64_t seed) {
  check_spec(spec);
  MlpParams p = zeros_like(spec);
  Rng rng(seed);
  for (std::size_t l = 0; l < p.W.size(); ++l) {
    const double stddev =
        std::sqrt(2.0 / (spec.layer_sizes[l] + spec.layer_sizes[l + 1]));
    for (long r = 0; r < p.W[l].rows(); ++r)
      for (long c = 0; c < p.W[l].cols(); ++c)
        p.W[l](r, c) = stddev * rng.normal();
    // biases stay zero; keep the draw order aligned with the flat layout
  }
  return p;
}

Eigen::MatrixXd mlp_forward_batch(const MlpParams& p, const Eigen::MatrixXd& X) {
  if (X.rows() != p.spec.input_dim())
    throw std::invalid_argument("mlp_forward_batch: input dim mismatch");
  Eigen::MatrixXd a = X;
  const int L = p.spec.n_layers();
  for (int l = 0; l < L; ++l) {
    Eigen::MatrixXd s = p.W[l].transpose() * a;
    s.colwise() += p.b[l];
    if (l + 1 < L)
      a = s.array().tanh().matrix();
    else
      a = std::move(s);
  }
  return a;
}

Eigen::VectorXd mlp_forward(const MlpParams& p, const Eigen::VectorXd& x) {
  return mlp_forward_batch(p, x);
}

void save_checkpoint(std::ostream& os, const MlpParams& p, uint64_t seed,
                     long step) {
  os << "mlp-checkpoint v1\n";
  os << "layers";
  for (int s : p.spec.layer_sizes) os << ' ' << s;
  os << "\nseed " << seed << "\nstep " << step << "\n";
  const Eigen::VectorXd flat = p.flatten();
  char buf[64];
  for (long i = 0; i < flat.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g\n", flat[i]);
    os << buf;
  }
}

void save_checkpoint_file(const std::string& path, const MlpParams& p,
                          uint64_t seed, long step) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open checkpoint file for writing: " + path);
  save_checkpoint(f, p, seed, step);
}

Checkpoint load_checkpoint(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "mlp-checkpoint v1")
    throw std::runtime_error("checkpoint: bad magic line");
  if (!std::getline(is, line) || line.rfind("layers", 0) != 0)
    throw std::runtime_error("checkpoint: missing layers line");
  NetworkSpec spec;
  {
    std::istringstream ss(line.substr(6));
    int v;
    while (ss >> v) spec.layer_sizes.push_back(v);
  }
  if (spec.layer_sizes.size() < 2)
    throw std::runtime_error("checkpoint: bad layer list");
  Checkpoint ck;
  if (!std::getline(is, line) || line.rfind("seed ", 0) != 0)
    throw std::runtime_error("checkpoint: missing seed line");
  ck.seed = std::stoull(line.substr(5));
  if (!std::getline(is, line) || line.rfind("step ", 0) != 0)
    throw std::runtime_error("checkpoint: missing step line");
  ck.step = std::stol(line.substr(5));
  Eigen::VectorXd flat(spec.n_params());
  for (long i = 0; i < flat.size(); ++i) {
    if (!std::getline(is, line))
      throw std::runtime_error("checkpoint: truncated parameter block");
    try {
      flat[i] = std::stod(line);
    } catch (const std::exception&) {
      throw std::runtime_error("checkpoint: unparsable value at index " +
                               std::to_string(i));
    }
  }
  ck.params = unflatten(spec, flat);
  return ck;
}

Checkpoint load_checkpoint_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open checkpoint file: " + path);
  return load_checkpoint(f);
}

}  // namespace ppinn
