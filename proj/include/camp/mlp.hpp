#pragma once

#include "camp/rng.hpp"
#include "camp/types.hpp"

#include <string>
#include <vector>

namespace camp {

enum class Activation : int { Elu = 0, Tanh = 1 };

const char* activation_name(Activation a);
Activation activation_from_name(const std::string& name);

struct MlpSpec {
  std::vector<int> sizes;  // input, hidden..., output
  Activation activation = Activation::Elu;

  void validate() const;
  int input_dim() const { return sizes.front(); }
  int output_dim() const { return sizes.back(); }
};

// Fully connected network with linear output head. Parameters live in one
// flat vector ([W1,b1,W2,b2,...], column-major weights) so optimizers and
// checkpoints can treat every network uniformly. Forward/backward are pure
// given a parameter snapshot; per-call state lives in a Workspace.
class Mlp {
 public:
  explicit Mlp(MlpSpec spec);

  // Orthogonal weights (gain sqrt(2) on hidden layers, `output_gain` on the
  // head), zero biases.
  static Mlp orthogonal_init(MlpSpec spec, Rng& rng, double output_gain = 1.0);

  const MlpSpec& spec() const { return spec_; }
  int input_dim() const { return spec_.input_dim(); }
  int output_dim() const { return spec_.output_dim(); }
  int num_layers() const { return int(spec_.sizes.size()) - 1; }
  std::size_t param_count() const { return std::size_t(params_.size()); }
  VecX& params() { return params_; }
  const VecX& params() const { return params_; }

  Eigen::Map<MatX> weight(int layer);
  Eigen::Map<const MatX> weight(int layer) const;
  Eigen::Map<VecX> bias(int layer);
  Eigen::Map<const VecX> bias(int layer) const;

  // Cached pre-activations and activations of one forward pass.
  struct Workspace {
    std::vector<MatX> z;  // z[k], k = 0..L-1
    std::vector<MatX> a;  // a[0] = input, a[k] = phi(z[k-1]) for hidden layers
  };

  // Batch as columns: X is (input_dim x B), result (output_dim x B).
  MatX forward(const MatX& input, Workspace& ws) const;
  MatX forward(const MatX& input) const;
  VecX forward(const VecX& input) const;

  // Reverse pass. `upstream` is dL/dY (output_dim x B); returns flat parameter
  // gradients summed over the batch and optionally dL/dX.
  VecX backward(const Workspace& ws, const MatX& upstream, MatX* input_grad = nullptr) const;

  // Squared Frobenius norm of the input Jacobian, summed over the batch:
  //   P = sum_b sum_i ||d y_i(x_b) / d x_b||^2.
  // Adds dP/dparams into `param_grad` (which must be param_count long) and
  // optionally writes dP/dX. Uses forward-over-reverse differentiation, exact
  // for the piecewise-smooth activations used here.
  double input_gradient_penalty(const Workspace& ws, VecX& param_grad,
                                MatX* input_grad = nullptr) const;

 private:
  MlpSpec spec_;
  VecX params_;
  std::vector<std::ptrdiff_t> w_offset_, b_offset_;

  MatX activate(const MatX& z) const;
  MatX activate_deriv(const MatX& z) const;
  MatX activate_second_deriv(const MatX& z) const;
};

}  // namespace camp
