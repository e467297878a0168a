#include "camp/mlp.hpp"

#include "camp/errors.hpp"

#include <Eigen/QR>

#include <cmath>

namespace camp {

const char* activation_name(Activation a) { return a == Activation::Elu ? "elu" : "tanh"; }

Activation activation_from_name(const std::string& name) {
  if (name == "elu") return Activation::Elu;
  if (name == "tanh") return Activation::Tanh;
  throw ConfigError("unknown activation '" + name + "'");
}

void MlpSpec::validate() const {
  if (sizes.size() < 3) throw ConfigError("MlpSpec: need input, at least one hidden, and output size");
  for (int s : sizes) {
    if (s <= 0) throw ConfigError("MlpSpec: layer sizes must be positive");
  }
}

Mlp::Mlp(MlpSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  std::ptrdiff_t offset = 0;
  const int layers = num_layers();
  w_offset_.resize(layers);
  b_offset_.resize(layers);
  for (int k = 0; k < layers; ++k) {
    const std::ptrdiff_t rows = spec_.sizes[k + 1], cols = spec_.sizes[k];
    w_offset_[k] = offset;
    offset += rows * cols;
    b_offset_[k] = offset;
    offset += rows;
  }
  params_ = VecX::Zero(offset);
}

namespace {
MatX orthogonal_matrix(int rows, int cols, Rng& rng) {
  const int n = std::max(rows, cols), m = std::min(rows, cols);
  MatX gauss(n, m);
  for (int j = 0; j < m; ++j) {
    for (int i = 0; i < n; ++i) gauss(i, j) = rng.normal();
  }
  Eigen::HouseholderQR<MatX> qr(gauss);
  MatX q = qr.householderQ() * MatX::Identity(n, m);
  MatX r = qr.matrixQR().topRows(m).triangularView<Eigen::Upper>();
  for (int j = 0; j < m; ++j) {
    if (r(j, j) < 0) q.col(j) *= -1.0;
  }
  return rows >= cols ? q : MatX(q.transpose());
}
}  // namespace

Mlp Mlp::orthogonal_init(MlpSpec spec, Rng& rng, double output_gain) {
  Mlp net(std::move(spec));
  const int layers = net.num_layers();
  for (int k = 0; k < layers; ++k) {
    const double gain = (k == layers - 1) ? output_gain : std::sqrt(2.0);
    net.weight(k) = gain * orthogonal_matrix(net.spec_.sizes[k + 1], net.spec_.sizes[k], rng);
    net.bias(k).setZero();
  }
  return net;
}

Eigen::Map<MatX> Mlp::weight(int layer) {
  return Eigen::Map<MatX>(params_.data() + w_offset_[layer], spec_.sizes[layer + 1], spec_.sizes[layer]);
}

Eigen::Map<const MatX> Mlp::weight(int layer) const {
  return Eigen::Map<const MatX>(params_.data() + w_offset_[layer], spec_.sizes[layer + 1],
                                spec_.sizes[layer]);
}

Eigen::Map<VecX> Mlp::bias(int layer) {
  return Eigen::Map<VecX>(params_.data() + b_offset_[layer], spec_.sizes[layer + 1]);
}

Eigen::Map<const VecX> Mlp::bias(int layer) const {
  return Eigen::Map<const VecX>(params_.data() + b_offset_[layer], spec_.sizes[layer + 1]);
}

MatX Mlp::activate(const MatX& z) const {
  if (spec_.activation == Activation::Elu) {
    return z.unaryExpr([](double x) { return x > 0.0 ? x : std::expm1(x); });
  }
  return z.array().tanh().matrix();
}

MatX Mlp::activate_deriv(const MatX& z) const {
  if (spec_.activation == Activation::Elu) {
    return z.unaryExpr([](double x) { return x > 0.0 ? 1.0 : std::exp(x); });
  }
  return (1.0 - z.array().tanh().square()).matrix();
}

MatX Mlp::activate_second_deriv(const MatX& z) const {
  if (spec_.activation == Activation::Elu) {
    return z.unaryExpr([](double x) { return x > 0.0 ? 0.0 : std::exp(x); });
  }
  MatX th = z.array().tanh().matrix();
  return (-2.0 * th.array() * (1.0 - th.array().square())).matrix();
}

MatX Mlp::forward(const MatX& input, Workspace& ws) const {
  if (input.rows() != input_dim()) throw ConfigError("Mlp::forward: input dimension mismatch");
  const int layers = num_layers();
  ws.z.assign(layers, MatX());
  ws.a.assign(layers, MatX());
  ws.a[0] = input;
  for (int k = 0; k < layers; ++k) {
    ws.z[k] = (weight(k) * ws.a[k]).colwise() + bias(k);
    if (k + 1 < layers) ws.a[k + 1] = activate(ws.z[k]);
  }
  return ws.z[layers - 1];
}

MatX Mlp::forward(const MatX& input) const {
  Workspace ws;
  return forward(input, ws);
}

VecX Mlp::forward(const VecX& input) const {
  Workspace ws;
  return forward(MatX(input), ws);
}

VecX Mlp::backward(const Workspace& ws, const MatX& upstream, MatX* input_grad) const {
  const int layers = num_layers();
  if (upstream.rows() != output_dim() || upstream.cols() != ws.a[0].cols()) {
    throw ConfigError("Mlp::backward: upstream shape mismatch");
  }
  VecX grad = VecX::Zero(params_.size());
  MatX delta = upstream;
  for (int k = layers - 1; k >= 0; --k) {
    Eigen::Map<MatX> gw(grad.data() + w_offset_[k], spec_.sizes[k + 1], spec_.sizes[k]);
    Eigen::Map<VecX> gb(grad.data() + b_offset_[k], spec_.sizes[k + 1]);
    gw.noalias() = delta * ws.a[k].transpose();
    gb = delta.rowwise().sum();
    if (k > 0) {
      delta = (weight(k).transpose() * delta).cwiseProduct(activate_deriv(ws.z[k - 1]));
    } else if (input_grad) {
      *input_grad = weight(0).transpose() * delta;
    }
  }
  return grad;
}

double Mlp::input_gradient_penalty(const Workspace& ws, VecX& param_grad, MatX* input_grad) const {
  const int layers = num_layers();
  const int out = output_dim();
  const Eigen::Index batch = ws.a[0].cols();
  if (param_grad.size() != params_.size()) {
    throw ConfigError("input_gradient_penalty: param_grad size mismatch");
  }

  // Cache activation derivatives once; shared by every output component.
  std::vector<MatX> dphi(layers - 1), ddphi(layers - 1);
  for (int k = 0; k + 1 < layers; ++k) {
    dphi[k] = activate_deriv(ws.z[k]);
    ddphi[k] = activate_second_deriv(ws.z[k]);
  }

  double penalty = 0.0;
  if (input_grad) input_grad->setZero(input_dim(), batch);

  std::vector<MatX> delta(layers);  // reverse-pass adjoints per layer
  std::vector<MatX> tang(layers);   // tangents t_k entering layer k
  for (int c = 0; c < out; ++c) {
    // reverse pass for output component c: g = d y_c / d x per column
    delta[layers - 1] = MatX::Zero(out, batch);
    delta[layers - 1].row(c).setOnes();
    for (int k = layers - 1; k > 0; --k) {
      delta[k - 1] = (weight(k).transpose() * delta[k]).cwiseProduct(dphi[k - 1]);
    }
    MatX g = weight(0).transpose() * delta[0];
    penalty += g.squaredNorm();

    // forward tangent with direction v = g (held constant)
    tang[0] = g;
    std::vector<MatX> u(layers);
    for (int k = 0; k + 1 < layers; ++k) {
      u[k] = weight(k) * tang[k];
      tang[k + 1] = dphi[k].cwiseProduct(u[k]);
    }
    // h = e_c^T (W_L t_{L-1}); dP += 2 * dh
    // adjoints: tbar flows through the tangent chain, abar through activations
    MatX tbar = weight(layers - 1).transpose() * delta[layers - 1];
    {
      Eigen::Map<MatX> gw(param_grad.data() + w_offset_[layers - 1], spec_.sizes[layers],
                          spec_.sizes[layers - 1]);
      gw.noalias() += 2.0 * delta[layers - 1] * tang[layers - 1].transpose();
    }
    MatX abar;  // empty until first use
    for (int k = layers - 2; k >= 0; --k) {
      MatX ubar = dphi[k].cwiseProduct(tbar);
      MatX zbar = ddphi[k].cwiseProduct(u[k]).cwiseProduct(tbar);
      if (abar.size() > 0) zbar += dphi[k].cwiseProduct(abar);
      Eigen::Map<MatX> gw(param_grad.data() + w_offset_[k], spec_.sizes[k + 1], spec_.sizes[k]);
      Eigen::Map<VecX> gb(param_grad.data() + b_offset_[k], spec_.sizes[k + 1]);
      gw.noalias() += 2.0 * (ubar * tang[k].transpose() + zbar * ws.a[k].transpose());
      gb += 2.0 * zbar.rowwise().sum();
      if (k > 0) {
        tbar = weight(k).transpose() * ubar;
        abar = weight(k).transpose() * zbar;
      } else if (input_grad) {
        // x enters only through the activation path; the tangent seed is frozen
        input_grad->noalias() += 2.0 * weight(0).transpose() * zbar;
      }
    }
  }
  return penalty;
}

}  // namespace camp
