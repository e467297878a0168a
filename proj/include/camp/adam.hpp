#pragma once

#include "camp/errors.hpp"
#include "camp/types.hpp"

#include <cmath>

namespace camp {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Adaptive-moment optimizer state for one flat parameter vector.
class Adam {
 public:
  Adam() = default;
  Adam(Eigen::Index n, AdamConfig cfg = {})
      : cfg_(cfg), m_(VecX::Zero(n)), v_(VecX::Zero(n)), t_(0) {}

  AdamConfig& config() { return cfg_; }
  const AdamConfig& config() const { return cfg_; }
  long step_count() const { return t_; }
  VecX& first_moment() { return m_; }
  VecX& second_moment() { return v_; }
  const VecX& first_moment() const { return m_; }
  const VecX& second_moment() const { return v_; }
  void set_step_count(long t) { t_ = t; }

  void step(VecX& params, const VecX& grads) {
    if (grads.size() != params.size() || params.size() != m_.size()) {
      throw ConfigError("Adam::step: shape mismatch");
    }
    if (!grads.allFinite()) throw NumericError("Adam::step: non-finite gradient");
    ++t_;
    m_ = cfg_.beta1 * m_ + (1.0 - cfg_.beta1) * grads;
    v_ = cfg_.beta2 * v_.array().matrix() + (1.0 - cfg_.beta2) * grads.cwiseProduct(grads);
    const double c1 = 1.0 - std::pow(cfg_.beta1, double(t_));
    const double c2 = 1.0 - std::pow(cfg_.beta2, double(t_));
    params.array() -=
        cfg_.learning_rate * (m_.array() / c1) / ((v_.array() / c2).sqrt() + cfg_.epsilon);
  }

 private:
  AdamConfig cfg_;
  VecX m_, v_;
  long t_ = 0;
};

}  // namespace camp
