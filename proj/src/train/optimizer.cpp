#include "rnav/train/optimizer.hpp"

#include <cmath>
#include <stdexcept>

namespace rnav::train {

Adam::Adam(const ad::ParameterSet& params, AdamConfig config) : config_(config) {
  for (const auto& p : params) {
    m_.emplace_back(p.value.shape());
    v_.emplace_back(p.value.shape());
  }
}

bool Adam::step(ad::ParameterSet& params, ad::GradientSet& grads) {
  if (grads.size() != params.size() || m_.size() != params.size()) {
    throw std::invalid_argument("Adam::step: gradient set does not match parameters");
  }
  if (!grads.all_finite()) {
    ++skipped_;
    return false;
  }
  const double norm = grads.l2_norm();
  if (config_.clip_norm > 0.0 && norm > config_.clip_norm) grads.scale(config_.clip_norm / norm);

  ++t_;
  const double c1 = 1.0 - std::pow(config_.beta1, t_);
  const double c2 = 1.0 - std::pow(config_.beta2, t_);
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!params[i].trainable) continue;
    ad::Tensor& w = params[i].value;
    const ad::Tensor& g = grads[i];
    ad::Tensor& m = m_[i];
    ad::Tensor& v = v_[i];
    for (std::size_t k = 0; k < w.size(); ++k) {
      m[k] = config_.beta1 * m[k] + (1.0 - config_.beta1) * g[k];
      v[k] = config_.beta2 * v[k] + (1.0 - config_.beta2) * g[k] * g[k];
      w[k] -= config_.lr * (m[k] / c1) / (std::sqrt(v[k] / c2) + config_.eps);
    }
  }
  return true;
}

}  // namespace rnav::train
