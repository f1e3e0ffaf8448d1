#include "rnav/ad/parameters.hpp"

#include <cmath>
#include <stdexcept>

namespace rnav::ad {

std::size_t ParameterSet::add(std::string name, Tensor value, bool trainable) {
  if (find(name)) throw std::invalid_argument("duplicate parameter name: " + name);
  params_.push_back({std::move(name), std::move(value), trainable});
  return params_.size() - 1;
}

std::optional<std::size_t> ParameterSet::find(std::string_view name) const {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (params_[i].name == name) return i;
  }
  return std::nullopt;
}

std::size_t ParameterSet::index_of(std::string_view name) const {
  if (auto i = find(name)) return *i;
  throw std::out_of_range("unknown parameter: " + std::string(name));
}

std::size_t ParameterSet::trainable_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) {
    if (p.trainable) n += p.value.size();
  }
  return n;
}

GradientSet::GradientSet(const ParameterSet& params) {
  grads_.reserve(params.size());
  for (const auto& p : params) grads_.emplace_back(p.value.shape(), 0.0);
}

void GradientSet::zero() {
  for (auto& g : grads_) g.fill(0.0);
}

GradientSet& GradientSet::operator+=(const GradientSet& other) {
  if (other.grads_.size() != grads_.size()) throw std::invalid_argument("GradientSet size mismatch");
  for (std::size_t i = 0; i < grads_.size(); ++i) grads_[i] += other.grads_[i];
  return *this;
}

void GradientSet::scale(double s) {
  for (auto& g : grads_) g *= s;
}

double GradientSet::l2_norm() const {
  double sq = 0.0;
  for (const auto& g : grads_) {
    for (double v : g.values()) sq += v * v;
  }
  return std::sqrt(sq);
}

bool GradientSet::all_finite() const {
  for (const auto& g : grads_) {
    if (!g.all_finite()) return false;
  }
  return true;
}

}  // namespace rnav::ad
