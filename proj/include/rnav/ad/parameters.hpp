#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rnav/ad/tensor.hpp"

namespace rnav::ad {

// Named learnable tensor. Non-trainable entries (normalization running
// statistics) live in the same set so a checkpoint captures the full model.
struct Parameter {
  std::string name;
  Tensor value;
  bool trainable = true;
};

class ParameterSet {
 public:
  std::size_t add(std::string name, Tensor value, bool trainable = true);

  std::size_t size() const { return params_.size(); }
  Parameter& operator[](std::size_t i) { return params_[i]; }
  const Parameter& operator[](std::size_t i) const { return params_[i]; }

  std::optional<std::size_t> find(std::string_view name) const;
  std::size_t index_of(std::string_view name) const;  // throws std::out_of_range

  std::size_t trainable_count() const;  // total scalar entries of trainable tensors

  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

 private:
  std::vector<Parameter> params_;
};

// One gradient slot per parameter, aligned by index with a ParameterSet.
class GradientSet {
 public:
  GradientSet() = default;
  explicit GradientSet(const ParameterSet& params);

  std::size_t size() const { return grads_.size(); }
  Tensor& operator[](std::size_t i) { return grads_[i]; }
  const Tensor& operator[](std::size_t i) const { return grads_[i]; }

  void zero();
  GradientSet& operator+=(const GradientSet& other);
  void scale(double s);
  double l2_norm() const;
  bool all_finite() const;

 private:
  std::vector<Tensor> grads_;
};

}  // namespace rnav::ad
