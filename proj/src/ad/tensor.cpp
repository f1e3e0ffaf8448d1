#include "rnav/ad/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace rnav::ad {

std::string Shape::to_string() const {
  std::ostringstream os;
  os << '[' << rows << ", " << cols << ']';
  return os.str();
}

void throw_shape_error(const std::string& op, const Shape& a, const Shape& b) {
  throw ShapeError(op + ": incompatible shapes " + a.to_string() + " and " + b.to_string());
}

void throw_shape_error(const std::string& op, const Shape& a, const std::string& detail) {
  throw ShapeError(op + ": shape " + a.to_string() + " " + detail);
}

Tensor::Tensor(Shape shape, double fill) : shape_(shape), data_(shape.size(), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> values) : shape_(shape), data_(std::move(values)) {
  if (data_.size() != shape_.size()) {
    throw_shape_error("Tensor", shape_, "does not match " + std::to_string(data_.size()) + " values");
  }
}

Tensor Tensor::row(std::span<const double> values) {
  return Tensor({1, values.size()}, std::vector<double>(values.begin(), values.end()));
}

Tensor Tensor::row(std::initializer_list<double> values) {
  return Tensor({1, values.size()}, std::vector<double>(values));
}

double Tensor::item() const {
  if (shape_.rows != 1 || shape_.cols != 1) throw_shape_error("item", shape_, "is not a scalar");
  return data_[0];
}

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

Tensor& Tensor::operator+=(const Tensor& other) {
  if (other.shape_ != shape_) throw_shape_error("Tensor::+=", shape_, other.shape_);
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Tensor& Tensor::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

}  // namespace rnav::ad
