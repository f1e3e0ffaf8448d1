#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rnav::ad {

// Every tensor in the library is a dense row-major matrix. Vectors are single
// rows ([1, n]) and scalars are [1, 1].
//
// Weight convention: a weight listed as W in R^{in x out} is stored with shape
// {in, out} and applied to a row vector as y = x W. With this mapping every
// product of the reference architecture type-checks, e.g. W_v {512, 1024} maps a
// 512-d hidden state onto the 1024-d projected visual space.
struct Shape {
  std::size_t rows = 0;
  std::size_t cols = 0;

  std::size_t size() const { return rows * cols; }
  bool operator==(const Shape&) const = default;
  std::string to_string() const;
};

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Throws ShapeError naming the operation and the offending shapes.
[[noreturn]] void throw_shape_error(const std::string& op, const Shape& a, const Shape& b);
[[noreturn]] void throw_shape_error(const std::string& op, const Shape& a, const std::string& detail);

class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> values);

  static Tensor scalar(double v) { return Tensor({1, 1}, {v}); }
  static Tensor row(std::span<const double> values);
  static Tensor row(std::initializer_list<double> values);

  const Shape& shape() const { return shape_; }
  std::size_t rows() const { return shape_.rows; }
  std::size_t cols() const { return shape_.cols; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double operator()(std::size_t r, std::size_t c) const { return data_[r * shape_.cols + c]; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * shape_.cols + c]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double& operator[](std::size_t i) { return data_[i]; }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  std::span<const double> row_values(std::size_t r) const {
    return std::span<const double>(data_).subspan(r * shape_.cols, shape_.cols);
  }

  // Value of a [1, 1] tensor.
  double item() const;
  bool all_finite() const;
  void fill(double v);

  Tensor& operator+=(const Tensor& other);
  Tensor& operator*=(double s);

 private:
  Shape shape_;
  std::vector<double> data_;
};

}  // namespace rnav::ad
