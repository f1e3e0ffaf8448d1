#include "rnav/ad/lstm.hpp"

#include <array>
#include <string>

#include "rnav/ad/ops.hpp"

namespace rnav::ad {

LstmState lstm_cell(Var input, Var h_prev, Var c_prev, const LstmWeights& w) {
  const std::size_t hidden = h_prev.shape().cols;
  if (h_prev.shape() != c_prev.shape() || h_prev.shape().rows != 1) {
    throw_shape_error("lstm_cell", h_prev.shape(), c_prev.shape());
  }
  if (input.shape().rows != 1) throw_shape_error("lstm_cell", input.shape(), "is not a row vector");
  const Shape expected_w{input.shape().cols + hidden, 4 * hidden};
  if (w.weight.shape() != expected_w) throw_shape_error("lstm_cell weight", w.weight.shape(), expected_w);
  if (w.bias.shape() != Shape{1, 4 * hidden}) throw_shape_error("lstm_cell bias", w.bias.shape(), Shape{1, 4 * hidden});

  const std::array<Var, 2> xh{input, h_prev};
  const Var gates = add(matmul(concat_cols(xh), w.weight), w.bias);
  const Var i = sigmoid(slice_cols(gates, 0, hidden));
  const Var f = sigmoid(slice_cols(gates, hidden, hidden));
  const Var g = tanh(slice_cols(gates, 2 * hidden, hidden));
  const Var o = sigmoid(slice_cols(gates, 3 * hidden, hidden));
  const Var c = add(mul(f, c_prev), mul(i, g));
  const Var h = mul(o, tanh(c));
  return {h, c};
}

LstmShapes lstm_shapes(std::size_t input_dim, std::size_t hidden) {
  return {Shape{input_dim + hidden, 4 * hidden}, Shape{1, 4 * hidden}};
}

}  // namespace rnav::ad
