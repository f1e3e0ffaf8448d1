#pragma once

#include <cstddef>

#include "rnav/ad/tape.hpp"

namespace rnav::ad {

// Gate weights of a standard LSTM cell, concatenated in the order
// (input, forget, candidate, output):
//   weight: [input_dim + hidden, 4 * hidden], applied to [x, h_prev]
//   bias:   [1, 4 * hidden]
struct LstmWeights {
  Var weight;
  Var bias;
};

struct LstmState {
  Var h;
  Var c;
};

// c = f * c_prev + i * g~ ; h = o * tanh(c)
LstmState lstm_cell(Var input, Var h_prev, Var c_prev, const LstmWeights& w);

// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, zero bias except +1 on the forget gate.
struct LstmShapes {
  Shape weight;
  Shape bias;
};
LstmShapes lstm_shapes(std::size_t input_dim, std::size_t hidden);

}  // namespace rnav::ad
