#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "rnav/ad/tape.hpp"
#include "rnav/core/rng.hpp"

namespace rnav::ad {

// Per-column validity flags for masked softmax; nonzero = valid.
using Mask = std::vector<std::uint8_t>;

// Linear kernels
Var matmul(Var a, Var b);     // [m,k] x [k,n] -> [m,n]
Var matmul_nt(Var a, Var b);  // [m,k] x [n,k]^T -> [m,n]
Var add(Var a, Var b);        // same shape
Var sub(Var a, Var b);        // same shape
Var add_row(Var a, Var row);  // [m,n] + [1,n] broadcast over rows
Var scale(Var a, double s);
Var mul(Var a, Var b);        // element-wise, same shape
Var sum(Var a);               // -> [1,1]
Var dot(Var a, Var b);        // inner product of same-shape tensors -> [1,1]

// Element-wise nonlinearities
Var sigmoid(Var a);
Var tanh(Var a);
Var relu(Var a);
Var exp(Var a);
Var log(Var a);
Var square(Var a);

// Structure
Var concat_cols(std::span<const Var> parts);  // equal rows
Var concat_rows(std::span<const Var> parts);  // equal cols
Var slice_cols(Var a, std::size_t begin, std::size_t count);
Var select_row(Var a, std::size_t row);
Var element(Var a, std::size_t row, std::size_t col);  // -> [1,1]
Var tile_cols(Var a, std::size_t times);               // [m,n] -> [m, n*times]
Var pad_cols(Var a, std::size_t width);                // zero-pad or truncate columns

// Row-wise softmax with max subtraction. Columns with mask[c] == 0 get exactly 0.
// An empty mask means every column is valid; a row with no valid column throws.
Var softmax(Var a, const Mask& mask = {});
// Row-wise log-softmax; masked columns hold 0 (they carry no probability).
Var log_softmax(Var a, const Mask& mask = {});

// Rows of `table` gathered by id -> [ids.size(), table.cols]
Var embedding(Var table, std::span<const int> ids);

// Inverted dropout: kept entries are scaled by 1/(1-p) so inference is the identity.
Var dropout(Var a, double p, Rng& rng, bool training);

// Running statistics of a per-feature standardization layer.
struct RunningStats {
  Tensor mean;  // [1, d]
  Tensor var;   // [1, d]
  double momentum = 0.1;
  double eps = 1e-5;
};

enum class NormMode {
  kBatch,    // normalize by statistics of the rows of this call (gradient flows through them)
  kRunning,  // normalize by the running statistics (constants)
};

// y = gamma * (x - mean) / sqrt(var + eps) + beta, per column.
// kBatch requires >= 2 rows and also folds the batch statistics into `stats`.
Var batch_standardize(Var x, Var gamma, Var beta, RunningStats& stats, NormMode mode);

// momentum update of running statistics from explicit batch moments.
void update_running_stats(RunningStats& stats, const Tensor& batch_mean, const Tensor& batch_var_unbiased);

}  // namespace rnav::ad
