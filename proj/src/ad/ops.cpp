#include "rnav/ad/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace rnav::ad {
namespace {

Tape& tape_of(Var a) {
  if (!a.valid()) throw std::invalid_argument("operation on an unbound Var");
  return *a.tape();
}

void require_same_tape(Var a, Var b, const char* op) {
  if (a.tape() != b.tape()) throw std::invalid_argument(std::string(op) + ": operands on different tapes");
}

void require_same_shape(Var a, Var b, const char* op) {
  require_same_tape(a, b, op);
  if (a.shape() != b.shape()) throw_shape_error(op, a.shape(), b.shape());
}

// out[m,n] += a[m,k] * b[k,n]
void gemm_nn(const Tensor& a, const Tensor& b, Tensor& out) {
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  for (std::size_t i = 0; i < m; ++i) {
    double* o = &out(i, 0);
    for (std::size_t p = 0; p < k; ++p) {
      const double av = a(i, p);
      if (av == 0.0) continue;
      const double* br = b.values().data() + p * n;
      for (std::size_t j = 0; j < n; ++j) o[j] += av * br[j];
    }
  }
}

// out[m,n] += a[m,k] * b[n,k]^T
void gemm_nt(const Tensor& a, const Tensor& b, Tensor& out) {
  const std::size_t m = a.rows(), k = a.cols(), n = b.rows();
  for (std::size_t i = 0; i < m; ++i) {
    const double* ar = a.values().data() + i * k;
    for (std::size_t j = 0; j < n; ++j) {
      const double* br = b.values().data() + j * k;
      double s = 0.0;
      for (std::size_t p = 0; p < k; ++p) s += ar[p] * br[p];
      out(i, j) += s;
    }
  }
}

// out[k,n] += a[m,k]^T * b[m,n]
void gemm_tn(const Tensor& a, const Tensor& b, Tensor& out) {
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  for (std::size_t i = 0; i < m; ++i) {
    const double* br = b.values().data() + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = a(i, p);
      if (av == 0.0) continue;
      double* o = &out(p, 0);
      for (std::size_t j = 0; j < n; ++j) o[j] += av * br[j];
    }
  }
}

template <typename Fwd, typename Deriv>
Var unary(Var a, Fwd fwd, Deriv deriv) {
  Tape& t = tape_of(a);
  const Tensor& x = a.value();
  Tensor y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = fwd(x[i]);
  return t.record(std::move(y), {a}, [a, deriv](Tape& tape, const Tensor& g) {
    Tensor* ga = tape.grad_buffer(a);
    if (!ga) return;
    const Tensor& xv = a.value();
    for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += g[i] * deriv(xv[i]);
  });
}

void check_mask(const Mask& mask, std::size_t cols, const char* op) {
  if (!mask.empty() && mask.size() != cols) {
    throw ShapeError(std::string(op) + ": mask of length " + std::to_string(mask.size()) + " for " +
                     std::to_string(cols) + " columns");
  }
}

bool valid_col(const Mask& mask, std::size_t c) { return mask.empty() || mask[c] != 0; }

// Row-wise max-subtracted log-normalizer over valid columns.
std::vector<double> row_log_normalizers(const Tensor& x, const Mask& mask, const char* op) {
  std::vector<double> lse(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < x.cols(); ++c) {
      if (valid_col(mask, c)) mx = std::max(mx, x(r, c));
    }
    if (!std::isfinite(mx)) throw ShapeError(std::string(op) + ": row without a valid column");
    double s = 0.0;
    for (std::size_t c = 0; c < x.cols(); ++c) {
      if (valid_col(mask, c)) s += std::exp(x(r, c) - mx);
    }
    lse[r] = mx + std::log(s);
  }
  return lse;
}

}  // namespace

Var matmul(Var a, Var b) {
  require_same_tape(a, b, "matmul");
  if (a.shape().cols != b.shape().rows) throw_shape_error("matmul", a.shape(), b.shape());
  Tensor y({a.shape().rows, b.shape().cols});
  gemm_nn(a.value(), b.value(), y);
  return tape_of(a).record(std::move(y), {a, b}, [a, b](Tape& t, const Tensor& g) {
    if (Tensor* ga = t.grad_buffer(a)) gemm_nt(g, b.value(), *ga);  // dA = G B^T
    if (Tensor* gb = t.grad_buffer(b)) gemm_tn(a.value(), g, *gb);  // dB = A^T G
  });
}

Var matmul_nt(Var a, Var b) {
  require_same_tape(a, b, "matmul_nt");
  if (a.shape().cols != b.shape().cols) throw_shape_error("matmul_nt", a.shape(), b.shape());
  Tensor y({a.shape().rows, b.shape().rows});
  gemm_nt(a.value(), b.value(), y);
  return tape_of(a).record(std::move(y), {a, b}, [a, b](Tape& t, const Tensor& g) {
    if (Tensor* ga = t.grad_buffer(a)) gemm_nn(g, b.value(), *ga);  // dA = G B
    if (Tensor* gb = t.grad_buffer(b)) gemm_tn(g, a.value(), *gb);  // dB = G^T A
  });
}

Var add(Var a, Var b) {
  require_same_shape(a, b, "add");
  Tensor y = a.value();
  y += b.value();
  return tape_of(a).record(std::move(y), {a, b}, [a, b](Tape& t, const Tensor& g) {
    if (Tensor* ga = t.grad_buffer(a)) *ga += g;
    if (Tensor* gb = t.grad_buffer(b)) *gb += g;
  });
}

Var sub(Var a, Var b) {
  require_same_shape(a, b, "sub");
  Tensor y = a.value();
  const Tensor& bv = b.value();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] -= bv[i];
  return tape_of(a).record(std::move(y), {a, b}, [a, b](Tape& t, const Tensor& g) {
    if (Tensor* ga = t.grad_buffer(a)) *ga += g;
    if (Tensor* gb = t.grad_buffer(b)) {
      for (std::size_t i = 0; i < g.size(); ++i) (*gb)[i] -= g[i];
    }
  });
}

Var add_row(Var a, Var row) {
  require_same_tape(a, row, "add_row");
  if (row.shape().rows != 1 || row.shape().cols != a.shape().cols) {
    throw_shape_error("add_row", a.shape(), row.shape());
  }
  Tensor y = a.value();
  const Tensor& rv = row.value();
  for (std::size_t r = 0; r < y.rows(); ++r) {
    for (std::size_t c = 0; c < y.cols(); ++c) y(r, c) += rv[c];
  }
  return tape_of(a).record(std::move(y), {a, row}, [a, row](Tape& t, const Tensor& g) {
    if (Tensor* ga = t.grad_buffer(a)) *ga += g;
    if (Tensor* gr = t.grad_buffer(row)) {
      for (std::size_t r = 0; r < g.rows(); ++r) {
        for (std::size_t c = 0; c < g.cols(); ++c) (*gr)[c] += g(r, c);
      }
    }
  });
}

Var scale(Var a, double s) {
  Tensor y = a.value();
  y *= s;
  return tape_of(a).record(std::move(y), {a}, [a, s](Tape& t, const Tensor& g) {
    if (Tensor* ga = t.grad_buffer(a)) {
      for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += s * g[i];
    }
  });
}

Var mul(Var a, Var b) {
  require_same_shape(a, b, "mul");
  Tensor y = a.value();
  const Tensor& bv = b.value();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] *= bv[i];
  return tape_of(a).record(std::move(y), {a, b}, [a, b](Tape& t, const Tensor& g) {
    if (Tensor* ga = t.grad_buffer(a)) {
      const Tensor& bv2 = b.value();
      for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += g[i] * bv2[i];
    }
    if (Tensor* gb = t.grad_buffer(b)) {
      const Tensor& av = a.value();
      for (std::size_t i = 0; i < g.size(); ++i) (*gb)[i] += g[i] * av[i];
    }
  });
}

Var sum(Var a) {
  double s = 0.0;
  for (double v : a.value().values()) s += v;
  return tape_of(a).record(Tensor::scalar(s), {a}, [a](Tape& t, const Tensor& g) {
    if (Tensor* ga = t.grad_buffer(a)) {
      const double gv = g[0];
      for (double& v : ga->values()) v += gv;
    }
  });
}

Var dot(Var a, Var b) {
  require_same_shape(a, b, "dot");
  double s = 0.0;
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  for (std::size_t i = 0; i < av.size(); ++i) s += av[i] * bv[i];
  return tape_of(a).record(Tensor::scalar(s), {a, b}, [a, b](Tape& t, const Tensor& g) {
    const double gv = g[0];
    if (Tensor* ga = t.grad_buffer(a)) {
      const Tensor& bv2 = b.value();
      for (std::size_t i = 0; i < ga->size(); ++i) (*ga)[i] += gv * bv2[i];
    }
    if (Tensor* gb = t.grad_buffer(b)) {
      const Tensor& av2 = a.value();
      for (std::size_t i = 0; i < gb->size(); ++i) (*gb)[i] += gv * av2[i];
    }
  });
}

Var sigmoid(Var a) {
  const Tensor& x = a.value();
  Tensor y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = 1.0 / (1.0 + std::exp(-x[i]));
  Tensor s = a.requires_grad() ? y : Tensor{};
  return tape_of(a).record(std::move(y), {a}, [a, s = std::move(s)](Tape& t, const Tensor& g) {
    Tensor* ga = t.grad_buffer(a);
    if (!ga) return;
    for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += g[i] * s[i] * (1.0 - s[i]);
  });
}

Var tanh(Var a) {
  return unary(
      a, [](double x) { return std::tanh(x); },
      [](double x) {
        const double th = std::tanh(x);
        return 1.0 - th * th;
      });
}

Var relu(Var a) {
  return unary(
      a, [](double x) { return x > 0.0 ? x : 0.0; }, [](double x) { return x > 0.0 ? 1.0 : 0.0; });
}

Var exp(Var a) {
  return unary(
      a, [](double x) { return std::exp(x); }, [](double x) { return std::exp(x); });
}

Var log(Var a) {
  return unary(
      a, [](double x) { return std::log(x); }, [](double x) { return 1.0 / x; });
}

Var square(Var a) {
  return unary(
      a, [](double x) { return x * x; }, [](double x) { return 2.0 * x; });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw std::invalid_argument("concat_cols: no inputs");
  const std::size_t rows = parts[0].shape().rows;
  std::size_t cols = 0;
  for (const Var& p : parts) {
    require_same_tape(parts[0], p, "concat_cols");
    if (p.shape().rows != rows) throw_shape_error("concat_cols", parts[0].shape(), p.shape());
    cols += p.shape().cols;
  }
  Tensor y({rows, cols});
  std::size_t offset = 0;
  for (const Var& p : parts) {
    const Tensor& v = p.value();
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < v.cols(); ++c) y(r, offset + c) = v(r, c);
    }
    offset += v.cols();
  }
  std::vector<Var> inputs(parts.begin(), parts.end());
  return tape_of(parts[0]).record(std::move(y), inputs, [inputs](Tape& t, const Tensor& g) {
    std::size_t off = 0;
    for (const Var& p : inputs) {
      const std::size_t pc = p.shape().cols;
      if (Tensor* gp = t.grad_buffer(p)) {
        for (std::size_t r = 0; r < g.rows(); ++r) {
          for (std::size_t c = 0; c < pc; ++c) (*gp)(r, c) += g(r, off + c);
        }
      }
      off += pc;
    }
  });
}

Var concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw std::invalid_argument("concat_rows: no inputs");
  const std::size_t cols = parts[0].shape().cols;
  std::size_t rows = 0;
  for (const Var& p : parts) {
    require_same_tape(parts[0], p, "concat_rows");
    if (p.shape().cols != cols) throw_shape_error("concat_rows", parts[0].shape(), p.shape());
    rows += p.shape().rows;
  }
  std::vector<double> data;
  data.reserve(rows * cols);
  for (const Var& p : parts) {
    auto v = p.value().values();
    data.insert(data.end(), v.begin(), v.end());
  }
  std::vector<Var> inputs(parts.begin(), parts.end());
  return tape_of(parts[0]).record(Tensor({rows, cols}, std::move(data)), inputs, [inputs](Tape& t, const Tensor& g) {
    std::size_t off = 0;
    for (const Var& p : inputs) {
      const std::size_t n = p.shape().size();
      if (Tensor* gp = t.grad_buffer(p)) {
        for (std::size_t i = 0; i < n; ++i) (*gp)[i] += g[off + i];
      }
      off += n;
    }
  });
}

Var slice_cols(Var a, std::size_t begin, std::size_t count) {
  const Shape s = a.shape();
  if (begin + count > s.cols) {
    throw_shape_error("slice_cols", s, "cannot provide columns [" + std::to_string(begin) + ", " +
                                           std::to_string(begin + count) + ")");
  }
  Tensor y({s.rows, count});
  const Tensor& x = a.value();
  for (std::size_t r = 0; r < s.rows; ++r) {
    for (std::size_t c = 0; c < count; ++c) y(r, c) = x(r, begin + c);
  }
  return tape_of(a).record(std::move(y), {a}, [a, begin, count](Tape& t, const Tensor& g) {
    if (Tensor* ga = t.grad_buffer(a)) {
      for (std::size_t r = 0; r < g.rows(); ++r) {
        for (std::size_t c = 0; c < count; ++c) (*ga)(r, begin + c) += g(r, c);
      }
    }
  });
}

Var select_row(Var a, std::size_t row) {
  const Shape s = a.shape();
  if (row >= s.rows) throw_shape_error("select_row", s, "has no row " + std::to_string(row));
  Tensor y = Tensor::row(a.value().row_values(row));
  return tape_of(a).record(std::move(y), {a}, [a, row](Tape& t, const Tensor& g) {
    if (Tensor* ga = t.grad_buffer(a)) {
      for (std::size_t c = 0; c < g.cols(); ++c) (*ga)(row, c) += g[c];
    }
  });
}

Var element(Var a, std::size_t row, std::size_t col) {
  const Shape s = a.shape();
  if (row >= s.rows || col >= s.cols) {
    throw_shape_error("element", s, "has no entry (" + std::to_string(row) + ", " + std::to_string(col) + ")");
  }
  return tape_of(a).record(Tensor::scalar(a.value()(row, col)), {a}, [a, row, col](Tape& t, const Tensor& g) {
    if (Tensor* ga = t.grad_buffer(a)) (*ga)(row, col) += g[0];
  });
}

Var tile_cols(Var a, std::size_t times) {
  const Shape s = a.shape();
  Tensor y({s.rows, s.cols * times});
  const Tensor& x = a.value();
  for (std::size_t r = 0; r < s.rows; ++r) {
    for (std::size_t k = 0; k < times; ++k) {
      for (std::size_t c = 0; c < s.cols; ++c) y(r, k * s.cols + c) = x(r, c);
    }
  }
  return tape_of(a).record(std::move(y), {a}, [a, times](Tape& t, const Tensor& g) {
    if (Tensor* ga = t.grad_buffer(a)) {
      const std::size_t cols = ga->cols();
      for (std::size_t r = 0; r < ga->rows(); ++r) {
        for (std::size_t k = 0; k < times; ++k) {
          for (std::size_t c = 0; c < cols; ++c) (*ga)(r, c) += g(r, k * cols + c);
        }
      }
    }
  });
}

Var pad_cols(Var a, std::size_t width) {
  const Shape s = a.shape();
  const std::size_t keep = std::min(width, s.cols);
  Tensor y({s.rows, width});
  const Tensor& x = a.value();
  for (std::size_t r = 0; r < s.rows; ++r) {
    for (std::size_t c = 0; c < keep; ++c) y(r, c) = x(r, c);
  }
  return tape_of(a).record(std::move(y), {a}, [a, keep](Tape& t, const Tensor& g) {
    if (Tensor* ga = t.grad_buffer(a)) {
      for (std::size_t r = 0; r < ga->rows(); ++r) {
        for (std::size_t c = 0; c < keep; ++c) (*ga)(r, c) += g(r, c);
      }
    }
  });
}

Var softmax(Var a, const Mask& mask) {
  const Tensor& x = a.value();
  check_mask(mask, x.cols(), "softmax");
  const std::vector<double> lse = row_log_normalizers(x, mask, "softmax");
  Tensor y(x.shape(), 0.0);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (std::size_t c = 0; c < x.cols(); ++c) {
      if (valid_col(mask, c)) y(r, c) = std::exp(x(r, c) - lse[r]);
    }
  }
  Tensor p = a.requires_grad() ? y : Tensor{};
  return tape_of(a).record(std::move(y), {a}, [a, p = std::move(p)](Tape& t, const Tensor& g) {
    Tensor* ga = t.grad_buffer(a);
    if (!ga) return;
    // dx = p * (g - <p, g>); masked entries have p = 0.
    for (std::size_t r = 0; r < p.rows(); ++r) {
      double inner = 0.0;
      for (std::size_t c = 0; c < p.cols(); ++c) inner += p(r, c) * g(r, c);
      for (std::size_t c = 0; c < p.cols(); ++c) (*ga)(r, c) += p(r, c) * (g(r, c) - inner);
    }
  });
}

Var log_softmax(Var a, const Mask& mask) {
  const Tensor& x = a.value();
  check_mask(mask, x.cols(), "log_softmax");
  const std::vector<double> lse = row_log_normalizers(x, mask, "log_softmax");
  Tensor y(x.shape(), 0.0);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (std::size_t c = 0; c < x.cols(); ++c) {
      if (valid_col(mask, c)) y(r, c) = x(r, c) - lse[r];
    }
  }
  return tape_of(a).record(std::move(y), {a}, [a, mask, lse](Tape& t, const Tensor& g) {
    Tensor* ga = t.grad_buffer(a);
    if (!ga) return;
    const Tensor& xv = a.value();
    // dx_c = g_c - p_c * sum_valid(g), over valid columns only.
    for (std::size_t r = 0; r < xv.rows(); ++r) {
      double gs = 0.0;
      for (std::size_t c = 0; c < xv.cols(); ++c) {
        if (valid_col(mask, c)) gs += g(r, c);
      }
      for (std::size_t c = 0; c < xv.cols(); ++c) {
        if (!valid_col(mask, c)) continue;
        (*ga)(r, c) += g(r, c) - std::exp(xv(r, c) - lse[r]) * gs;
      }
    }
  });
}

Var embedding(Var table, std::span<const int> ids) {
  const Shape s = table.shape();
  Tensor y({ids.size(), s.cols});
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || static_cast<std::size_t>(ids[i]) >= s.rows) {
      throw_shape_error("embedding", s, "has no row for id " + std::to_string(ids[i]));
    }
    const auto src = table.value().row_values(static_cast<std::size_t>(ids[i]));
    std::copy(src.begin(), src.end(), &y(i, 0));
  }
  std::vector<int> idx(ids.begin(), ids.end());
  return tape_of(table).record(std::move(y), {table}, [table, idx](Tape& t, const Tensor& g) {
    if (Tensor* gt = t.grad_buffer(table)) {
      for (std::size_t i = 0; i < idx.size(); ++i) {
        for (std::size_t c = 0; c < g.cols(); ++c) (*gt)(static_cast<std::size_t>(idx[i]), c) += g(i, c);
      }
    }
  });
}

Var dropout(Var a, double p, Rng& rng, bool training) {
  if (!training || p <= 0.0) return a;
  if (p >= 1.0) throw std::invalid_argument("dropout: ratio must be < 1");
  const Tensor& x = a.value();
  Tensor keep(x.shape());
  std::bernoulli_distribution coin(1.0 - p);
  const double s = 1.0 / (1.0 - p);
  for (std::size_t i = 0; i < keep.size(); ++i) keep[i] = coin(rng) ? s : 0.0;
  Tensor y = x;
  for (std::size_t i = 0; i < y.size(); ++i) y[i] *= keep[i];
  return tape_of(a).record(std::move(y), {a}, [a, keep](Tape& t, const Tensor& g) {
    if (Tensor* ga = t.grad_buffer(a)) {
      for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += g[i] * keep[i];
    }
  });
}

void update_running_stats(RunningStats& stats, const Tensor& batch_mean, const Tensor& batch_var_unbiased) {
  if (batch_mean.shape() != stats.mean.shape()) throw_shape_error("update_running_stats", stats.mean.shape(), batch_mean.shape());
  if (batch_var_unbiased.shape() != stats.var.shape()) throw_shape_error("update_running_stats", stats.var.shape(), batch_var_unbiased.shape());
  const double m = stats.momentum;
  for (std::size_t c = 0; c < stats.mean.size(); ++c) {
    stats.mean[c] = (1.0 - m) * stats.mean[c] + m * batch_mean[c];
    stats.var[c] = (1.0 - m) * stats.var[c] + m * batch_var_unbiased[c];
  }
}

Var batch_standardize(Var x, Var gamma, Var beta, RunningStats& stats, NormMode mode) {
  require_same_tape(x, gamma, "batch_standardize");
  require_same_tape(x, beta, "batch_standardize");
  const Shape s = x.shape();
  const Shape row{1, s.cols};
  if (gamma.shape() != row) throw_shape_error("batch_standardize", s, gamma.shape());
  if (beta.shape() != row) throw_shape_error("batch_standardize", s, beta.shape());
  if (stats.mean.shape() != row || stats.var.shape() != row) throw_shape_error("batch_standardize", s, stats.mean.shape());

  const Tensor& xv = x.value();
  Tensor mean(row), var(row);
  if (mode == NormMode::kBatch) {
    if (s.rows < 2) throw_shape_error("batch_standardize", s, "needs at least 2 rows for batch statistics");
    for (std::size_t r = 0; r < s.rows; ++r) {
      for (std::size_t c = 0; c < s.cols; ++c) mean[c] += xv(r, c);
    }
    mean *= 1.0 / static_cast<double>(s.rows);
    for (std::size_t r = 0; r < s.rows; ++r) {
      for (std::size_t c = 0; c < s.cols; ++c) {
        const double d = xv(r, c) - mean[c];
        var[c] += d * d;
      }
    }
    Tensor unbiased = var;
    unbiased *= 1.0 / static_cast<double>(s.rows - 1);
    var *= 1.0 / static_cast<double>(s.rows);
    update_running_stats(stats, mean, unbiased);
  } else {
    mean = stats.mean;
    var = stats.var;
  }

  Tensor inv_std(row);
  for (std::size_t c = 0; c < s.cols; ++c) inv_std[c] = 1.0 / std::sqrt(var[c] + stats.eps);
  Tensor xhat(s);
  for (std::size_t r = 0; r < s.rows; ++r) {
    for (std::size_t c = 0; c < s.cols; ++c) xhat(r, c) = (xv(r, c) - mean[c]) * inv_std[c];
  }
  Tensor y(s);
  const Tensor& gv = gamma.value();
  const Tensor& bv = beta.value();
  for (std::size_t r = 0; r < s.rows; ++r) {
    for (std::size_t c = 0; c < s.cols; ++c) y(r, c) = gv[c] * xhat(r, c) + bv[c];
  }

  const bool batch = mode == NormMode::kBatch;
  return tape_of(x).record(std::move(y), {x, gamma, beta}, [x, gamma, beta, xhat, inv_std, batch](Tape& t, const Tensor& g) {
    const std::size_t n = g.rows(), d = g.cols();
    if (Tensor* gg = t.grad_buffer(gamma)) {
      for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < d; ++c) (*gg)[c] += g(r, c) * xhat(r, c);
      }
    }
    if (Tensor* gb = t.grad_buffer(beta)) {
      for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < d; ++c) (*gb)[c] += g(r, c);
      }
    }
    Tensor* gx = t.grad_buffer(x);
    if (!gx) return;
    const Tensor& gam = gamma.value();
    if (!batch) {
      for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < d; ++c) (*gx)(r, c) += g(r, c) * gam[c] * inv_std[c];
      }
      return;
    }
    // dx = (gamma * inv_std / n) * (n * g - sum(g) - xhat * sum(g * xhat))
    for (std::size_t c = 0; c < d; ++c) {
      double sg = 0.0, sgx = 0.0;
      for (std::size_t r = 0; r < n; ++r) {
        sg += g(r, c);
        sgx += g(r, c) * xhat(r, c);
      }
      const double k = gam[c] * inv_std[c] / static_cast<double>(n);
      for (std::size_t r = 0; r < n; ++r) {
        (*gx)(r, c) += k * (static_cast<double>(n) * g(r, c) - sg - xhat(r, c) * sgx);
      }
    }
  });
}

}  // namespace rnav::ad
