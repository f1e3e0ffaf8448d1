#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "rnav/ad/parameters.hpp"
#include "rnav/ad/tape.hpp"

namespace rnav::ad {

// Builds a scalar loss on the given tape from the current parameter values.
// Must be deterministic: the same parameter values give the same loss.
using LossFn = std::function<Var(Tape&, const ParameterSet&)>;

struct GradCheckOptions {
  double step = 1e-5;
  double tolerance = 1e-4;
  // Gradients smaller than this are compared in absolute terms.
  double abs_floor = 1e-6;
  // 0 = every entry; otherwise an evenly strided subset per tensor.
  std::size_t max_entries_per_tensor = 0;
};

struct GradCheckEntry {
  std::string name;
  std::size_t checked = 0;
  double max_rel_error = 0.0;
  bool passed = true;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;

  bool passed() const;
  double worst() const;
  std::string summary() const;
};

// Relative error |a - n| / max(|a|, |n|, abs_floor).
double relative_error(double analytic, double numeric, double abs_floor);

// Compares the tape gradient of every trainable parameter with the central
// difference (f(w + h) - f(w - h)) / 2h. Parameters are restored afterwards.
GradCheckReport grad_check(ParameterSet& params, const LossFn& loss, const GradCheckOptions& options = {});

}  // namespace rnav::ad
