#include "rnav/ad/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace rnav::ad {

bool GradCheckReport::passed() const {
  return std::all_of(entries.begin(), entries.end(), [](const GradCheckEntry& e) { return e.passed; });
}

double GradCheckReport::worst() const {
  double w = 0.0;
  for (const auto& e : entries) w = std::max(w, e.max_rel_error);
  return w;
}

std::string GradCheckReport::summary() const {
  std::ostringstream os;
  for (const auto& e : entries) {
    os << (e.passed ? "ok   " : "FAIL ") << e.name << " entries=" << e.checked << " max_rel=" << e.max_rel_error
       << '\n';
  }
  return os.str();
}

double relative_error(double analytic, double numeric, double abs_floor) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), abs_floor});
  return std::abs(analytic - numeric) / denom;
}

namespace {

double evaluate(ParameterSet& params, const LossFn& loss) {
  Tape tape;
  return loss(tape, params).item();
}

}  // namespace

GradCheckReport grad_check(ParameterSet& params, const LossFn& loss, const GradCheckOptions& options) {
  GradientSet analytic(params);
  {
    Tape tape;
    Var l = loss(tape, params);
    tape.backward(l);
    tape.collect_parameter_grads(analytic);
  }

  GradCheckReport report;
  for (std::size_t p = 0; p < params.size(); ++p) {
    if (!params[p].trainable) continue;
    GradCheckEntry entry{params[p].name};
    Tensor& w = params[p].value;
    const std::size_t n = w.size();
    std::size_t stride = 1;
    if (options.max_entries_per_tensor > 0 && n > options.max_entries_per_tensor) {
      stride = (n + options.max_entries_per_tensor - 1) / options.max_entries_per_tensor;
    }
    for (std::size_t i = 0; i < n; i += stride) {
      const double orig = w[i];
      w[i] = orig + options.step;
      const double up = evaluate(params, loss);
      w[i] = orig - options.step;
      const double down = evaluate(params, loss);
      w[i] = orig;
      const double numeric = (up - down) / (2.0 * options.step);
      const double err = relative_error(analytic[p][i], numeric, options.abs_floor);
      entry.max_rel_error = std::max(entry.max_rel_error, err);
      ++entry.checked;
    }
    entry.passed = entry.max_rel_error < options.tolerance;
    report.entries.push_back(std::move(entry));
  }
  return report;
}

}  // namespace rnav::ad
