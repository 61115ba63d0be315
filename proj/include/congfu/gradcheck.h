#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "congfu/tensor.h"

namespace congfu {

struct GradCheckOptions {
  double step = 1e-4;
  /// Coordinates probed per input tensor; 0 probes every coordinate.
  std::size_t probes_per_input = 0;
  std::uint64_t seed = 0;
};

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t probes = 0;
};

/// Compares the tape gradient of f at the current values of inputs with
/// central differences, one coordinate at a time. The error of a probe is
/// |analytic - numeric| / max(1, |numeric|). f must rebuild its graph from
/// the inputs on every call. Throws EvaluationError when f is not finite.
GradCheckResult gradient_check(const std::function<Tensor<double>()>& f, std::vector<Tensor<double>> inputs,
                               const GradCheckOptions& options = {});

}  // namespace congfu
