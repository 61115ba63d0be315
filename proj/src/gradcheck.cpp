#include "congfu/gradcheck.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace congfu {
namespace {

double evaluate(const std::function<Tensor<double>()>& f) {
  NoGradGuard<double> guard;
  const double v = f().item();
  if (!std::isfinite(v)) throw EvaluationError("gradient_check: function is not finite at the probe point");
  return v;
}

}  // namespace

GradCheckResult gradient_check(const std::function<Tensor<double>()>& f, std::vector<Tensor<double>> inputs,
                               const GradCheckOptions& options) {
  for (auto& in : inputs) {
    in.set_requires_grad(true);
    in.zero_grad();
  }
  const auto loss = f();
  if (!std::isfinite(loss.item())) throw EvaluationError("gradient_check: function is not finite at the point");
  backward(loss);

  std::mt19937_64 rng(options.seed);
  GradCheckResult result;
  for (auto& in : inputs) {
    const std::vector<double> analytic(in.grad().begin(), in.grad().end());
    std::vector<std::size_t> coords(in.size());
    std::iota(coords.begin(), coords.end(), 0);
    if (options.probes_per_input && options.probes_per_input < coords.size()) {
      std::shuffle(coords.begin(), coords.end(), rng);
      coords.resize(options.probes_per_input);
    }
    auto data = in.data();
    for (auto i : coords) {
      const double saved = data[i];
      data[i] = saved + options.step;
      const double up = evaluate(f);
      data[i] = saved - options.step;
      const double down = evaluate(f);
      data[i] = saved;
      const double numeric = (up - down) / (2.0 * options.step);
      const double err = std::abs(analytic[i] - numeric) / std::max(1.0, std::abs(numeric));
      result.max_rel_error = std::max(result.max_rel_error, err);
      ++result.probes;
    }
  }
  return result;
}

}  // namespace congfu
