#pragma once

#include <cstdint>
#include <vector>

#include "congfu/tensor.h"

namespace congfu {

struct AdamOptions {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

template <typename T>
struct AdamState {
  std::vector<T> m;
  std::vector<T> v;
  std::int64_t t = 0;
  AdamOptions options;

  AdamState() = default;
  AdamState(std::size_t size, AdamOptions opts) : m(size, T(0)), v(size, T(0)), options(opts) {}
};

/// One bias-corrected Adam update of param in place. Throws ContractError
/// when the parameter carries no gradient.
template <typename T>
void adam_step(Tensor<T>& param, AdamState<T>& state);

/// Adam over a fixed parameter list.
template <typename T>
class Adam {
 public:
  Adam(std::vector<Tensor<T>> params, AdamOptions options);

  /// Sets every parameter gradient to zeros (allocating it if needed).
  void zero_grad();
  void step();
  std::int64_t steps() const { return states_.empty() ? 0 : states_.front().t; }
  const std::vector<AdamState<T>>& states() const { return states_; }

 private:
  std::vector<Tensor<T>> params_;
  std::vector<AdamState<T>> states_;
};

}  // namespace congfu
