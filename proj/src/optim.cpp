#include "congfu/optim.h"

#include <cmath>

namespace congfu {

template <typename T>
void adam_step(Tensor<T>& param, AdamState<T>& state) {
  if (!param.has_grad()) throw ContractError("adam_step: parameter has no gradient");
  if (state.m.size() != param.size() || state.v.size() != param.size()) {
    throw DimensionError("adam_step: optimizer state does not match parameter " + shape_str(param.shape()));
  }
  const auto& o = state.options;
  state.t += 1;
  const double bc1 = 1.0 - std::pow(o.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(o.beta2, static_cast<double>(state.t));
  const T b1 = static_cast<T>(o.beta1), b2 = static_cast<T>(o.beta2);
  const T step = static_cast<T>(o.lr / bc1);
  const T inv_bc2 = static_cast<T>(1.0 / bc2);
  const T eps = static_cast<T>(o.eps);
  auto w = param.data();
  const auto g = param.grad();
  for (std::size_t i = 0; i < w.size(); ++i) {
    state.m[i] = b1 * state.m[i] + (T(1) - b1) * g[i];
    state.v[i] = b2 * state.v[i] + (T(1) - b2) * g[i] * g[i];
    w[i] -= step * state.m[i] / (std::sqrt(state.v[i] * inv_bc2) + eps);
  }
}

template <typename T>
Adam<T>::Adam(std::vector<Tensor<T>> params, AdamOptions options) : params_(std::move(params)) {
  states_.reserve(params_.size());
  for (const auto& p : params_) states_.emplace_back(p.size(), options);
}

template <typename T>
void Adam<T>::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

template <typename T>
void Adam<T>::step() {
  for (std::size_t i = 0; i < params_.size(); ++i) adam_step(params_[i], states_[i]);
}

template void adam_step<float>(Tensor<float>&, AdamState<float>&);
template void adam_step<double>(Tensor<double>&, AdamState<double>&);
template class Adam<float>;
template class Adam<double>;

}  // namespace congfu
