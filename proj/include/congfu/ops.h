#pragma once

// Differentiable tensor operations. Every function here is instantiated for
// float and double. Kernels are single-threaded with a fixed reduction order,
// so repeated calls on identical inputs give bit-identical results.

#include <span>
#include <type_traits>
#include <vector>

#include "congfu/tensor.h"

namespace congfu {

enum class Mode { Train, Eval };

/// [m x k] . [k x n] -> [m x n]
template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b);

/// Elementwise sum of two tensors with identical shapes.
template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b);

/// x [N x D] plus bias [D] (or [1 x D]) broadcast over rows.
template <typename T>
Tensor<T> add_bias(const Tensor<T>& x, const Tensor<T>& bias);

/// max(0, x). The subgradient at 0 is 0.
template <typename T>
Tensor<T> relu(const Tensor<T>& x);

template <typename T>
Tensor<T> leaky_relu(const Tensor<T>& x, T negative_slope);

/// factor * x for a constant factor.
template <typename T>
Tensor<T> scale(const Tensor<T>& x, T factor);

/// (offset + s) * x where s is a learnable 1-element tensor.
template <typename T>
Tensor<T> scale_by(const Tensor<T>& x, const Tensor<T>& s, T offset = T(0));

/// Row i of x [N x D] multiplied by w[i]; w is [N] and may require grad.
template <typename T>
Tensor<T> mul_rows(const Tensor<T>& x, const Tensor<T>& w);

/// Softmax of scores [N] within each run of equal segment ids. Segment ids
/// must be non-decreasing and below num_segments.
template <typename T>
Tensor<T> segment_softmax(const Tensor<T>& scores, std::span<const Index> segments, std::size_t num_segments);

/// Output row s is the sum of the rows of values [N x D] whose segment id is
/// s. Ids need not be sorted; rows are accumulated in input order.
template <typename T>
Tensor<T> segment_sum(const Tensor<T>& values, std::span<const Index> segments, std::size_t num_segments);

/// Row-wise concatenation: row i of the result is row i of every part, in
/// argument order. All parts share the row count.
template <typename T>
Tensor<T> concat_rows(const std::vector<Tensor<T>>& parts);

/// Row gather table[ids[i]]; the backward pass scatter-adds into the table.
template <typename T>
Tensor<T> embedding_lookup(const Tensor<T>& table, std::span<const Index> ids);

template <typename T>
struct BatchNormState {
  std::vector<T> running_mean;
  std::vector<T> running_var;
  T momentum = T(0.1);
  T eps = T(1e-5);

  explicit BatchNormState(std::size_t features = 0)
      : running_mean(features, T(0)), running_var(features, T(1)) {}
};

/// Per-feature normalization over the rows of x [N x D], followed by
/// gamma * xhat + beta. Train mode uses biased batch statistics and updates
/// the running stats (unbiased variance); eval mode uses the running stats.
template <typename T>
Tensor<T> batch_norm(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta, BatchNormState<T>& state,
                     Mode mode);

/// Mean of log(1 + exp(-(2y - 1) z)) over the batch.
template <typename T>
Tensor<T> bce_with_logits_loss(const Tensor<T>& logits, std::span<const std::type_identity_t<T>> labels);

template <typename T>
Tensor<T> sum(const Tensor<T>& x);

template <typename T>
Tensor<T> reshape(const Tensor<T>& x, Shape shape);

}  // namespace congfu
