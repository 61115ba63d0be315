#pragma once

// Dense row-major tensors with a reverse-mode tape.
//
// A Tensor is a cheap handle onto shared storage. Every differentiable op in
// ops.h appends one TapeNode to the calling thread's tape when any input
// requires a gradient; backward() walks the tape in reverse insertion order,
// which is a valid reverse topological order because nodes are only ever
// appended after their inputs exist.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "congfu/errors.h"

namespace congfu {

using Shape = std::vector<std::size_t>;
using Index = std::size_t;

std::size_t numel(const Shape& shape);
std::string shape_str(const Shape& shape);

template <typename T>
struct TensorStorage {
  Shape shape;
  std::vector<T> data;
  std::vector<T> grad;  // empty until a gradient reaches this tensor
  bool requires_grad = false;
  bool is_leaf = true;

  void ensure_grad() {
    if (grad.size() != data.size()) grad.assign(data.size(), T(0));
  }
};

template <typename T>
class Tensor {
 public:
  using value_type = T;

  /// Empty 0-element tensor of shape [0].
  Tensor();
  Tensor(Shape shape, std::vector<T> data, bool requires_grad = false);

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, T value, bool requires_grad = false);
  static Tensor scalar(T value, bool requires_grad = false);

  const Shape& shape() const { return storage_->shape; }
  std::size_t ndim() const { return storage_->shape.size(); }
  std::size_t size() const { return storage_->data.size(); }
  std::size_t dim(std::size_t axis) const;
  /// Rows/cols of a 2-D tensor; a 1-D tensor of length n is treated as n x 1.
  std::size_t rows() const;
  std::size_t cols() const;

  std::span<T> data() { return storage_->data; }
  std::span<const T> data() const { return storage_->data; }
  T operator[](std::size_t i) const { return storage_->data[i]; }
  T at(std::size_t r, std::size_t c) const { return storage_->data[r * cols() + c]; }
  T item() const;

  bool has_grad() const { return storage_->grad.size() == storage_->data.size() && !storage_->data.empty(); }
  std::span<const T> grad() const { return storage_->grad; }
  std::span<T> mutable_grad() {
    storage_->ensure_grad();
    return storage_->grad;
  }
  void zero_grad() { storage_->grad.assign(storage_->data.size(), T(0)); }

  bool requires_grad() const { return storage_->requires_grad; }
  Tensor& set_requires_grad(bool on);
  bool is_leaf() const { return storage_->is_leaf; }

  /// Fresh leaf with copied data and no tape history.
  Tensor detach() const;
  std::vector<T> to_vector() const { return storage_->data; }
  bool same_storage(const Tensor& other) const { return storage_ == other.storage_; }

  const std::shared_ptr<TensorStorage<T>>& storage() const { return storage_; }
  explicit Tensor(std::shared_ptr<TensorStorage<T>> storage) : storage_(std::move(storage)) {}

 private:
  std::shared_ptr<TensorStorage<T>> storage_;
};

enum class OpKind : std::uint8_t {
  MatMul,
  Add,
  AddBias,
  Relu,
  LeakyRelu,
  Scale,
  ScaleBy,
  MulRows,
  SegmentSoftmax,
  SegmentSum,
  ConcatRows,
  EmbeddingLookup,
  BatchNorm,
  BceWithLogits,
  Sum,
  Reshape,
};

const char* op_name(OpKind kind);

template <typename T>
struct TapeNode {
  OpKind kind;
  std::vector<std::shared_ptr<TensorStorage<T>>> inputs;
  std::shared_ptr<TensorStorage<T>> output;
  // Reads output->grad and accumulates into the inputs that require grad.
  // Saved forward values live in the closure.
  std::function<void(const TapeNode&)> backward;
};

template <typename T>
class Tape {
 public:
  /// The calling thread's tape for scalar type T.
  static Tape& current();

  bool recording() const { return enabled_; }
  void set_recording(bool on) { enabled_ = on; }

  void record(TapeNode<T> node) { nodes_.push_back(std::move(node)); }
  std::size_t size() const { return nodes_.size(); }
  const std::vector<TapeNode<T>>& nodes() const { return nodes_; }
  void clear() { nodes_.clear(); }

 private:
  std::vector<TapeNode<T>> nodes_;
  bool enabled_ = true;
};

/// Suspends tape recording on this thread for its lifetime.
template <typename T>
class NoGradGuard {
 public:
  NoGradGuard() : previous_(Tape<T>::current().recording()) { Tape<T>::current().set_recording(false); }
  ~NoGradGuard() { Tape<T>::current().set_recording(previous_); }
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

/// Reverse sweep from a scalar loss. Gradients accumulate into every tensor
/// with requires_grad; the tape is cleared afterwards and intermediate
/// gradients are released.
template <typename T>
void backward(const Tensor<T>& loss);

}  // namespace congfu
