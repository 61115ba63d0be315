#include "congfu/tensor.h"

#include <sstream>

namespace congfu {

std::size_t numel(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

const char* op_name(OpKind kind) {
  switch (kind) {
    case OpKind::MatMul: return "matmul";
    case OpKind::Add: return "add";
    case OpKind::AddBias: return "add_bias";
    case OpKind::Relu: return "relu";
    case OpKind::LeakyRelu: return "leaky_relu";
    case OpKind::Scale: return "scale";
    case OpKind::ScaleBy: return "scale_by";
    case OpKind::MulRows: return "mul_rows";
    case OpKind::SegmentSoftmax: return "segment_softmax";
    case OpKind::SegmentSum: return "segment_sum";
    case OpKind::ConcatRows: return "concat_rows";
    case OpKind::EmbeddingLookup: return "embedding_lookup";
    case OpKind::BatchNorm: return "batch_norm";
    case OpKind::BceWithLogits: return "bce_with_logits";
    case OpKind::Sum: return "sum";
    case OpKind::Reshape: return "reshape";
  }
  return "?";
}

template <typename T>
Tensor<T>::Tensor() : storage_(std::make_shared<TensorStorage<T>>()) {
  storage_->shape = {0};
}

template <typename T>
Tensor<T>::Tensor(Shape shape, std::vector<T> data, bool requires_grad)
    : storage_(std::make_shared<TensorStorage<T>>()) {
  if (numel(shape) != data.size()) {
    throw DimensionError("tensor shape " + shape_str(shape) + " does not match " +
                         std::to_string(data.size()) + " elements");
  }
  storage_->shape = std::move(shape);
  storage_->data = std::move(data);
  storage_->requires_grad = requires_grad;
}

template <typename T>
Tensor<T> Tensor<T>::zeros(Shape shape, bool requires_grad) {
  return full(std::move(shape), T(0), requires_grad);
}

template <typename T>
Tensor<T> Tensor<T>::full(Shape shape, T value, bool requires_grad) {
  const auto n = numel(shape);
  return Tensor(std::move(shape), std::vector<T>(n, value), requires_grad);
}

template <typename T>
Tensor<T> Tensor<T>::scalar(T value, bool requires_grad) {
  return Tensor(Shape{1}, std::vector<T>{value}, requires_grad);
}

template <typename T>
std::size_t Tensor<T>::dim(std::size_t axis) const {
  if (axis >= ndim()) {
    throw DimensionError("axis " + std::to_string(axis) + " out of range for shape " + shape_str(shape()));
  }
  return shape()[axis];
}

template <typename T>
std::size_t Tensor<T>::rows() const {
  return ndim() == 0 ? 1 : shape()[0];
}

template <typename T>
std::size_t Tensor<T>::cols() const {
  if (ndim() == 1) return 1;
  if (ndim() == 2) return shape()[1];
  throw DimensionError("cols() needs a 1-D or 2-D tensor, got " + shape_str(shape()));
}

template <typename T>
T Tensor<T>::item() const {
  if (size() != 1) throw ContractError("item() on tensor of shape " + shape_str(shape()));
  return storage_->data[0];
}

template <typename T>
Tensor<T>& Tensor<T>::set_requires_grad(bool on) {
  if (!storage_->is_leaf) throw ContractError("requires_grad can only be toggled on leaf tensors");
  storage_->requires_grad = on;
  return *this;
}

template <typename T>
Tensor<T> Tensor<T>::detach() const {
  return Tensor(shape(), storage_->data, false);
}

template <typename T>
Tape<T>& Tape<T>::current() {
  thread_local Tape<T> tape;
  return tape;
}

template <typename T>
void backward(const Tensor<T>& loss) {
  if (loss.size() != 1) {
    throw ContractError("backward() needs a scalar loss, got shape " + shape_str(loss.shape()));
  }
  auto& tape = Tape<T>::current();
  const auto& root = loss.storage();
  if (!root->requires_grad) throw ContractError("backward(): loss does not depend on any tensor requiring grad");
  if (root->is_leaf) {
    root->ensure_grad();
    root->grad[0] += T(1);
    return;
  }

  bool on_tape = false;
  for (const auto& node : tape.nodes()) {
    if (node.output == root) {
      on_tape = true;
      break;
    }
  }
  if (!on_tape) throw ContractError("backward(): loss is not on this thread's tape");

  root->ensure_grad();
  root->grad[0] += T(1);
  const auto& nodes = tape.nodes();
  for (auto it = nodes.rbegin(); it != nodes.rend(); ++it) {
    if (it->output->grad.empty()) continue;  // no gradient flowed here
    it->backward(*it);
  }
  for (const auto& node : nodes) {
    node.output->grad.clear();
    node.output->grad.shrink_to_fit();
  }
  tape.clear();
}

template class Tensor<float>;
template class Tensor<double>;
template class Tape<float>;
template class Tape<double>;
template void backward<float>(const Tensor<float>&);
template void backward<double>(const Tensor<double>&);

}  // namespace congfu
