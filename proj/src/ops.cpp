#include "congfu/ops.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace congfu {
namespace {

template <typename T>
using StoragePtr = std::shared_ptr<TensorStorage<T>>;

template <typename T>
bool any_requires_grad(std::initializer_list<const Tensor<T>*> inputs) {
  for (const auto* t : inputs)
    if (t->requires_grad()) return true;
  return false;
}

// Builds the output tensor and, when a gradient can flow, records the node.
template <typename T, typename Backward>
Tensor<T> finish(OpKind kind, Shape shape, std::vector<T> data, std::vector<StoragePtr<T>> inputs,
                 Backward&& fn) {
  Tensor<T> out(std::move(shape), std::move(data));
  bool needs = false;
  for (const auto& in : inputs) needs = needs || in->requires_grad;
  auto& tape = Tape<T>::current();
  if (needs && tape.recording()) {
    out.storage()->requires_grad = true;
    out.storage()->is_leaf = false;
    tape.record(TapeNode<T>{kind, std::move(inputs), out.storage(), std::forward<Backward>(fn)});
  }
  return out;
}

template <typename T>
void require_2d(const Tensor<T>& t, const char* op, const char* what) {
  if (t.ndim() != 2) {
    throw DimensionError(std::string(op) + ": " + what + " must be 2-D, got " + shape_str(t.shape()));
  }
}

template <typename T>
void check_segments(std::span<const Index> segments, std::size_t num_segments, const char* op) {
  for (std::size_t i = 0; i < segments.size(); ++i) {
    if (segments[i] >= num_segments) {
      throw IndexError(std::string(op) + ": segment id " + std::to_string(segments[i]) + " at position " +
                       std::to_string(i) + " is out of range for " + std::to_string(num_segments) + " segments");
    }
  }
}

// c[m x n] += a[m x k] . b[k x n]
template <typename T>
void gemm_nn(const T* a, const T* b, T* c, std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    T* crow = c + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const T av = a[i * k + p];
      if (av == T(0)) continue;
      const T* brow = b + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

// c[m x k] += g[m x n] . b[k x n]^T
template <typename T>
void gemm_nt(const T* g, const T* b, T* c, std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    const T* grow = g + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const T* brow = b + p * n;
      T acc = 0;
      for (std::size_t j = 0; j < n; ++j) acc += grow[j] * brow[j];
      c[i * k + p] += acc;
    }
  }
}

// c[k x n] += a[m x k]^T . g[m x n]
template <typename T>
void gemm_tn(const T* a, const T* g, T* c, std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    const T* grow = g + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const T av = a[i * k + p];
      if (av == T(0)) continue;
      T* crow = c + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * grow[j];
    }
  }
}

}  // namespace

template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
  require_2d(a, "matmul", "lhs");
  require_2d(b, "matmul", "rhs");
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  if (b.dim(0) != k) {
    throw DimensionError("matmul: inner dimensions differ for " + shape_str(a.shape()) + " . " +
                         shape_str(b.shape()));
  }
  std::vector<T> out(m * n, T(0));
  gemm_nn(a.data().data(), b.data().data(), out.data(), m, k, n);
  auto sa = a.storage(), sb = b.storage();
  return finish<T>(OpKind::MatMul, {m, n}, std::move(out), {sa, sb}, [m, k, n](const TapeNode<T>& node) {
    const auto& g = node.output->grad;
    const auto& A = node.inputs[0];
    const auto& B = node.inputs[1];
    if (A->requires_grad) {
      A->ensure_grad();
      gemm_nt(g.data(), B->data.data(), A->grad.data(), m, k, n);
    }
    if (B->requires_grad) {
      B->ensure_grad();
      gemm_tn(A->data.data(), g.data(), B->grad.data(), m, k, n);
    }
  });
}

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.shape() != b.shape()) {
    throw DimensionError("add: shapes differ " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  }
  std::vector<T> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] + b[i];
  return finish<T>(OpKind::Add, a.shape(), std::move(out), {a.storage(), b.storage()}, [](const TapeNode<T>& node) {
    const auto& g = node.output->grad;
    for (const auto& in : node.inputs) {
      if (!in->requires_grad) continue;
      in->ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) in->grad[i] += g[i];
    }
  });
}

template <typename T>
Tensor<T> add_bias(const Tensor<T>& x, const Tensor<T>& bias) {
  require_2d(x, "add_bias", "input");
  const std::size_t n = x.dim(0), d = x.dim(1);
  if (bias.size() != d) {
    throw DimensionError("add_bias: bias " + shape_str(bias.shape()) + " does not match input " +
                         shape_str(x.shape()));
  }
  std::vector<T> out(x.size());
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < d; ++c) out[r * d + c] = x[r * d + c] + bias[c];
  return finish<T>(OpKind::AddBias, x.shape(), std::move(out), {x.storage(), bias.storage()},
                   [n, d](const TapeNode<T>& node) {
                     const auto& g = node.output->grad;
                     const auto& X = node.inputs[0];
                     const auto& B = node.inputs[1];
                     if (X->requires_grad) {
                       X->ensure_grad();
                       for (std::size_t i = 0; i < g.size(); ++i) X->grad[i] += g[i];
                     }
                     if (B->requires_grad) {
                       B->ensure_grad();
                       for (std::size_t r = 0; r < n; ++r)
                         for (std::size_t c = 0; c < d; ++c) B->grad[c] += g[r * d + c];
                     }
                   });
}

template <typename T>
Tensor<T> relu(const Tensor<T>& x) {
  return leaky_relu(x, T(0));
}

template <typename T>
Tensor<T> leaky_relu(const Tensor<T>& x, T negative_slope) {
  std::vector<T> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] > T(0) ? x[i] : negative_slope * x[i];
  const OpKind kind = negative_slope == T(0) ? OpKind::Relu : OpKind::LeakyRelu;
  return finish<T>(kind, x.shape(), std::move(out), {x.storage()}, [negative_slope](const TapeNode<T>& node) {
    const auto& g = node.output->grad;
    const auto& X = node.inputs[0];
    X->ensure_grad();
    for (std::size_t i = 0; i < g.size(); ++i) X->grad[i] += X->data[i] > T(0) ? g[i] : negative_slope * g[i];
  });
}

template <typename T>
Tensor<T> scale(const Tensor<T>& x, T factor) {
  std::vector<T> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = factor * x[i];
  return finish<T>(OpKind::Scale, x.shape(), std::move(out), {x.storage()}, [factor](const TapeNode<T>& node) {
    const auto& g = node.output->grad;
    const auto& X = node.inputs[0];
    X->ensure_grad();
    for (std::size_t i = 0; i < g.size(); ++i) X->grad[i] += factor * g[i];
  });
}

template <typename T>
Tensor<T> scale_by(const Tensor<T>& x, const Tensor<T>& s, T offset) {
  if (s.size() != 1) throw DimensionError("scale_by: factor must have one element, got " + shape_str(s.shape()));
  const T f = offset + s[0];
  std::vector<T> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f * x[i];
  return finish<T>(OpKind::ScaleBy, x.shape(), std::move(out), {x.storage(), s.storage()},
                   [f](const TapeNode<T>& node) {
                     const auto& g = node.output->grad;
                     const auto& X = node.inputs[0];
                     const auto& S = node.inputs[1];
                     if (X->requires_grad) {
                       X->ensure_grad();
                       for (std::size_t i = 0; i < g.size(); ++i) X->grad[i] += f * g[i];
                     }
                     if (S->requires_grad) {
                       S->ensure_grad();
                       T acc = 0;
                       for (std::size_t i = 0; i < g.size(); ++i) acc += g[i] * X->data[i];
                       S->grad[0] += acc;
                     }
                   });
}

template <typename T>
Tensor<T> mul_rows(const Tensor<T>& x, const Tensor<T>& w) {
  require_2d(x, "mul_rows", "input");
  const std::size_t n = x.dim(0), d = x.dim(1);
  if (w.size() != n) {
    throw DimensionError("mul_rows: weights " + shape_str(w.shape()) + " do not match rows of " +
                         shape_str(x.shape()));
  }
  std::vector<T> out(x.size());
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < d; ++c) out[r * d + c] = w[r] * x[r * d + c];
  return finish<T>(OpKind::MulRows, x.shape(), std::move(out), {x.storage(), w.storage()},
                   [n, d](const TapeNode<T>& node) {
                     const auto& g = node.output->grad;
                     const auto& X = node.inputs[0];
                     const auto& W = node.inputs[1];
                     if (X->requires_grad) {
                       X->ensure_grad();
                       for (std::size_t r = 0; r < n; ++r)
                         for (std::size_t c = 0; c < d; ++c) X->grad[r * d + c] += W->data[r] * g[r * d + c];
                     }
                     if (W->requires_grad) {
                       W->ensure_grad();
                       for (std::size_t r = 0; r < n; ++r) {
                         T acc = 0;
                         for (std::size_t c = 0; c < d; ++c) acc += g[r * d + c] * X->data[r * d + c];
                         W->grad[r] += acc;
                       }
                     }
                   });
}

template <typename T>
Tensor<T> segment_softmax(const Tensor<T>& scores, std::span<const Index> segments, std::size_t num_segments) {
  const std::size_t n = scores.size();
  if (segments.size() != n) {
    throw DimensionError("segment_softmax: " + std::to_string(segments.size()) + " segment ids for " +
                         std::to_string(n) + " scores");
  }
  check_segments<T>(segments, num_segments, "segment_softmax");
  for (std::size_t i = 1; i < n; ++i) {
    if (segments[i] < segments[i - 1]) {
      throw ContractError("segment_softmax: segment ids must be non-decreasing (position " + std::to_string(i) + ")");
    }
  }
  std::vector<T> out(n);
  std::size_t begin = 0;
  while (begin < n) {
    std::size_t end = begin;
    T mx = -std::numeric_limits<T>::infinity();
    while (end < n && segments[end] == segments[begin]) mx = std::max(mx, scores[end++]);
    T total = 0;
    for (std::size_t i = begin; i < end; ++i) {
      out[i] = std::exp(scores[i] - mx);
      total += out[i];
    }
    for (std::size_t i = begin; i < end; ++i) out[i] /= total;
    begin = end;
  }
  std::vector<Index> seg(segments.begin(), segments.end());
  auto probs = out;
  return finish<T>(OpKind::SegmentSoftmax, scores.shape(), std::move(out), {scores.storage()},
                   [seg = std::move(seg), probs = std::move(probs)](const TapeNode<T>& node) {
                     const auto& g = node.output->grad;
                     const auto& S = node.inputs[0];
                     S->ensure_grad();
                     const std::size_t n = probs.size();
                     std::size_t begin = 0;
                     while (begin < n) {
                       std::size_t end = begin;
                       T dot = 0;
                       while (end < n && seg[end] == seg[begin]) {
                         dot += g[end] * probs[end];
                         ++end;
                       }
                       for (std::size_t i = begin; i < end; ++i) S->grad[i] += probs[i] * (g[i] - dot);
                       begin = end;
                     }
                   });
}

template <typename T>
Tensor<T> segment_sum(const Tensor<T>& values, std::span<const Index> segments, std::size_t num_segments) {
  require_2d(values, "segment_sum", "values");
  const std::size_t n = values.dim(0), d = values.dim(1);
  if (segments.size() != n) {
    throw DimensionError("segment_sum: " + std::to_string(segments.size()) + " segment ids for " +
                         std::to_string(n) + " rows");
  }
  check_segments<T>(segments, num_segments, "segment_sum");
  std::vector<T> out(num_segments * d, T(0));
  for (std::size_t r = 0; r < n; ++r) {
    T* dst = out.data() + segments[r] * d;
    const T* src = values.data().data() + r * d;
    for (std::size_t c = 0; c < d; ++c) dst[c] += src[c];
  }
  std::vector<Index> seg(segments.begin(), segments.end());
  return finish<T>(OpKind::SegmentSum, {num_segments, d}, std::move(out), {values.storage()},
                   [seg = std::move(seg), d](const TapeNode<T>& node) {
                     const auto& g = node.output->grad;
                     const auto& V = node.inputs[0];
                     V->ensure_grad();
                     for (std::size_t r = 0; r < seg.size(); ++r)
                       for (std::size_t c = 0; c < d; ++c) V->grad[r * d + c] += g[seg[r] * d + c];
                   });
}

template <typename T>
Tensor<T> concat_rows(const std::vector<Tensor<T>>& parts) {
  if (parts.empty()) throw ContractError("concat_rows: no parts");
  for (const auto& p : parts) require_2d(p, "concat_rows", "part");
  const std::size_t m = parts.front().dim(0);
  std::vector<std::size_t> widths;
  std::size_t total = 0;
  for (const auto& p : parts) {
    if (p.dim(0) != m) {
      throw DimensionError("concat_rows: row counts differ (" + shape_str(parts.front().shape()) + " vs " +
                           shape_str(p.shape()) + ")");
    }
    widths.push_back(p.dim(1));
    total += p.dim(1);
  }
  std::vector<T> out(m * total);
  std::vector<StoragePtr<T>> inputs;
  std::size_t offset = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const auto w = widths[k];
    const auto src = parts[k].data();
    for (std::size_t r = 0; r < m; ++r) std::copy_n(src.data() + r * w, w, out.data() + r * total + offset);
    offset += w;
    inputs.push_back(parts[k].storage());
  }
  return finish<T>(OpKind::ConcatRows, {m, total}, std::move(out), std::move(inputs),
                   [widths, m, total](const TapeNode<T>& node) {
                     const auto& g = node.output->grad;
                     std::size_t offset = 0;
                     for (std::size_t k = 0; k < node.inputs.size(); ++k) {
                       const auto& in = node.inputs[k];
                       const auto w = widths[k];
                       if (in->requires_grad) {
                         in->ensure_grad();
                         for (std::size_t r = 0; r < m; ++r)
                           for (std::size_t c = 0; c < w; ++c) in->grad[r * w + c] += g[r * total + offset + c];
                       }
                       offset += w;
                     }
                   });
}

template <typename T>
Tensor<T> embedding_lookup(const Tensor<T>& table, std::span<const Index> ids) {
  require_2d(table, "embedding_lookup", "table");
  const std::size_t v = table.dim(0), d = table.dim(1);
  std::vector<T> out(ids.size() * d);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] >= v) {
      throw IndexError("embedding_lookup: id " + std::to_string(ids[i]) + " at position " + std::to_string(i) +
                       " exceeds table of " + std::to_string(v) + " rows");
    }
    std::copy_n(table.data().data() + ids[i] * d, d, out.data() + i * d);
  }
  std::vector<Index> idv(ids.begin(), ids.end());
  return finish<T>(OpKind::EmbeddingLookup, {ids.size(), d}, std::move(out), {table.storage()},
                   [idv = std::move(idv), d](const TapeNode<T>& node) {
                     const auto& g = node.output->grad;
                     const auto& Tb = node.inputs[0];
                     Tb->ensure_grad();
                     for (std::size_t i = 0; i < idv.size(); ++i)
                       for (std::size_t c = 0; c < d; ++c) Tb->grad[idv[i] * d + c] += g[i * d + c];
                   });
}

template <typename T>
Tensor<T> batch_norm(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta, BatchNormState<T>& state,
                     Mode mode) {
  require_2d(x, "batch_norm", "input");
  const std::size_t n = x.dim(0), d = x.dim(1);
  if (n == 0) throw ContractError("batch_norm: empty batch");
  if (gamma.size() != d || beta.size() != d || state.running_mean.size() != d || state.running_var.size() != d) {
    throw DimensionError("batch_norm: parameters do not match " + std::to_string(d) + " features");
  }
  std::vector<T> mean(d, T(0)), inv_std(d);
  if (mode == Mode::Train) {
    std::vector<T> var(d, T(0));
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < d; ++c) mean[c] += x[r * d + c];
    for (auto& m : mean) m /= T(n);
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < d; ++c) {
        const T dv = x[r * d + c] - mean[c];
        var[c] += dv * dv;
      }
    for (std::size_t c = 0; c < d; ++c) {
      const T biased = var[c] / T(n);
      inv_std[c] = T(1) / std::sqrt(biased + state.eps);
      const T unbiased = n > 1 ? var[c] / T(n - 1) : biased;
      state.running_mean[c] = (T(1) - state.momentum) * state.running_mean[c] + state.momentum * mean[c];
      state.running_var[c] = (T(1) - state.momentum) * state.running_var[c] + state.momentum * unbiased;
    }
  } else {
    for (std::size_t c = 0; c < d; ++c) {
      mean[c] = state.running_mean[c];
      inv_std[c] = T(1) / std::sqrt(state.running_var[c] + state.eps);
    }
  }
  std::vector<T> xhat(x.size()), out(x.size());
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < d; ++c) {
      const std::size_t i = r * d + c;
      xhat[i] = (x[i] - mean[c]) * inv_std[c];
      out[i] = gamma[c] * xhat[i] + beta[c];
    }
  return finish<T>(
      OpKind::BatchNorm, x.shape(), std::move(out), {x.storage(), gamma.storage(), beta.storage()},
      [xhat = std::move(xhat), inv_std = std::move(inv_std), n, d, train = mode == Mode::Train](
          const TapeNode<T>& node) {
        const auto& g = node.output->grad;
        const auto& X = node.inputs[0];
        const auto& G = node.inputs[1];
        const auto& B = node.inputs[2];
        if (G->requires_grad) {
          G->ensure_grad();
          for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < d; ++c) G->grad[c] += g[r * d + c] * xhat[r * d + c];
        }
        if (B->requires_grad) {
          B->ensure_grad();
          for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < d; ++c) B->grad[c] += g[r * d + c];
        }
        if (!X->requires_grad) return;
        X->ensure_grad();
        if (!train) {
          for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < d; ++c) X->grad[r * d + c] += g[r * d + c] * G->data[c] * inv_std[c];
          return;
        }
        std::vector<T> sum_dx(d, T(0)), sum_dx_xhat(d, T(0));
        for (std::size_t r = 0; r < n; ++r)
          for (std::size_t c = 0; c < d; ++c) {
            const T dxhat = g[r * d + c] * G->data[c];
            sum_dx[c] += dxhat;
            sum_dx_xhat[c] += dxhat * xhat[r * d + c];
          }
        const T inv_n = T(1) / T(n);
        for (std::size_t r = 0; r < n; ++r)
          for (std::size_t c = 0; c < d; ++c) {
            const std::size_t i = r * d + c;
            const T dxhat = g[i] * G->data[c];
            X->grad[i] += inv_n * inv_std[c] * (T(n) * dxhat - sum_dx[c] - xhat[i] * sum_dx_xhat[c]);
          }
      });
}

template <typename T>
Tensor<T> bce_with_logits_loss(const Tensor<T>& logits, std::span<const std::type_identity_t<T>> labels) {
  const std::size_t n = logits.size();
  if (labels.size() != n) {
    throw DimensionError("bce_with_logits_loss: " + std::to_string(labels.size()) + " labels for " +
                         std::to_string(n) + " logits");
  }
  if (n == 0) throw ContractError("bce_with_logits_loss: empty batch");
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] != T(0) && labels[i] != T(1)) {
      throw ValidationError("bce_with_logits_loss: label at position " + std::to_string(i) + " is not 0 or 1");
    }
  }
  // log(1 + exp(-s z)) = max(-s z, 0) + log1p(exp(-|z|))
  T total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const T z = logits[i];
    const T m = labels[i] == T(1) ? -z : z;
    total += std::max(m, T(0)) + std::log1p(std::exp(-std::abs(z)));
  }
  std::vector<T> lab(labels.begin(), labels.end());
  return finish<T>(OpKind::BceWithLogits, {1}, {total / T(n)}, {logits.storage()},
                   [lab = std::move(lab)](const TapeNode<T>& node) {
                     const T g = node.output->grad[0];
                     const auto& Z = node.inputs[0];
                     Z->ensure_grad();
                     const T inv_n = T(1) / T(lab.size());
                     for (std::size_t i = 0; i < lab.size(); ++i) {
                       const T z = Z->data[i];
                       const T sig = z >= T(0) ? T(1) / (T(1) + std::exp(-z)) : std::exp(z) / (T(1) + std::exp(z));
                       Z->grad[i] += g * (sig - lab[i]) * inv_n;
                     }
                   });
}

template <typename T>
Tensor<T> sum(const Tensor<T>& x) {
  T total = 0;
  for (auto v : x.data()) total += v;
  return finish<T>(OpKind::Sum, {1}, {total}, {x.storage()}, [](const TapeNode<T>& node) {
    const T g = node.output->grad[0];
    const auto& X = node.inputs[0];
    X->ensure_grad();
    for (auto& v : X->grad) v += g;
  });
}

template <typename T>
Tensor<T> reshape(const Tensor<T>& x, Shape shape) {
  if (numel(shape) != x.size()) {
    throw DimensionError("reshape: cannot view " + shape_str(x.shape()) + " as " + shape_str(shape));
  }
  std::vector<T> out(x.data().begin(), x.data().end());
  return finish<T>(OpKind::Reshape, std::move(shape), std::move(out), {x.storage()}, [](const TapeNode<T>& node) {
    const auto& g = node.output->grad;
    const auto& X = node.inputs[0];
    X->ensure_grad();
    for (std::size_t i = 0; i < g.size(); ++i) X->grad[i] += g[i];
  });
}

#define CONGFU_INSTANTIATE_OPS(T)                                                                              \
  template Tensor<T> matmul(const Tensor<T>&, const Tensor<T>&);                                               \
  template Tensor<T> add(const Tensor<T>&, const Tensor<T>&);                                                  \
  template Tensor<T> add_bias(const Tensor<T>&, const Tensor<T>&);                                             \
  template Tensor<T> relu(const Tensor<T>&);                                                                   \
  template Tensor<T> leaky_relu(const Tensor<T>&, T);                                                          \
  template Tensor<T> scale(const Tensor<T>&, T);                                                               \
  template Tensor<T> scale_by(const Tensor<T>&, const Tensor<T>&, T);                                          \
  template Tensor<T> mul_rows(const Tensor<T>&, const Tensor<T>&);                                             \
  template Tensor<T> segment_softmax(const Tensor<T>&, std::span<const Index>, std::size_t);                   \
  template Tensor<T> segment_sum(const Tensor<T>&, std::span<const Index>, std::size_t);                       \
  template Tensor<T> concat_rows(const std::vector<Tensor<T>>&);                                               \
  template Tensor<T> embedding_lookup(const Tensor<T>&, std::span<const Index>);                               \
  template Tensor<T> batch_norm(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, BatchNormState<T>&, Mode); \
  template Tensor<T> bce_with_logits_loss(const Tensor<T>&, std::span<const std::type_identity_t<T>>);                              \
  template Tensor<T> sum(const Tensor<T>&);                                                                    \
  template Tensor<T> reshape(const Tensor<T>&, Shape);

CONGFU_INSTANTIATE_OPS(float)
CONGFU_INSTANTIATE_OPS(double)

}  // namespace congfu
