#pragma once

// Reverse-mode differentiable arrays. A Tape records eagerly evaluated
// primitives (define-by-run); backward() replays them in reverse exactly once.
// Arrays are rank 0..2 and row-major; rank-1 arrays behave as a single row.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "moco/errors.hpp"
#include "moco/kernels.hpp"

namespace moco::tensor {

using Shape = std::vector<int>;

inline std::string shape_str(const Shape& s) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
  os << ')';
  return os.str();
}

inline std::size_t shape_size(const Shape& s) {
  std::size_t n = 1;
  for (int e : s) {
    if (e < 0) throw ContractViolation("negative extent in shape " + shape_str(s));
    n *= static_cast<std::size_t>(e);
  }
  return n;
}

template <class T>
struct Array {
  Shape shape;
  std::vector<T> data;

  Array() : shape{}, data(1, T(0)) {}
  explicit Array(Shape s, T fill = T(0)) : shape(std::move(s)), data(shape_size(shape), fill) {
    check_rank();
  }
  Array(Shape s, std::vector<T> values) : shape(std::move(s)), data(std::move(values)) {
    check_rank();
    if (data.size() != shape_size(shape))
      throw ContractViolation("array of shape " + shape_str(shape) + " given " +
                              std::to_string(data.size()) + " values");
  }

  static Array matrix(int r, int c, T fill = T(0)) { return Array({r, c}, fill); }
  static Array scalar(T v) { return Array(Shape{}, std::vector<T>{v}); }

  std::size_t size() const { return data.size(); }
  int rank() const { return static_cast<int>(shape.size()); }
  int rows() const { return rank() == 2 ? shape[0] : 1; }
  int cols() const { return rank() == 0 ? 1 : shape.back(); }
  T& operator()(int r, int c) { return data[static_cast<std::size_t>(r) * cols() + c]; }
  const T& operator()(int r, int c) const { return data[static_cast<std::size_t>(r) * cols() + c]; }
  T item() const {
    if (size() != 1) throw ContractViolation("item() on array of shape " + shape_str(shape));
    return data[0];
  }

  template <class U>
  Array<U> cast() const {
    return Array<U>(shape, std::vector<U>(data.begin(), data.end()));
  }

 private:
  void check_rank() const {
    if (shape.size() > 2) throw ContractViolation("rank > 2 unsupported: " + shape_str(shape));
  }
};

struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

enum class Op : std::uint8_t {
  Leaf,
  MatMul,
  MatMulNT,
  Add,
  AddRow,
  Mul,
  Scale,
  Tanh,
  Relu,
  Softmax,
  LogSoftmax,
  MaskedFill,
  LayerNorm,
  Concat,
  SliceCols,
  SliceReshape,
  GatherRows,
  Pick,
  Sum,
  DotConst,
  MeanRows,
  Attention,
};

template <class T>
class Tape {
 public:
  struct Node {
    Op op = Op::Leaf;
    Array<T> value;
    std::vector<T> grad;        // empty until something flows into it
    std::vector<int> inputs;
    std::vector<int> iaux;      // masks, indices
    std::vector<T> taux;        // cached forward quantities
    int p0 = 0, p1 = 0, p2 = 0;  // integer op parameters
    T s = T(0);
    int slot = -1;  // parameter slot for Leaf nodes
    bool needs_grad = false;
  };

  explicit Tape(bool record = true) : record_(record) { nodes_.reserve(256); }

  bool recording() const { return record_; }
  std::size_t size() const { return nodes_.size(); }
  bool backward_done() const { return backward_done_; }

  Var constant(Array<T> value) { return push_leaf(std::move(value), false, -1); }
  Var leaf(Array<T> value) { return push_leaf(std::move(value), record_, -1); }
  Var parameter(int slot, Array<T> value) { return push_leaf(std::move(value), record_, slot); }

  const Array<T>& value(Var v) const { return node(v).value; }
  const Node& node(Var v) const {
    if (v.id < 0 || v.id >= static_cast<int>(nodes_.size()))
      throw ContractViolation("variable not on this tape");
    return nodes_[v.id];
  }

  // Gradient of the last backward() loss with respect to v (zeros if v was
  // not on the loss path).
  Array<T> grad(Var v) const {
    const Node& n = node(v);
    if (n.grad.empty()) return Array<T>(n.value.shape, T(0));
    return Array<T>(n.value.shape, n.grad);
  }

  // Summed gradient per parameter slot, zeros for slots never touched.
  std::vector<Array<T>> slot_gradients(std::span<const Shape> slot_shapes) const {
    std::vector<Array<T>> out;
    out.reserve(slot_shapes.size());
    for (const auto& s : slot_shapes) out.emplace_back(s, T(0));
    for (const Node& n : nodes_) {
      if (n.op != Op::Leaf || n.slot < 0 || n.grad.empty()) continue;
      if (n.slot >= static_cast<int>(out.size())) throw ContractViolation("parameter slot out of range");
      auto& dst = out[n.slot].data;
      if (dst.size() != n.grad.size()) throw ContractViolation("parameter slot shape mismatch");
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += n.grad[i];
    }
    return out;
  }

  void backward(Var loss) {
    if (!record_) throw UsageError("backward() on a non-recording tape");
    if (backward_done_) throw UsageError("backward() called twice on one tape");
    Node& root = nodes_.at(loss.id);
    if (root.value.size() != 1)
      throw ContractViolation("backward() needs a scalar loss, got shape " + shape_str(root.value.shape));
    backward_done_ = true;
    if (!root.needs_grad) return;
    root.grad.assign(1, T(1));
    for (int i = loss.id; i >= 0; --i) {
      Node& n = nodes_[i];
      if (!n.needs_grad || n.grad.empty() || n.op == Op::Leaf) continue;
      propagate(i);
    }
  }

  // Used by primitive builders below.
  Var push(Op op, Array<T> value, std::vector<int> inputs) {
    Node n;
    n.op = op;
    n.value = std::move(value);
    if (record_)
      for (int in : inputs) n.needs_grad = n.needs_grad || nodes_[in].needs_grad;
    n.inputs = std::move(inputs);
    nodes_.push_back(std::move(n));
    return Var{static_cast<int>(nodes_.size()) - 1};
  }
  Node& mutable_node(Var v) { return nodes_[v.id]; }

 private:
  Var push_leaf(Array<T> value, bool needs_grad, int slot) {
    Node n;
    n.op = Op::Leaf;
    n.value = std::move(value);
    n.needs_grad = needs_grad;
    n.slot = slot;
    nodes_.push_back(std::move(n));
    return Var{static_cast<int>(nodes_.size()) - 1};
  }

  std::vector<T>* grad_of(int id) {
    Node& n = nodes_[id];
    if (!n.needs_grad) return nullptr;
    if (n.grad.empty()) n.grad.assign(n.value.size(), T(0));
    return &n.grad;
  }

  void propagate(int i);

  std::vector<Node> nodes_;
  bool record_;
  bool backward_done_ = false;
};

// ---------------------------------------------------------------------------
// Primitive builders
// ---------------------------------------------------------------------------

namespace detail {

inline void require(bool ok, const std::string& what) {
  if (!ok) throw ContractViolation(what);
}

inline std::string pair_str(const char* op, const Shape& a, const Shape& b) {
  return std::string(op) + ": shape mismatch " + shape_str(a) + " vs " + shape_str(b);
}

}  // namespace detail

template <class T>
Var matmul(Tape<T>& t, Var a, Var b) {
  const auto& A = t.value(a);
  const auto& B = t.value(b);
  detail::require(A.cols() == B.rows(), detail::pair_str("matmul", A.shape, B.shape));
  Array<T> C = Array<T>::matrix(A.rows(), B.cols());
  kernels::matmul_nn(A.data.data(), B.data.data(), C.data.data(), A.rows(), A.cols(), B.cols(), false);
  return t.push(Op::MatMul, std::move(C), {a.id, b.id});
}

// a * b^T
template <class T>
Var matmul_nt(Tape<T>& t, Var a, Var b) {
  const auto& A = t.value(a);
  const auto& B = t.value(b);
  detail::require(A.cols() == B.cols(), detail::pair_str("matmul_nt", A.shape, B.shape));
  Array<T> C = Array<T>::matrix(A.rows(), B.rows());
  kernels::matmul_nt(A.data.data(), B.data.data(), C.data.data(), A.rows(), A.cols(), B.rows(), false);
  return t.push(Op::MatMulNT, std::move(C), {a.id, b.id});
}

template <class T>
Var add(Tape<T>& t, Var a, Var b) {
  const auto& A = t.value(a);
  const auto& B = t.value(b);
  detail::require(A.shape == B.shape, detail::pair_str("add", A.shape, B.shape));
  Array<T> C = A;
  for (std::size_t i = 0; i < C.size(); ++i) C.data[i] += B.data[i];
  return t.push(Op::Add, std::move(C), {a.id, b.id});
}

// a[r x c] + row[1 x c] broadcast over rows
template <class T>
Var add_row(Tape<T>& t, Var a, Var row) {
  const auto& A = t.value(a);
  const auto& R = t.value(row);
  detail::require(R.size() == static_cast<std::size_t>(A.cols()) && R.rows() == 1,
                  detail::pair_str("add_row", A.shape, R.shape));
  Array<T> C = A;
  const int c = A.cols();
  for (int r = 0; r < A.rows(); ++r)
    for (int j = 0; j < c; ++j) C(r, j) += R.data[j];
  return t.push(Op::AddRow, std::move(C), {a.id, row.id});
}

template <class T>
Var mul(Tape<T>& t, Var a, Var b) {
  const auto& A = t.value(a);
  const auto& B = t.value(b);
  detail::require(A.shape == B.shape, detail::pair_str("mul", A.shape, B.shape));
  Array<T> C = A;
  for (std::size_t i = 0; i < C.size(); ++i) C.data[i] *= B.data[i];
  return t.push(Op::Mul, std::move(C), {a.id, b.id});
}

template <class T>
Var scale(Tape<T>& t, Var a, T s) {
  Array<T> C = t.value(a);
  for (auto& x : C.data) x *= s;
  Var out = t.push(Op::Scale, std::move(C), {a.id});
  t.mutable_node(out).s = s;
  return out;
}

template <class T>
Var tanh(Tape<T>& t, Var a) {
  Array<T> C = t.value(a);
  for (auto& x : C.data) x = std::tanh(x);
  return t.push(Op::Tanh, std::move(C), {a.id});
}

template <class T>
Var relu(Tape<T>& t, Var a) {
  Array<T> C = t.value(a);
  for (auto& x : C.data) x = x > T(0) ? x : T(0);
  return t.push(Op::Relu, std::move(C), {a.id});
}

namespace detail {

template <class T>
T row_max(const T* x, int c) {
  T m = -std::numeric_limits<T>::infinity();
  for (int j = 0; j < c; ++j) {
    if (std::isnan(x[j])) return x[j];
    m = std::max(m, x[j]);
  }
  return m;
}

}  // namespace detail

template <class T>
Var softmax(Tape<T>& t, Var a) {
  Array<T> C = t.value(a);
  const int c = C.cols();
  for (int r = 0; r < C.rows(); ++r) {
    T* x = &C(r, 0);
    const T mx = detail::row_max(x, c);
    detail::require(mx != -std::numeric_limits<T>::infinity(), "softmax: row " + std::to_string(r) + " fully masked");
    T z = T(0);
    for (int j = 0; j < c; ++j) {
      x[j] = std::exp(x[j] - mx);
      z += x[j];
    }
    for (int j = 0; j < c; ++j) x[j] /= z;
  }
  return t.push(Op::Softmax, std::move(C), {a.id});
}

template <class T>
Var log_softmax(Tape<T>& t, Var a) {
  Array<T> C = t.value(a);
  const int c = C.cols();
  for (int r = 0; r < C.rows(); ++r) {
    T* x = &C(r, 0);
    const T mx = detail::row_max(x, c);
    detail::require(mx != -std::numeric_limits<T>::infinity(),
                    "log_softmax: row " + std::to_string(r) + " fully masked");
    T z = T(0);
    for (int j = 0; j < c; ++j) z += std::exp(x[j] - mx);
    const T lse = mx + std::log(z);
    for (int j = 0; j < c; ++j) x[j] -= lse;
  }
  return t.push(Op::LogSoftmax, std::move(C), {a.id});
}

// mask[i] != 0 replaces element i with `fill` (no gradient flows there).
template <class T>
Var masked_fill(Tape<T>& t, Var a, std::span<const std::uint8_t> mask, T fill) {
  Array<T> C = t.value(a);
  detail::require(mask.size() == C.size(), "masked_fill: mask of " + std::to_string(mask.size()) +
                                               " entries for shape " + shape_str(C.shape));
  for (std::size_t i = 0; i < C.size(); ++i)
    if (mask[i]) C.data[i] = fill;
  Var out = t.push(Op::MaskedFill, std::move(C), {a.id});
  t.mutable_node(out).iaux.assign(mask.begin(), mask.end());
  return out;
}

// Per-row normalization over the last axis with learned gain and bias.
template <class T>
Var layer_norm(Tape<T>& t, Var a, Var gain, Var bias, T eps = T(1e-5)) {
  const auto& A = t.value(a);
  const int r = A.rows(), c = A.cols();
  detail::require(t.value(gain).size() == static_cast<std::size_t>(c) &&
                      t.value(bias).size() == static_cast<std::size_t>(c),
                  detail::pair_str("layer_norm", A.shape, t.value(gain).shape));
  Array<T> C(A.shape);
  std::vector<T> cache(static_cast<std::size_t>(r) * c + r);
  const auto& G = t.value(gain).data;
  const auto& B = t.value(bias).data;
  for (int i = 0; i < r; ++i) {
    const T* x = &A(i, 0);
    T mean = T(0);
    for (int j = 0; j < c; ++j) mean += x[j];
    mean /= c;
    T var = T(0);
    for (int j = 0; j < c; ++j) var += (x[j] - mean) * (x[j] - mean);
    var /= c;
    const T rstd = T(1) / std::sqrt(var + eps);
    for (int j = 0; j < c; ++j) {
      const T xh = (x[j] - mean) * rstd;
      cache[static_cast<std::size_t>(i) * c + j] = xh;
      C(i, j) = xh * G[j] + B[j];
    }
    cache[static_cast<std::size_t>(r) * c + i] = rstd;
  }
  Var out = t.push(Op::LayerNorm, std::move(C), {a.id, gain.id, bias.id});
  t.mutable_node(out).taux = std::move(cache);
  return out;
}

template <class T>
Var concat_cols(Tape<T>& t, std::span<const Var> parts) {
  detail::require(!parts.empty(), "concat_cols: no inputs");
  const int r = t.value(parts[0]).rows();
  int c = 0;
  std::vector<int> ids;
  for (Var p : parts) {
    detail::require(t.value(p).rows() == r,
                    detail::pair_str("concat_cols", t.value(parts[0]).shape, t.value(p).shape));
    c += t.value(p).cols();
    ids.push_back(p.id);
  }
  Array<T> C = Array<T>::matrix(r, c);
  int off = 0;
  for (Var p : parts) {
    const auto& P = t.value(p);
    for (int i = 0; i < r; ++i)
      std::copy_n(&P(i, 0), P.cols(), &C(i, off));
    off += P.cols();
  }
  return t.push(Op::Concat, std::move(C), std::move(ids));
}

template <class T>
Var slice_cols(Tape<T>& t, Var a, int start, int width) {
  const auto& A = t.value(a);
  detail::require(start >= 0 && width > 0 && start + width <= A.cols(),
                  "slice_cols: [" + std::to_string(start) + "," + std::to_string(start + width) +
                      ") out of " + shape_str(A.shape));
  Array<T> C = Array<T>::matrix(A.rows(), width);
  for (int i = 0; i < A.rows(); ++i) std::copy_n(&A(i, start), width, &C(i, 0));
  Var out = t.push(Op::SliceCols, std::move(C), {a.id});
  t.mutable_node(out).p0 = start;
  return out;
}

// Reinterprets a contiguous run of `a` (flat order) as a rows x cols matrix.
template <class T>
Var slice_reshape(Tape<T>& t, Var a, int offset, int rows, int cols) {
  const auto& A = t.value(a);
  const std::size_t need = static_cast<std::size_t>(offset) + static_cast<std::size_t>(rows) * cols;
  detail::require(offset >= 0 && need <= A.size(),
                  "slice_reshape: " + std::to_string(need) + " values needed from " + shape_str(A.shape));
  Array<T> C = Array<T>::matrix(rows, cols);
  std::copy_n(A.data.begin() + offset, C.size(), C.data.begin());
  Var out = t.push(Op::SliceReshape, std::move(C), {a.id});
  t.mutable_node(out).p0 = offset;
  return out;
}

template <class T>
Var gather_rows(Tape<T>& t, Var a, std::span<const int> index) {
  const auto& A = t.value(a);
  const int c = A.cols();
  Array<T> C = Array<T>::matrix(static_cast<int>(index.size()), c);
  for (std::size_t i = 0; i < index.size(); ++i) {
    detail::require(index[i] >= 0 && index[i] < A.rows(),
                    "gather_rows: index " + std::to_string(index[i]) + " out of " + shape_str(A.shape));
    std::copy_n(&A(index[i], 0), c, &C(static_cast<int>(i), 0));
  }
  Var out = t.push(Op::GatherRows, std::move(C), {a.id});
  t.mutable_node(out).iaux.assign(index.begin(), index.end());
  return out;
}

// out[r] = a[r, index[r]]  (rows x 1)
template <class T>
Var pick(Tape<T>& t, Var a, std::span<const int> index) {
  const auto& A = t.value(a);
  detail::require(static_cast<int>(index.size()) == A.rows(),
                  "pick: " + std::to_string(index.size()) + " indices for " + shape_str(A.shape));
  Array<T> C = Array<T>::matrix(A.rows(), 1);
  for (int r = 0; r < A.rows(); ++r) {
    detail::require(index[r] >= 0 && index[r] < A.cols(), "pick: column out of range");
    C.data[r] = A(r, index[r]);
  }
  Var out = t.push(Op::Pick, std::move(C), {a.id});
  t.mutable_node(out).iaux.assign(index.begin(), index.end());
  return out;
}

template <class T>
Var sum(Tape<T>& t, Var a) {
  const auto& A = t.value(a);
  T s = T(0);
  for (T x : A.data) s += x;
  return t.push(Op::Sum, Array<T>::scalar(s), {a.id});
}

// sum_i a_i * w_i for a constant weight array of the same size
template <class T>
Var dot_const(Tape<T>& t, Var a, std::span<const T> w) {
  const auto& A = t.value(a);
  detail::require(w.size() == A.size(), "dot_const: " + std::to_string(w.size()) + " weights for " +
                                            shape_str(A.shape));
  T s = T(0);
  for (std::size_t i = 0; i < w.size(); ++i) s += A.data[i] * w[i];
  Var out = t.push(Op::DotConst, Array<T>::scalar(s), {a.id});
  t.mutable_node(out).taux.assign(w.begin(), w.end());
  return out;
}

template <class T>
Var mean_rows(Tape<T>& t, Var a) {
  const auto& A = t.value(a);
  Array<T> C = Array<T>::matrix(1, A.cols());
  for (int r = 0; r < A.rows(); ++r)
    for (int j = 0; j < A.cols(); ++j) C.data[j] += A(r, j);
  for (auto& x : C.data) x /= A.rows();
  return t.push(Op::MeanRows, std::move(C), {a.id});
}

// Multi-head scaled dot-product attention over pre-projected q [nq x d],
// k, v [nk x d]. Head h uses columns [h*d/heads, (h+1)*d/heads). A non-empty
// mask [nq x nk] excludes keys where the mask is nonzero.
template <class T>
Var attention(Tape<T>& t, Var q, Var k, Var v, int heads, std::span<const std::uint8_t> mask = {}) {
  const auto& Q = t.value(q);
  const auto& K = t.value(k);
  const auto& V = t.value(v);
  const int nq = Q.rows(), nk = K.rows(), d = Q.cols();
  detail::require(K.cols() == d && V.cols() == d && V.rows() == nk,
                  "attention: shape mismatch q" + shape_str(Q.shape) + " k" + shape_str(K.shape) + " v" +
                      shape_str(V.shape));
  detail::require(heads > 0 && d % heads == 0, "attention: " + std::to_string(heads) +
                                                   " heads do not divide width " + std::to_string(d));
  detail::require(mask.empty() || mask.size() == static_cast<std::size_t>(nq) * nk,
                  "attention: mask size mismatch");
  const int hd = d / heads;
  const T sc = T(1) / std::sqrt(static_cast<T>(hd));
  std::vector<T> probs(static_cast<std::size_t>(heads) * nq * nk);
  Array<T> O = Array<T>::matrix(nq, d);
  for (int h = 0; h < heads; ++h) {
    const int off = h * hd;
    for (int i = 0; i < nq; ++i) {
      T* p = &probs[(static_cast<std::size_t>(h) * nq + i) * nk];
      const T* qi = &Q(i, off);
      const std::uint8_t* row_mask = mask.empty() ? nullptr : &mask[static_cast<std::size_t>(i) * nk];
      T mx = -std::numeric_limits<T>::infinity();
      bool open = false;
      for (int j = 0; j < nk; ++j) {
        if (row_mask && row_mask[j]) continue;
        const T* kj = &K(j, off);
        T s = T(0);
        for (int e = 0; e < hd; ++e) s += qi[e] * kj[e];
        p[j] = s * sc;
        mx = open ? std::max(mx, p[j]) : p[j];
        open = true;
      }
      detail::require(open, "attention: query row " + std::to_string(i) + " has every key masked");
      T z = T(0);
      for (int j = 0; j < nk; ++j) {
        p[j] = row_mask && row_mask[j] ? T(0) : std::exp(p[j] - mx);
        z += p[j];
      }
      T* oi = &O(i, off);
      for (int j = 0; j < nk; ++j) {
        p[j] /= z;
        if (p[j] == T(0)) continue;
        const T* vj = &V(j, off);
        for (int e = 0; e < hd; ++e) oi[e] += p[j] * vj[e];
      }
    }
  }
  Var out = t.push(Op::Attention, std::move(O), {q.id, k.id, v.id});
  auto& n = t.mutable_node(out);
  n.taux = std::move(probs);
  n.p0 = heads;
  return out;
}

// ---------------------------------------------------------------------------
// Backward rules
// ---------------------------------------------------------------------------

template <class T>
void Tape<T>::propagate(int i) {
  Node& n = nodes_[i];
  const std::vector<T>& g = n.grad;
  const auto in = [&](int k) -> const Array<T>& { return nodes_[n.inputs[k]].value; };

  switch (n.op) {
    case Op::Leaf:
      break;
    case Op::MatMul: {
      const auto& A = in(0);
      const auto& B = in(1);
      const int r = A.rows(), k = A.cols(), c = B.cols();
      if (auto* ga = grad_of(n.inputs[0])) kernels::matmul_nt(g.data(), B.data.data(), ga->data(), r, c, k, true);
      if (auto* gb = grad_of(n.inputs[1])) kernels::matmul_tn(A.data.data(), g.data(), gb->data(), k, r, c, true);
      break;
    }
    case Op::MatMulNT: {
      const auto& A = in(0);
      const auto& B = in(1);
      const int r = A.rows(), k = A.cols(), c = B.rows();
      if (auto* ga = grad_of(n.inputs[0])) kernels::matmul_nn(g.data(), B.data.data(), ga->data(), r, c, k, true);
      if (auto* gb = grad_of(n.inputs[1])) kernels::matmul_tn(g.data(), A.data.data(), gb->data(), c, r, k, true);
      break;
    }
    case Op::Add: {
      for (int k = 0; k < 2; ++k)
        if (auto* ga = grad_of(n.inputs[k]))
          for (std::size_t j = 0; j < g.size(); ++j) (*ga)[j] += g[j];
      break;
    }
    case Op::AddRow: {
      const int c = n.value.cols();
      if (auto* ga = grad_of(n.inputs[0]))
        for (std::size_t j = 0; j < g.size(); ++j) (*ga)[j] += g[j];
      if (auto* gb = grad_of(n.inputs[1]))
        for (std::size_t j = 0; j < g.size(); ++j) (*gb)[j % c] += g[j];
      break;
    }
    case Op::Mul: {
      const auto& A = in(0);
      const auto& B = in(1);
      if (auto* ga = grad_of(n.inputs[0]))
        for (std::size_t j = 0; j < g.size(); ++j) (*ga)[j] += g[j] * B.data[j];
      if (auto* gb = grad_of(n.inputs[1]))
        for (std::size_t j = 0; j < g.size(); ++j) (*gb)[j] += g[j] * A.data[j];
      break;
    }
    case Op::Scale: {
      if (auto* ga = grad_of(n.inputs[0]))
        for (std::size_t j = 0; j < g.size(); ++j) (*ga)[j] += g[j] * n.s;
      break;
    }
    case Op::Tanh: {
      if (auto* ga = grad_of(n.inputs[0]))
        for (std::size_t j = 0; j < g.size(); ++j) {
          const T y = n.value.data[j];
          (*ga)[j] += g[j] * (T(1) - y * y);
        }
      break;
    }
    case Op::Relu: {
      const auto& A = in(0);
      if (auto* ga = grad_of(n.inputs[0]))
        for (std::size_t j = 0; j < g.size(); ++j)
          if (A.data[j] > T(0)) (*ga)[j] += g[j];
      break;
    }
    case Op::Softmax: {
      auto* ga = grad_of(n.inputs[0]);
      if (!ga) break;
      const int c = n.value.cols();
      for (int r = 0; r < n.value.rows(); ++r) {
        const T* y = &n.value(r, 0);
        const T* gy = &g[static_cast<std::size_t>(r) * c];
        T dot = T(0);
        for (int j = 0; j < c; ++j) dot += gy[j] * y[j];
        for (int j = 0; j < c; ++j) (*ga)[static_cast<std::size_t>(r) * c + j] += y[j] * (gy[j] - dot);
      }
      break;
    }
    case Op::LogSoftmax: {
      auto* ga = grad_of(n.inputs[0]);
      if (!ga) break;
      const int c = n.value.cols();
      for (int r = 0; r < n.value.rows(); ++r) {
        const T* y = &n.value(r, 0);
        const T* gy = &g[static_cast<std::size_t>(r) * c];
        T total = T(0);
        for (int j = 0; j < c; ++j) total += gy[j];
        for (int j = 0; j < c; ++j) {
          const T p = std::isfinite(static_cast<double>(y[j])) ? std::exp(y[j]) : T(0);
          (*ga)[static_cast<std::size_t>(r) * c + j] += gy[j] - p * total;
        }
      }
      break;
    }
    case Op::MaskedFill: {
      if (auto* ga = grad_of(n.inputs[0]))
        for (std::size_t j = 0; j < g.size(); ++j)
          if (!n.iaux[j]) (*ga)[j] += g[j];
      break;
    }
    case Op::LayerNorm: {
      const int r = n.value.rows(), c = n.value.cols();
      const auto& G = in(1).data;
      auto* ga = grad_of(n.inputs[0]);
      auto* gg = grad_of(n.inputs[1]);
      auto* gb = grad_of(n.inputs[2]);
      std::vector<T> dxh(c);
      for (int i2 = 0; i2 < r; ++i2) {
        const T* xh = &n.taux[static_cast<std::size_t>(i2) * c];
        const T* gy = &g[static_cast<std::size_t>(i2) * c];
        const T rstd = n.taux[static_cast<std::size_t>(r) * c + i2];
        T m1 = T(0), m2 = T(0);
        for (int j = 0; j < c; ++j) {
          dxh[j] = gy[j] * G[j];
          m1 += dxh[j];
          m2 += dxh[j] * xh[j];
          if (gg) (*gg)[j] += gy[j] * xh[j];
          if (gb) (*gb)[j] += gy[j];
        }
        m1 /= c;
        m2 /= c;
        if (ga)
          for (int j = 0; j < c; ++j)
            (*ga)[static_cast<std::size_t>(i2) * c + j] += rstd * (dxh[j] - m1 - xh[j] * m2);
      }
      break;
    }
    case Op::Concat: {
      const int r = n.value.rows(), c = n.value.cols();
      int off = 0;
      for (int id : n.inputs) {
        const int w = nodes_[id].value.cols();
        if (auto* ga = grad_of(id))
          for (int i2 = 0; i2 < r; ++i2)
            for (int j = 0; j < w; ++j)
              (*ga)[static_cast<std::size_t>(i2) * w + j] += g[static_cast<std::size_t>(i2) * c + off + j];
        off += w;
      }
      break;
    }
    case Op::SliceCols: {
      auto* ga = grad_of(n.inputs[0]);
      if (!ga) break;
      const int w = n.value.cols(), ac = in(0).cols();
      for (int i2 = 0; i2 < n.value.rows(); ++i2)
        for (int j = 0; j < w; ++j)
          (*ga)[static_cast<std::size_t>(i2) * ac + n.p0 + j] += g[static_cast<std::size_t>(i2) * w + j];
      break;
    }
    case Op::SliceReshape: {
      if (auto* ga = grad_of(n.inputs[0]))
        for (std::size_t j = 0; j < g.size(); ++j) (*ga)[n.p0 + j] += g[j];
      break;
    }
    case Op::GatherRows: {
      auto* ga = grad_of(n.inputs[0]);
      if (!ga) break;
      const int c = n.value.cols();
      for (std::size_t r = 0; r < n.iaux.size(); ++r)
        for (int j = 0; j < c; ++j)
          (*ga)[static_cast<std::size_t>(n.iaux[r]) * c + j] += g[r * c + j];
      break;
    }
    case Op::Pick: {
      auto* ga = grad_of(n.inputs[0]);
      if (!ga) break;
      const int c = in(0).cols();
      for (std::size_t r = 0; r < n.iaux.size(); ++r) (*ga)[r * c + n.iaux[r]] += g[r];
      break;
    }
    case Op::Sum: {
      if (auto* ga = grad_of(n.inputs[0]))
        for (auto& x : *ga) x += g[0];
      break;
    }
    case Op::DotConst: {
      if (auto* ga = grad_of(n.inputs[0]))
        for (std::size_t j = 0; j < ga->size(); ++j) (*ga)[j] += g[0] * n.taux[j];
      break;
    }
    case Op::MeanRows: {
      auto* ga = grad_of(n.inputs[0]);
      if (!ga) break;
      const int r = in(0).rows(), c = in(0).cols();
      for (int i2 = 0; i2 < r; ++i2)
        for (int j = 0; j < c; ++j) (*ga)[static_cast<std::size_t>(i2) * c + j] += g[j] / T(r);
      break;
    }
    case Op::Attention: {
      const auto& Q = in(0);
      const auto& K = in(1);
      const auto& V = in(2);
      const int heads = n.p0, nq = Q.rows(), nk = K.rows(), d = Q.cols(), hd = d / heads;
      const T sc = T(1) / std::sqrt(static_cast<T>(hd));
      auto* gq = grad_of(n.inputs[0]);
      auto* gk = grad_of(n.inputs[1]);
      auto* gv = grad_of(n.inputs[2]);
      std::vector<T> ds(nk);
      for (int h = 0; h < heads; ++h) {
        const int off = h * hd;
        for (int i2 = 0; i2 < nq; ++i2) {
          const T* p = &n.taux[(static_cast<std::size_t>(h) * nq + i2) * nk];
          const T* go = &g[static_cast<std::size_t>(i2) * d + off];
          T dot = T(0);
          for (int j = 0; j < nk; ++j) {
            if (p[j] == T(0)) {
              ds[j] = T(0);
              continue;
            }
            const T* vj = &V(j, off);
            T dp = T(0);
            for (int e = 0; e < hd; ++e) dp += go[e] * vj[e];
            ds[j] = dp;
            dot += p[j] * dp;
            if (gv)
              for (int e = 0; e < hd; ++e) (*gv)[static_cast<std::size_t>(j) * d + off + e] += p[j] * go[e];
          }
          for (int j = 0; j < nk; ++j) ds[j] = p[j] * (ds[j] - dot) * sc;
          if (gq) {
            T* gqi = &(*gq)[static_cast<std::size_t>(i2) * d + off];
            for (int j = 0; j < nk; ++j) {
              if (ds[j] == T(0)) continue;
              const T* kj = &K(j, off);
              for (int e = 0; e < hd; ++e) gqi[e] += ds[j] * kj[e];
            }
          }
          if (gk) {
            const T* qi = &Q(i2, off);
            for (int j = 0; j < nk; ++j) {
              if (ds[j] == T(0)) continue;
              T* gkj = &(*gk)[static_cast<std::size_t>(j) * d + off];
              for (int e = 0; e < hd; ++e) gkj[e] += ds[j] * qi[e];
            }
          }
        }
      }
      break;
    }
  }
}

}  // namespace moco::tensor
