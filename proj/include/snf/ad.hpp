#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <unordered_map>
#include <vector>

#include "snf/tensor.hpp"

namespace snf::ad {

// Reverse-mode automatic differentiation over dense real tensors.
//
// Every operation eagerly computes its forward value and appends a node to
// an implicit expression graph (the tape). Backward passes emit their
// adjoint arithmetic as new graph nodes, so gradients are themselves
// differentiable values and reverse-over-reverse nesting works to any
// depth. Graphs are confined to one worker; values are immutable once
// built and may be read concurrently.

enum class Op : std::uint8_t {
  Leaf,
  Constant,
  Add,
  Sub,
  Mul,
  Div,
  Neg,
  Scale,   // x * attr
  Shift,   // x + attr
  Tanh,
  Softplus,
  Logistic,
  Exp,
  Log,
  Square,
  MatMulNT,  // A(p,q) * B(r,q)^T
  MatMulNN,  // A(p,q) * B(q,r)
  MatMulTN,  // A(p,q)^T * B(p,r)
  Dot,
  SumAll,
  RowSum,
  ColSum,
  BroadcastScalar,
  BroadcastRow,  // vector(d) -> (rows, d)
  BroadcastCol,  // vector(b) -> (b, cols)
  ConcatVec,
  ConcatCols,
  SliceVec,
  SliceCols,
  PadVec,
  PadCols,
  Reshape,
  Detach,
};

class Value;

struct Node {
  Tensor value;
  std::vector<Value> inputs;
  std::uint64_t id = 0;
  Op op = Op::Constant;
  bool requires_grad = false;
  double attr = 0.0;
  std::array<std::size_t, 2> iattr{0, 0};
};

// Shared, immutable handle into the expression graph.
class Value {
 public:
  Value() = default;

  static Value leaf(Tensor v);       // differentiable variable
  static Value constant(Tensor v);   // non-differentiable input
  static Value scalar(double x) { return constant(Tensor::scalar(x)); }

  bool defined() const { return static_cast<bool>(node_); }
  const Tensor& val() const { return node_->value; }
  bool requires_grad() const { return node_ && node_->requires_grad; }
  const Node* node() const { return node_.get(); }

  // Implementation hook; not part of the user-facing surface.
  static Value wrap(std::shared_ptr<const Node> n) {
    Value v;
    v.node_ = std::move(n);
    return v;
  }

 private:
  std::shared_ptr<const Node> node_;
};

// Elementwise (identical shapes except where noted).
Value add(const Value& a, const Value& b);
Value sub(const Value& a, const Value& b);
Value mul(const Value& a, const Value& b);
Value div(const Value& a, const Value& b);
Value neg(const Value& a);
Value scale(const Value& a, double c);
Value shift(const Value& a, double c);
Value tanh(const Value& a);
Value softplus(const Value& a);
Value logistic(const Value& a);
Value exp(const Value& a);
Value log(const Value& a);
Value square(const Value& a);

// Linear algebra.
Value matmul_nt(const Value& a, const Value& b);
Value matmul_nn(const Value& a, const Value& b);
Value matmul_tn(const Value& a, const Value& b);
Value dot(const Value& a, const Value& b);

// Reductions and broadcasts.
Value sum(const Value& a);
Value row_sum(const Value& a);
Value col_sum(const Value& a);
Value broadcast_scalar(const Value& a, int rank, std::size_t d0, std::size_t d1);
Value broadcast_row(const Value& a, std::size_t rows);
Value broadcast_col(const Value& a, std::size_t cols);

// Structure.
Value concat(const Value& a, const Value& b);
Value concat_cols(const Value& a, const Value& b);
Value slice(const Value& a, std::size_t i0, std::size_t i1);
Value slice_cols(const Value& a, std::size_t j0, std::size_t j1);
Value reshape(const Value& a, int rank, std::size_t d0, std::size_t d1);
Value detach(const Value& a);

// Adjoints of one backward sweep, queryable per leaf/input value.
class AdjointMap {
 public:
  // Adjoint of x, or a zero tensor of x's shape when y did not depend on x.
  Value of(const Value& x) const;
  bool contains(const Value& x) const { return adj_.count(x.node()) != 0; }

  std::unordered_map<const Node*, Value> adj_;
};

// Reverse sweep from y seeded with cotangent v (same shape as y). The
// returned adjoints are graph values and may be differentiated again.
AdjointMap backward(const Value& y, const Value& seed);

// v^T (df/dx): y = f(x) evaluated through the tape, then one reverse sweep.
Value vjp(const std::function<Value(const Value&)>& f, const Value& x, const Value& v);

// Gradient of a scalar-valued function: vjp with seed 1.
Value grad(const std::function<Value(const Value&)>& f, const Value& x);

}  // namespace snf::ad
