#include "snf/ad.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>

namespace snf::ad {

namespace {

std::uint64_t next_id() {
  // Ids only need to be monotone within one worker's graph.
  thread_local std::uint64_t counter = 0;
  return ++counter;
}

Value make_node(Op op, Tensor value, std::vector<Value> inputs, double attr = 0.0,
                std::array<std::size_t, 2> iattr = {0, 0}) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->inputs = std::move(inputs);
  n->op = op;
  n->attr = attr;
  n->iattr = iattr;
  n->id = next_id();
  n->requires_grad = false;
  if (op == Op::Leaf) {
    n->requires_grad = true;
  } else if (op != Op::Detach && op != Op::Constant) {
    for (const auto& in : n->inputs)
      if (in.requires_grad()) n->requires_grad = true;
  }
  return Value::wrap(std::move(n));
}

void check_same_shape(const Value& a, const Value& b, const char* what) {
  if (!a.val().same_shape(b.val()))
    throw std::invalid_argument(std::string("ad: shape mismatch in ") + what);
}

template <typename F>
Value elementwise_unary(Op op, const Value& a, F fn, double attr = 0.0) {
  Tensor out = a.val();
  for (auto& x : out.v) x = fn(x);
  return make_node(op, std::move(out), {a}, attr);
}

template <typename F>
Value elementwise_binary(Op op, const Value& a, const Value& b, F fn, const char* what) {
  check_same_shape(a, b, what);
  Tensor out = a.val();
  const auto& bv = b.val().v;
  for (std::size_t i = 0; i < out.v.size(); ++i) out.v[i] = fn(out.v[i], bv[i]);
  return make_node(op, std::move(out), {a, b});
}

}  // namespace

Value Value::leaf(Tensor v) { return make_node(Op::Leaf, std::move(v), {}); }
Value Value::constant(Tensor v) { return make_node(Op::Constant, std::move(v), {}); }

Value add(const Value& a, const Value& b) {
  return elementwise_binary(Op::Add, a, b, [](double x, double y) { return x + y; }, "add");
}
Value sub(const Value& a, const Value& b) {
  return elementwise_binary(Op::Sub, a, b, [](double x, double y) { return x - y; }, "sub");
}
Value mul(const Value& a, const Value& b) {
  return elementwise_binary(Op::Mul, a, b, [](double x, double y) { return x * y; }, "mul");
}
Value div(const Value& a, const Value& b) {
  return elementwise_binary(Op::Div, a, b, [](double x, double y) { return x / y; }, "div");
}
Value neg(const Value& a) {
  return elementwise_unary(Op::Neg, a, [](double x) { return -x; });
}
Value scale(const Value& a, double c) {
  return elementwise_unary(Op::Scale, a, [c](double x) { return c * x; }, c);
}
Value shift(const Value& a, double c) {
  return elementwise_unary(Op::Shift, a, [c](double x) { return x + c; }, c);
}
Value tanh(const Value& a) {
  return elementwise_unary(Op::Tanh, a, [](double x) { return std::tanh(x); });
}
Value softplus(const Value& a) {
  // log(1 + e^x) with the usual large-|x| guard
  return elementwise_unary(Op::Softplus, a, [](double x) {
    if (x > 35.0) return x;
    if (x < -35.0) return std::exp(x);
    return std::log1p(std::exp(x));
  });
}
Value logistic(const Value& a) {
  return elementwise_unary(Op::Logistic, a, [](double x) { return 1.0 / (1.0 + std::exp(-x)); });
}
Value exp(const Value& a) {
  return elementwise_unary(Op::Exp, a, [](double x) { return std::exp(x); });
}
Value log(const Value& a) {
  return elementwise_unary(Op::Log, a, [](double x) { return std::log(x); });
}
Value square(const Value& a) {
  return elementwise_unary(Op::Square, a, [](double x) { return x * x; });
}

Value matmul_nt(const Value& a, const Value& b) {
  const Tensor& A = a.val();
  const Tensor& B = b.val();
  if (A.rank != 2 || B.rank != 2 || A.d1 != B.d1)
    throw std::invalid_argument("ad: matmul_nt shape mismatch");
  Tensor out = Tensor::matrix(A.d0, B.d0);
  kernels::mm_nt(A.v.data(), B.v.data(), out.v.data(), A.d0, A.d1, B.d0);
  return make_node(Op::MatMulNT, std::move(out), {a, b});
}
Value matmul_nn(const Value& a, const Value& b) {
  const Tensor& A = a.val();
  const Tensor& B = b.val();
  if (A.rank != 2 || B.rank != 2 || A.d1 != B.d0)
    throw std::invalid_argument("ad: matmul_nn shape mismatch");
  Tensor out = Tensor::matrix(A.d0, B.d1);
  kernels::mm_nn(A.v.data(), B.v.data(), out.v.data(), A.d0, A.d1, B.d1);
  return make_node(Op::MatMulNN, std::move(out), {a, b});
}
Value matmul_tn(const Value& a, const Value& b) {
  const Tensor& A = a.val();
  const Tensor& B = b.val();
  if (A.rank != 2 || B.rank != 2 || A.d0 != B.d0)
    throw std::invalid_argument("ad: matmul_tn shape mismatch");
  Tensor out = Tensor::matrix(A.d1, B.d1);
  kernels::mm_tn(A.v.data(), B.v.data(), out.v.data(), A.d0, A.d1, B.d1);
  return make_node(Op::MatMulTN, std::move(out), {a, b});
}

Value dot(const Value& a, const Value& b) {
  check_same_shape(a, b, "dot");
  if (a.val().rank != 1) throw std::invalid_argument("ad: dot expects vectors");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.val().size(); ++i) acc += a.val().v[i] * b.val().v[i];
  return make_node(Op::Dot, Tensor::scalar(acc), {a, b});
}

Value sum(const Value& a) {
  double acc = 0.0;
  for (double x : a.val().v) acc += x;
  return make_node(Op::SumAll, Tensor::scalar(acc), {a});
}

Value row_sum(const Value& a) {
  const Tensor& A = a.val();
  if (A.rank != 2) throw std::invalid_argument("ad: row_sum expects a matrix");
  Tensor out = Tensor::vector(A.d0);
  for (std::size_t i = 0; i < A.d0; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < A.d1; ++j) acc += A(i, j);
    out.v[i] = acc;
  }
  return make_node(Op::RowSum, std::move(out), {a});
}

Value col_sum(const Value& a) {
  const Tensor& A = a.val();
  if (A.rank != 2) throw std::invalid_argument("ad: col_sum expects a matrix");
  Tensor out = Tensor::vector(A.d1);
  for (std::size_t i = 0; i < A.d0; ++i)
    for (std::size_t j = 0; j < A.d1; ++j) out.v[j] += A(i, j);
  return make_node(Op::ColSum, std::move(out), {a});
}

Value broadcast_scalar(const Value& a, int rank, std::size_t d0, std::size_t d1) {
  if (a.val().rank != 0) throw std::invalid_argument("ad: broadcast_scalar expects a scalar");
  Tensor out;
  out.rank = rank;
  out.d0 = d0;
  out.d1 = d1;
  out.v.assign(rank == 0 ? 1 : (rank == 1 ? d0 : d0 * d1), a.val().v[0]);
  return make_node(Op::BroadcastScalar, std::move(out), {a});
}

Value broadcast_row(const Value& a, std::size_t rows) {
  const Tensor& A = a.val();
  if (A.rank != 1) throw std::invalid_argument("ad: broadcast_row expects a vector");
  Tensor out = Tensor::matrix(rows, A.d0);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < A.d0; ++j) out(i, j) = A.v[j];
  return make_node(Op::BroadcastRow, std::move(out), {a});
}

Value broadcast_col(const Value& a, std::size_t cols) {
  const Tensor& A = a.val();
  if (A.rank != 1) throw std::invalid_argument("ad: broadcast_col expects a vector");
  Tensor out = Tensor::matrix(A.d0, cols);
  for (std::size_t i = 0; i < A.d0; ++i)
    for (std::size_t j = 0; j < cols; ++j) out(i, j) = A.v[i];
  return make_node(Op::BroadcastCol, std::move(out), {a});
}

Value concat(const Value& a, const Value& b) {
  const Tensor& A = a.val();
  const Tensor& B = b.val();
  if (A.rank != 1 || B.rank != 1) throw std::invalid_argument("ad: concat expects vectors");
  Tensor out = Tensor::vector(A.d0 + B.d0);
  std::copy(A.v.begin(), A.v.end(), out.v.begin());
  std::copy(B.v.begin(), B.v.end(), out.v.begin() + static_cast<std::ptrdiff_t>(A.d0));
  return make_node(Op::ConcatVec, std::move(out), {a, b}, 0.0, {A.d0, B.d0});
}

Value concat_cols(const Value& a, const Value& b) {
  const Tensor& A = a.val();
  const Tensor& B = b.val();
  if (A.rank != 2 || B.rank != 2 || A.d0 != B.d0)
    throw std::invalid_argument("ad: concat_cols expects matrices with equal rows");
  Tensor out = Tensor::matrix(A.d0, A.d1 + B.d1);
  for (std::size_t i = 0; i < A.d0; ++i) {
    for (std::size_t j = 0; j < A.d1; ++j) out(i, j) = A(i, j);
    for (std::size_t j = 0; j < B.d1; ++j) out(i, A.d1 + j) = B(i, j);
  }
  return make_node(Op::ConcatCols, std::move(out), {a, b}, 0.0, {A.d1, B.d1});
}

Value slice(const Value& a, std::size_t i0, std::size_t i1) {
  const Tensor& A = a.val();
  if (A.rank != 1 || i0 > i1 || i1 > A.d0) throw std::invalid_argument("ad: bad vector slice");
  Tensor out = Tensor::vector(i1 - i0);
  std::copy(A.v.begin() + static_cast<std::ptrdiff_t>(i0),
            A.v.begin() + static_cast<std::ptrdiff_t>(i1), out.v.begin());
  return make_node(Op::SliceVec, std::move(out), {a}, 0.0, {i0, A.d0});
}

Value slice_cols(const Value& a, std::size_t j0, std::size_t j1) {
  const Tensor& A = a.val();
  if (A.rank != 2 || j0 > j1 || j1 > A.d1) throw std::invalid_argument("ad: bad column slice");
  Tensor out = Tensor::matrix(A.d0, j1 - j0);
  for (std::size_t i = 0; i < A.d0; ++i)
    for (std::size_t j = j0; j < j1; ++j) out(i, j - j0) = A(i, j);
  return make_node(Op::SliceCols, std::move(out), {a}, 0.0, {j0, A.d1});
}

namespace {

// Zero-embed a vector back into length `len` at offset `at`.
Value pad(const Value& a, std::size_t len, std::size_t at) {
  const Tensor& A = a.val();
  Tensor out = Tensor::vector(len);
  for (std::size_t i = 0; i < A.d0; ++i) out.v[at + i] = A.v[i];
  return make_node(Op::PadVec, std::move(out), {a}, 0.0, {at, len});
}

Value pad_cols(const Value& a, std::size_t cols, std::size_t at) {
  const Tensor& A = a.val();
  Tensor out = Tensor::matrix(A.d0, cols);
  for (std::size_t i = 0; i < A.d0; ++i)
    for (std::size_t j = 0; j < A.d1; ++j) out(i, at + j) = A(i, j);
  return make_node(Op::PadCols, std::move(out), {a}, 0.0, {at, cols});
}

}  // namespace

Value reshape(const Value& a, int rank, std::size_t d0, std::size_t d1) {
  const Tensor& A = a.val();
  const std::size_t want = rank == 0 ? 1 : (rank == 1 ? d0 : d0 * d1);
  if (want != A.size()) throw std::invalid_argument("ad: reshape size mismatch");
  Tensor out = A;
  out.rank = rank;
  out.d0 = rank == 0 ? 1 : d0;
  out.d1 = rank == 2 ? d1 : 1;
  return make_node(Op::Reshape, std::move(out), {a});
}

Value detach(const Value& a) { return make_node(Op::Detach, a.val(), {a}); }

namespace {

// Per-op input adjoints. `y` is the node being processed (so rules may use
// its forward value, e.g. tanh'), `a` its output adjoint. Rules are built
// from tape ops so that adjoints stay differentiable.
void accumulate(std::unordered_map<const Node*, Value>& adj, const Value& x, const Value& contrib) {
  if (!x.requires_grad()) return;
  auto it = adj.find(x.node());
  if (it == adj.end())
    adj.emplace(x.node(), contrib);
  else
    it->second = add(it->second, contrib);
}

void backprop_node(const Value& y, const Value& a, std::unordered_map<const Node*, Value>& adj) {
  const Node* n = y.node();
  const auto& in = n->inputs;
  switch (n->op) {
    case Op::Leaf:
    case Op::Constant:
    case Op::Detach:
      return;
    case Op::Add:
      accumulate(adj, in[0], a);
      accumulate(adj, in[1], a);
      return;
    case Op::Sub:
      accumulate(adj, in[0], a);
      accumulate(adj, in[1], neg(a));
      return;
    case Op::Mul:
      accumulate(adj, in[0], mul(a, in[1]));
      accumulate(adj, in[1], mul(a, in[0]));
      return;
    case Op::Div:
      accumulate(adj, in[0], div(a, in[1]));
      accumulate(adj, in[1], neg(mul(a, div(in[0], square(in[1])))));
      return;
    case Op::Neg:
      accumulate(adj, in[0], neg(a));
      return;
    case Op::Scale:
      accumulate(adj, in[0], scale(a, n->attr));
      return;
    case Op::Shift:
      accumulate(adj, in[0], a);
      return;
    case Op::Tanh:
      // d tanh = 1 - tanh^2
      accumulate(adj, in[0], mul(a, shift(neg(square(y)), 1.0)));
      return;
    case Op::Softplus:
      accumulate(adj, in[0], mul(a, logistic(in[0])));
      return;
    case Op::Logistic:
      // d logistic = y (1 - y)
      accumulate(adj, in[0], mul(a, mul(y, shift(neg(y), 1.0))));
      return;
    case Op::Exp:
      accumulate(adj, in[0], mul(a, y));
      return;
    case Op::Log:
      accumulate(adj, in[0], div(a, in[0]));
      return;
    case Op::Square:
      accumulate(adj, in[0], scale(mul(a, in[0]), 2.0));
      return;
    case Op::MatMulNT:  // y = A B^T
      accumulate(adj, in[0], matmul_nn(a, in[1]));
      accumulate(adj, in[1], matmul_tn(a, in[0]));
      return;
    case Op::MatMulNN:  // y = A B
      accumulate(adj, in[0], matmul_nt(a, in[1]));
      accumulate(adj, in[1], matmul_tn(in[0], a));
      return;
    case Op::MatMulTN:  // y = A^T B
      accumulate(adj, in[0], matmul_nt(in[1], a));
      accumulate(adj, in[1], matmul_nn(in[0], a));
      return;
    case Op::Dot:
      accumulate(adj, in[0], mul(broadcast_scalar(a, 1, in[1].val().d0, 1), in[1]));
      accumulate(adj, in[1], mul(broadcast_scalar(a, 1, in[0].val().d0, 1), in[0]));
      return;
    case Op::SumAll: {
      const Tensor& t = in[0].val();
      accumulate(adj, in[0], broadcast_scalar(a, t.rank, t.d0, t.d1));
      return;
    }
    case Op::RowSum:
      accumulate(adj, in[0], broadcast_col(a, in[0].val().d1));
      return;
    case Op::ColSum:
      accumulate(adj, in[0], broadcast_row(a, in[0].val().d0));
      return;
    case Op::BroadcastScalar:
      accumulate(adj, in[0], sum(a));
      return;
    case Op::BroadcastRow:
      accumulate(adj, in[0], col_sum(a));
      return;
    case Op::BroadcastCol:
      accumulate(adj, in[0], row_sum(a));
      return;
    case Op::ConcatVec:
      accumulate(adj, in[0], slice(a, 0, n->iattr[0]));
      accumulate(adj, in[1], slice(a, n->iattr[0], n->iattr[0] + n->iattr[1]));
      return;
    case Op::ConcatCols:
      accumulate(adj, in[0], slice_cols(a, 0, n->iattr[0]));
      accumulate(adj, in[1], slice_cols(a, n->iattr[0], n->iattr[0] + n->iattr[1]));
      return;
    case Op::SliceVec:
      accumulate(adj, in[0], pad(a, n->iattr[1], n->iattr[0]));
      return;
    case Op::SliceCols:
      accumulate(adj, in[0], pad_cols(a, n->iattr[1], n->iattr[0]));
      return;
    case Op::PadVec:
      accumulate(adj, in[0], slice(a, n->iattr[0], n->iattr[0] + in[0].val().d0));
      return;
    case Op::PadCols:
      accumulate(adj, in[0], slice_cols(a, n->iattr[0], n->iattr[0] + in[0].val().d1));
      return;
    case Op::Reshape: {
      const Tensor& t = in[0].val();
      accumulate(adj, in[0], reshape(a, t.rank, t.d0, t.d1));
      return;
    }
  }
  throw std::logic_error("ad: unhandled op in backward");
}

}  // namespace

Value AdjointMap::of(const Value& x) const {
  auto it = adj_.find(x.node());
  if (it != adj_.end()) return it->second;
  Tensor z = x.val();
  std::fill(z.v.begin(), z.v.end(), 0.0);
  return Value::constant(std::move(z));
}

AdjointMap backward(const Value& y, const Value& seed) {
  if (!y.defined()) throw std::invalid_argument("ad: backward on empty value");
  if (!seed.val().same_shape(y.val()))
    throw std::invalid_argument("ad: seed shape must match output shape");

  // Reachable differentiable subgraph, then reverse topological order. Node
  // ids increase monotonically at construction, so sorting by id suffices.
  std::vector<Value> order;
  std::unordered_map<const Node*, bool> seen;
  std::vector<Value> stack;
  if (y.requires_grad()) stack.push_back(y);
  while (!stack.empty()) {
    Value v = stack.back();
    stack.pop_back();
    if (seen.count(v.node())) continue;
    seen.emplace(v.node(), true);
    order.push_back(v);
    for (const auto& in : v.node()->inputs)
      if (in.requires_grad() && !seen.count(in.node())) stack.push_back(in);
  }
  std::sort(order.begin(), order.end(),
            [](const Value& a, const Value& b) { return a.node()->id > b.node()->id; });

  AdjointMap result;
  if (order.empty()) return result;
  result.adj_.emplace(y.node(), seed);
  for (const auto& v : order) {
    auto it = result.adj_.find(v.node());
    if (it == result.adj_.end()) continue;
    backprop_node(v, it->second, result.adj_);
  }
  return result;
}

Value vjp(const std::function<Value(const Value&)>& f, const Value& x, const Value& v) {
  Value y = f(x);
  if (!v.val().same_shape(y.val()))
    throw std::invalid_argument("ad: vjp cotangent shape must match f(x)");
  return backward(y, v).of(x);
}

Value grad(const std::function<Value(const Value&)>& f, const Value& x) {
  Value y = f(x);
  if (y.val().rank != 0) throw std::invalid_argument("ad: grad expects a scalar-valued function");
  return backward(y, Value::scalar(1.0)).of(x);
}

}  // namespace snf::ad
