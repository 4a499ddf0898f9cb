#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace snf {

// Dense 64-bit real tensor of rank 0, 1 or 2 (row-major).
// Rank 0 holds a single entry; rank 1 a vector of length d0; rank 2 a
// d0 x d1 matrix. Batched quantities put the batch in d0.
struct Tensor {
  int rank = 0;
  std::size_t d0 = 1;
  std::size_t d1 = 1;
  std::vector<double> v;

  Tensor() : v(1, 0.0) {}

  static Tensor scalar(double x) {
    Tensor t;
    t.v[0] = x;
    return t;
  }
  static Tensor vector(std::size_t n, double fill = 0.0) {
    Tensor t;
    t.rank = 1;
    t.d0 = n;
    t.d1 = 1;
    t.v.assign(n, fill);
    return t;
  }
  static Tensor vector(std::vector<double> data) {
    Tensor t;
    t.rank = 1;
    t.d0 = data.size();
    t.d1 = 1;
    t.v = std::move(data);
    return t;
  }
  static Tensor matrix(std::size_t rows, std::size_t cols, double fill = 0.0) {
    Tensor t;
    t.rank = 2;
    t.d0 = rows;
    t.d1 = cols;
    t.v.assign(rows * cols, fill);
    return t;
  }
  static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<double> data) {
    if (data.size() != rows * cols) throw std::invalid_argument("tensor: data size != rows*cols");
    Tensor t;
    t.rank = 2;
    t.d0 = rows;
    t.d1 = cols;
    t.v = std::move(data);
    return t;
  }

  std::size_t size() const { return v.size(); }
  bool same_shape(const Tensor& o) const { return rank == o.rank && d0 == o.d0 && d1 == o.d1; }

  double& operator()(std::size_t i) { return v[i]; }
  double operator()(std::size_t i) const { return v[i]; }
  double& operator()(std::size_t i, std::size_t j) { return v[i * d1 + j]; }
  double operator()(std::size_t i, std::size_t j) const { return v[i * d1 + j]; }
};

namespace kernels {

// C(p x r) = A(p x q) * B(r x q)^T ; rows of A against rows of B.
void mm_nt(const double* a, const double* b, double* c, std::size_t p, std::size_t q, std::size_t r);
// C(p x r) = A(p x q) * B(q x r).
void mm_nn(const double* a, const double* b, double* c, std::size_t p, std::size_t q, std::size_t r);
// C(q x r) = A(p x q)^T * B(p x r).
void mm_tn(const double* a, const double* b, double* c, std::size_t p, std::size_t q, std::size_t r);

}  // namespace kernels

}  // namespace snf
