#include "snf/tensor.hpp"

namespace snf::kernels {

void mm_nt(const double* a, const double* b, double* c, std::size_t p, std::size_t q, std::size_t r) {
  for (std::size_t i = 0; i < p; ++i) {
    const double* ai = a + i * q;
    double* ci = c + i * r;
    for (std::size_t j = 0; j < r; ++j) {
      const double* bj = b + j * q;
      double acc = 0.0;
      for (std::size_t k = 0; k < q; ++k) acc += ai[k] * bj[k];
      ci[j] = acc;
    }
  }
}

void mm_nn(const double* a, const double* b, double* c, std::size_t p, std::size_t q, std::size_t r) {
  for (std::size_t i = 0; i < p; ++i) {
    double* ci = c + i * r;
    for (std::size_t j = 0; j < r; ++j) ci[j] = 0.0;
    const double* ai = a + i * q;
    for (std::size_t k = 0; k < q; ++k) {
      const double aik = ai[k];
      const double* bk = b + k * r;
      for (std::size_t j = 0; j < r; ++j) ci[j] += aik * bk[j];
    }
  }
}

void mm_tn(const double* a, const double* b, double* c, std::size_t p, std::size_t q, std::size_t r) {
  for (std::size_t i = 0; i < q * r; ++i) c[i] = 0.0;
  for (std::size_t i = 0; i < p; ++i) {
    const double* ai = a + i * q;
    const double* bi = b + i * r;
    for (std::size_t k = 0; k < q; ++k) {
      const double aik = ai[k];
      double* ck = c + k * r;
      for (std::size_t j = 0; j < r; ++j) ck[j] += aik * bi[j];
    }
  }
}

}  // namespace snf::kernels
