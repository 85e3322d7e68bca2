#pragma once

#include <cstddef>

namespace etd::kernels {

// Row-major dense kernels. The functions in `serial` are the reference
// implementations; the unqualified ones run the same per-element arithmetic
// with the outer loop split across OpenMP threads, so outputs are
// bit-identical to the serial results regardless of thread count.

/// y[n,m] = x[n,k] * w[k,m] + b[m]; pass b == nullptr for zero bias.
void matmul_bias(const double* x, std::size_t n, std::size_t k,
                 const double* w, std::size_t m, const double* b, double* y);

/// y[n,m] += x[n,k] * w[k,m]
void matmul_acc(const double* x, std::size_t n, std::size_t k,
                const double* w, std::size_t m, double* y);

/// y[n,m] = a[n,k] * b[m,k]^T
void matmul_a_bt(const double* a, std::size_t n, std::size_t k,
                 const double* b, std::size_t m, double* y);

/// y[k,m] += a[n,k]^T * b[n,m]
void matmul_at_b_acc(const double* a, std::size_t n, std::size_t k,
                     const double* b, std::size_t m, double* y);

// 3x3 convolution with same padding and stride 1. Layouts: x is NHWC,
// kernel is [3,3,ci,co], y is NHWC with co channels.
void conv2d_forward(const double* x, std::size_t n, std::size_t h, std::size_t w,
                    std::size_t ci, const double* kern, std::size_t co,
                    const double* bias, double* y);
void conv2d_backward_input(const double* dy, std::size_t n, std::size_t h, std::size_t w,
                           std::size_t co, const double* kern, std::size_t ci, double* dx);
void conv2d_backward_params(const double* x, std::size_t n, std::size_t h, std::size_t w,
                            std::size_t ci, const double* dy, std::size_t co,
                            double* dkern, double* dbias);

namespace serial {

void matmul_bias(const double* x, std::size_t n, std::size_t k,
                 const double* w, std::size_t m, const double* b, double* y);
void matmul_acc(const double* x, std::size_t n, std::size_t k,
                const double* w, std::size_t m, double* y);
void matmul_a_bt(const double* a, std::size_t n, std::size_t k,
                 const double* b, std::size_t m, double* y);
void matmul_at_b_acc(const double* a, std::size_t n, std::size_t k,
                     const double* b, std::size_t m, double* y);
void conv2d_forward(const double* x, std::size_t n, std::size_t h, std::size_t w,
                    std::size_t ci, const double* kern, std::size_t co,
                    const double* bias, double* y);
void conv2d_backward_input(const double* dy, std::size_t n, std::size_t h, std::size_t w,
                           std::size_t co, const double* kern, std::size_t ci, double* dx);
void conv2d_backward_params(const double* x, std::size_t n, std::size_t h, std::size_t w,
                            std::size_t ci, const double* dy, std::size_t co,
                            double* dkern, double* dbias);

}  // namespace serial

}  // namespace etd::kernels
