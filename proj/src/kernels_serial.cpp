#include "etd/kernels.hpp"

#include "kernels_body.hpp"

namespace etd::kernels::serial {

void matmul_bias(const double* x, std::size_t n, std::size_t k,
                 const double* w, std::size_t m, const double* b, double* y) {
  for (std::size_t i = 0; i < n; ++i)
    body::matmul_bias_row(x + i * k, k, w, m, b, y + i * m);
}

void matmul_acc(const double* x, std::size_t n, std::size_t k,
                const double* w, std::size_t m, double* y) {
  for (std::size_t i = 0; i < n; ++i)
    body::matmul_acc_row(x + i * k, k, w, m, y + i * m);
}

void matmul_a_bt(const double* a, std::size_t n, std::size_t k,
                 const double* b, std::size_t m, double* y) {
  for (std::size_t i = 0; i < n; ++i)
    body::matmul_a_bt_row(a + i * k, k, b, m, y + i * m);
}

void matmul_at_b_acc(const double* a, std::size_t n, std::size_t k,
                     const double* b, std::size_t m, double* y) {
  for (std::size_t kk = 0; kk < k; ++kk)
    body::matmul_at_b_acc_row(a, n, k, b, m, kk, y + kk * m);
}

void conv2d_forward(const double* x, std::size_t n, std::size_t h, std::size_t w,
                    std::size_t ci, const double* kern, std::size_t co,
                    const double* bias, double* y) {
  for (std::size_t i = 0; i < n; ++i)
    body::conv2d_forward_sample(x + i * h * w * ci, h, w, ci, kern, co, bias,
                                y + i * h * w * co);
}

void conv2d_backward_input(const double* dy, std::size_t n, std::size_t h, std::size_t w,
                           std::size_t co, const double* kern, std::size_t ci, double* dx) {
  for (std::size_t i = 0; i < n; ++i)
    body::conv2d_backward_input_sample(dy + i * h * w * co, h, w, co, kern, ci,
                                       dx + i * h * w * ci);
}

void conv2d_backward_params(const double* x, std::size_t n, std::size_t h, std::size_t w,
                            std::size_t ci, const double* dy, std::size_t co,
                            double* dkern, double* dbias) {
  for (std::size_t tap = 0; tap < 9 * ci; ++tap) {
    const int dr = static_cast<int>(tap / (3 * ci));
    const int dc = static_cast<int>((tap / ci) % 3);
    const std::size_t ch = tap % ci;
    body::conv2d_backward_params_row(x, n, h, w, ci, dy, co, dr, dc, ch,
                                     dkern + tap * co);
  }
  if (dbias) {
    for (std::size_t i = 0; i < n * h * w; ++i) {
      const double* dyp = dy + i * co;
      for (std::size_t f = 0; f < co; ++f) dbias[f] += dyp[f];
    }
  }
}

}  // namespace etd::kernels::serial
