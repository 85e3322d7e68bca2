#pragma once

// Per-row kernel bodies shared by the serial and OpenMP translation units.
// Each body writes a disjoint slice of the output, and both variants call
// the same body in the same order per slice, which is what makes the
// parallel results bit-identical to the serial ones.

#include <algorithm>
#include <cstddef>

namespace etd::kernels::body {

inline void matmul_bias_row(const double* xrow, std::size_t k,
                            const double* w, std::size_t m,
                            const double* b, double* yrow) {
  if (b)
    std::copy(b, b + m, yrow);
  else
    std::fill(yrow, yrow + m, 0.0);
  for (std::size_t kk = 0; kk < k; ++kk) {
    const double xv = xrow[kk];
    const double* wrow = w + kk * m;
    for (std::size_t j = 0; j < m; ++j) yrow[j] += xv * wrow[j];
  }
}

inline void matmul_acc_row(const double* xrow, std::size_t k,
                           const double* w, std::size_t m, double* yrow) {
  for (std::size_t kk = 0; kk < k; ++kk) {
    const double xv = xrow[kk];
    const double* wrow = w + kk * m;
    for (std::size_t j = 0; j < m; ++j) yrow[j] += xv * wrow[j];
  }
}

inline void matmul_a_bt_row(const double* arow, std::size_t k,
                            const double* b, std::size_t m, double* yrow) {
  for (std::size_t j = 0; j < m; ++j) {
    const double* brow = b + j * k;
    double acc = 0.0;
    for (std::size_t kk = 0; kk < k; ++kk) acc += arow[kk] * brow[kk];
    yrow[j] = acc;
  }
}

// Accumulates one output row y[kk,:] += sum_i a[i,kk] * b[i,:].
inline void matmul_at_b_acc_row(const double* a, std::size_t n, std::size_t k,
                                const double* b, std::size_t m,
                                std::size_t kk, double* yrow) {
  for (std::size_t i = 0; i < n; ++i) {
    const double av = a[i * k + kk];
    if (av == 0.0) continue;
    const double* brow = b + i * m;
    for (std::size_t j = 0; j < m; ++j) yrow[j] += av * brow[j];
  }
}

inline void conv2d_forward_sample(const double* x, std::size_t h, std::size_t w,
                                  std::size_t ci, const double* kern,
                                  std::size_t co, const double* bias, double* y) {
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      double* yo = y + (r * w + c) * co;
      if (bias)
        std::copy(bias, bias + co, yo);
      else
        std::fill(yo, yo + co, 0.0);
      for (int dr = 0; dr < 3; ++dr) {
        const int rr = static_cast<int>(r) + dr - 1;
        if (rr < 0 || rr >= static_cast<int>(h)) continue;
        for (int dc = 0; dc < 3; ++dc) {
          const int cc = static_cast<int>(c) + dc - 1;
          if (cc < 0 || cc >= static_cast<int>(w)) continue;
          const double* xp = x + (static_cast<std::size_t>(rr) * w +
                                  static_cast<std::size_t>(cc)) * ci;
          const double* kp = kern + (static_cast<std::size_t>(dr) * 3 +
                                     static_cast<std::size_t>(dc)) * ci * co;
          for (std::size_t ch = 0; ch < ci; ++ch) {
            const double xv = xp[ch];
            if (xv == 0.0) continue;
            const double* krow = kp + ch * co;
            for (std::size_t f = 0; f < co; ++f) yo[f] += xv * krow[f];
          }
        }
      }
    }
  }
}

inline void conv2d_backward_input_sample(const double* dy, std::size_t h, std::size_t w,
                                         std::size_t co, const double* kern,
                                         std::size_t ci, double* dx) {
  // Forward reads x[r+dr-1, c+dc-1], so x position (a,b) feeds output
  // (a-dr+1, b-dc+1) for each kernel tap.
  for (std::size_t a = 0; a < h; ++a) {
    for (std::size_t b = 0; b < w; ++b) {
      double* dxp = dx + (a * w + b) * ci;
      std::fill(dxp, dxp + ci, 0.0);
      for (int dr = 0; dr < 3; ++dr) {
        const int r = static_cast<int>(a) - dr + 1;
        if (r < 0 || r >= static_cast<int>(h)) continue;
        for (int dc = 0; dc < 3; ++dc) {
          const int c = static_cast<int>(b) - dc + 1;
          if (c < 0 || c >= static_cast<int>(w)) continue;
          const double* dyp = dy + (static_cast<std::size_t>(r) * w +
                                    static_cast<std::size_t>(c)) * co;
          const double* kp = kern + (static_cast<std::size_t>(dr) * 3 +
                                     static_cast<std::size_t>(dc)) * ci * co;
          for (std::size_t ch = 0; ch < ci; ++ch) {
            const double* krow = kp + ch * co;
            double acc = 0.0;
            for (std::size_t f = 0; f < co; ++f) acc += dyp[f] * krow[f];
            dxp[ch] += acc;
          }
        }
      }
    }
  }
}

// Accumulates one dkern row [dr,dc,ch,:] across the whole batch.
inline void conv2d_backward_params_row(const double* x, std::size_t n,
                                       std::size_t h, std::size_t w, std::size_t ci,
                                       const double* dy, std::size_t co,
                                       int dr, int dc, std::size_t ch, double* out) {
  for (std::size_t i = 0; i < n; ++i) {
    const double* xi = x + i * h * w * ci;
    const double* dyi = dy + i * h * w * co;
    for (std::size_t r = 0; r < h; ++r) {
      const int rr = static_cast<int>(r) + dr - 1;
      if (rr < 0 || rr >= static_cast<int>(h)) continue;
      for (std::size_t c = 0; c < w; ++c) {
        const int cc = static_cast<int>(c) + dc - 1;
        if (cc < 0 || cc >= static_cast<int>(w)) continue;
        const double xv = xi[(static_cast<std::size_t>(rr) * w +
                              static_cast<std::size_t>(cc)) * ci + ch];
        if (xv == 0.0) continue;
        const double* dyp = dyi + (r * w + c) * co;
        for (std::size_t f = 0; f < co; ++f) out[f] += xv * dyp[f];
      }
    }
  }
}

}  // namespace etd::kernels::body
