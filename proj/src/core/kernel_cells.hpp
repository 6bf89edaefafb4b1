#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "fastrl/core/kernels.hpp"

// Per-output-element bodies shared between the serial and the OpenMP
// translation units. Each cell accumulates in a fixed order, which is what
// makes the two variants bit-identical (compiled with -ffp-contract=off).
// Boundary handling is hoisted into index ranges so the inner loops stay
// branch-free; skipped terms are exactly the out-of-range ones.

namespace fastrl::core::cells {

inline double dense_cell(const double* x_row, const double* w_row, double bias, int in_dim) {
  double acc = bias;
  for (int i = 0; i < in_dim; ++i) acc += w_row[i] * x_row[i];
  return acc;
}

// dx[b, :] accumulated over outputs in ascending order
inline void dense_dx_row(const double* dy_row, const double* w, double* dx_row,
                         int in_dim, int out_dim) {
  for (int i = 0; i < in_dim; ++i) dx_row[i] = 0.0;
  for (int o = 0; o < out_dim; ++o) {
    const double c = dy_row[o];
    const double* wrow = w + std::size_t(o) * in_dim;
    for (int i = 0; i < in_dim; ++i) dx_row[i] += c * wrow[i];
  }
}

// dw[o, :] accumulated over the batch in ascending order
inline void dense_dw_row(const double* x, const double* dy, double* dw_row, int o,
                         int n, int in_dim, int out_dim) {
  for (int i = 0; i < in_dim; ++i) dw_row[i] = 0.0;
  for (int b = 0; b < n; ++b) {
    const double c = dy[std::size_t(b) * out_dim + o];
    const double* xrow = x + std::size_t(b) * in_dim;
    for (int i = 0; i < in_dim; ++i) dw_row[i] += c * xrow[i];
  }
}

inline double dense_db_cell(const double* dy, int o, int n, int out_dim) {
  double acc = 0.0;
  for (int b = 0; b < n; ++b) acc += dy[std::size_t(b) * out_dim + o];
  return acc;
}

// integer ceil/floor division helpers for stride ranges (b > 0)
inline int div_ceil(int a, int b) { return a >= 0 ? (a + b - 1) / b : -((-a) / b); }
inline int div_floor(int a, int b) { return a >= 0 ? a / b : -((-a + b - 1) / b); }

// y[oc,oy,ox] for one sample
inline double conv_cell(const double* x, const double* w, double bias,
                        const ConvShape& s, int oc, int oy, int ox) {
  double acc = bias;
  const int iy0 = oy * s.stride - s.pad;
  const int ix0 = ox * s.stride - s.pad;
  const int ky_lo = iy0 < 0 ? -iy0 : 0;
  const int ky_hi = iy0 + s.kernel <= s.in_h ? s.kernel : s.in_h - iy0;
  const int kx_lo = ix0 < 0 ? -ix0 : 0;
  const int kx_hi = ix0 + s.kernel <= s.in_w ? s.kernel : s.in_w - ix0;
  const std::size_t plane = std::size_t(s.in_h) * s.in_w;
  const std::size_t kk = std::size_t(s.kernel) * s.kernel;
  for (int ic = 0; ic < s.in_ch; ++ic) {
    const double* xc = x + ic * plane;
    const double* wc = w + (std::size_t(oc) * s.in_ch + ic) * kk;
    for (int ky = ky_lo; ky < ky_hi; ++ky) {
      const double* xrow = xc + std::size_t(iy0 + ky) * s.in_w + ix0;
      const double* wrow = wc + std::size_t(ky) * s.kernel;
      for (int kx = kx_lo; kx < kx_hi; ++kx) acc += wrow[kx] * xrow[kx];
    }
  }
  return acc;
}

// valid (kernel tap, output index) pairs for one input coordinate; taps are
// ascending so accumulation order matches the naive loop
struct TapList {
  int count = 0;
  int k[8];
  int o[8];
};

inline TapList conv_taps(int i, int pad, int stride, int kernel, int out_dim) {
  TapList taps;
  for (int kk = (i + pad) % stride; kk < kernel; kk += stride) {
    const int oo = (i + pad - kk) / stride;
    if (oo < 0 || oo >= out_dim) continue;
    taps.k[taps.count] = kk;
    taps.o[taps.count] = oo;
    ++taps.count;
  }
  return taps;
}

inline double conv_dx_cell(const double* dy, const double* w,
                           const ConvShape& s, int ic, int iy, int ix) {
  const int oh = s.out_h(), ow = s.out_w();
  const TapList ty = conv_taps(iy, s.pad, s.stride, s.kernel, oh);
  const TapList tx = conv_taps(ix, s.pad, s.stride, s.kernel, ow);
  double acc = 0.0;
  const std::size_t kk = std::size_t(s.kernel) * s.kernel;
  for (int oc = 0; oc < s.out_ch; ++oc) {
    const double* dyc = dy + std::size_t(oc) * oh * ow;
    const double* wc = w + (std::size_t(oc) * s.in_ch + ic) * kk;
    for (int a = 0; a < ty.count; ++a) {
      const double* dyrow = dyc + std::size_t(ty.o[a]) * ow;
      const double* wrow = wc + std::size_t(ty.k[a]) * s.kernel;
      for (int b = 0; b < tx.count; ++b) acc += dyrow[tx.o[b]] * wrow[tx.k[b]];
    }
  }
  return acc;
}

inline double conv_dw_cell(const double* x, const double* dy,
                           const ConvShape& s, int n, int oc, int ic, int ky, int kx) {
  const int oh = s.out_h(), ow = s.out_w();
  // ranges of output rows/cols whose receptive field stays inside the input
  const int oy_lo = std::max(0, div_ceil(s.pad - ky, s.stride));
  const int oy_hi = std::min(oh - 1, div_floor(s.in_h - 1 + s.pad - ky, s.stride));
  const int ox_lo = std::max(0, div_ceil(s.pad - kx, s.stride));
  const int ox_hi = std::min(ow - 1, div_floor(s.in_w - 1 + s.pad - kx, s.stride));
  double acc = 0.0;
  for (int b = 0; b < n; ++b) {
    const double* xb = x + (std::size_t(b) * s.in_ch + ic) * s.in_h * s.in_w;
    const double* dyb = dy + (std::size_t(b) * s.out_ch + oc) * oh * ow;
    for (int oy = oy_lo; oy <= oy_hi; ++oy) {
      const int iy = oy * s.stride - s.pad + ky;
      const double* xrow = xb + std::size_t(iy) * s.in_w;
      const double* dyrow = dyb + std::size_t(oy) * ow;
      const int off = kx - s.pad;
      for (int ox = ox_lo; ox <= ox_hi; ++ox)
        acc += dyrow[ox] * xrow[ox * s.stride + off];
    }
  }
  return acc;
}

inline double conv_db_cell(const double* dy, int oc, int n, int out_ch, int out_hw) {
  double acc = 0.0;
  for (int b = 0; b < n; ++b) {
    const double* dyb = dy + (std::size_t(b) * out_ch + oc) * out_hw;
    for (int i = 0; i < out_hw; ++i) acc += dyb[i];
  }
  return acc;
}

// Transposed conv forward in gather form: for each output pixel, sum the
// input positions that map onto it.
inline double tconv_cell(const double* x, const double* w, double bias,
                         const TConvShape& s, int oc, int oy, int ox) {
  double acc = bias;
  const TapList ty = conv_taps(oy, s.pad, s.stride, s.kernel, s.in_h);
  const TapList tx = conv_taps(ox, s.pad, s.stride, s.kernel, s.in_w);
  const std::size_t plane = std::size_t(s.in_h) * s.in_w;
  const std::size_t kk = std::size_t(s.kernel) * s.kernel;
  for (int ic = 0; ic < s.in_ch; ++ic) {
    const double* xc = x + ic * plane;
    const double* wc = w + (std::size_t(ic) * s.out_ch + oc) * kk;
    for (int a = 0; a < ty.count; ++a) {
      const double* xrow = xc + std::size_t(ty.o[a]) * s.in_w;
      const double* wrow = wc + std::size_t(ty.k[a]) * s.kernel;
      for (int b = 0; b < tx.count; ++b) acc += wrow[tx.k[b]] * xrow[tx.o[b]];
    }
  }
  return acc;
}

inline double tconv_dx_cell(const double* dy, const double* w,
                            const TConvShape& s, int ic, int iy, int ix) {
  const int oh = s.out_h(), ow = s.out_w();
  const int oy0 = iy * s.stride - s.pad;
  const int ox0 = ix * s.stride - s.pad;
  const int ky_lo = oy0 < 0 ? -oy0 : 0;
  const int ky_hi = oy0 + s.kernel <= oh ? s.kernel : oh - oy0;
  const int kx_lo = ox0 < 0 ? -ox0 : 0;
  const int kx_hi = ox0 + s.kernel <= ow ? s.kernel : ow - ox0;
  const std::size_t kk = std::size_t(s.kernel) * s.kernel;
  double acc = 0.0;
  for (int oc = 0; oc < s.out_ch; ++oc) {
    const double* dyc = dy + std::size_t(oc) * oh * ow;
    const double* wc = w + (std::size_t(ic) * s.out_ch + oc) * kk;
    for (int ky = ky_lo; ky < ky_hi; ++ky) {
      const double* dyrow = dyc + std::size_t(oy0 + ky) * ow + ox0;
      const double* wrow = wc + std::size_t(ky) * s.kernel;
      for (int kx = kx_lo; kx < kx_hi; ++kx) acc += dyrow[kx] * wrow[kx];
    }
  }
  return acc;
}

inline double tconv_dw_cell(const double* x, const double* dy,
                            const TConvShape& s, int n, int ic, int oc, int ky, int kx) {
  const int oh = s.out_h(), ow = s.out_w();
  // input rows/cols whose scatter target stays inside the output
  const int iy_lo = std::max(0, div_ceil(s.pad - ky, s.stride));
  const int iy_hi = std::min(s.in_h - 1, div_floor(oh - 1 + s.pad - ky, s.stride));
  const int ix_lo = std::max(0, div_ceil(s.pad - kx, s.stride));
  const int ix_hi = std::min(s.in_w - 1, div_floor(ow - 1 + s.pad - kx, s.stride));
  double acc = 0.0;
  for (int b = 0; b < n; ++b) {
    const double* xb = x + (std::size_t(b) * s.in_ch + ic) * s.in_h * s.in_w;
    const double* dyb = dy + (std::size_t(b) * s.out_ch + oc) * oh * ow;
    for (int iy = iy_lo; iy <= iy_hi; ++iy) {
      const int oy = iy * s.stride - s.pad + ky;
      const double* xrow = xb + std::size_t(iy) * s.in_w;
      const double* dyrow = dyb + std::size_t(oy) * ow;
      const int off = kx - s.pad;
      for (int ix = ix_lo; ix <= ix_hi; ++ix)
        acc += xrow[ix] * dyrow[ix * s.stride + off];
    }
  }
  return acc;
}

inline void adam_cell(double* param, const double* grad, double* m, double* v,
                      std::size_t i, double lr, double beta1, double beta2,
                      double eps, double weight_decay, double bias_c1, double bias_c2) {
  const double g = grad[i] + weight_decay * param[i];
  m[i] = beta1 * m[i] + (1.0 - beta1) * g;
  v[i] = beta2 * v[i] + (1.0 - beta2) * g * g;
  const double mhat = m[i] / bias_c1;
  const double vhat = v[i] / bias_c2;
  param[i] -= lr * mhat / (std::sqrt(vhat) + eps);
}

}  // namespace fastrl::core::cells
