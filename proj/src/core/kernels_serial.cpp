// Serial reference kernels. The OpenMP variants in kernels_omp.cpp must stay
// bit-identical to these; tests compare the two element for element.

#include <cmath>

#include "fastrl/core/kernels.hpp"
#include "kernel_cells.hpp"

namespace fastrl::core {
namespace {

using namespace cells;

void dense_forward_s(const double* x, const double* w, const double* b, double* y,
                     int n, int in_dim, int out_dim) {
  for (int bi = 0; bi < n; ++bi) {
    const double* xr = x + std::size_t(bi) * in_dim;
    double* yr = y + std::size_t(bi) * out_dim;
    for (int o = 0; o < out_dim; ++o)
      yr[o] = dense_cell(xr, w + std::size_t(o) * in_dim, b[o], in_dim);
  }
}

void dense_backward_s(const double* x, const double* w, const double* dy,
                      double* dx, double* dw, double* db, int n, int in_dim, int out_dim) {
  if (dx) {
    for (int bi = 0; bi < n; ++bi)
      dense_dx_row(dy + std::size_t(bi) * out_dim, w, dx + std::size_t(bi) * in_dim,
                   in_dim, out_dim);
  }
  for (int o = 0; o < out_dim; ++o)
    dense_dw_row(x, dy, dw + std::size_t(o) * in_dim, o, n, in_dim, out_dim);
  for (int o = 0; o < out_dim; ++o) db[o] = dense_db_cell(dy, o, n, out_dim);
}

void conv2d_forward_s(const double* x, const double* w, const double* b, double* y,
                      const ConvShape& s, int n) {
  const int oh = s.out_h(), ow = s.out_w();
  for (int bi = 0; bi < n; ++bi) {
    const double* xb = x + std::size_t(bi) * s.in_count();
    double* yb = y + std::size_t(bi) * s.out_count();
    for (int oc = 0; oc < s.out_ch; ++oc)
      for (int oy = 0; oy < oh; ++oy)
        for (int ox = 0; ox < ow; ++ox)
          yb[(std::size_t(oc) * oh + oy) * ow + ox] = conv_cell(xb, w, b[oc], s, oc, oy, ox);
  }
}

void conv2d_backward_s(const double* x, const double* w, const double* dy,
                       double* dx, double* dw, double* db, const ConvShape& s, int n) {
  const int oh = s.out_h(), ow = s.out_w();
  if (dx) {
    for (int bi = 0; bi < n; ++bi) {
      const double* dyb = dy + std::size_t(bi) * s.out_count();
      double* dxb = dx + std::size_t(bi) * s.in_count();
      for (int ic = 0; ic < s.in_ch; ++ic)
        for (int iy = 0; iy < s.in_h; ++iy)
          for (int ix = 0; ix < s.in_w; ++ix)
            dxb[(std::size_t(ic) * s.in_h + iy) * s.in_w + ix] =
                conv_dx_cell(dyb, w, s, ic, iy, ix);
    }
  }
  for (int oc = 0; oc < s.out_ch; ++oc)
    for (int ic = 0; ic < s.in_ch; ++ic)
      for (int ky = 0; ky < s.kernel; ++ky)
        for (int kx = 0; kx < s.kernel; ++kx)
          dw[((std::size_t(oc) * s.in_ch + ic) * s.kernel + ky) * s.kernel + kx] =
              conv_dw_cell(x, dy, s, n, oc, ic, ky, kx);
  for (int oc = 0; oc < s.out_ch; ++oc)
    db[oc] = conv_db_cell(dy + std::size_t(0), oc, n, s.out_ch, oh * ow);
}

void tconv2d_forward_s(const double* x, const double* w, const double* b, double* y,
                       const TConvShape& s, int n) {
  const int oh = s.out_h(), ow = s.out_w();
  for (int bi = 0; bi < n; ++bi) {
    const double* xb = x + std::size_t(bi) * s.in_count();
    double* yb = y + std::size_t(bi) * s.out_count();
    for (int oc = 0; oc < s.out_ch; ++oc)
      for (int oy = 0; oy < oh; ++oy)
        for (int ox = 0; ox < ow; ++ox)
          yb[(std::size_t(oc) * oh + oy) * ow + ox] = tconv_cell(xb, w, b[oc], s, oc, oy, ox);
  }
}

void tconv2d_backward_s(const double* x, const double* w, const double* dy,
                        double* dx, double* dw, double* db, const TConvShape& s, int n) {
  const int oh = s.out_h(), ow = s.out_w();
  if (dx) {
    for (int bi = 0; bi < n; ++bi) {
      const double* dyb = dy + std::size_t(bi) * s.out_count();
      double* dxb = dx + std::size_t(bi) * s.in_count();
      for (int ic = 0; ic < s.in_ch; ++ic)
        for (int iy = 0; iy < s.in_h; ++iy)
          for (int ix = 0; ix < s.in_w; ++ix)
            dxb[(std::size_t(ic) * s.in_h + iy) * s.in_w + ix] =
                tconv_dx_cell(dyb, w, s, ic, iy, ix);
    }
  }
  for (int ic = 0; ic < s.in_ch; ++ic)
    for (int oc = 0; oc < s.out_ch; ++oc)
      for (int ky = 0; ky < s.kernel; ++ky)
        for (int kx = 0; kx < s.kernel; ++kx)
          dw[((std::size_t(ic) * s.out_ch + oc) * s.kernel + ky) * s.kernel + kx] =
              tconv_dw_cell(x, dy, s, n, ic, oc, ky, kx);
  for (int oc = 0; oc < s.out_ch; ++oc)
    db[oc] = conv_db_cell(dy, oc, n, s.out_ch, oh * ow);
}

void tanh_forward_s(const double* x, double* y, std::size_t count) {
  for (std::size_t i = 0; i < count; ++i) y[i] = std::tanh(x[i]);
}

void tanh_backward_s(const double* y, const double* dy, double* dx, std::size_t count) {
  for (std::size_t i = 0; i < count; ++i) dx[i] = dy[i] * (1.0 - y[i] * y[i]);
}

void mse_grad_s(const double* pred, const double* target, double* grad, std::size_t count) {
  const double scale = 2.0 / static_cast<double>(count);
  for (std::size_t i = 0; i < count; ++i) grad[i] = scale * (pred[i] - target[i]);
}

void axpy_s(double a, const double* x, double* y, std::size_t count) {
  for (std::size_t i = 0; i < count; ++i) y[i] += a * x[i];
}

void adam_step_s(double* param, const double* grad, double* m, double* v,
                 std::size_t count, double lr, double beta1, double beta2,
                 double eps, double weight_decay, double bias_c1, double bias_c2) {
  for (std::size_t i = 0; i < count; ++i)
    cells::adam_cell(param, grad, m, v, i, lr, beta1, beta2, eps, weight_decay, bias_c1, bias_c2);
}

}  // namespace

namespace detail {

const KernelOps& serial_ops() {
  static const KernelOps ops = {
      dense_forward_s, dense_backward_s, conv2d_forward_s, conv2d_backward_s,
      tconv2d_forward_s, tconv2d_backward_s, tanh_forward_s, tanh_backward_s,
      mse_grad_s, axpy_s, adam_step_s,
  };
  return ops;
}

}  // namespace detail
}  // namespace fastrl::core
