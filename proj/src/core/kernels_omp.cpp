// OpenMP kernels. Parallelism is always across independent output elements;
// no accumulation is ever split between threads, so results match the serial
// reference bit for bit regardless of thread count or schedule.

#include <cmath>

#include "fastrl/core/kernels.hpp"
#include "kernel_cells.hpp"

namespace fastrl::core {
namespace {

using namespace cells;

void dense_forward_p(const double* x, const double* w, const double* b, double* y,
                     int n, int in_dim, int out_dim) {
  const std::size_t total = std::size_t(n) * out_dim;
#pragma omp parallel for schedule(static)
  for (std::size_t idx = 0; idx < total; ++idx) {
    const int bi = static_cast<int>(idx / out_dim);
    const int o = static_cast<int>(idx % out_dim);
    y[idx] = dense_cell(x + std::size_t(bi) * in_dim, w + std::size_t(o) * in_dim, b[o], in_dim);
  }
}

void dense_backward_p(const double* x, const double* w, const double* dy,
                      double* dx, double* dw, double* db, int n, int in_dim, int out_dim) {
  if (dx) {
#pragma omp parallel for schedule(static)
    for (int bi = 0; bi < n; ++bi)
      dense_dx_row(dy + std::size_t(bi) * out_dim, w, dx + std::size_t(bi) * in_dim,
                   in_dim, out_dim);
  }
#pragma omp parallel for schedule(static)
  for (int o = 0; o < out_dim; ++o)
    dense_dw_row(x, dy, dw + std::size_t(o) * in_dim, o, n, in_dim, out_dim);
#pragma omp parallel for schedule(static)
  for (int o = 0; o < out_dim; ++o) db[o] = dense_db_cell(dy, o, n, out_dim);
}

void conv2d_forward_p(const double* x, const double* w, const double* b, double* y,
                      const ConvShape& s, int n) {
  const int oh = s.out_h(), ow = s.out_w();
  const std::size_t rows = std::size_t(n) * s.out_ch * oh;
#pragma omp parallel for schedule(static)
  for (std::size_t row = 0; row < rows; ++row) {
    const int bi = static_cast<int>(row / (std::size_t(s.out_ch) * oh));
    const int rem = static_cast<int>(row % (std::size_t(s.out_ch) * oh));
    const int oc = rem / oh;
    const int oy = rem % oh;
    const double* xb = x + std::size_t(bi) * s.in_count();
    double* yr = y + std::size_t(bi) * s.out_count() + (std::size_t(oc) * oh + oy) * ow;
    for (int ox = 0; ox < ow; ++ox) yr[ox] = conv_cell(xb, w, b[oc], s, oc, oy, ox);
  }
}

void conv2d_backward_p(const double* x, const double* w, const double* dy,
                       double* dx, double* dw, double* db, const ConvShape& s, int n) {
  const int oh = s.out_h(), ow = s.out_w();
  if (dx) {
    const std::size_t rows = std::size_t(n) * s.in_ch * s.in_h;
#pragma omp parallel for schedule(static)
    for (std::size_t row = 0; row < rows; ++row) {
      const int bi = static_cast<int>(row / (std::size_t(s.in_ch) * s.in_h));
      const int rem = static_cast<int>(row % (std::size_t(s.in_ch) * s.in_h));
      const int ic = rem / s.in_h;
      const int iy = rem % s.in_h;
      const double* dyb = dy + std::size_t(bi) * s.out_count();
      double* dxr = dx + std::size_t(bi) * s.in_count() + (std::size_t(ic) * s.in_h + iy) * s.in_w;
      for (int ix = 0; ix < s.in_w; ++ix) dxr[ix] = conv_dx_cell(dyb, w, s, ic, iy, ix);
    }
  }
  const std::size_t wtotal = s.weight_count();
  const int kk = s.kernel * s.kernel;
#pragma omp parallel for schedule(static)
  for (std::size_t idx = 0; idx < wtotal; ++idx) {
    const int oc = static_cast<int>(idx / (std::size_t(s.in_ch) * kk));
    const int rem = static_cast<int>(idx % (std::size_t(s.in_ch) * kk));
    const int ic = rem / kk;
    const int ky = (rem % kk) / s.kernel;
    const int kx = rem % s.kernel;
    dw[idx] = conv_dw_cell(x, dy, s, n, oc, ic, ky, kx);
  }
#pragma omp parallel for schedule(static)
  for (int oc = 0; oc < s.out_ch; ++oc) db[oc] = conv_db_cell(dy, oc, n, s.out_ch, oh * ow);
}

void tconv2d_forward_p(const double* x, const double* w, const double* b, double* y,
                       const TConvShape& s, int n) {
  const int oh = s.out_h(), ow = s.out_w();
  const std::size_t rows = std::size_t(n) * s.out_ch * oh;
#pragma omp parallel for schedule(static)
  for (std::size_t row = 0; row < rows; ++row) {
    const int bi = static_cast<int>(row / (std::size_t(s.out_ch) * oh));
    const int rem = static_cast<int>(row % (std::size_t(s.out_ch) * oh));
    const int oc = rem / oh;
    const int oy = rem % oh;
    const double* xb = x + std::size_t(bi) * s.in_count();
    double* yr = y + std::size_t(bi) * s.out_count() + (std::size_t(oc) * oh + oy) * ow;
    for (int ox = 0; ox < ow; ++ox) yr[ox] = tconv_cell(xb, w, b[oc], s, oc, oy, ox);
  }
}

void tconv2d_backward_p(const double* x, const double* w, const double* dy,
                        double* dx, double* dw, double* db, const TConvShape& s, int n) {
  const int oh = s.out_h(), ow = s.out_w();
  if (dx) {
    const std::size_t rows = std::size_t(n) * s.in_ch * s.in_h;
#pragma omp parallel for schedule(static)
    for (std::size_t row = 0; row < rows; ++row) {
      const int bi = static_cast<int>(row / (std::size_t(s.in_ch) * s.in_h));
      const int rem = static_cast<int>(row % (std::size_t(s.in_ch) * s.in_h));
      const int ic = rem / s.in_h;
      const int iy = rem % s.in_h;
      const double* dyb = dy + std::size_t(bi) * s.out_count();
      double* dxr = dx + std::size_t(bi) * s.in_count() + (std::size_t(ic) * s.in_h + iy) * s.in_w;
      for (int ix = 0; ix < s.in_w; ++ix) dxr[ix] = tconv_dx_cell(dyb, w, s, ic, iy, ix);
    }
  }
  const std::size_t wtotal = s.weight_count();
  const int kk = s.kernel * s.kernel;
#pragma omp parallel for schedule(static)
  for (std::size_t idx = 0; idx < wtotal; ++idx) {
    const int ic = static_cast<int>(idx / (std::size_t(s.out_ch) * kk));
    const int rem = static_cast<int>(idx % (std::size_t(s.out_ch) * kk));
    const int oc = rem / kk;
    const int ky = (rem % kk) / s.kernel;
    const int kx = rem % s.kernel;
    dw[idx] = tconv_dw_cell(x, dy, s, n, ic, oc, ky, kx);
  }
#pragma omp parallel for schedule(static)
  for (int oc = 0; oc < s.out_ch; ++oc) db[oc] = conv_db_cell(dy, oc, n, s.out_ch, oh * ow);
}

void tanh_forward_p(const double* x, double* y, std::size_t count) {
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < count; ++i) y[i] = std::tanh(x[i]);
}

void tanh_backward_p(const double* y, const double* dy, double* dx, std::size_t count) {
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < count; ++i) dx[i] = dy[i] * (1.0 - y[i] * y[i]);
}

void mse_grad_p(const double* pred, const double* target, double* grad, std::size_t count) {
  const double scale = 2.0 / static_cast<double>(count);
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < count; ++i) grad[i] = scale * (pred[i] - target[i]);
}

void axpy_p(double a, const double* x, double* y, std::size_t count) {
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < count; ++i) y[i] += a * x[i];
}

void adam_step_p(double* param, const double* grad, double* m, double* v,
                 std::size_t count, double lr, double beta1, double beta2,
                 double eps, double weight_decay, double bias_c1, double bias_c2) {
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < count; ++i)
    cells::adam_cell(param, grad, m, v, i, lr, beta1, beta2, eps, weight_decay, bias_c1, bias_c2);
}

}  // namespace

namespace detail {

const KernelOps& omp_ops() {
  static const KernelOps ops = {
      dense_forward_p, dense_backward_p, conv2d_forward_p, conv2d_backward_p,
      tconv2d_forward_p, tconv2d_backward_p, tanh_forward_p, tanh_backward_p,
      mse_grad_p, axpy_p, adam_step_p,
  };
  return ops;
}

}  // namespace detail
}  // namespace fastrl::core
