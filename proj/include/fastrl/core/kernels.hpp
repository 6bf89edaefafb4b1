#pragma once

#include <cstddef>

// Numeric kernels behind the networks. Every kernel exists twice: a serial
// reference in kernels::serial and an OpenMP version in kernels::omp. Both
// compute each output element with the same inner accumulation order, so the
// two variants produce bit-identical results and the parallel path stays
// deterministic for any thread count. The unqualified functions dispatch on
// the process-wide mode (parallel by default).

namespace fastrl::core {

enum class KernelMode { Serial, Parallel };

void set_kernel_mode(KernelMode mode);
KernelMode kernel_mode();

struct ConvShape {
  int in_ch = 0, in_h = 0, in_w = 0;
  int out_ch = 0, kernel = 0, stride = 1, pad = 0;

  int out_h() const { return (in_h + 2 * pad - kernel) / stride + 1; }
  int out_w() const { return (in_w + 2 * pad - kernel) / stride + 1; }
  std::size_t in_count() const { return std::size_t(in_ch) * in_h * in_w; }
  std::size_t out_count() const { return std::size_t(out_ch) * out_h() * out_w(); }
  std::size_t weight_count() const { return std::size_t(out_ch) * in_ch * kernel * kernel; }
};

// Transposed convolution; out_pad recovers sizes the forward stride floored away.
struct TConvShape {
  int in_ch = 0, in_h = 0, in_w = 0;
  int out_ch = 0, kernel = 0, stride = 1, pad = 0, out_pad = 0;

  int out_h() const { return (in_h - 1) * stride - 2 * pad + kernel + out_pad; }
  int out_w() const { return (in_w - 1) * stride - 2 * pad + kernel + out_pad; }
  std::size_t in_count() const { return std::size_t(in_ch) * in_h * in_w; }
  std::size_t out_count() const { return std::size_t(out_ch) * out_h() * out_w(); }
  std::size_t weight_count() const { return std::size_t(in_ch) * out_ch * kernel * kernel; }
};

namespace detail {

struct KernelOps {
  // y[n,out] = W[out,in] x[n,in] + b[out]
  void (*dense_forward)(const double* x, const double* w, const double* b, double* y,
                        int n, int in_dim, int out_dim);
  // dx may be null when input gradients are not needed
  void (*dense_backward)(const double* x, const double* w, const double* dy,
                         double* dx, double* dw, double* db,
                         int n, int in_dim, int out_dim);
  void (*conv2d_forward)(const double* x, const double* w, const double* b, double* y,
                         const ConvShape& s, int n);
  void (*conv2d_backward)(const double* x, const double* w, const double* dy,
                          double* dx, double* dw, double* db,
                          const ConvShape& s, int n);
  void (*tconv2d_forward)(const double* x, const double* w, const double* b, double* y,
                          const TConvShape& s, int n);
  void (*tconv2d_backward)(const double* x, const double* w, const double* dy,
                           double* dx, double* dw, double* db,
                           const TConvShape& s, int n);
  void (*tanh_forward)(const double* x, double* y, std::size_t count);
  // dx = dy * (1 - y^2), y being the forward output
  void (*tanh_backward)(const double* y, const double* dy, double* dx, std::size_t count);
  void (*mse_grad)(const double* pred, const double* target, double* grad, std::size_t count);
  void (*axpy)(double a, const double* x, double* y, std::size_t count);
  void (*adam_step)(double* param, const double* grad, double* m, double* v,
                    std::size_t count, double lr, double beta1, double beta2,
                    double eps, double weight_decay, double bias_c1, double bias_c2);
};

const KernelOps& serial_ops();
const KernelOps& omp_ops();
const KernelOps& active_ops();

}  // namespace detail

// --- dispatching entry points ---

void dense_forward(const double* x, const double* w, const double* b, double* y,
                   int n, int in_dim, int out_dim);
void dense_backward(const double* x, const double* w, const double* dy,
                    double* dx, double* dw, double* db, int n, int in_dim, int out_dim);

void conv2d_forward(const double* x, const double* w, const double* b, double* y,
                    const ConvShape& s, int n);
void conv2d_backward(const double* x, const double* w, const double* dy,
                     double* dx, double* dw, double* db, const ConvShape& s, int n);

void tconv2d_forward(const double* x, const double* w, const double* b, double* y,
                     const TConvShape& s, int n);
void tconv2d_backward(const double* x, const double* w, const double* dy,
                      double* dx, double* dw, double* db, const TConvShape& s, int n);

void tanh_forward(const double* x, double* y, std::size_t count);
void tanh_backward(const double* y, const double* dy, double* dx, std::size_t count);

// Scalar reductions stay serial in both variants so sums never depend on the
// thread count.
double mse_loss(const double* pred, const double* target, std::size_t count);
void mse_grad(const double* pred, const double* target, double* grad, std::size_t count);

void axpy(double a, const double* x, double* y, std::size_t count);

// One Adam update with L2 weight decay folded into the gradient.
// bias_c1 = 1 - beta1^t, bias_c2 = 1 - beta2^t for the current step t.
void adam_step(double* param, const double* grad, double* m, double* v,
               std::size_t count, double lr, double beta1, double beta2,
               double eps, double weight_decay, double bias_c1, double bias_c2);

}  // namespace fastrl::core
