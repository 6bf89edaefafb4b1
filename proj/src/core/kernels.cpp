#include "fastrl/core/kernels.hpp"

#include <atomic>

namespace fastrl::core {
namespace {

std::atomic<KernelMode> g_mode{KernelMode::Parallel};

}  // namespace

void set_kernel_mode(KernelMode mode) { g_mode.store(mode, std::memory_order_relaxed); }
KernelMode kernel_mode() { return g_mode.load(std::memory_order_relaxed); }

namespace detail {
const KernelOps& active_ops() {
  return kernel_mode() == KernelMode::Serial ? serial_ops() : omp_ops();
}
}  // namespace detail

namespace {

// Small problems stay serial even in parallel mode; spinning up a parallel
// region costs more than the loop itself. Either path is bit-identical.
constexpr std::size_t kParallelWorkThreshold = 1u << 20;

const detail::KernelOps& ops_for(std::size_t work) {
  if (kernel_mode() == KernelMode::Serial || work < kParallelWorkThreshold)
    return detail::serial_ops();
  return detail::omp_ops();
}

}  // namespace

void dense_forward(const double* x, const double* w, const double* b, double* y,
                   int n, int in_dim, int out_dim) {
  const std::size_t work = std::size_t(n) * in_dim * out_dim;
  ops_for(work).dense_forward(x, w, b, y, n, in_dim, out_dim);
}

void dense_backward(const double* x, const double* w, const double* dy,
                    double* dx, double* dw, double* db, int n, int in_dim, int out_dim) {
  const std::size_t work = 2 * std::size_t(n) * in_dim * out_dim;
  ops_for(work).dense_backward(x, w, dy, dx, dw, db, n, in_dim, out_dim);
}

void conv2d_forward(const double* x, const double* w, const double* b, double* y,
                    const ConvShape& s, int n) {
  const std::size_t work =
      std::size_t(n) * s.out_count() * s.in_ch * s.kernel * s.kernel;
  ops_for(work).conv2d_forward(x, w, b, y, s, n);
}

void conv2d_backward(const double* x, const double* w, const double* dy,
                     double* dx, double* dw, double* db, const ConvShape& s, int n) {
  const std::size_t work =
      2 * std::size_t(n) * s.out_count() * s.in_ch * s.kernel * s.kernel;
  ops_for(work).conv2d_backward(x, w, dy, dx, dw, db, s, n);
}

void tconv2d_forward(const double* x, const double* w, const double* b, double* y,
                     const TConvShape& s, int n) {
  const std::size_t work =
      std::size_t(n) * s.in_count() * s.out_ch * s.kernel * s.kernel;
  ops_for(work).tconv2d_forward(x, w, b, y, s, n);
}

void tconv2d_backward(const double* x, const double* w, const double* dy,
                      double* dx, double* dw, double* db, const TConvShape& s, int n) {
  const std::size_t work =
      2 * std::size_t(n) * s.in_count() * s.out_ch * s.kernel * s.kernel;
  ops_for(work).tconv2d_backward(x, w, dy, dx, dw, db, s, n);
}

void tanh_forward(const double* x, double* y, std::size_t count) {
  ops_for(count * 16).tanh_forward(x, y, count);
}

void tanh_backward(const double* y, const double* dy, double* dx, std::size_t count) {
  ops_for(count).tanh_backward(y, dy, dx, count);
}

double mse_loss(const double* pred, const double* target, std::size_t count) {
  double acc = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    const double d = pred[i] - target[i];
    acc += d * d;
  }
  return acc / static_cast<double>(count);
}

void mse_grad(const double* pred, const double* target, double* grad, std::size_t count) {
  ops_for(count).mse_grad(pred, target, grad, count);
}

void axpy(double a, const double* x, double* y, std::size_t count) {
  ops_for(count).axpy(a, x, y, count);
}

void adam_step(double* param, const double* grad, double* m, double* v,
               std::size_t count, double lr, double beta1, double beta2,
               double eps, double weight_decay, double bias_c1, double bias_c2) {
  ops_for(count * 8).adam_step(param, grad, m, v, count, lr, beta1, beta2, eps,
                               weight_decay, bias_c1, bias_c2);
}

}  // namespace fastrl::core
