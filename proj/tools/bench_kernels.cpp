// Times the serial reference kernels against the OpenMP versions on the
// layer shapes the networks actually use, and checks they agree bit for bit.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <functional>
#include <vector>

#include <omp.h>

#include "fastrl/core/kernels.hpp"
#include "fastrl/core/rng.hpp"

using namespace fastrl::core;

namespace {

using Clock = std::chrono::steady_clock;

double time_ms(const std::function<void()>& fn, int reps) {
  fn();  // warm up
  const auto t0 = Clock::now();
  for (int i = 0; i < reps; ++i) fn();
  const auto t1 = Clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

std::vector<double> random_vec(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(-1.0, 1.0);
  return v;
}

struct BenchResult {
  const char* name;
  double serial_ms;
  double parallel_ms;
  bool identical;
};

void print(const BenchResult& r) {
  std::printf("%-28s serial %9.3f ms   omp %9.3f ms   speedup %5.2fx   %s\n", r.name,
              r.serial_ms, r.parallel_ms, r.serial_ms / r.parallel_ms,
              r.identical ? "bit-identical" : "MISMATCH");
}

}  // namespace

int main() {
  std::printf("threads: %d\n", omp_get_max_threads());
  Rng rng(7);

  {
    // encoder stage 2 of the 64x64 autoencoder: 64ch 21x21 -> 128ch 7x7, k5 s3
    ConvShape s{64, 21, 21, 128, 5, 3, 1};
    const int n = 8;
    auto x = random_vec(std::size_t(n) * s.in_count(), rng);
    auto w = random_vec(s.weight_count(), rng);
    auto b = random_vec(s.out_ch, rng);
    std::vector<double> y_s(std::size_t(n) * s.out_count()), y_p(y_s.size());
    BenchResult r{"conv2d fwd 64x21x21->128", 0, 0, false};
    r.serial_ms = time_ms([&] {
      detail::serial_ops().conv2d_forward(x.data(), w.data(), b.data(), y_s.data(), s, n);
    }, 3);
    r.parallel_ms = time_ms([&] {
      detail::omp_ops().conv2d_forward(x.data(), w.data(), b.data(), y_p.data(), s, n);
    }, 3);
    r.identical = std::memcmp(y_s.data(), y_p.data(), y_s.size() * sizeof(double)) == 0;
    print(r);

    auto dy = random_vec(y_s.size(), rng);
    std::vector<double> dx_s(x.size()), dx_p(x.size());
    std::vector<double> dw_s(w.size()), dw_p(w.size());
    std::vector<double> db_s(b.size()), db_p(b.size());
    BenchResult rb{"conv2d bwd 64x21x21->128", 0, 0, false};
    rb.serial_ms = time_ms([&] {
      detail::serial_ops().conv2d_backward(x.data(), w.data(), dy.data(), dx_s.data(),
                                           dw_s.data(), db_s.data(), s, n);
    }, 3);
    rb.parallel_ms = time_ms([&] {
      detail::omp_ops().conv2d_backward(x.data(), w.data(), dy.data(), dx_p.data(),
                                        dw_p.data(), db_p.data(), s, n);
    }, 3);
    rb.identical = std::memcmp(dx_s.data(), dx_p.data(), dx_s.size() * sizeof(double)) == 0 &&
                   std::memcmp(dw_s.data(), dw_p.data(), dw_s.size() * sizeof(double)) == 0 &&
                   std::memcmp(db_s.data(), db_p.data(), db_s.size() * sizeof(double)) == 0;
    print(rb);
  }

  {
    // decoder stage: 128ch 2x2 -> 128ch 7x7 transposed conv
    TConvShape s{128, 2, 2, 128, 5, 3, 1, 1};
    const int n = 8;
    auto x = random_vec(std::size_t(n) * s.in_count(), rng);
    auto w = random_vec(s.weight_count(), rng);
    auto b = random_vec(s.out_ch, rng);
    std::vector<double> y_s(std::size_t(n) * s.out_count()), y_p(y_s.size());
    BenchResult r{"tconv2d fwd 128x2x2->128", 0, 0, false};
    r.serial_ms = time_ms([&] {
      detail::serial_ops().tconv2d_forward(x.data(), w.data(), b.data(), y_s.data(), s, n);
    }, 5);
    r.parallel_ms = time_ms([&] {
      detail::omp_ops().tconv2d_forward(x.data(), w.data(), b.data(), y_p.data(), s, n);
    }, 5);
    r.identical = std::memcmp(y_s.data(), y_p.data(), y_s.size() * sizeof(double)) == 0;
    print(r);
  }

  {
    // critic-sized dense layer under a big batch
    const int n = 1024, in = 256, out = 256;
    auto x = random_vec(std::size_t(n) * in, rng);
    auto w = random_vec(std::size_t(out) * in, rng);
    auto b = random_vec(out, rng);
    std::vector<double> y_s(std::size_t(n) * out), y_p(y_s.size());
    BenchResult r{"dense fwd 1024x256->256", 0, 0, false};
    r.serial_ms = time_ms([&] {
      detail::serial_ops().dense_forward(x.data(), w.data(), b.data(), y_s.data(), n, in, out);
    }, 10);
    r.parallel_ms = time_ms([&] {
      detail::omp_ops().dense_forward(x.data(), w.data(), b.data(), y_p.data(), n, in, out);
    }, 10);
    r.identical = std::memcmp(y_s.data(), y_p.data(), y_s.size() * sizeof(double)) == 0;
    print(r);

    auto dy = random_vec(y_s.size(), rng);
    std::vector<double> dx_s(x.size()), dx_p(x.size());
    std::vector<double> dw_s(w.size()), dw_p(w.size());
    std::vector<double> db_s(b.size()), db_p(b.size());
    BenchResult rb{"dense bwd 1024x256->256", 0, 0, false};
    rb.serial_ms = time_ms([&] {
      detail::serial_ops().dense_backward(x.data(), w.data(), dy.data(), dx_s.data(),
                                          dw_s.data(), db_s.data(), n, in, out);
    }, 10);
    rb.parallel_ms = time_ms([&] {
      detail::omp_ops().dense_backward(x.data(), w.data(), dy.data(), dx_p.data(),
                                       dw_p.data(), db_p.data(), n, in, out);
    }, 10);
    rb.identical = std::memcmp(dx_s.data(), dx_p.data(), dx_s.size() * sizeof(double)) == 0 &&
                   std::memcmp(dw_s.data(), dw_p.data(), dw_s.size() * sizeof(double)) == 0;
    print(rb);
  }

  {
    const std::size_t n = 1 << 22;
    auto x = random_vec(n, rng);
    std::vector<double> y_s(n), y_p(n);
    BenchResult r{"tanh 4M", 0, 0, false};
    r.serial_ms = time_ms([&] { detail::serial_ops().tanh_forward(x.data(), y_s.data(), n); }, 5);
    r.parallel_ms = time_ms([&] { detail::omp_ops().tanh_forward(x.data(), y_p.data(), n); }, 5);
    r.identical = std::memcmp(y_s.data(), y_p.data(), n * sizeof(double)) == 0;
    print(r);
  }

  return 0;
}
