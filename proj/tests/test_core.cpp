#include <doctest.h>

#include <cstring>

#include "fastrl/core/hash.hpp"
#include "fastrl/core/kernels.hpp"
#include "fastrl/core/rng.hpp"
#include "fastrl/core/textio.hpp"
#include "fastrl/errors.hpp"

using namespace fastrl;
using namespace fastrl::core;

namespace {

std::vector<double> rand_vec(std::size_t n, Rng& rng, double lo = -1.0, double hi = 1.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(lo, hi);
  return v;
}

bool bits_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_SUITE("core") {

TEST_CASE("serial and omp kernels agree bit for bit") {
  Rng rng(11);
  const auto& s = detail::serial_ops();
  const auto& p = detail::omp_ops();

  SUBCASE("dense") {
    const int n = 7, in = 13, out = 9;
    auto x = rand_vec(std::size_t(n) * in, rng);
    auto w = rand_vec(std::size_t(out) * in, rng);
    auto b = rand_vec(out, rng);
    std::vector<double> ys(std::size_t(n) * out), yp(ys.size());
    s.dense_forward(x.data(), w.data(), b.data(), ys.data(), n, in, out);
    p.dense_forward(x.data(), w.data(), b.data(), yp.data(), n, in, out);
    CHECK(bits_equal(ys, yp));

    auto dy = rand_vec(ys.size(), rng);
    std::vector<double> dxs(x.size()), dxp(x.size()), dws(w.size()), dwp(w.size()),
        dbs(b.size()), dbp(b.size());
    s.dense_backward(x.data(), w.data(), dy.data(), dxs.data(), dws.data(), dbs.data(), n,
                     in, out);
    p.dense_backward(x.data(), w.data(), dy.data(), dxp.data(), dwp.data(), dbp.data(), n,
                     in, out);
    CHECK(bits_equal(dxs, dxp));
    CHECK(bits_equal(dws, dwp));
    CHECK(bits_equal(dbs, dbp));
  }

  SUBCASE("conv2d and transposed conv2d") {
    ConvShape cs{3, 17, 17, 5, 5, 3, 1};
    const int n = 4;
    auto x = rand_vec(std::size_t(n) * cs.in_count(), rng);
    auto w = rand_vec(cs.weight_count(), rng);
    auto b = rand_vec(cs.out_ch, rng);
    std::vector<double> ys(std::size_t(n) * cs.out_count()), yp(ys.size());
    s.conv2d_forward(x.data(), w.data(), b.data(), ys.data(), cs, n);
    p.conv2d_forward(x.data(), w.data(), b.data(), yp.data(), cs, n);
    CHECK(bits_equal(ys, yp));

    auto dy = rand_vec(ys.size(), rng);
    std::vector<double> dxs(x.size()), dxp(x.size()), dws(w.size()), dwp(w.size()),
        dbs(b.size()), dbp(b.size());
    s.conv2d_backward(x.data(), w.data(), dy.data(), dxs.data(), dws.data(), dbs.data(), cs,
                      n);
    p.conv2d_backward(x.data(), w.data(), dy.data(), dxp.data(), dwp.data(), dbp.data(), cs,
                      n);
    CHECK(bits_equal(dxs, dxp));
    CHECK(bits_equal(dws, dwp));
    CHECK(bits_equal(dbs, dbp));

    TConvShape ts{5, cs.out_h(), cs.out_w(), 3, 5, 3, 1, 0};
    ts.out_pad = 17 - ts.out_h();
    auto tx = rand_vec(std::size_t(n) * ts.in_count(), rng);
    auto tw = rand_vec(ts.weight_count(), rng);
    auto tb = rand_vec(ts.out_ch, rng);
    std::vector<double> tys(std::size_t(n) * ts.out_count()), typ(tys.size());
    s.tconv2d_forward(tx.data(), tw.data(), tb.data(), tys.data(), ts, n);
    p.tconv2d_forward(tx.data(), tw.data(), tb.data(), typ.data(), ts, n);
    CHECK(bits_equal(tys, typ));

    auto tdy = rand_vec(tys.size(), rng);
    std::vector<double> tdxs(tx.size()), tdxp(tx.size()), tdws(tw.size()), tdwp(tw.size()),
        tdbs(tb.size()), tdbp(tb.size());
    s.tconv2d_backward(tx.data(), tw.data(), tdy.data(), tdxs.data(), tdws.data(),
                       tdbs.data(), ts, n);
    p.tconv2d_backward(tx.data(), tw.data(), tdy.data(), tdxp.data(), tdwp.data(),
                       tdbp.data(), ts, n);
    CHECK(bits_equal(tdxs, tdxp));
    CHECK(bits_equal(tdws, tdwp));
    CHECK(bits_equal(tdbs, tdbp));
  }

  SUBCASE("elementwise and adam") {
    const std::size_t n = 4097;
    auto x = rand_vec(n, rng);
    std::vector<double> ys(n), yp(n);
    s.tanh_forward(x.data(), ys.data(), n);
    p.tanh_forward(x.data(), yp.data(), n);
    CHECK(bits_equal(ys, yp));

    auto params_s = rand_vec(n, rng);
    auto params_p = params_s;
    auto grads = rand_vec(n, rng);
    std::vector<double> ms(n, 0.0), vs(n, 0.0), mp(n, 0.0), vp(n, 0.0);
    s.adam_step(params_s.data(), grads.data(), ms.data(), vs.data(), n, 1e-3, 0.9, 0.999,
                1e-8, 1e-5, 0.1, 0.001);
    p.adam_step(params_p.data(), grads.data(), mp.data(), vp.data(), n, 1e-3, 0.9, 0.999,
                1e-8, 1e-5, 0.1, 0.001);
    CHECK(bits_equal(params_s, params_p));
    CHECK(bits_equal(ms, mp));
    CHECK(bits_equal(vs, vp));
  }
}

TEST_CASE("conv transpose is the adjoint of conv") {
  // <conv(x), y> must equal <x, conv_T(y)> when both share the weights
  Rng rng(5);
  ConvShape cs{2, 10, 10, 3, 5, 3, 1};
  auto x = rand_vec(cs.in_count(), rng);
  auto w = rand_vec(cs.weight_count(), rng);
  std::vector<double> zero_b(cs.out_ch, 0.0);
  std::vector<double> cx(cs.out_count());
  conv2d_forward(x.data(), w.data(), zero_b.data(), cx.data(), cs, 1);

  auto y = rand_vec(cs.out_count(), rng);
  // conv_T(y) via conv backward's input gradient
  std::vector<double> cty(cs.in_count());
  std::vector<double> dw(cs.weight_count()), db(cs.out_ch);
  conv2d_backward(x.data(), w.data(), y.data(), cty.data(), dw.data(), db.data(), cs, 1);

  double lhs = 0.0, rhs = 0.0;
  for (std::size_t i = 0; i < cx.size(); ++i) lhs += cx[i] * y[i];
  for (std::size_t i = 0; i < x.size(); ++i) rhs += x[i] * cty[i];
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("rng determinism and stream independence") {
  Rng a(123), b(123);
  for (int i = 0; i < 100; ++i) CHECK(a.uniform() == b.uniform());
  for (int i = 0; i < 100; ++i) CHECK(a.normal() == b.normal());

  Rng c(123);
  Rng d = c.split(1);
  Rng e = c.split(2);
  bool differs = false;
  for (int i = 0; i < 16; ++i) differs |= d.next_u64() != e.next_u64();
  CHECK(differs);

  Rng f(9);
  for (int i = 0; i < 1000; ++i) {
    const int64_t v = f.uniform_int(-3, 7);
    CHECK(v >= -3);
    CHECK(v <= 7);
  }
}

TEST_CASE("double text round-trip is exact") {
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const double v = (rng.uniform() - 0.5) * std::pow(10.0, rng.uniform(-20.0, 20.0));
    CHECK(parse_double(format_double(v)) == v);
  }
  CHECK(parse_double(format_double(0.0)) == 0.0);
  CHECK(parse_int("1e5") == 100000);
}

TEST_CASE("kv file parse and serialize") {
  const std::string text =
      "format_version = 1\n"
      "# comment\n"
      "[env]\n"
      "track = oval\n"
      "segment = straight 10\n"
      "segment = arc 5 1.5 left\n";
  KvFile kv = KvFile::parse(text);
  CHECK(kv.get_or("", "format_version", "") == "1");
  CHECK(kv.get_or("env", "track", "") == "oval");
  CHECK(kv.get_all("env", "segment").size() == 2);

  KvFile again = KvFile::parse(kv.serialize());
  CHECK(again.serialize() == kv.serialize());

  CHECK_THROWS_AS(KvFile::parse("key_without_value\n"), ConfigError);
}

TEST_CASE("fnv hashing is stable") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ull);
  CHECK(fnv1a64("a") != fnv1a64("b"));
  CHECK(hash_hex(0x1234abcdull).size() == 16);
}

}  // TEST_SUITE
