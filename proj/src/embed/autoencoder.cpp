#include "fastrl/embed/autoencoder.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>

#include "fastrl/core/hash.hpp"
#include "fastrl/core/rng.hpp"
#include "fastrl/core/textio.hpp"
#include "fastrl/errors.hpp"

namespace fastrl::embed {

namespace {
constexpr char kMagic[8] = {'F', 'R', 'L', 'A', 'E', 'N', 'C', '1'};
constexpr uint32_t kVersion = 1;
}  // namespace

bool AutoencoderConfig::operator==(const AutoencoderConfig& o) const {
  if (resolution != o.resolution || in_channels != o.in_channels ||
      latent_dim != o.latent_dim || stages.size() != o.stages.size())
    return false;
  for (std::size_t i = 0; i < stages.size(); ++i) {
    const auto& a = stages[i];
    const auto& b = o.stages[i];
    if (a.channels != b.channels || a.kernel != b.kernel || a.stride != b.stride ||
        a.pad != b.pad)
      return false;
  }
  return true;
}

Autoencoder::Autoencoder(AutoencoderConfig cfg) : cfg_(std::move(cfg)) {
  if (cfg_.resolution <= 0 || cfg_.in_channels <= 0 || cfg_.latent_dim <= 0 ||
      cfg_.stages.empty())
    throw ConfigError("invalid autoencoder config");

  chans_.push_back(cfg_.in_channels);
  dims_.push_back(cfg_.resolution);
  for (const auto& st : cfg_.stages) {
    core::ConvShape cs;
    cs.in_ch = chans_.back();
    cs.in_h = cs.in_w = dims_.back();
    cs.out_ch = st.channels;
    cs.kernel = st.kernel;
    cs.stride = st.stride;
    cs.pad = st.pad;
    if (cs.out_h() <= 0)
      throw ConfigError("resolution too small for the convolution stack");
    enc_shapes_.push_back(cs);
    chans_.push_back(st.channels);
    dims_.push_back(cs.out_h());
  }
  flat_dim_ = chans_.back() * dims_.back() * dims_.back();

  // decoder mirrors the encoder; out_pad recovers each exact spatial size
  for (int i = static_cast<int>(cfg_.stages.size()) - 1; i >= 0; --i) {
    const auto& st = cfg_.stages[i];
    core::TConvShape ts;
    ts.in_ch = chans_[i + 1];
    ts.in_h = ts.in_w = dims_[i + 1];
    ts.out_ch = chans_[i];
    ts.kernel = st.kernel;
    ts.stride = st.stride;
    ts.pad = st.pad;
    ts.out_pad = 0;
    ts.out_pad = dims_[i] - ts.out_h();
    if (ts.out_pad < 0 || ts.out_h() != dims_[i])
      throw ConfigError("decoder cannot mirror the encoder shape");
    dec_shapes_.push_back(ts);
  }

  auto add_group = [&](const std::string& name, std::size_t count) {
    const std::size_t offset = params_.size();
    groups_.push_back({name, offset, count});
    params_.resize(offset + count, 0.0);
    return offset;
  };

  for (std::size_t i = 0; i < enc_shapes_.size(); ++i) {
    enc_w_.push_back(add_group("enc_conv" + std::to_string(i) + ".w",
                               enc_shapes_[i].weight_count()));
    enc_b_.push_back(add_group("enc_conv" + std::to_string(i) + ".b",
                               static_cast<std::size_t>(enc_shapes_[i].out_ch)));
  }
  enc_dense_w_ = add_group("enc_dense.w", std::size_t(cfg_.latent_dim) * flat_dim_);
  enc_dense_b_ = add_group("enc_dense.b", cfg_.latent_dim);
  dec_dense_w_ = add_group("dec_dense.w", std::size_t(flat_dim_) * cfg_.latent_dim);
  dec_dense_b_ = add_group("dec_dense.b", flat_dim_);
  for (std::size_t i = 0; i < dec_shapes_.size(); ++i) {
    dec_w_.push_back(add_group("dec_tconv" + std::to_string(i) + ".w",
                               dec_shapes_[i].weight_count()));
    dec_b_.push_back(add_group("dec_tconv" + std::to_string(i) + ".b",
                               static_cast<std::size_t>(dec_shapes_[i].out_ch)));
  }
}

void Autoencoder::init_weights(uint64_t seed) {
  core::Rng rng(seed);
  auto xavier = [&](std::size_t offset, std::size_t count, double fan_in, double fan_out) {
    const double a = std::sqrt(6.0 / (fan_in + fan_out));
    for (std::size_t i = 0; i < count; ++i) params_[offset + i] = rng.uniform(-a, a);
  };
  for (std::size_t i = 0; i < enc_shapes_.size(); ++i) {
    const auto& s = enc_shapes_[i];
    xavier(enc_w_[i], s.weight_count(), double(s.in_ch) * s.kernel * s.kernel,
           double(s.out_ch) * s.kernel * s.kernel);
    std::fill_n(params_.begin() + enc_b_[i], s.out_ch, 0.0);
  }
  xavier(enc_dense_w_, std::size_t(cfg_.latent_dim) * flat_dim_, flat_dim_, cfg_.latent_dim);
  std::fill_n(params_.begin() + enc_dense_b_, cfg_.latent_dim, 0.0);
  xavier(dec_dense_w_, std::size_t(flat_dim_) * cfg_.latent_dim, cfg_.latent_dim, flat_dim_);
  std::fill_n(params_.begin() + dec_dense_b_, flat_dim_, 0.0);
  for (std::size_t i = 0; i < dec_shapes_.size(); ++i) {
    const auto& s = dec_shapes_[i];
    xavier(dec_w_[i], s.weight_count(), double(s.in_ch) * s.kernel * s.kernel,
           double(s.out_ch) * s.kernel * s.kernel);
    std::fill_n(params_.begin() + dec_b_[i], s.out_ch, 0.0);
  }
}

std::vector<double> Autoencoder::stack_to_input(const FrameStack& stack) {
  std::vector<double> x(stack.data.size());
  for (std::size_t i = 0; i < stack.data.size(); ++i) x[i] = stack.data[i];
  return x;
}

void Autoencoder::encode_into(const double* x, int n, Cache& cache) const {
  cache.n = n;
  cache.enc_act.resize(enc_shapes_.size());
  const double* prev = x;
  for (std::size_t i = 0; i < enc_shapes_.size(); ++i) {
    const auto& s = enc_shapes_[i];
    auto& act = cache.enc_act[i];
    act.resize(std::size_t(n) * s.out_count());
    core::conv2d_forward(prev, params_.data() + enc_w_[i], params_.data() + enc_b_[i],
                         act.data(), s, n);
    core::tanh_forward(act.data(), act.data(), act.size());
    prev = act.data();
  }
  cache.latent.resize(std::size_t(n) * cfg_.latent_dim);
  core::dense_forward(prev, params_.data() + enc_dense_w_, params_.data() + enc_dense_b_,
                      cache.latent.data(), n, flat_dim_, cfg_.latent_dim);
}

void Autoencoder::forward(const double* x, int n, Cache& cache) const {
  encode_into(x, n, cache);

  cache.dec_dense_act.resize(std::size_t(n) * flat_dim_);
  core::dense_forward(cache.latent.data(), params_.data() + dec_dense_w_,
                      params_.data() + dec_dense_b_, cache.dec_dense_act.data(), n,
                      cfg_.latent_dim, flat_dim_);
  core::tanh_forward(cache.dec_dense_act.data(), cache.dec_dense_act.data(),
                     cache.dec_dense_act.size());

  cache.dec_act.resize(dec_shapes_.size() > 0 ? dec_shapes_.size() - 1 : 0);
  const double* prev = cache.dec_dense_act.data();
  for (std::size_t i = 0; i < dec_shapes_.size(); ++i) {
    const auto& s = dec_shapes_[i];
    const bool last = (i + 1 == dec_shapes_.size());
    std::vector<double>& out = last ? cache.recon : cache.dec_act[i];
    out.resize(std::size_t(n) * s.out_count());
    core::tconv2d_forward(prev, params_.data() + dec_w_[i], params_.data() + dec_b_[i],
                          out.data(), s, n);
    if (!last) {
      core::tanh_forward(out.data(), out.data(), out.size());
      prev = out.data();
    }
  }
}

void Autoencoder::backward(const double* x, int n, const Cache& cache,
                           const double* drecon, std::vector<double>& grads) const {
  grads.assign(params_.size(), 0.0);
  std::vector<double> d(drecon, drecon + std::size_t(n) * dec_shapes_.back().out_count());
  std::vector<double> d_prev;

  // decoder stages, last to first
  for (int i = static_cast<int>(dec_shapes_.size()) - 1; i >= 0; --i) {
    const auto& s = dec_shapes_[i];
    const double* input = (i == 0) ? cache.dec_dense_act.data() : cache.dec_act[i - 1].data();
    d_prev.resize(std::size_t(n) * s.in_count());
    core::tconv2d_backward(input, params_.data() + dec_w_[i], d.data(), d_prev.data(),
                           grads.data() + dec_w_[i], grads.data() + dec_b_[i], s, n);
    if (i > 0) {
      core::tanh_backward(cache.dec_act[i - 1].data(), d_prev.data(), d_prev.data(),
                          d_prev.size());
    }
    d.swap(d_prev);
  }

  // decoder dense (tanh applied on its output)
  core::tanh_backward(cache.dec_dense_act.data(), d.data(), d.data(), d.size());
  std::vector<double> dlatent(std::size_t(n) * cfg_.latent_dim);
  core::dense_backward(cache.latent.data(), params_.data() + dec_dense_w_, d.data(),
                       dlatent.data(), grads.data() + dec_dense_w_,
                       grads.data() + dec_dense_b_, n, cfg_.latent_dim, flat_dim_);

  // encoder dense
  const double* enc_top = cache.enc_act.back().data();
  std::vector<double> dflat(std::size_t(n) * flat_dim_);
  core::dense_backward(enc_top, params_.data() + enc_dense_w_, dlatent.data(), dflat.data(),
                       grads.data() + enc_dense_w_, grads.data() + enc_dense_b_, n,
                       flat_dim_, cfg_.latent_dim);

  // encoder stages, last to first
  d = std::move(dflat);
  for (int i = static_cast<int>(enc_shapes_.size()) - 1; i >= 0; --i) {
    const auto& s = enc_shapes_[i];
    core::tanh_backward(cache.enc_act[i].data(), d.data(), d.data(), d.size());
    const double* input = (i == 0) ? x : cache.enc_act[i - 1].data();
    const bool need_dx = i > 0;
    if (need_dx) d_prev.resize(std::size_t(n) * s.in_count());
    core::conv2d_backward(input, params_.data() + enc_w_[i], d.data(),
                          need_dx ? d_prev.data() : nullptr, grads.data() + enc_w_[i],
                          grads.data() + enc_b_[i], s, n);
    if (need_dx) d.swap(d_prev);
  }
}

std::vector<double> Autoencoder::encode(const FrameStack& stack) const {
  if (stack.resolution != cfg_.resolution ||
      static_cast<int>(stack.data.size()) != input_pixels())
    throw ShapeMismatch("frame stack does not match autoencoder input shape");
  std::vector<double> x = stack_to_input(stack);
  Cache cache;
  encode_into(x.data(), 1, cache);
  return cache.latent;
}

std::vector<double> Autoencoder::decode(const std::vector<double>& latent) const {
  if (static_cast<int>(latent.size()) != cfg_.latent_dim)
    throw ShapeMismatch("latent length does not match latent_dim");
  std::vector<double> flat(static_cast<std::size_t>(flat_dim_));
  core::dense_forward(latent.data(), params_.data() + dec_dense_w_,
                      params_.data() + dec_dense_b_, flat.data(), 1, cfg_.latent_dim,
                      flat_dim_);
  core::tanh_forward(flat.data(), flat.data(), flat.size());
  std::vector<double> cur = std::move(flat);
  for (std::size_t i = 0; i < dec_shapes_.size(); ++i) {
    const auto& s = dec_shapes_[i];
    std::vector<double> out(s.out_count());
    core::tconv2d_forward(cur.data(), params_.data() + dec_w_[i], params_.data() + dec_b_[i],
                          out.data(), s, 1);
    if (i + 1 < dec_shapes_.size()) core::tanh_forward(out.data(), out.data(), out.size());
    cur = std::move(out);
  }
  return cur;
}

double Autoencoder::reconstruction_mse(const FrameStack& stack) const {
  std::vector<double> x = stack_to_input(stack);
  Cache cache;
  forward(x.data(), 1, cache);
  return core::mse_loss(cache.recon.data(), x.data(), x.size());
}

void Autoencoder::save(const std::string& path) const {
  std::string out;
  out.append(kMagic, sizeof(kMagic));
  core::put_u32(out, kVersion);
  core::put_u32(out, static_cast<uint32_t>(cfg_.resolution));
  core::put_u32(out, static_cast<uint32_t>(cfg_.in_channels));
  core::put_u32(out, static_cast<uint32_t>(cfg_.latent_dim));
  core::put_u32(out, static_cast<uint32_t>(cfg_.stages.size()));
  for (const auto& st : cfg_.stages) {
    core::put_u32(out, static_cast<uint32_t>(st.channels));
    core::put_u32(out, static_cast<uint32_t>(st.kernel));
    core::put_u32(out, static_cast<uint32_t>(st.stride));
    core::put_u32(out, static_cast<uint32_t>(st.pad));
  }
  core::put_u64(out, params_.size());
  core::write_bytes(out, params_.data(), params_.size() * sizeof(double));
  core::put_u64(out, core::fnv1a64_bytes(out.data(), out.size()));
  core::write_file(path, out);
}

Autoencoder Autoencoder::load(const std::string& path) {
  const std::string data = core::read_file(path);
  if (data.size() < sizeof(kMagic) + 8) throw CorruptFile("autoencoder checkpoint too short");
  if (std::memcmp(data.data(), kMagic, sizeof(kMagic)) != 0)
    throw CorruptFile("bad autoencoder checkpoint magic");
  uint64_t file_sum;
  std::memcpy(&file_sum, data.data() + data.size() - 8, 8);
  if (file_sum != core::fnv1a64_bytes(data.data(), data.size() - 8))
    throw CorruptFile("autoencoder checkpoint checksum mismatch");

  std::string body = data.substr(sizeof(kMagic), data.size() - sizeof(kMagic) - 8);
  core::ByteReader r(body);
  const uint32_t version = r.get_u32();
  if (version != kVersion)
    throw VersionMismatch("autoencoder checkpoint version " + std::to_string(version));
  AutoencoderConfig cfg;
  cfg.resolution = static_cast<int>(r.get_u32());
  cfg.in_channels = static_cast<int>(r.get_u32());
  cfg.latent_dim = static_cast<int>(r.get_u32());
  const uint32_t n_stages = r.get_u32();
  cfg.stages.clear();
  for (uint32_t i = 0; i < n_stages; ++i) {
    ConvStageSpec st;
    st.channels = static_cast<int>(r.get_u32());
    st.kernel = static_cast<int>(r.get_u32());
    st.stride = static_cast<int>(r.get_u32());
    st.pad = static_cast<int>(r.get_u32());
    cfg.stages.push_back(st);
  }
  const uint64_t count = r.get_u64();
  Autoencoder ae(cfg);
  if (count != ae.params_.size())
    throw CorruptFile("autoencoder checkpoint parameter count mismatch");
  r.get_bytes(ae.params_.data(), count * sizeof(double));
  return ae;
}

AeTrainResult train_autoencoder(Autoencoder& ae, const std::vector<FrameStack>& dataset,
                                const AeTrainConfig& cfg, uint64_t seed) {
  if (dataset.size() < 10) throw EmptyDataset("need at least 10 stacks to train");
  if (cfg.patience < 1) throw ConfigError("patience must be >= 1");
  if (std::abs(cfg.train_frac + cfg.val_frac + cfg.test_frac - 1.0) > 1e-9)
    throw ConfigError("split fractions must sum to 1");
  if (cfg.batch_size < 1 || cfg.max_epochs < 1)
    throw ConfigError("batch_size and max_epochs must be positive");

  core::Rng rng(seed);
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = order.size(); i > 1; --i)
    std::swap(order[i - 1], order[rng.uniform_int(0, static_cast<int64_t>(i) - 1)]);

  const std::size_t n_train =
      std::max<std::size_t>(1, static_cast<std::size_t>(cfg.train_frac * dataset.size()));
  const std::size_t n_val = std::max<std::size_t>(
      1, static_cast<std::size_t>(cfg.val_frac * dataset.size()));
  std::vector<std::size_t> train_idx(order.begin(), order.begin() + n_train);
  std::vector<std::size_t> val_idx(order.begin() + n_train, order.begin() + n_train + n_val);
  std::vector<std::size_t> test_idx(order.begin() + n_train + n_val, order.end());

  const int pixels = ae.input_pixels();
  auto gather = [&](const std::vector<std::size_t>& idx, std::size_t begin, std::size_t count,
                    std::vector<double>& out) {
    out.resize(count * pixels);
    for (std::size_t i = 0; i < count; ++i) {
      const auto& stack = dataset[idx[begin + i]];
      if (static_cast<int>(stack.data.size()) != pixels)
        throw ShapeMismatch("dataset stack does not match autoencoder input");
      for (int p = 0; p < pixels; ++p) out[i * pixels + p] = stack.data[p];
    }
  };

  auto eval_split = [&](const std::vector<std::size_t>& idx) {
    if (idx.empty()) return 0.0;
    Autoencoder::Cache cache;
    std::vector<double> batch;
    double total = 0.0;
    std::size_t done = 0;
    while (done < idx.size()) {
      const std::size_t bn = std::min<std::size_t>(cfg.batch_size, idx.size() - done);
      gather(idx, done, bn, batch);
      ae.forward(batch.data(), static_cast<int>(bn), cache);
      total += core::mse_loss(cache.recon.data(), batch.data(), batch.size()) *
               static_cast<double>(bn);
      done += bn;
    }
    return total / static_cast<double>(idx.size());
  };

  std::vector<double> adam_m(ae.param_count(), 0.0), adam_v(ae.param_count(), 0.0);
  int64_t adam_t = 0;
  std::vector<double> grads, batch, drecon;
  Autoencoder::Cache cache;

  AeTrainResult result;
  double best_val = std::numeric_limits<double>::infinity();
  std::vector<double> best_params = ae.params();
  int stall = 0;

  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    for (std::size_t i = train_idx.size(); i > 1; --i)
      std::swap(train_idx[i - 1], train_idx[rng.uniform_int(0, static_cast<int64_t>(i) - 1)]);

    double train_total = 0.0;
    std::size_t done = 0;
    while (done < train_idx.size()) {
      const std::size_t bn = std::min<std::size_t>(cfg.batch_size, train_idx.size() - done);
      gather(train_idx, done, bn, batch);
      ae.forward(batch.data(), static_cast<int>(bn), cache);
      const double loss = core::mse_loss(cache.recon.data(), batch.data(), batch.size());
      if (!std::isfinite(loss)) throw DivergedTraining("training loss became non-finite");
      train_total += loss * static_cast<double>(bn);
      drecon.resize(batch.size());
      core::mse_grad(cache.recon.data(), batch.data(), drecon.data(), batch.size());
      ae.backward(batch.data(), static_cast<int>(bn), cache, drecon.data(), grads);
      ++adam_t;
      const double c1 = 1.0 - std::pow(0.9, static_cast<double>(adam_t));
      const double c2 = 1.0 - std::pow(0.999, static_cast<double>(adam_t));
      core::adam_step(ae.params().data(), grads.data(), adam_m.data(), adam_v.data(),
                      ae.param_count(), cfg.learning_rate, 0.9, 0.999, cfg.adam_eps,
                      cfg.weight_decay, c1, c2);
      done += bn;
    }

    AeEpochStats stats;
    stats.train_mse = train_total / static_cast<double>(train_idx.size());
    stats.val_mse = eval_split(val_idx);
    if (!std::isfinite(stats.val_mse))
      throw DivergedTraining("validation loss became non-finite");
    result.curves.push_back(stats);

    const bool significant = stats.val_mse < best_val - cfg.divergence_threshold;
    if (stats.val_mse < best_val) {
      best_val = stats.val_mse;
      best_params = ae.params();
      result.best_epoch = epoch;
    }
    stall = significant ? 0 : stall + 1;
    if (stall >= cfg.patience) break;
  }

  ae.params() = best_params;
  result.best_val_mse = best_val;
  result.test_mse = eval_split(test_idx);
  return result;
}

}  // namespace fastrl::embed
