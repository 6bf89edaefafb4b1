#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fastrl/core/kernels.hpp"
#include "fastrl/embed/frame_stack.hpp"

namespace fastrl::embed {

struct ConvStageSpec {
  int channels = 0;
  int kernel = 5;
  int stride = 3;
  int pad = 1;
};

struct AutoencoderConfig {
  int resolution = 64;
  int in_channels = FrameStack::kFrames;
  std::vector<ConvStageSpec> stages = {{64}, {128}, {128}};
  int latent_dim = 128;

  bool operator==(const AutoencoderConfig& o) const;
};

// Convolutional frame-stack autoencoder. Encoder: conv+tanh stages, flatten,
// linear projection to the latent vector. Decoder mirrors the encoder with
// transposed convolutions; the reconstruction layer is linear so a zeroed
// network reproduces its bias. All parameters live in one contiguous vector.
class Autoencoder {
 public:
  explicit Autoencoder(AutoencoderConfig cfg);

  void init_weights(uint64_t seed);

  const AutoencoderConfig& config() const { return cfg_; }
  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }
  std::size_t param_count() const { return params_.size(); }

  struct ParamGroup {
    std::string name;
    std::size_t offset = 0;
    std::size_t count = 0;
  };
  const std::vector<ParamGroup>& param_groups() const { return groups_; }

  int input_pixels() const { return cfg_.in_channels * cfg_.resolution * cfg_.resolution; }
  int latent_dim() const { return cfg_.latent_dim; }

  // Deterministic forward passes; throw ShapeMismatch on wrong input shape.
  std::vector<double> encode(const FrameStack& stack) const;
  std::vector<double> decode(const std::vector<double>& latent) const;

  struct Cache {
    int n = 0;
    std::vector<std::vector<double>> enc_act;  // post-tanh per encoder stage
    std::vector<double> latent;
    std::vector<double> dec_dense_act;         // post-tanh
    std::vector<std::vector<double>> dec_act;  // post-tanh per decoder stage (except last)
    std::vector<double> recon;
  };

  void forward(const double* x, int n, Cache& cache) const;
  // drecon is dLoss/dRecon for the batch; grads receives dLoss/dParams.
  void backward(const double* x, int n, const Cache& cache, const double* drecon,
                std::vector<double>& grads) const;

  double reconstruction_mse(const FrameStack& stack) const;

  void save(const std::string& path) const;
  static Autoencoder load(const std::string& path);

  static std::vector<double> stack_to_input(const FrameStack& stack);

 private:
  void encode_into(const double* x, int n, Cache& cache) const;

  AutoencoderConfig cfg_;
  std::vector<double> params_;
  std::vector<ParamGroup> groups_;

  std::vector<int> chans_;                 // [in_channels, stage channels...]
  std::vector<int> dims_;                  // spatial size per level, dims_[0] = R
  int flat_dim_ = 0;
  std::vector<core::ConvShape> enc_shapes_;
  std::vector<core::TConvShape> dec_shapes_;
  // parameter offsets
  std::vector<std::size_t> enc_w_, enc_b_;
  std::size_t enc_dense_w_ = 0, enc_dense_b_ = 0;
  std::size_t dec_dense_w_ = 0, dec_dense_b_ = 0;
  std::vector<std::size_t> dec_w_, dec_b_;
};

struct AeTrainConfig {
  double learning_rate = 1e-3;
  int batch_size = 32;
  double weight_decay = 1e-7;
  int max_epochs = 100;
  int patience = 5;
  double divergence_threshold = 1e-5;
  double train_frac = 0.6;
  double val_frac = 0.2;
  double test_frac = 0.2;
  double adam_eps = 1e-8;
};

struct AeEpochStats {
  double train_mse = 0.0;
  double val_mse = 0.0;
};

struct AeTrainResult {
  std::vector<AeEpochStats> curves;
  int best_epoch = -1;
  double best_val_mse = 0.0;
  double test_mse = 0.0;
};

// Trains in place, restoring the best-validation-epoch weights on return.
// Early-stops after `patience` epochs without an improvement larger than
// divergence_threshold. Throws EmptyDataset (< 10 stacks) and
// DivergedTraining (non-finite loss).
AeTrainResult train_autoencoder(Autoencoder& ae, const std::vector<FrameStack>& dataset,
                                const AeTrainConfig& cfg, uint64_t seed);

}  // namespace fastrl::embed
