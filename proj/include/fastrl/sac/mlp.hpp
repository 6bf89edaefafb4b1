#pragma once

#include <string>
#include <vector>

#include "fastrl/core/rng.hpp"

namespace fastrl::sac {

struct MlpSpec {
  int input = 0;
  std::vector<int> hidden;
  int output = 0;

  bool operator==(const MlpSpec& o) const {
    return input == o.input && hidden == o.hidden && output == o.output;
  }
};

// Fully connected tanh network with a linear output layer; parameters live in
// one contiguous vector so optimizers and checkpoints treat them uniformly.
class Mlp {
 public:
  Mlp() = default;
  explicit Mlp(MlpSpec spec);

  void init_weights(core::Rng& rng);

  const MlpSpec& spec() const { return spec_; }
  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }
  std::size_t param_count() const { return params_.size(); }

  struct Cache {
    int n = 0;
    std::vector<std::vector<double>> acts;  // post-tanh per hidden layer
    std::vector<double> out;
  };

  void forward(const double* x, int n, Cache& cache) const;
  // dx may be null; grads must be param-sized (overwritten in this net's ranges).
  void backward(const double* x, int n, const Cache& cache, const double* dy,
                std::vector<double>& grads, double* dx) const;

 private:
  struct Layer {
    int in = 0, out = 0;
    std::size_t w = 0, b = 0;  // offsets into params_
  };

  MlpSpec spec_;
  std::vector<Layer> layers_;
  std::vector<double> params_;
};

}  // namespace fastrl::sac
