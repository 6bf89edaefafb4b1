#pragma once

#include <cstdint>
#include <vector>

#include "fastrl/core/rng.hpp"
#include "fastrl/errors.hpp"

namespace fastrl::sac {

struct SacBatch {
  int n = 0;
  int obs_dim = 0, act_dim = 0;
  std::vector<double> obs, act, next_obs;
  std::vector<double> rew;
  std::vector<double> done;
};

// Fixed-capacity ring buffer of transitions with uniform sampling.
class ReplayBuffer {
 public:
  ReplayBuffer(int obs_dim, int act_dim, std::size_t capacity)
      : obs_dim_(obs_dim), act_dim_(act_dim), capacity_(capacity) {
    if (capacity == 0) throw ConfigError("replay capacity must be positive");
    obs_.resize(capacity * obs_dim);
    act_.resize(capacity * act_dim);
    next_obs_.resize(capacity * obs_dim);
    rew_.resize(capacity);
    done_.resize(capacity);
  }

  void add(const double* obs, const double* act, double reward, const double* next_obs,
           bool done) {
    const std::size_t i = cursor_;
    std::copy(obs, obs + obs_dim_, obs_.begin() + i * obs_dim_);
    std::copy(act, act + act_dim_, act_.begin() + i * act_dim_);
    std::copy(next_obs, next_obs + obs_dim_, next_obs_.begin() + i * obs_dim_);
    rew_[i] = reward;
    done_[i] = done ? 1.0 : 0.0;
    cursor_ = (cursor_ + 1) % capacity_;
    if (size_ < capacity_) ++size_;
  }

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }
  std::size_t write_cursor() const { return cursor_; }

  double reward_at(std::size_t slot) const { return rew_[slot]; }

  void sample(int batch, core::Rng& rng, SacBatch& out) const {
    out.n = batch;
    out.obs_dim = obs_dim_;
    out.act_dim = act_dim_;
    out.obs.resize(std::size_t(batch) * obs_dim_);
    out.act.resize(std::size_t(batch) * act_dim_);
    out.next_obs.resize(std::size_t(batch) * obs_dim_);
    out.rew.resize(batch);
    out.done.resize(batch);
    for (int b = 0; b < batch; ++b) {
      const std::size_t i =
          static_cast<std::size_t>(rng.uniform_int(0, static_cast<int64_t>(size_) - 1));
      std::copy(obs_.begin() + i * obs_dim_, obs_.begin() + (i + 1) * obs_dim_,
                out.obs.begin() + std::size_t(b) * obs_dim_);
      std::copy(act_.begin() + i * act_dim_, act_.begin() + (i + 1) * act_dim_,
                out.act.begin() + std::size_t(b) * act_dim_);
      std::copy(next_obs_.begin() + i * obs_dim_, next_obs_.begin() + (i + 1) * obs_dim_,
                out.next_obs.begin() + std::size_t(b) * obs_dim_);
      out.rew[b] = rew_[i];
      out.done[b] = done_[i];
    }
  }

 private:
  int obs_dim_, act_dim_;
  std::size_t capacity_;
  std::size_t size_ = 0;
  std::size_t cursor_ = 0;
  std::vector<double> obs_, act_, next_obs_, rew_, done_;
};

}  // namespace fastrl::sac
