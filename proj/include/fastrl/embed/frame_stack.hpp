#pragma once

#include <string>
#include <vector>

#include "fastrl/core/rng.hpp"
#include "fastrl/sim/env.hpp"

namespace fastrl::embed {

// Four consecutive grayscale frames stacked channel-wise (oldest first).
struct FrameStack {
  static constexpr int kFrames = 4;
  int resolution = 0;
  std::vector<float> data;  // kFrames * R * R, channel-major

  std::size_t size() const { return data.size(); }
  bool operator==(const FrameStack& o) const {
    return resolution == o.resolution && data == o.data;
  }
};

// Stacks exactly 4 frames; throws TooFewFrames / ShapeMismatch.
FrameStack make_stack(const std::vector<sim::Frame>& frames, std::size_t start);

// Uniformly chooses a start index so the stack is 4 consecutive frames.
FrameStack sample_frame_stack(const std::vector<sim::Frame>& episode_frames,
                              core::Rng& rng);

// Binary dataset: header (magic, version, resolution, count) followed by raw
// little-endian float32 stacks, then a checksum.
void save_frame_dataset(const std::vector<FrameStack>& stacks, const std::string& path);
std::vector<FrameStack> load_frame_dataset(const std::string& path);

}  // namespace fastrl::embed
