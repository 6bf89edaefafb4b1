#include "fastrl/embed/frame_stack.hpp"

#include <cstring>

#include "fastrl/core/hash.hpp"
#include "fastrl/core/textio.hpp"
#include "fastrl/errors.hpp"

namespace fastrl::embed {

namespace {
constexpr char kMagic[8] = {'F', 'R', 'L', 'F', 'D', 'A', 'T', 'A'};
constexpr uint32_t kVersion = 1;
}  // namespace

FrameStack make_stack(const std::vector<sim::Frame>& frames, std::size_t start) {
  if (frames.size() < FrameStack::kFrames || start + FrameStack::kFrames > frames.size())
    throw TooFewFrames("need 4 consecutive frames");
  FrameStack stack;
  stack.resolution = frames[start].resolution;
  const std::size_t px = static_cast<std::size_t>(stack.resolution) * stack.resolution;
  stack.data.reserve(px * FrameStack::kFrames);
  for (int i = 0; i < FrameStack::kFrames; ++i) {
    const auto& f = frames[start + i];
    if (f.resolution != stack.resolution || f.pixels.size() != px)
      throw ShapeMismatch("frame resolution changed inside a stack");
    stack.data.insert(stack.data.end(), f.pixels.begin(), f.pixels.end());
  }
  return stack;
}

FrameStack sample_frame_stack(const std::vector<sim::Frame>& episode_frames,
                              core::Rng& rng) {
  if (episode_frames.size() < FrameStack::kFrames)
    throw TooFewFrames("episode has fewer than 4 frames");
  const int64_t max_start =
      static_cast<int64_t>(episode_frames.size()) - FrameStack::kFrames;
  const int64_t start = max_start == 0 ? 0 : rng.uniform_int(0, max_start);
  return make_stack(episode_frames, static_cast<std::size_t>(start));
}

void save_frame_dataset(const std::vector<FrameStack>& stacks, const std::string& path) {
  std::string out;
  out.append(kMagic, sizeof(kMagic));
  core::put_u32(out, kVersion);
  const uint32_t res = stacks.empty() ? 0 : static_cast<uint32_t>(stacks[0].resolution);
  core::put_u32(out, res);
  core::put_u32(out, static_cast<uint32_t>(stacks.size()));
  for (const auto& s : stacks) {
    if (static_cast<uint32_t>(s.resolution) != res)
      throw ShapeMismatch("all stacks in a dataset must share a resolution");
    core::write_bytes(out, s.data.data(), s.data.size() * sizeof(float));
  }
  core::put_u64(out, core::fnv1a64_bytes(out.data(), out.size()));
  core::write_file(path, out);
}

std::vector<FrameStack> load_frame_dataset(const std::string& path) {
  const std::string data = core::read_file(path);
  if (data.size() < sizeof(kMagic) + 12 + 8) throw CorruptFile("frame dataset too short");
  if (std::memcmp(data.data(), kMagic, sizeof(kMagic)) != 0)
    throw CorruptFile("bad frame dataset magic");
  const uint64_t stored_sum = core::fnv1a64_bytes(data.data(), data.size() - 8);
  uint64_t file_sum;
  std::memcpy(&file_sum, data.data() + data.size() - 8, 8);
  if (file_sum != stored_sum) throw CorruptFile("frame dataset checksum mismatch");

  std::size_t pos = sizeof(kMagic);
  auto read_u32 = [&](const char* what) {
    if (pos + 4 > data.size()) throw CorruptFile(std::string("truncated ") + what);
    uint32_t v;
    std::memcpy(&v, data.data() + pos, 4);
    pos += 4;
    return v;
  };
  const uint32_t version = read_u32("version");
  if (version != kVersion)
    throw VersionMismatch("frame dataset version " + std::to_string(version));
  const uint32_t res = read_u32("resolution");
  const uint32_t count = read_u32("count");
  const std::size_t stack_bytes =
      static_cast<std::size_t>(res) * res * FrameStack::kFrames * sizeof(float);
  std::vector<FrameStack> stacks;
  stacks.reserve(count);
  for (uint32_t i = 0; i < count; ++i) {
    if (pos + stack_bytes > data.size() - 8) throw CorruptFile("truncated stack data");
    FrameStack s;
    s.resolution = static_cast<int>(res);
    s.data.resize(stack_bytes / sizeof(float));
    std::memcpy(s.data.data(), data.data() + pos, stack_bytes);
    pos += stack_bytes;
    stacks.push_back(std::move(s));
  }
  return stacks;
}

}  // namespace fastrl::embed
