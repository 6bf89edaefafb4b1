#include "fastrl/embed/text_encoder.hpp"

#include <cctype>
#include <cmath>

#include "fastrl/core/hash.hpp"
#include "fastrl/core/textio.hpp"
#include "fastrl/errors.hpp"

namespace fastrl::embed {

std::vector<std::string> normalize_tokens(const std::string& description) {
  std::vector<std::string> tokens;
  std::string current;
  for (char raw : description) {
    const unsigned char c = static_cast<unsigned char>(raw);
    if (std::isalnum(c)) {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::vector<double> embed_text(const TextEncoderConfig& cfg, const std::string& description) {
  if (cfg.d_text <= 0) throw ConfigError("d_text must be positive");
  std::vector<std::string> tokens = normalize_tokens(description);
  if (tokens.empty()) throw EmptyDescription("description has no tokens");

  // boundary markers give single-token descriptions usable bigrams too
  std::vector<double> vec(static_cast<std::size_t>(cfg.d_text), 0.0);
  std::string prev = "\x02";
  tokens.push_back("\x03");
  for (const auto& tok : tokens) {
    const std::string bigram = prev + '\x1f' + tok;
    const uint64_t h = core::fnv1a64(bigram);
    vec[h % static_cast<uint64_t>(cfg.d_text)] += 1.0;
    prev = tok;
  }
  double norm = 0.0;
  for (double v : vec) norm += v * v;
  norm = std::sqrt(norm);
  for (double& v : vec) v /= norm;
  return vec;
}

TextEmbeddingTable TextEmbeddingTable::load(const std::string& path) {
  core::KvFile kv = core::KvFile::load(path);
  const int version = static_cast<int>(core::parse_int(kv.get_or("", "format_version", "1")));
  if (version != 1)
    throw VersionMismatch("text embedding table version " + std::to_string(version));
  TextEmbeddingTable table;
  for (const auto& e : kv.entries("embeddings")) {
    std::vector<double> vec;
    for (const auto& part : core::split(e.value, ','))
      vec.push_back(core::parse_double(part));
    table.entries_[e.key] = std::move(vec);
  }
  return table;
}

void TextEmbeddingTable::save(const std::string& path) const {
  core::KvFile kv;
  kv.set("", "format_version", "1");
  for (const auto& [task, vec] : entries_) {
    std::string joined;
    for (std::size_t i = 0; i < vec.size(); ++i) {
      if (i) joined += ",";
      joined += core::format_double(vec[i]);
    }
    kv.append("embeddings", task, joined);
  }
  kv.save(path);
}

void TextEmbeddingTable::set(const std::string& task, std::vector<double> vec) {
  entries_[task] = std::move(vec);
}

std::optional<std::vector<double>> TextEmbeddingTable::lookup(const std::string& task) const {
  auto it = entries_.find(task);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

}  // namespace fastrl::embed
