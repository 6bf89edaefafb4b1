#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fastrl::embed {

struct TextEncoderConfig {
  int d_text = 128;
};

// Deterministic description embedding: case-folded, whitespace-normalized
// token bigrams (with boundary markers) hashed into d_text term-frequency
// buckets, then L2-normalized. Identical descriptions always map to identical
// vectors. Throws EmptyDescription when no tokens survive normalization.
std::vector<double> embed_text(const TextEncoderConfig& cfg, const std::string& description);

std::vector<std::string> normalize_tokens(const std::string& description);

// Optional externally computed embeddings, one `task = v0,v1,...` line each;
// used as a drop-in replacement for the hashed encoder.
class TextEmbeddingTable {
 public:
  static TextEmbeddingTable load(const std::string& path);
  void save(const std::string& path) const;

  void set(const std::string& task, std::vector<double> vec);
  std::optional<std::vector<double>> lookup(const std::string& task) const;
  bool empty() const { return entries_.empty(); }

 private:
  std::map<std::string, std::vector<double>> entries_;
};

}  // namespace fastrl::embed
