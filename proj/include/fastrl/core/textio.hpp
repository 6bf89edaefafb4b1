#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fastrl::core {

// Exact decimal round-trip for doubles (shortest representation).
std::string format_double(double v);
double parse_double(std::string_view s);
int64_t parse_int(std::string_view s);
bool parse_bool(std::string_view s);

std::string to_lower(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);
std::string trim(std::string_view s);

// The structured-text format used by configs, track files and manifests:
// `key = value` lines grouped under `[section]` headers, `#` comments,
// repeated keys preserved in order. The top (unnamed) section holds keys
// appearing before any header, e.g. format_version.
class KvFile {
 public:
  struct Entry {
    std::string key;
    std::string value;
  };

  static KvFile parse(std::string_view text);
  static KvFile load(const std::string& path);

  std::string serialize() const;
  void save(const std::string& path) const;

  void set(const std::string& section, const std::string& key, const std::string& value);
  void append(const std::string& section, const std::string& key, const std::string& value);

  bool has(const std::string& section, const std::string& key) const;
  std::optional<std::string> get(const std::string& section, const std::string& key) const;
  std::string get_or(const std::string& section, const std::string& key,
                     const std::string& fallback) const;
  std::vector<std::string> get_all(const std::string& section, const std::string& key) const;

  const std::vector<std::string>& section_order() const { return section_order_; }
  const std::vector<Entry>& entries(const std::string& section) const;
  std::vector<std::string> keys(const std::string& section) const;
  bool has_section(const std::string& section) const;

 private:
  std::vector<std::string> section_order_;
  std::map<std::string, std::vector<Entry>> sections_;
};

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

// Binary helpers, little-endian on every supported host.
void write_bytes(std::string& out, const void* data, std::size_t len);
void put_u32(std::string& out, uint32_t v);
void put_u64(std::string& out, uint64_t v);
void put_f64(std::string& out, double v);

class ByteReader {
 public:
  ByteReader(const std::string& data) : data_(data) {}
  uint32_t get_u32();
  uint64_t get_u64();
  double get_f64();
  void get_bytes(void* dst, std::size_t len);
  std::size_t remaining() const { return data_.size() - pos_; }
  std::size_t pos() const { return pos_; }

 private:
  const std::string& data_;
  std::size_t pos_ = 0;
};

}  // namespace fastrl::core
