#include "fastrl/core/textio.hpp"

#include <algorithm>
#include <cassert>
#include <cctype>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

#include "fastrl/core/hash.hpp"
#include "fastrl/errors.hpp"

namespace fastrl::core {

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view s) {
  const std::string t = trim(s);
  double v = 0.0;
  auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size())
    throw ConfigError("not a number: '" + t + "'");
  return v;
}

int64_t parse_int(std::string_view s) {
  const std::string t = trim(s);
  int64_t v = 0;
  auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size()) {
    // allow scientific notation like 1e5 for counts
    double d = parse_double(t);
    int64_t iv = static_cast<int64_t>(d);
    if (static_cast<double>(iv) != d)
      throw ConfigError("not an integer: '" + t + "'");
    return iv;
  }
  return v;
}

bool parse_bool(std::string_view s) {
  std::string t = to_lower(trim(s));
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw ConfigError("not a boolean: '" + std::string(s) + "'");
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.emplace_back(trim(s.substr(start)));
      break;
    }
    parts.emplace_back(trim(s.substr(start, pos - start)));
    start = pos + 1;
  }
  return parts;
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

KvFile KvFile::parse(std::string_view text) {
  KvFile kv;
  std::string section;
  kv.section_order_.push_back("");
  kv.sections_[""];
  std::size_t pos = 0;
  int lineno = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    std::string_view raw = (eol == std::string_view::npos) ? text.substr(pos)
                                                           : text.substr(pos, eol - pos);
    pos = (eol == std::string_view::npos) ? text.size() + 1 : eol + 1;
    ++lineno;
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("line " + std::to_string(lineno) + ": malformed section header");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      if (!kv.sections_.count(section)) {
        kv.section_order_.push_back(section);
        kv.sections_[section];
      }
      continue;
    }
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(std::string_view(line).substr(0, eq));
    std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key.empty())
      throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    // quoted values keep embedded whitespace and '#'
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
      value = value.substr(1, value.size() - 2);
    kv.sections_[section].push_back({key, value});
  }
  return kv;
}

KvFile KvFile::load(const std::string& path) { return parse(read_file(path)); }

std::string KvFile::serialize() const {
  std::ostringstream out;
  bool first = true;
  for (const auto& sec : section_order_) {
    auto it = sections_.find(sec);
    if (it == sections_.end()) continue;
    if (sec.empty() && it->second.empty()) continue;
    if (!sec.empty()) {
      if (!first) out << "\n";
      out << "[" << sec << "]\n";
    }
    first = false;
    for (const auto& e : it->second) {
      bool needs_quotes = !e.value.empty() &&
                          (e.value.find('#') != std::string::npos ||
                           e.value.front() == ' ' || e.value.back() == ' ');
      if (needs_quotes)
        out << e.key << " = \"" << e.value << "\"\n";
      else
        out << e.key << " = " << e.value << "\n";
    }
  }
  return out.str();
}

void KvFile::save(const std::string& path) const { write_file(path, serialize()); }

void KvFile::set(const std::string& section, const std::string& key, const std::string& value) {
  if (!sections_.count(section)) {
    section_order_.push_back(section);
    sections_[section];
  }
  auto& entries = sections_[section];
  for (auto& e : entries) {
    if (e.key == key) {
      e.value = value;
      return;
    }
  }
  entries.push_back({key, value});
}

void KvFile::append(const std::string& section, const std::string& key, const std::string& value) {
  if (!sections_.count(section)) {
    section_order_.push_back(section);
    sections_[section];
  }
  sections_[section].push_back({key, value});
}

bool KvFile::has(const std::string& section, const std::string& key) const {
  auto it = sections_.find(section);
  if (it == sections_.end()) return false;
  for (const auto& e : it->second)
    if (e.key == key) return true;
  return false;
}

std::optional<std::string> KvFile::get(const std::string& section, const std::string& key) const {
  auto it = sections_.find(section);
  if (it == sections_.end()) return std::nullopt;
  for (const auto& e : it->second)
    if (e.key == key) return e.value;
  return std::nullopt;
}

std::string KvFile::get_or(const std::string& section, const std::string& key,
                           const std::string& fallback) const {
  auto v = get(section, key);
  return v ? *v : fallback;
}

std::vector<std::string> KvFile::get_all(const std::string& section, const std::string& key) const {
  std::vector<std::string> out;
  auto it = sections_.find(section);
  if (it == sections_.end()) return out;
  for (const auto& e : it->second)
    if (e.key == key) out.push_back(e.value);
  return out;
}

const std::vector<KvFile::Entry>& KvFile::entries(const std::string& section) const {
  static const std::vector<Entry> empty;
  auto it = sections_.find(section);
  return it == sections_.end() ? empty : it->second;
}

std::vector<std::string> KvFile::keys(const std::string& section) const {
  std::vector<std::string> out;
  for (const auto& e : entries(section)) out.push_back(e.key);
  return out;
}

bool KvFile::has_section(const std::string& section) const {
  return sections_.count(section) != 0;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoFailure("read failed for " + path);
  return ss.str();
}

void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoFailure("cannot write " + path);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoFailure("write failed for " + path);
}

void write_bytes(std::string& out, const void* data, std::size_t len) {
  out.append(static_cast<const char*>(data), len);
}

void put_u32(std::string& out, uint32_t v) { write_bytes(out, &v, sizeof(v)); }
void put_u64(std::string& out, uint64_t v) { write_bytes(out, &v, sizeof(v)); }
void put_f64(std::string& out, double v) { write_bytes(out, &v, sizeof(v)); }

uint32_t ByteReader::get_u32() {
  uint32_t v;
  get_bytes(&v, sizeof(v));
  return v;
}

uint64_t ByteReader::get_u64() {
  uint64_t v;
  get_bytes(&v, sizeof(v));
  return v;
}

double ByteReader::get_f64() {
  double v;
  get_bytes(&v, sizeof(v));
  return v;
}

void ByteReader::get_bytes(void* dst, std::size_t len) {
  if (pos_ + len > data_.size()) throw CorruptFile("unexpected end of data");
  std::memcpy(dst, data_.data() + pos_, len);
  pos_ += len;
}

std::string hash_hex(uint64_t h) {
  char buf[17];
  static const char* digits = "0123456789abcdef";
  for (int i = 15; i >= 0; --i) {
    buf[i] = digits[h & 0xf];
    h >>= 4;
  }
  buf[16] = '\0';
  return std::string(buf);
}

uint64_t hash_file(const std::string& path) {
  std::string data = read_file(path);
  return fnv1a64_bytes(data.data(), data.size());
}

}  // namespace fastrl::core
