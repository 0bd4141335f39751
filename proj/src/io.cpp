//
// MolText - Copyright 2026 The MolText Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "moltext/io.hpp"

#include <fstream>
#include <sstream>

#include "moltext/error.hpp"
#include "moltext/hash.hpp"

namespace moltext {

std::string read_file(const std::filesystem::path &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(Errc::kData, "cannot open file: " + path.string());
  std::ostringstream buf;
  buf << is.rdbuf();
  if (is.bad()) throw Error(Errc::kData, "read failed: " + path.string());
  return std::move(buf).str();
}

void write_file(const std::filesystem::path &path, std::string_view content) {
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error(Errc::kData, "cannot open for write: " + path.string());
  os.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!os) throw Error(Errc::kData, "write failed: " + path.string());
}

std::vector<std::string> split_lines(std::string_view text) {
  std::vector<std::string> lines;
  size_t start = 0;
  while (start <= text.size()) {
    size_t end = text.find('\n', start);
    if (end == std::string_view::npos) {
      if (start < text.size()) lines.emplace_back(text.substr(start));
      break;
    }
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.emplace_back(line);
    start = end + 1;
  }
  return lines;
}

std::vector<std::string> read_lines(const std::filesystem::path &path) {
  return split_lines(read_file(path));
}

std::string hash_hex(uint64_t value) {
  static const char *digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<size_t>(i)] = digits[value & 0xf];
    value >>= 4;
  }
  return out;
}

std::string file_content_hash(const std::filesystem::path &path) {
  return hash_hex(fnv1a64(read_file(path)));
}

void write_u32(std::ostream &os, uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(b, 4);
}

void write_u64(std::ostream &os, uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(b, 8);
}

uint32_t read_u32(std::istream &is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char *>(b), 4);
  if (!is) throw Error(Errc::kData, "truncated binary input");
  uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

uint64_t read_u64(std::istream &is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char *>(b), 8);
  if (!is) throw Error(Errc::kData, "truncated binary input");
  uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

void write_bytes(std::ostream &os, const void *data, size_t n) {
  os.write(static_cast<const char *>(data), static_cast<std::streamsize>(n));
}

void read_bytes(std::istream &is, void *data, size_t n) {
  is.read(static_cast<char *>(data), static_cast<std::streamsize>(n));
  if (!is) throw Error(Errc::kData, "truncated binary input");
}

}  // namespace moltext
