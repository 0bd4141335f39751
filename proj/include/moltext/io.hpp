//
// MolText - Copyright 2026 The MolText Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLTEXT_IO_HPP_
#define MOLTEXT_IO_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace moltext {

std::string read_file(const std::filesystem::path &path);
void write_file(const std::filesystem::path &path, std::string_view content);

// Splits on '\n'; a trailing newline does not produce an extra empty line.
std::vector<std::string> split_lines(std::string_view text);
std::vector<std::string> read_lines(const std::filesystem::path &path);

// FNV-1a over the raw bytes of a file, as a 16-digit hex string.  This is the
// content hash recorded in run manifests.
std::string file_content_hash(const std::filesystem::path &path);
std::string hash_hex(uint64_t value);

// Little-endian binary primitives for stream/checkpoint files.
void write_u32(std::ostream &os, uint32_t v);
void write_u64(std::ostream &os, uint64_t v);
uint32_t read_u32(std::istream &is);
uint64_t read_u64(std::istream &is);
void write_bytes(std::ostream &os, const void *data, size_t n);
void read_bytes(std::istream &is, void *data, size_t n);

}  // namespace moltext

#endif  // MOLTEXT_IO_HPP_
