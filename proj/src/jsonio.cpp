// SPDX-License-Identifier: Apache-2.0

#include "pocketscreen/jsonio.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pocketscreen/errors.hpp"
#include "pocketscreen/rng.hpp"

namespace pocketscreen {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write file: " + path);
  out << content;
  if (!out) throw DataError("write failed: " + path);
}

std::string content_hash(const std::string& content) {
  std::uint64_t h = fnv1a64(content.data(), content.size());
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace pocketscreen
