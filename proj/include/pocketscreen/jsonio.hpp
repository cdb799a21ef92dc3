// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>

namespace pocketscreen {

// Whole-file read; DataError if the file cannot be opened.
std::string read_file(const std::string& path);

// Write, creating parent directories as needed.
void write_file(const std::string& path, const std::string& content);

// Hex fingerprint of a serialized artifact (FNV-1a 64).
std::string content_hash(const std::string& content);

}  // namespace pocketscreen
