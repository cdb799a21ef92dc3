// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace pocketscreen {

// Thrown on malformed input text (PDB / JSON-lines); message carries the line.
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown on bad configuration: unknown keys, invalid values, shape mismatches.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown on semantically invalid data: empty structures, degenerate metric
// inputs, missing files.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown when a numerical quantity leaves its valid domain (non-finite loss,
// vanishing norm).
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace pocketscreen
