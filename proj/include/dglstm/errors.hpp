#pragma once

#include <stdexcept>
#include <string>

namespace dglstm {

// Shape disagreement between tensors; the message names both shapes.
struct DimensionError : std::invalid_argument {
  explicit DimensionError(const std::string& what) : std::invalid_argument(what) {}
};

// Out-of-range token id or element index.
struct IndexError : std::out_of_range {
  explicit IndexError(const std::string& what) : std::out_of_range(what) {}
};

// API misuse: inconsistent arguments or invalid configuration values.
struct UsageError : std::invalid_argument {
  explicit UsageError(const std::string& what) : std::invalid_argument(what) {}
};

// Malformed checkpoint, vocabulary, corpus, or config file.
struct ParseError : std::runtime_error {
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

// Training loss became NaN/Inf; the message names the offending step.
struct DivergenceError : std::runtime_error {
  explicit DivergenceError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace dglstm
