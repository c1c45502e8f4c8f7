#pragma once

#include <stdexcept>
#include <string>

namespace mabs {

// Invalid experiment, sampler, or model configuration. The CLI maps this to
// exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input data (LIBSVM text, trace files, config JSON syntax).
// The CLI maps this to exit code 4.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Unreadable or unwritable file. The CLI maps this to exit code 4.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mabs
