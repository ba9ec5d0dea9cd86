#ifndef STATROB_ERRORS_HPP
#define STATROB_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace statrob {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidInput : Error {
  using Error::Error;
};

struct ShapeMismatch : Error {
  using Error::Error;
};

struct InsufficientData : Error {
  using Error::Error;
};

struct InsufficientChains : Error {
  using Error::Error;
};

// The approximate sampler's conditional collapsed: every weight quantized
// to zero. Callers decide the fallback (the chain runner uses argmin energy).
struct DegenerateDistribution : Error {
  using Error::Error;
};

struct InvalidState : Error {
  using Error::Error;
};

struct ParseError : Error {
  ParseError(const std::string& what, std::size_t byte_offset)
      : Error(what + " (byte offset " + std::to_string(byte_offset) + ")"),
        detail(what),
        offset(byte_offset) {}
  std::string detail;  // message without the offset suffix
  std::size_t offset;
};

struct Unsupported : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

}  // namespace statrob

#endif
