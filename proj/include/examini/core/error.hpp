#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace examini {

/// Base class of every error raised by the library. `kind()` is a stable
/// identifier (e.g. "NegativePressure") used by the CLI and by tests.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(kind + ": " + what), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define EXAMINI_DEFINE_ERROR(Name)                                  \
  class Name : public ::examini::Error {                            \
   public:                                                          \
    explicit Name(const std::string& what) : Error(#Name, what) {} \
  }

EXAMINI_DEFINE_ERROR(InvalidArgument);
EXAMINI_DEFINE_ERROR(IoFailure);
EXAMINI_DEFINE_ERROR(NeighborTimeout);
EXAMINI_DEFINE_ERROR(RankAborted);

}  // namespace examini
