#ifndef NCOMP_ERRORS_HPP
#define NCOMP_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace ncomp {

// Base class for all errors raised by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The compressed bit stream ended before decoding finished, or a container
// payload is otherwise unreadable.
class CorruptStreamError : public Error {
 public:
  using Error::Error;
};

// A container or model file does not carry the expected magic or version.
class FormatError : public Error {
 public:
  using Error::Error;
};

// The model referenced by a container does not match the model supplied for
// decoding, or a model file fails its own integrity check.
class ChecksumError : public Error {
 public:
  using Error::Error;
};

}  // namespace ncomp

#endif  // NCOMP_ERRORS_HPP
