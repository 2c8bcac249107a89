#pragma once

#include <stdexcept>
#include <string>

namespace gea {

// Root of every error thrown by the library. The CLI maps the concrete
// subclasses onto process exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shape/channel/argument contract violated by the caller.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

// Normal-equation system of a matrix family is singular or too ill-conditioned
// for its parameters to be identifiable.
class DegenerateFit : public Error {
 public:
  DegenerateFit(std::string family, const std::string& what)
      : Error(what), family_(std::move(family)) {}
  const std::string& family() const noexcept { return family_; }

 private:
  std::string family_;
};

// Input content makes an objective undefined (e.g. zero-variance image for ZNCC).
class DegenerateInput : public Error {
 public:
  using Error::Error;
};

// Valid-region intersection is empty once the margin is applied.
class EmptyRegion : public Error {
 public:
  using Error::Error;
};

// Decode/encode/parse failures on files.
class DataError : public Error {
 public:
  using Error::Error;
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw InvalidInput(what);
}

}  // namespace gea
