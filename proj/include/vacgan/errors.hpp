#pragma once

#include <stdexcept>
#include <string>

namespace vacgan {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ShapeMismatch : Error {
  using Error::Error;
};
struct NonFinite : Error {
  using Error::Error;
};
struct NotScalar : Error {
  using Error::Error;
};
struct DetachedOutput : Error {
  using Error::Error;
};
struct InvalidConfig : Error {
  using Error::Error;
};
struct Boundary : Error {
  using Error::Error;
};
struct ZeroDensity : Error {
  using Error::Error;
};
struct InfiniteDivergence : Error {
  using Error::Error;
};
struct EmptyBinRange : Error {
  using Error::Error;
};
struct DimensionMismatch : Error {
  using Error::Error;
};
struct AllWindowsDegenerate : Error {
  using Error::Error;
};
struct NoPairs : Error {
  using Error::Error;
};
struct IoError : Error {
  using Error::Error;
};
struct BadFormat : Error {
  using Error::Error;
};
struct BadLabel : Error {
  using Error::Error;
};
struct InvalidSpec : Error {
  using Error::Error;
};

}  // namespace vacgan
