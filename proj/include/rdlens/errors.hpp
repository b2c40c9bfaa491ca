#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rdlens {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidDistribution : Error {
  using Error::Error;
};

struct DimensionMismatch : Error {
  using Error::Error;
};

struct AbsoluteContinuityViolation : Error {
  using Error::Error;
};

struct InvalidGeometry : Error {
  using Error::Error;
};

struct BracketFailure : Error {
  BracketFailure(const std::string& msg, double lo_mi, double hi_mi)
      : Error(msg), bracket_lo_mi(lo_mi), bracket_hi_mi(hi_mi) {}
  double bracket_lo_mi;
  double bracket_hi_mi;
};

struct NonFiniteLoss : Error {
  using Error::Error;
};

struct DivergedLoss : Error {
  DivergedLoss(const std::string& msg, std::size_t at_step)
      : Error(msg), step(at_step) {}
  std::size_t step;
};

struct SchemaError : Error {
  using Error::Error;
};

struct InvalidConfig : Error {
  using Error::Error;
};

}  // namespace rdlens
