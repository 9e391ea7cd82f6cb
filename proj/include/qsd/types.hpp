#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace qsd {

/// Largest state dimension handled by the library. Fixed-capacity vectors keep
/// the stepping loops free of heap allocations.
inline constexpr int kMaxDim = 3;

using State = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim, 1>;
using SmallMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, kMaxDim, kMaxDim>;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IntegrationFault : public Error {
 public:
  IntegrationFault(const std::string& what, State where) : Error(what), state(std::move(where)) {}
  State state;
};

class UnsupportedScheme : public Error {
 public:
  using Error::Error;
};

class InvalidStrength : public Error {
 public:
  using Error::Error;
};

class NoKillingObserved : public Error {
 public:
  using Error::Error;
};

class RankDeficiency : public Error {
 public:
  RankDeficiency(const std::string& what, long block) : Error(what), block_id(block) {}
  long block_id;
};

class DiagnosticUnavailable : public Error {
 public:
  using Error::Error;
};

class LoopOverflow : public Error {
 public:
  using Error::Error;
};

class FitRejected : public Error {
 public:
  using Error::Error;
};

class InvalidContraction : public Error {
 public:
  using Error::Error;
};

class GridMismatch : public Error {
 public:
  using Error::Error;
};

}  // namespace qsd
