#pragma once

// Common Eigen aliases and error types shared by every module.

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace spt {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using IndexList = std::vector<Index>;

template <typename Scalar>
using VectorT = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixT = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Two series were sampled on different time grids.
struct GridError : Error {
  using Error::Error;
};
/// Requested partition depth exceeds the grid resolution.
struct RefinementError : Error {
  using Error::Error;
};
/// A stamp is not a point of the requested partition level.
struct PartitionError : Error {
  using Error::Error;
};
/// Input outside the mathematical domain (nonpositive price, G <= 0, ...).
struct DomainError : Error {
  using Error::Error;
};
struct ParameterError : Error {
  using Error::Error;
};
/// Derivative evaluation of a generating function failed.
struct GeneratorError : Error {
  using Error::Error;
};
struct ConfigError : Error {
  using Error::Error;
};
struct IoError : Error {
  using Error::Error;
};

}  // namespace spt
