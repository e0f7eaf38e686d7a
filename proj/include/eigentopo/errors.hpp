// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace eigentopo {

/// Invalid configuration or input file.
class ConfigError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Factorization breakdown, non-convergence, singular systems.
class NumericalError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// A target eigenvalue sits in a numerical multiplicity cluster.
class DegenerateEigenvalueError : public NumericalError
{
public:
  DegenerateEigenvalueError(const std::string& what, int index, int cluster_begin, int cluster_end)
      : NumericalError(what), index_(index), begin_(cluster_begin), end_(cluster_end)
  {
  }

  /// Zero-based index of the offending eigenvalue.
  [[nodiscard]] int index() const { return index_; }
  /// Half-open zero-based range of the cluster containing it.
  [[nodiscard]] int cluster_begin() const { return begin_; }
  [[nodiscard]] int cluster_end() const { return end_; }

private:
  int index_;
  int begin_;
  int end_;
};

/// Reference eigenvector nearly orthogonal to the new one: the sign cannot
/// be fixed, which usually means two eigenvalues crossed.
class SignConventionError : public NumericalError
{
public:
  using NumericalError::NumericalError;
};

/// The admissible set is empty (fixed regions violate the mean constraint).
class InfeasibleError : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace eigentopo
