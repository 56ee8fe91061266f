#pragma once

#include <stdexcept>
#include <string>

namespace prfem {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed mesh input or a mesh that violates a topological invariant.
class MeshError : public Error {
public:
  using Error::Error;
};

/// A point or argument outside the domain of an operation.
class DomainError : public Error {
public:
  using Error::Error;
};

/// Least-squares reconstruction is not uniquely solvable on a patch.
class UnisolvenceError : public Error {
public:
  UnisolvenceError(int cell, const std::string &what)
      : Error(what), cell_(cell) {}
  int cell() const noexcept { return cell_; }

private:
  int cell_;
};

/// Factorization or eigen-solve failure.
class SolverError : public Error {
public:
  using Error::Error;
};

/// Invalid run configuration (CLI or config file).
class ConfigError : public Error {
public:
  using Error::Error;
};

} // namespace prfem
