#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace modspec {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidParameter : public Error {
 public:
  using Error::Error;
};

class IndexOutOfRange : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class ShapeMismatch : public DimensionMismatch {
 public:
  using DimensionMismatch::DimensionMismatch;
};

class GridMismatch : public Error {
 public:
  using Error::Error;
};

/// Raised when (-w^2 M + i w D + K) cannot be inverted at some grid point.
class SingularDynamicStiffness : public Error {
 public:
  SingularDynamicStiffness(double omega, const std::string& what)
      : Error(what), omega_(omega) {}
  double omega() const { return omega_; }

 private:
  double omega_;
};

/// Raised when (I - K_BB G_B) is numerically singular.
class IllPosedInterconnection : public Error {
 public:
  IllPosedInterconnection(double omega, double rcond, const std::string& what)
      : Error(what), omega_(omega), rcond_(rcond) {}
  double omega() const { return omega_; }
  double rcond() const { return rcond_; }

 private:
  double omega_;
  double rcond_;
};

class ZeroBaselineNorm : public Error {
 public:
  using Error::Error;
};

class NotSiso : public Error {
 public:
  using Error::Error;
};

class NotHermitian : public Error {
 public:
  using Error::Error;
};

class Infeasible : public Error {
 public:
  Infeasible(std::vector<double> omegas, const std::string& what)
      : Error(what), omegas_(std::move(omegas)) {}
  const std::vector<double>& omegas() const { return omegas_; }

 private:
  std::vector<double> omegas_;
};

class SolverFailure : public Error {
 public:
  using Error::Error;
};

/// A sampled counterexample to the module-to-system guarantee. Only an
/// implementation bug can produce this.
class GuaranteeViolated : public Error {
 public:
  GuaranteeViolated(std::size_t sample, double omega, double margin,
                    const std::string& what)
      : Error(what), sample_(sample), omega_(omega), margin_(margin) {}
  std::size_t sample() const { return sample_; }
  double omega() const { return omega_; }
  double margin() const { return margin_; }

 private:
  std::size_t sample_;
  double omega_;
  double margin_;
};

/// File or schema problems; `path` names the JSON path or CSV location.
class ParseError : public Error {
 public:
  ParseError(const std::string& file, const std::string& path,
             const std::string& what)
      : Error(file + ": " + path + ": " + what), file_(file), path_(path) {}
  const std::string& file() const { return file_; }
  const std::string& path() const { return path_; }

 private:
  std::string file_;
  std::string path_;
};

}  // namespace modspec
