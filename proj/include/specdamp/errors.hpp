#pragma once

#include <complex>
#include <cstddef>
#include <sstream>
#include <stdexcept>
#include <string>

namespace specdamp {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Model assumptions violated, malformed input. Maps to CLI exit code 2.
class InvalidModel : public Error {
 public:
  explicit InvalidModel(std::string reason)
      : Error("invalid model: " + reason), reason_(std::move(reason)) {}
  const std::string& reason() const noexcept { return reason_; }

 private:
  std::string reason_;
};

class MissingEssentialSpectrumProxy : public Error {
 public:
  MissingEssentialSpectrumProxy()
      : Error("generic model has no declared essential-spectrum proxy; condition (iii) is undefined") {}
};

// Numerical failures. Map to CLI exit code 3.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class NotPositiveDefinite : public NumericalError {
 public:
  explicit NotPositiveDefinite(std::size_t pivot)
      : NumericalError("matrix is not positive definite (pivot " + std::to_string(pivot) + ")"),
        pivot_index(pivot) {}
  std::size_t pivot_index;
};

class Singular : public NumericalError {
 public:
  explicit Singular(std::size_t rank)
      : NumericalError("matrix is numerically singular (rank estimate " + std::to_string(rank) + ")"),
        rank_estimate(rank) {}
  std::size_t rank_estimate;
};

class NoConvergence : public NumericalError {
 public:
  NoConvergence(std::string what, std::size_t iterations, std::size_t block_lo = 0, std::size_t block_hi = 0)
      : NumericalError(what + " did not converge after " + std::to_string(iterations) + " iterations"),
        iterations(iterations), stuck_block_lo(block_lo), stuck_block_hi(block_hi) {}
  std::size_t iterations;
  std::size_t stuck_block_lo;
  std::size_t stuck_block_hi;
};

namespace detail {
inline std::string format_complex(std::complex<double> z) {
  std::ostringstream os;
  os.precision(10);
  os << z.real() << (z.imag() < 0 ? "-" : "+") << std::abs(z.imag()) << "i";
  return os.str();
}
}  // namespace detail

class IllConditionedCluster : public NumericalError {
 public:
  explicit IllConditionedCluster(std::complex<double> l)
      : NumericalError("eigenvector basis of cluster at " + detail::format_complex(l) + " is rank deficient"),
        lambda(l) {}
  std::complex<double> lambda;
};

class MixedClusterObstruction : public NumericalError {
 public:
  explicit MixedClusterObstruction(std::complex<double> l)
      : NumericalError("mixed sign cluster at " + detail::format_complex(l) + " prevents the split"),
        lambda(l) {}
  std::complex<double> lambda;
};

class NearSpectrum : public NumericalError {
 public:
  NearSpectrum(std::complex<double> l, double dist)
      : NumericalError("point " + detail::format_complex(l) + " lies within cluster tolerance of the spectrum"),
        lambda(l), distance(dist) {}
  std::complex<double> lambda;
  double distance;
};

class OptimizerDisagreement : public NumericalError {
 public:
  OptimizerDisagreement(double margin, double line_search_value)
      : NumericalError("overdamping detectors disagree: margin " + std::to_string(margin) +
                       ", definiteness line-search value " + std::to_string(line_search_value)),
        margin(margin), line_search_value(line_search_value) {}
  double margin;
  double line_search_value;
};

}  // namespace specdamp
