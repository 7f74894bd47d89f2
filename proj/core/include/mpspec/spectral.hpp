#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "mpspec/mp_law.hpp"

namespace mpspec {

/// Entry law of the data matrix. Both have mean 0, variance 1 and fourth
/// moment 3. `three_point` takes +/-sqrt(3) with probability 1/6 each and 0
/// with probability 2/3.
enum class EntryDistribution { gaussian, three_point };

/// p x n real data matrix with finite entries.
class DataMatrix {
 public:
  /// Throws PreconditionError on an empty matrix or a non-finite entry.
  explicit DataMatrix(Eigen::MatrixXd entries, std::optional<std::uint64_t> seed = std::nullopt);

  const Eigen::MatrixXd& entries() const noexcept { return entries_; }
  std::size_t p() const noexcept { return static_cast<std::size_t>(entries_.rows()); }
  std::size_t n() const noexcept { return static_cast<std::size_t>(entries_.cols()); }
  std::optional<std::uint64_t> seed() const noexcept { return seed_; }

 private:
  Eigen::MatrixXd entries_;
  std::optional<std::uint64_t> seed_;
};

/// I.i.d. entries from Rng(seed), filled column by column. Identical
/// (p, n, seed, distribution) give bit-identical matrices.
DataMatrix sample_data_matrix(std::size_t p, std::size_t n, std::uint64_t seed,
                              EntryDistribution distribution = EntryDistribution::gaussian);

/// A = X X^T / n, returned exactly symmetric.
Eigen::MatrixXd sample_covariance(const DataMatrix& x);

// ---------------------------------------------------------------------------
// Symmetric eigensolver: Householder reduction to tridiagonal form followed by
// implicit QL with Wilkinson shifts.

/// A = Q T Q^T with T tridiagonal. `transform` is Q when accumulated, else empty.
struct TridiagonalForm {
  std::vector<double> diagonal;
  std::vector<double> off_diagonal;  ///< size n - 1; entry i couples rows i and i + 1
  Eigen::MatrixXd transform;
};

TridiagonalForm householder_tridiagonalize(const Eigen::MatrixXd& a, bool accumulate = false);

struct SymmetricEigensystem {
  std::vector<double> values;  ///< nondecreasing
  Eigen::MatrixXd vectors;     ///< column k belongs to values[k]; empty if not requested
};

/// Eigenvalues (and optionally eigenvectors) of a symmetric tridiagonal
/// matrix. Throws ConvergenceError after 50 n QL sweeps.
SymmetricEigensystem tridiagonal_eigensystem(std::vector<double> diagonal,
                                             std::vector<double> off_diagonal,
                                             const Eigen::MatrixXd* initial_vectors = nullptr);

/// Full eigensystem of a symmetric matrix.
SymmetricEigensystem symmetric_eigensystem(const Eigen::MatrixXd& a);

/// All eigenvalues, nondecreasing. Throws PreconditionError if `a` is not
/// square or not symmetric to 1e-12 (relative to its largest entry), and
/// ConvergenceError if QL fails to converge.
std::vector<double> symmetric_eigenvalues(const Eigen::MatrixXd& a);

// ---------------------------------------------------------------------------

/// Eigenvalues of one sample covariance matrix with its (p, n) provenance.
class SpectralSample {
 public:
  /// Numerical zero floor for eigenvalues of X X^T / n.
  static constexpr double kZeroFloor = -1e-9;

  /// Any finite eigenvalues; they are sorted. Throws PreconditionError if the
  /// list is empty, contains non-finite values, or n == 0.
  SpectralSample(std::vector<double> eigenvalues, std::size_t n);

  /// Covariance, eigendecomposition and zero clamping in one step. Negative
  /// eigenvalues are set to 0; values below kZeroFloor also log a warning.
  static SpectralSample from_data(const DataMatrix& x);

  std::span<const double> eigenvalues() const noexcept { return eigenvalues_; }
  std::size_t p() const noexcept { return eigenvalues_.size(); }
  std::size_t n() const noexcept { return n_; }
  double aspect_ratio() const noexcept { return static_cast<double>(p()) / static_cast<double>(n_); }
  /// MP law at the finite-sample ratio c_n = p / n.
  MpLaw law() const { return MpLaw(aspect_ratio()); }

  double min() const noexcept { return eigenvalues_.front(); }
  double max() const noexcept { return eigenvalues_.back(); }

  /// Empirical spectral distribution (1/p) #{k : lambda_k <= x}.
  double esd(double x) const noexcept;

  /// (1/p) sum_k 1/(lambda_k - z). Throws DomainError when z is real and
  /// equals an eigenvalue.
  Complex stieltjes(Complex z) const;

 private:
  std::vector<double> eigenvalues_;
  std::size_t n_;
};

/// Malformed CSV input.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Header `eigenvalue`, then one value per line at 17 significant digits.
void write_eigenvalue_csv(std::ostream& out, std::span<const double> eigenvalues);
/// Throws FormatError on a missing header or a non-numeric row.
std::vector<double> read_eigenvalue_csv(std::istream& in);

}  // namespace mpspec
