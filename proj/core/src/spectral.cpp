#include "mpspec/spectral.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <limits>
#include <numeric>
#include <string>

#include "mpspec/error.hpp"
#include "mpspec/rng.hpp"

namespace mpspec {

DataMatrix::DataMatrix(Eigen::MatrixXd entries, std::optional<std::uint64_t> seed)
    : entries_(std::move(entries)), seed_(seed) {
  if (entries_.rows() < 1 || entries_.cols() < 1) throw PreconditionError("data matrix must be at least 1 x 1");
  if (!entries_.allFinite()) throw PreconditionError("data matrix has non-finite entries");
}

DataMatrix sample_data_matrix(std::size_t p, std::size_t n, std::uint64_t seed,
                              EntryDistribution distribution) {
  if (p < 1 || n < 1) throw PreconditionError("data matrix dimensions must be positive");
  Rng rng(seed);
  Eigen::MatrixXd x(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(n));
  const double root3 = std::sqrt(3.0);
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      if (distribution == EntryDistribution::gaussian) {
        x(i, j) = rng.gaussian();
      } else {
        // 64-bit draw reduced mod 6: bias is below 2^-60.
        const auto k = rng.next_u64() % 6;
        x(i, j) = k == 0 ? root3 : (k == 1 ? -root3 : 0.0);
      }
    }
  }
  return DataMatrix(std::move(x), seed);
}

Eigen::MatrixXd sample_covariance(const DataMatrix& x) {
  const auto p = static_cast<Eigen::Index>(x.p());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(p, p);
  a.selfadjointView<Eigen::Lower>().rankUpdate(x.entries(), 1.0 / static_cast<double>(x.n()));
  a.triangularView<Eigen::StrictlyUpper>() = a.transpose();
  return a;
}

TridiagonalForm householder_tridiagonalize(const Eigen::MatrixXd& input, bool accumulate) {
  const Eigen::Index n = input.rows();
  Eigen::MatrixXd a = input;
  std::vector<double> tau(n > 2 ? static_cast<std::size_t>(n - 2) : 0, 0.0);
  TridiagonalForm out;
  out.diagonal.resize(static_cast<std::size_t>(n));
  out.off_diagonal.resize(n > 0 ? static_cast<std::size_t>(n - 1) : 0);

  // Lower-triangle storage; reflector k zeroes a(k+2:, k) and its vector
  // (with implicit leading 1) is kept in a(k+2:, k).
  for (Eigen::Index k = 0; k + 2 < n; ++k) {
    const Eigen::Index m = n - k - 1;
    auto x = a.col(k).tail(m);
    const double alpha = x(0);
    const double sigma = x.tail(m - 1).squaredNorm();
    if (sigma == 0.0) {
      out.off_diagonal[static_cast<std::size_t>(k)] = alpha;
      continue;
    }
    const double beta = -std::copysign(std::sqrt(alpha * alpha + sigma), alpha);
    const double t = (beta - alpha) / beta;
    x.tail(m - 1) /= (alpha - beta);
    x(0) = 1.0;
    tau[static_cast<std::size_t>(k)] = t;
    out.off_diagonal[static_cast<std::size_t>(k)] = beta;

    auto trailing = a.bottomRightCorner(m, m);
    const Eigen::VectorXd v = x;
    Eigen::VectorXd w = t * (trailing.selfadjointView<Eigen::Lower>() * v);
    w -= (0.5 * t * w.dot(v)) * v;
    trailing.selfadjointView<Eigen::Lower>().rankUpdate(v, w, -1.0);
  }
  for (Eigen::Index i = 0; i < n; ++i) out.diagonal[static_cast<std::size_t>(i)] = a(i, i);
  if (n >= 2) out.off_diagonal[static_cast<std::size_t>(n - 2)] = a(n - 1, n - 2);

  if (accumulate) {
    Eigen::MatrixXd q = Eigen::MatrixXd::Identity(n, n);
    for (Eigen::Index k = n - 3; k >= 0; --k) {
      const double t = tau[static_cast<std::size_t>(k)];
      if (t == 0.0) continue;
      const Eigen::Index m = n - k - 1;
      Eigen::VectorXd v = a.col(k).tail(m);
      v(0) = 1.0;
      auto block = q.bottomRightCorner(m, m);
      const Eigen::RowVectorXd vtq = v.transpose() * block;
      block.noalias() -= t * v * vtq;
    }
    out.transform = std::move(q);
  }
  return out;
}

SymmetricEigensystem tridiagonal_eigensystem(std::vector<double> d, std::vector<double> off,
                                             const Eigen::MatrixXd* initial_vectors) {
  const std::size_t n = d.size();
  if (n == 0) throw PreconditionError("empty tridiagonal matrix");
  if (off.size() + 1 != n) throw PreconditionError("off-diagonal must have n - 1 entries");
  std::vector<double> e(n, 0.0);
  std::copy(off.begin(), off.end(), e.begin());

  const bool vectors = initial_vectors != nullptr;
  Eigen::MatrixXd z;
  if (vectors) {
    z = *initial_vectors;
    if (z.cols() != static_cast<Eigen::Index>(n)) throw PreconditionError("initial vectors have wrong shape");
  }

  const std::size_t sweep_cap = 50 * n;
  std::size_t sweeps = 0;
  constexpr double eps = std::numeric_limits<double>::epsilon();

  for (std::size_t l = 0; l < n; ++l) {
    while (true) {
      std::size_t m = l;
      for (; m + 1 < n; ++m) {
        if (std::abs(e[m]) <= eps * (std::abs(d[m]) + std::abs(d[m + 1]))) break;
      }
      if (m == l) break;
      if (++sweeps > sweep_cap)
        throw ConvergenceError("tridiagonal QL did not converge within 50 n sweeps");

      // Wilkinson shift from the leading 2 x 2 block of the unreduced part.
      double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
      double r = std::hypot(g, 1.0);
      g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
      double s = 1.0;
      double c = 1.0;
      double shift_acc = 0.0;
      bool deflated = false;
      for (std::size_t i = m; i-- > l;) {
        const double f = s * e[i];
        const double b = c * e[i];
        r = std::hypot(f, g);
        e[i + 1] = r;
        if (r == 0.0) {
          d[i + 1] -= shift_acc;
          e[m] = 0.0;
          deflated = true;
          break;
        }
        s = f / r;
        c = g / r;
        g = d[i + 1] - shift_acc;
        r = (d[i] - g) * s + 2.0 * c * b;
        shift_acc = s * r;
        d[i + 1] = g + shift_acc;
        g = c * r - b;
        if (vectors) {
          auto zi = z.col(static_cast<Eigen::Index>(i));
          auto zi1 = z.col(static_cast<Eigen::Index>(i + 1));
          const Eigen::VectorXd tmp = zi1;
          zi1 = s * zi + c * tmp;
          zi = c * zi - s * tmp;
        }
      }
      if (deflated) continue;
      d[l] -= shift_acc;
      e[l] = g;
      e[m] = 0.0;
    }
  }

  SymmetricEigensystem out;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return d[i] < d[j]; });
  out.values.resize(n);
  for (std::size_t k = 0; k < n; ++k) out.values[k] = d[order[k]];
  if (vectors) {
    out.vectors.resize(z.rows(), z.cols());
    for (std::size_t k = 0; k < n; ++k)
      out.vectors.col(static_cast<Eigen::Index>(k)) = z.col(static_cast<Eigen::Index>(order[k]));
  }
  return out;
}

namespace {

void check_symmetric(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols() || a.rows() < 1) throw PreconditionError("eigensolver needs a non-empty square matrix");
  if (!a.allFinite()) throw PreconditionError("matrix has non-finite entries");
  const double scale = std::max(a.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw PreconditionError("matrix is not symmetric to 1e-12");
}

}  // namespace

SymmetricEigensystem symmetric_eigensystem(const Eigen::MatrixXd& a) {
  check_symmetric(a);
  auto tri = householder_tridiagonalize(a, true);
  return tridiagonal_eigensystem(std::move(tri.diagonal), std::move(tri.off_diagonal), &tri.transform);
}

std::vector<double> symmetric_eigenvalues(const Eigen::MatrixXd& a) {
  check_symmetric(a);
  auto tri = householder_tridiagonalize(a, false);
  return tridiagonal_eigensystem(std::move(tri.diagonal), std::move(tri.off_diagonal)).values;
}

SpectralSample::SpectralSample(std::vector<double> eigenvalues, std::size_t n)
    : eigenvalues_(std::move(eigenvalues)), n_(n) {
  if (eigenvalues_.empty()) throw PreconditionError("spectral sample needs at least one eigenvalue");
  if (n_ == 0) throw PreconditionError("sample size n must be positive");
  for (double v : eigenvalues_)
    if (!std::isfinite(v)) throw PreconditionError("eigenvalues must be finite");
  std::sort(eigenvalues_.begin(), eigenvalues_.end());
}

SpectralSample SpectralSample::from_data(const DataMatrix& x) {
  auto values = symmetric_eigenvalues(sample_covariance(x));
  if (!values.empty() && values.front() < kZeroFloor) {
    std::clog << "mpspec: warning: eigenvalue " << values.front()
              << " below the numerical zero floor; clamped to 0\n";
  }
  for (double& v : values) v = std::max(v, 0.0);
  return SpectralSample(std::move(values), x.n());
}

double SpectralSample::esd(double x) const noexcept {
  const auto it = std::upper_bound(eigenvalues_.begin(), eigenvalues_.end(), x);
  return static_cast<double>(it - eigenvalues_.begin()) / static_cast<double>(p());
}

Complex SpectralSample::stieltjes(Complex z) const {
  if (z.imag() == 0.0 && std::binary_search(eigenvalues_.begin(), eigenvalues_.end(), z.real()))
    throw DomainError("ESD Stieltjes transform is not defined at an eigenvalue");
  Complex sum = 0.0;
  for (double lambda : eigenvalues_) sum += 1.0 / (lambda - z);
  return sum / static_cast<double>(p());
}

void write_eigenvalue_csv(std::ostream& out, std::span<const double> eigenvalues) {
  out << "eigenvalue\n";
  char buf[64];
  for (double v : eigenvalues) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << buf << '\n';
  }
}

std::vector<double> read_eigenvalue_csv(std::istream& in) {
  auto trim = [](std::string s) {
    const auto first = s.find_first_not_of(" \t\r");
    const auto last = s.find_last_not_of(" \t\r");
    return first == std::string::npos ? std::string{} : s.substr(first, last - first + 1);
  };
  std::string line;
  if (!std::getline(in, line) || trim(line) != "eigenvalue")
    throw FormatError("eigenvalue CSV must start with the header 'eigenvalue'");
  std::vector<double> values;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    const std::string cell = trim(line);
    if (cell.empty()) continue;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc{} || ptr != cell.data() + cell.size() || !std::isfinite(v))
      throw FormatError("eigenvalue CSV row " + std::to_string(row) + " is not a finite number: '" + cell + "'");
    values.push_back(v);
  }
  if (values.empty()) throw FormatError("eigenvalue CSV has no rows");
  return values;
}

}  // namespace mpspec
