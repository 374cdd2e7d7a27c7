#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace frosketch {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowMatrixMap = Eigen::Map<RowMatrix>;
using ConstRowMatrixMap = Eigen::Map<const RowMatrix>;

/// Row-major dense matrix of doubles.
///
/// Constructors reject non-finite entries; the mutable accessors do not
/// re-check, so code writing through them is responsible for keeping values
/// finite.
class DenseMatrix {
public:
  DenseMatrix() = default;

  /// Zero-filled rows x cols matrix.
  DenseMatrix(std::size_t rows, std::size_t cols);

  /// Takes ownership of row-major data; throws ArgumentError when the length is
  /// not rows*cols or any value is NaN/Inf.
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  DenseMatrix(std::initializer_list<std::initializer_list<double>> rows);

  static DenseMatrix identity(std::size_t n);
  /// Copies any Eigen dense expression; throws on non-finite entries.
  template <typename Derived>
  static DenseMatrix from_eigen(const Eigen::MatrixBase<Derived>& m) {
    DenseMatrix out(static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols()));
    out.map() = m;
    out.check_finite();
    return out;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  RowMatrixMap map() { return {data_.data(), static_cast<Eigen::Index>(rows_), static_cast<Eigen::Index>(cols_)}; }
  ConstRowMatrixMap map() const {
    return {data_.data(), static_cast<Eigen::Index>(rows_), static_cast<Eigen::Index>(cols_)};
  }

  /// Copy of rows [begin, end).
  DenseMatrix slice_rows(std::size_t begin, std::size_t end) const;

  /// Vertical concatenation; all parts must share the column count.
  static DenseMatrix vstack(std::span<const DenseMatrix> parts);

  DenseMatrix transpose() const;

  double frobenius_norm_squared() const;

  bool operator==(const DenseMatrix& other) const = default;

private:
  void check_finite() const;

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b);

/// a^T a, d x d.
DenseMatrix gram(const DenseMatrix& a);

/// Thin SVD: u is n x k, vt is k x d with k = min(n, d).
struct SvdResult {
  DenseMatrix u;
  std::vector<double> sigma;
  DenseMatrix vt;
};

/// Throws NumericalError if the decomposition does not converge or the input
/// holds non-finite values.
SvdResult svd(const DenseMatrix& m);

/// Right singular vectors and singular values only; cheaper than svd() when
/// u is not needed.
struct RightSvd {
  std::vector<double> sigma;
  DenseMatrix vt;
};
RightSvd right_svd(const DenseMatrix& m);

bool is_power_of_two(std::uint64_t v) noexcept;

/// Largest power of two <= v (v >= 1).
std::uint64_t floor_power_of_two(std::uint64_t v) noexcept;

/// Smallest power of two >= v (v >= 1).
std::uint64_t ceil_power_of_two(std::uint64_t v) noexcept;

/// Normalized Walsh-Hadamard transform, H v with H = H_m / sqrt(m), in place.
void fwht_inplace(std::span<double> v);

std::vector<double> fwht(std::span<const double> v);

/// Applies the normalized Hadamard transform to every column of a row-major
/// rows x cols block (rows must be a power of two). Butterflies operate on
/// whole rows so the inner loop is contiguous.
void fwht_columns(std::span<double> block, std::size_t rows, std::size_t cols);

/// Sign of entry (i, j) of the unnormalized Sylvester Hadamard matrix.
inline int hadamard_sign(std::uint64_t i, std::uint64_t j) noexcept {
  return (__builtin_popcountll(i & j) & 1) ? -1 : 1;
}

/// Largest |eigenvalue| of a symmetric matrix by power iteration.
///
/// The estimate at each step is ||M x|| for the current unit vector x.
/// Iteration stops when successive estimates differ by less than tol times
/// the current estimate, or after 10 000 iterations. The start vector comes
/// from a fixed seed so results are reproducible.
double spectral_norm(const DenseMatrix& m, double tol);

} // namespace frosketch
