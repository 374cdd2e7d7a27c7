#include "frosketch/matrix.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "frosketch/error.hpp"
#include "frosketch/rng.hpp"

namespace frosketch {

namespace {

void ensure_finite(std::span<const double> values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw ArgumentError("non-finite matrix entry at flat index " + std::to_string(i));
    }
  }
}

} // namespace

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw ArgumentError("matrix data length " + std::to_string(data_.size()) + " != " +
                        std::to_string(rows) + "x" + std::to_string(cols));
  }
  ensure_finite(data_);
}

DenseMatrix::DenseMatrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw ArgumentError("ragged matrix initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
  ensure_finite(data_);
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

void DenseMatrix::check_finite() const { ensure_finite(data_); }

DenseMatrix DenseMatrix::slice_rows(std::size_t begin, std::size_t end) const {
  require(begin <= end && end <= rows_, "slice_rows: range out of bounds");
  DenseMatrix out(end - begin, cols_);
  std::copy(data_.begin() + static_cast<std::ptrdiff_t>(begin * cols_),
            data_.begin() + static_cast<std::ptrdiff_t>(end * cols_), out.data_.begin());
  return out;
}

DenseMatrix DenseMatrix::vstack(std::span<const DenseMatrix> parts) {
  if (parts.empty()) return {};
  const std::size_t cols = parts.front().cols();
  std::size_t rows = 0;
  for (const auto& p : parts) {
    require(p.cols() == cols, "vstack: column mismatch");
    rows += p.rows();
  }
  DenseMatrix out(rows, cols);
  auto it = out.data_.begin();
  for (const auto& p : parts) it = std::copy(p.data_.begin(), p.data_.end(), it);
  return out;
}

DenseMatrix DenseMatrix::transpose() const {
  DenseMatrix out(cols_, rows_);
  out.map() = map().transpose();
  return out;
}

double DenseMatrix::frobenius_norm_squared() const {
  double s = 0.0;
  for (double v : data_) s += v * v;
  return s;
}

DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b) {
  require(a.cols() == b.rows(), "matrix product: inner dimension mismatch");
  DenseMatrix out(a.rows(), b.cols());
  out.map().noalias() = a.map() * b.map();
  return out;
}

DenseMatrix gram(const DenseMatrix& a) {
  DenseMatrix out(a.cols(), a.cols());
  RowMatrixMap g = out.map();
  g.selfadjointView<Eigen::Lower>().rankUpdate(a.map().transpose());
  g.triangularView<Eigen::StrictlyUpper>() = g.transpose();
  return out;
}

namespace {

template <int Options>
Eigen::BDCSVD<Eigen::MatrixXd> decompose(const DenseMatrix& m) {
  if (m.empty()) throw ArgumentError("svd of an empty matrix");
  for (double v : m.data()) {
    if (!std::isfinite(v)) throw NumericalError("svd input holds non-finite values");
  }
  Eigen::MatrixXd dense = m.map();
  Eigen::BDCSVD<Eigen::MatrixXd> dec(dense, Options);
  if (dec.info() != Eigen::Success) throw NumericalError("svd did not converge");
  for (Eigen::Index i = 0; i < dec.singularValues().size(); ++i) {
    if (!std::isfinite(dec.singularValues()[i])) throw NumericalError("svd produced non-finite singular values");
  }
  return dec;
}

} // namespace

SvdResult svd(const DenseMatrix& m) {
  auto dec = decompose<Eigen::ComputeThinU | Eigen::ComputeThinV>(m);
  SvdResult r;
  const auto& s = dec.singularValues();
  r.sigma.assign(s.data(), s.data() + s.size());
  r.u = DenseMatrix::from_eigen(Eigen::MatrixXd(dec.matrixU()));
  r.vt = DenseMatrix::from_eigen(Eigen::MatrixXd(dec.matrixV().transpose()));
  return r;
}

RightSvd right_svd(const DenseMatrix& m) {
  auto dec = decompose<Eigen::ComputeThinV>(m);
  RightSvd r;
  const auto& s = dec.singularValues();
  r.sigma.assign(s.data(), s.data() + s.size());
  r.vt = DenseMatrix::from_eigen(Eigen::MatrixXd(dec.matrixV().transpose()));
  return r;
}

bool is_power_of_two(std::uint64_t v) noexcept { return std::has_single_bit(v); }

std::uint64_t floor_power_of_two(std::uint64_t v) noexcept { return std::bit_floor(v); }

std::uint64_t ceil_power_of_two(std::uint64_t v) noexcept { return std::bit_ceil(v); }

void fwht_inplace(std::span<double> v) {
  const std::size_t m = v.size();
  if (!is_power_of_two(m)) throw ArgumentError("fwht: length " + std::to_string(m) + " is not a power of two");
  for (std::size_t h = 1; h < m; h <<= 1) {
    for (std::size_t i = 0; i < m; i += 2 * h) {
      for (std::size_t j = i; j < i + h; ++j) {
        const double a = v[j];
        const double b = v[j + h];
        v[j] = a + b;
        v[j + h] = a - b;
      }
    }
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(m));
  for (double& x : v) x *= scale;
}

std::vector<double> fwht(std::span<const double> v) {
  std::vector<double> out(v.begin(), v.end());
  fwht_inplace(out);
  return out;
}

void fwht_columns(std::span<double> block, std::size_t rows, std::size_t cols) {
  if (!is_power_of_two(rows)) throw ArgumentError("fwht_columns: row count is not a power of two");
  require(block.size() == rows * cols, "fwht_columns: block size mismatch");
  double* base = block.data();
  for (std::size_t h = 1; h < rows; h <<= 1) {
    for (std::size_t i = 0; i < rows; i += 2 * h) {
      for (std::size_t j = i; j < i + h; ++j) {
        double* a = base + j * cols;
        double* b = base + (j + h) * cols;
        for (std::size_t c = 0; c < cols; ++c) {
          const double x = a[c];
          const double y = b[c];
          a[c] = x + y;
          b[c] = x - y;
        }
      }
    }
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(rows));
  for (double& x : block) x *= scale;
}

double spectral_norm(const DenseMatrix& m, double tol) {
  require(m.rows() == m.cols(), "spectral_norm: matrix must be square");
  require(tol > 0.0, "spectral_norm: tol must be positive");
  const std::size_t n = m.rows();
  if (n == 0) return 0.0;

  bool all_zero = true;
  for (double v : m.data()) {
    if (v != 0.0) {
      all_zero = false;
      break;
    }
  }
  if (all_zero) return 0.0;

  constexpr int kMaxIterations = 10000;
  constexpr std::uint64_t kStartSeed = 0x5eedf00dULL;

  Rng rng(kStartSeed);
  Eigen::VectorXd x(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = rng.normal();
  x.normalize();

  const ConstRowMatrixMap a = m.map();
  Eigen::VectorXd y(x.size());
  double estimate = 0.0;
  for (int it = 0; it < kMaxIterations; ++it) {
    y.noalias() = a * x;
    const double next = y.norm();
    if (next == 0.0) {
      // Start vector landed in the null space; restart from a fresh direction.
      for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = rng.normal();
      x.normalize();
      continue;
    }
    x = y / next;
    if (it > 0 && std::abs(next - estimate) < tol * next) {
      estimate = next;
      break;
    }
    estimate = next;
  }
  return estimate;
}

} // namespace frosketch
