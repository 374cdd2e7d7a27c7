#include "frosketch/fd_sketch.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "frosketch/error.hpp"

namespace frosketch {

namespace {

bool all_zero(std::span<const double> row) {
  return std::all_of(row.begin(), row.end(), [](double v) { return v == 0.0; });
}

void check_ell(std::size_t ell) {
  if (ell < 2 || ell % 2 != 0) {
    throw ArgumentError("sketch size ell must be even and >= 2, got " + std::to_string(ell));
  }
}

} // namespace

FdSketch::FdSketch(std::size_t ell, std::size_t d) {
  check_ell(ell);
  require(d >= 1, "sketch needs at least one column");
  b_ = DenseMatrix(ell, d);
}

FdSketch FdSketch::from_matrix(DenseMatrix b) {
  check_ell(b.rows());
  require(b.cols() >= 1, "sketch needs at least one column");
  std::size_t occupied = b.rows();
  while (occupied > 0 && all_zero(b.row(occupied - 1))) --occupied;
  return FdSketch(std::move(b), occupied);
}

void FdSketch::insert(const DenseMatrix& rows) {
  if (rows.cols() != d()) {
    throw ArgumentError("fd insert: rows have " + std::to_string(rows.cols()) + " columns, sketch has " +
                        std::to_string(d()));
  }
  for (std::size_t i = 0; i < rows.rows(); ++i) insert_row(rows.row(i));
}

void FdSketch::insert_row(std::span<const double> row) {
  require(row.size() == d(), "fd insert: row width mismatch");
  if (all_zero(row)) return;
  if (occupied_ == ell()) shrink();
  std::copy(row.begin(), row.end(), b_.row(occupied_).begin());
  ++occupied_;
}

void FdSketch::shrink() {
  if (occupied_ == 0) return;
  const RightSvd dec = right_svd(b_);
  const std::size_t k = dec.sigma.size();
  const std::size_t half = ell() / 2;
  const double cut = half <= k ? dec.sigma[half - 1] * dec.sigma[half - 1] : 0.0;

  DenseMatrix next(ell(), d());
  std::size_t kept = 0;
  for (std::size_t i = 0; i < k; ++i) {
    const double shrunk = dec.sigma[i] * dec.sigma[i] - cut;
    if (shrunk <= 0.0) break;
    const double s = std::sqrt(shrunk);
    const auto v = dec.vt.row(i);
    auto dst = next.row(kept);
    for (std::size_t c = 0; c < d(); ++c) dst[c] = s * v[c];
    ++kept;
  }
  b_ = std::move(next);
  occupied_ = kept;
}

void FdSketch::insert_lower_half_and_shrink(const DenseMatrix& rows) {
  const std::size_t half = ell() / 2;
  require(rows.cols() == d(), "fd insert: column mismatch");
  require(rows.rows() <= half, "compressed block must have at most ell/2 rows");
  if (occupied_ > half) shrink();
  for (std::size_t i = 0; i < rows.rows(); ++i) {
    const auto src = rows.row(i);
    std::copy(src.begin(), src.end(), b_.row(half + i).begin());
  }
  // The write may leave zero rows between occupied_ and ell/2; shrink
  // compacts them, so only the count needs to cover the written range.
  occupied_ = half + rows.rows();
  shrink();
}

} // namespace frosketch
