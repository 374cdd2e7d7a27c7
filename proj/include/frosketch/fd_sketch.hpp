#pragma once

#include <cstddef>
#include <span>

#include "frosketch/matrix.hpp"

namespace frosketch {

/// Frequent Directions sketch: an ell x d matrix B with BᵀB ≈ AᵀA for the
/// rows A inserted so far, and ||AᵀA - BᵀB||₂ <= (2/ell)||A||_F².
///
/// Rows [occupied, ell) of B are always exactly zero. Rows enter the first
/// zero row; when none is left, shrink() runs first.
class FdSketch {
public:
  /// ell must be even and >= 2, d >= 1.
  FdSketch(std::size_t ell, std::size_t d);

  /// Adopts an existing sketch matrix (ell = b.rows()). Rows after the last
  /// nonzero row must be zero; rows before it count as occupied.
  static FdSketch from_matrix(DenseMatrix b);

  std::size_t ell() const noexcept { return b_.rows(); }
  std::size_t d() const noexcept { return b_.cols(); }
  std::size_t occupied() const noexcept { return occupied_; }
  const DenseMatrix& matrix() const noexcept { return b_; }

  /// Inserts rows one at a time. All-zero rows are skipped: copying one into
  /// the first zero row leaves that row zero, so it stays the insertion slot.
  void insert(const DenseMatrix& rows);
  void insert_row(std::span<const double> row);

  /// B <- Σ̂ Vᵀ with Σ̂ᵢ = sqrt(max(σᵢ² - σ²_{ell/2}, 0)), σ_{ell/2} the
  /// (ell/2)-th largest singular value (zero when rank is smaller). Leaves at
  /// most ell/2 occupied rows.
  void shrink();

  /// Writes `rows` into B[ell/2, ell/2 + rows.rows()) and shrinks. Used by
  /// FFD for compressed blocks; shrinks beforehand if the lower half is
  /// not free.
  void insert_lower_half_and_shrink(const DenseMatrix& rows);

  bool operator==(const FdSketch&) const = default;

private:
  FdSketch(DenseMatrix b, std::size_t occupied) : b_(std::move(b)), occupied_(occupied) {}

  DenseMatrix b_;
  std::size_t occupied_ = 0;
};

} // namespace frosketch
