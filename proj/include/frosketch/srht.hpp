#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "frosketch/matrix.hpp"

namespace frosketch {

/// Subsampled randomized Hadamard transform Phi = S H D mapping m rows to q.
///
/// S samples q rows of the identity without replacement and scales them by
/// sqrt(m/q); H is the normalized m x m Walsh-Hadamard matrix; D is a
/// diagonal of i.i.d. Rademacher signs. Everything is derived from the seed,
/// so (m, q, seed) reconstructs a bit-identical operator.
class SrhtOperator {
public:
  /// Throws ArgumentError unless m is a power of two and 1 <= q <= m.
  SrhtOperator(std::size_t m, std::size_t q, std::uint64_t seed);

  std::size_t m() const noexcept { return m_; }
  std::size_t q() const noexcept { return q_; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::span<const std::size_t> sample_indices() const noexcept { return sample_indices_; }
  std::span<const int> signs() const noexcept { return signs_; }

  /// Rows per block in the blocked scheme: the power of two in (q/2, q].
  std::size_t block_rows() const noexcept { return block_rows_; }

  bool operator==(const SrhtOperator&) const = default;

private:
  std::size_t m_;
  std::size_t q_;
  std::uint64_t seed_;
  std::size_t block_rows_;
  std::vector<std::size_t> sample_indices_;
  std::vector<int> signs_;
};

/// Source of equally wide rows for apply_blocked.
class RowStream {
public:
  virtual ~RowStream() = default;
  /// Copies the next row into `row`; false when exhausted.
  virtual bool next(std::span<double> row) = 0;
};

/// Streams the rows of a matrix, optionally a [begin, end) row range.
class MatrixRowStream final : public RowStream {
public:
  explicit MatrixRowStream(const DenseMatrix& m) : MatrixRowStream(m, 0, m.rows()) {}
  MatrixRowStream(const DenseMatrix& m, std::size_t begin, std::size_t end)
      : m_(m), pos_(begin), end_(end) {}

  bool next(std::span<double> row) override;

private:
  const DenseMatrix& m_;
  std::size_t pos_;
  std::size_t end_;
};

/// Records the largest number of d-wide rows held in transform workspace.
struct WorkspaceProbe {
  std::size_t peak_rows = 0;
  std::size_t allocations = 0;

  void record(std::size_t rows) {
    ++allocations;
    if (rows > peak_rows) peak_rows = rows;
  }
};

/// Reference application: materializes H D F with a column FWHT over all m
/// rows, then samples and scales.
DenseMatrix apply(const SrhtOperator& op, const DenseMatrix& f);

/// Space-efficient application over a row stream of exactly op.m() rows.
///
/// F is consumed in blocks of p = op.block_rows() rows. Since the unnormalized
/// H_m equals H_{m/p} (x) H_p, block j contributes
///   sqrt(m/q) * hadamard_sign(i, j) / sqrt(m/p) * [H_p D_j F_j](r')
/// to every sampled row s = i*p + r'. Workspace is one p x d block plus the
/// q x d output. Throws StreamLengthError if the stream does not yield
/// exactly m rows.
DenseMatrix apply_blocked(const SrhtOperator& op, RowStream& rows, std::size_t d,
                          WorkspaceProbe* probe = nullptr);

} // namespace frosketch
