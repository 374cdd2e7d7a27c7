#include "frosketch/ffd_sketch.hpp"

#include <algorithm>
#include <string>

#include "frosketch/error.hpp"
#include "frosketch/rng.hpp"

namespace frosketch {

FfdSketcher::FfdSketcher(std::size_t ell, std::size_t m, std::size_t d, std::uint64_t seed)
    : m_(m), seed_(seed), sketch_(ell, d) {
  if (!is_power_of_two(m)) throw ArgumentError("ffd: buffer size m = " + std::to_string(m) + " is not a power of two");
  if (m < ell / 2) throw ArgumentError("ffd: buffer size m must be >= ell/2");
  buffer_ = DenseMatrix(m, d);
}

void FfdSketcher::insert(const DenseMatrix& rows) {
  if (rows.cols() != d()) {
    throw ArgumentError("ffd insert: rows have " + std::to_string(rows.cols()) + " columns, sketcher has " +
                        std::to_string(d()));
  }
  for (std::size_t i = 0; i < rows.rows(); ++i) insert_row(rows.row(i));
}

void FfdSketcher::insert_row(std::span<const double> row) {
  require(row.size() == d(), "ffd insert: row width mismatch");
  if (std::all_of(row.begin(), row.end(), [](double v) { return v == 0.0; })) return;
  std::copy(row.begin(), row.end(), buffer_.row(buffered_).begin());
  if (++buffered_ == m_) compress();
}

void FfdSketcher::compress() {
  const SrhtOperator phi(m_, ell() / 2, derive_seed(seed_, trial_));
  MatrixRowStream stream(buffer_);
  const DenseMatrix compressed = apply_blocked(phi, stream, d(), &probe_);
  sketch_.insert_lower_half_and_shrink(compressed);
  std::fill(buffer_.data().begin(), buffer_.data().end(), 0.0);
  buffered_ = 0;
  ++trial_;
}

const DenseMatrix& FfdSketcher::finalize() {
  for (std::size_t i = 0; i < buffered_; ++i) sketch_.insert_row(buffer_.row(i));
  std::fill(buffer_.data().begin(), buffer_.data().begin() + static_cast<std::ptrdiff_t>(buffered_ * d()), 0.0);
  buffered_ = 0;
  return sketch_.matrix();
}

DenseMatrix FfdSketcher::snapshot() const {
  FdSketch copy = sketch_;
  for (std::size_t i = 0; i < buffered_; ++i) copy.insert_row(buffer_.row(i));
  return copy.matrix();
}

FfdSketcher FfdSketcher::restore(FdSketch sketch, std::size_t m, std::uint64_t seed, std::uint64_t trial,
                                 const DenseMatrix& pending) {
  FfdSketcher out(sketch.ell(), m, sketch.d(), seed);
  require(pending.rows() < m, "ffd restore: pending buffer must hold fewer than m rows");
  require(pending.rows() == 0 || pending.cols() == sketch.d(), "ffd restore: buffer width mismatch");
  out.sketch_ = std::move(sketch);
  out.trial_ = trial;
  for (std::size_t i = 0; i < pending.rows(); ++i) out.insert_row(pending.row(i));
  return out;
}

} // namespace frosketch
