#include "frosketch/srht.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "frosketch/error.hpp"
#include "frosketch/rng.hpp"

namespace frosketch {

SrhtOperator::SrhtOperator(std::size_t m, std::size_t q, std::uint64_t seed)
    : m_(m), q_(q), seed_(seed) {
  if (!is_power_of_two(m)) throw ArgumentError("srht: m = " + std::to_string(m) + " is not a power of two");
  if (q < 1 || q > m) throw ArgumentError("srht: q must satisfy 1 <= q <= m");
  block_rows_ = static_cast<std::size_t>(floor_power_of_two(q));

  Rng rng(seed);
  // Partial Fisher-Yates: the first q slots end up a uniform sample without
  // replacement.
  std::vector<std::size_t> pool(m);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  for (std::size_t i = 0; i < q; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.uniform_below(m - i));
    std::swap(pool[i], pool[j]);
  }
  sample_indices_.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(q));

  signs_.resize(m);
  for (auto& s : signs_) s = rng.rademacher();
}

bool MatrixRowStream::next(std::span<double> row) {
  if (pos_ >= end_) return false;
  const auto src = m_.row(pos_++);
  std::copy(src.begin(), src.end(), row.begin());
  return true;
}

DenseMatrix apply(const SrhtOperator& op, const DenseMatrix& f) {
  if (f.rows() != op.m()) {
    throw ArgumentError("srht apply: input has " + std::to_string(f.rows()) + " rows, operator expects " +
                        std::to_string(op.m()));
  }
  const std::size_t d = f.cols();
  DenseMatrix hdf = f;
  const auto signs = op.signs();
  for (std::size_t i = 0; i < op.m(); ++i) {
    if (signs[i] < 0) {
      for (double& v : hdf.row(i)) v = -v;
    }
  }
  fwht_columns(hdf.data(), op.m(), d);

  const double scale = std::sqrt(static_cast<double>(op.m()) / static_cast<double>(op.q()));
  DenseMatrix out(op.q(), d);
  const auto idx = op.sample_indices();
  for (std::size_t r = 0; r < op.q(); ++r) {
    const auto src = hdf.row(idx[r]);
    auto dst = out.row(r);
    for (std::size_t c = 0; c < d; ++c) dst[c] = scale * src[c];
  }
  return out;
}

DenseMatrix apply_blocked(const SrhtOperator& op, RowStream& rows, std::size_t d, WorkspaceProbe* probe) {
  const std::size_t m = op.m();
  const std::size_t q = op.q();
  const std::size_t p = op.block_rows();
  const std::size_t blocks = m / p;

  DenseMatrix out(q, d);
  DenseMatrix block(p, d);
  if (probe) probe->record(p + q);

  const auto idx = op.sample_indices();
  const auto signs = op.signs();
  const double scale =
      std::sqrt(static_cast<double>(m) / static_cast<double>(q)) / std::sqrt(static_cast<double>(blocks));

  for (std::size_t j = 0; j < blocks; ++j) {
    for (std::size_t r = 0; r < p; ++r) {
      auto dst = block.row(r);
      if (!rows.next(dst)) {
        throw StreamLengthError("srht apply_blocked: stream ended after " + std::to_string(j * p + r) +
                                " rows, expected " + std::to_string(m));
      }
      if (signs[j * p + r] < 0) {
        for (double& v : dst) v = -v;
      }
    }
    fwht_columns(block.data(), p, d);

    for (std::size_t r = 0; r < q; ++r) {
      const std::size_t global_block = idx[r] / p;
      const std::size_t local_row = idx[r] % p;
      const double w = hadamard_sign(global_block, j) * scale;
      const auto src = block.row(local_row);
      auto dst = out.row(r);
      for (std::size_t c = 0; c < d; ++c) dst[c] += w * src[c];
    }
  }

  std::vector<double> extra(d);
  if (rows.next(extra)) {
    throw StreamLengthError("srht apply_blocked: stream yields more than " + std::to_string(m) + " rows");
  }
  return out;
}

} // namespace frosketch
