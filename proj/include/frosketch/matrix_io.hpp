#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <string>

#include "frosketch/matrix.hpp"

namespace frosketch {

// FSK1 layout: "FSK1", rows (u32 LE), cols (u32 LE), rows*cols f64 LE row-major.
inline constexpr char kFsk1Magic[4] = {'F', 'S', 'K', '1'};
inline constexpr std::size_t kFsk1HeaderBytes = 12;

enum class MatrixFormat { fsk1, csv };

/// Picks csv for a ".csv" extension, fsk1 otherwise.
MatrixFormat format_from_path(const std::filesystem::path& path);

void write_fsk1(std::ostream& out, const DenseMatrix& m);
DenseMatrix read_fsk1(std::istream& in);

/// Header-less comma-separated decimals, 17 significant digits.
void write_csv(std::ostream& out, const DenseMatrix& m);
DenseMatrix read_csv(std::istream& in);

void save_matrix(const DenseMatrix& m, const std::filesystem::path& path, MatrixFormat format);
DenseMatrix load_matrix(const std::filesystem::path& path, MatrixFormat format);

/// Incremental reader over an FSK1 file; holds at most the rows requested
/// by one next() call.
class Fsk1Reader {
public:
  explicit Fsk1Reader(const std::filesystem::path& path);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t remaining() const noexcept { return rows_ - consumed_; }

  /// Up to max_rows further rows; an empty matrix once exhausted.
  DenseMatrix next(std::size_t max_rows);

  void rewind();

private:
  std::filesystem::path path_;
  std::ifstream in_;
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::size_t consumed_ = 0;
};

} // namespace frosketch
