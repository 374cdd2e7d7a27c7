#include "frosketch/matrix_io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include "frosketch/error.hpp"

namespace frosketch {

namespace {

void put_u32(std::ostream& out, std::uint32_t v) {
  const char bytes[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                         static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  out.write(bytes, 4);
}

std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void encode_f64(double v, unsigned char* p) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int b = 0; b < 8; ++b) p[b] = static_cast<unsigned char>((bits >> (8 * b)) & 0xff);
}

double decode_f64(const unsigned char* p) {
  std::uint64_t bits = 0;
  for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(p[b]) << (8 * b);
  return std::bit_cast<double>(bits);
}

struct Header {
  std::size_t rows;
  std::size_t cols;
};

Header read_header(std::istream& in) {
  unsigned char buf[kFsk1HeaderBytes];
  in.read(reinterpret_cast<char*>(buf), kFsk1HeaderBytes);
  const auto got = static_cast<std::size_t>(in.gcount());
  if (got < 4) throw FormatError("truncated FSK1 magic", got);
  if (std::memcmp(buf, kFsk1Magic, 4) != 0) throw FormatError("bad FSK1 magic", 0);
  if (got < kFsk1HeaderBytes) throw FormatError("truncated FSK1 header", got);
  return {get_u32(buf + 4), get_u32(buf + 8)};
}

void read_rows(std::istream& in, DenseMatrix& out, std::size_t byte_offset) {
  const std::size_t n = out.size();
  std::vector<unsigned char> raw(n * 8);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  const auto got = static_cast<std::size_t>(in.gcount());
  if (got != raw.size()) throw FormatError("truncated FSK1 payload", byte_offset + got);
  auto values = out.data();
  for (std::size_t i = 0; i < n; ++i) {
    values[i] = decode_f64(raw.data() + 8 * i);
    if (!std::isfinite(values[i])) throw FormatError("non-finite value in FSK1 payload", byte_offset + 8 * i);
  }
}

} // namespace

MatrixFormat format_from_path(const std::filesystem::path& path) {
  return path.extension() == ".csv" ? MatrixFormat::csv : MatrixFormat::fsk1;
}

void write_fsk1(std::ostream& out, const DenseMatrix& m) {
  require(m.rows() <= UINT32_MAX && m.cols() <= UINT32_MAX, "matrix too large for FSK1");
  out.write(kFsk1Magic, 4);
  put_u32(out, static_cast<std::uint32_t>(m.rows()));
  put_u32(out, static_cast<std::uint32_t>(m.cols()));
  std::vector<unsigned char> raw(m.size() * 8);
  const auto values = m.data();
  for (std::size_t i = 0; i < values.size(); ++i) encode_f64(values[i], raw.data() + 8 * i);
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
}

DenseMatrix read_fsk1(std::istream& in) {
  const Header h = read_header(in);
  DenseMatrix m(h.rows, h.cols);
  read_rows(in, m, kFsk1HeaderBytes);
  return m;
}

void write_csv(std::ostream& out, const DenseMatrix& m) {
  char buf[64];
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j) out.put(',');
      auto res = std::to_chars(buf, buf + sizeof buf, m(i, j), std::chars_format::general, 17);
      out.write(buf, res.ptr - buf);
    }
    out.put('\n');
  }
}

DenseMatrix read_csv(std::istream& in) {
  std::vector<double> values;
  std::size_t cols = 0;
  std::size_t rows = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::size_t count = 0;
    const char* p = line.data();
    const char* end = p + line.size();
    while (true) {
      while (p < end && *p == ' ') ++p;
      double v = 0.0;
      auto res = std::from_chars(p, end, v);
      if (res.ec != std::errc() || !std::isfinite(v)) {
        throw FormatError("bad CSV number on line " + std::to_string(line_no), line_no);
      }
      values.push_back(v);
      ++count;
      p = res.ptr;
      while (p < end && *p == ' ') ++p;
      if (p == end) break;
      if (*p != ',') throw FormatError("unexpected character in CSV on line " + std::to_string(line_no), line_no);
      ++p;
    }
    if (rows == 0) {
      cols = count;
    } else if (count != cols) {
      throw FormatError("ragged CSV row on line " + std::to_string(line_no), line_no);
    }
    ++rows;
  }
  return DenseMatrix(rows, cols, std::move(values));
}

void save_matrix(const DenseMatrix& m, const std::filesystem::path& path, MatrixFormat format) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  if (format == MatrixFormat::fsk1) {
    write_fsk1(out, m);
  } else {
    write_csv(out, m);
  }
  if (!out) throw IoError("write failed for " + path.string());
}

DenseMatrix load_matrix(const std::filesystem::path& path, MatrixFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return format == MatrixFormat::fsk1 ? read_fsk1(in) : read_csv(in);
}

Fsk1Reader::Fsk1Reader(const std::filesystem::path& path) : path_(path), in_(path, std::ios::binary) {
  if (!in_) throw IoError("cannot open " + path.string());
  const Header h = read_header(in_);
  rows_ = h.rows;
  cols_ = h.cols;
}

DenseMatrix Fsk1Reader::next(std::size_t max_rows) {
  const std::size_t take = std::min(max_rows, remaining());
  DenseMatrix chunk(take, cols_);
  if (take == 0) return chunk;
  read_rows(in_, chunk, kFsk1HeaderBytes + consumed_ * cols_ * 8);
  consumed_ += take;
  return chunk;
}

void Fsk1Reader::rewind() {
  in_.clear();
  in_.seekg(static_cast<std::streamoff>(kFsk1HeaderBytes));
  if (!in_) throw IoError("cannot seek in " + path_.string());
  consumed_ = 0;
}

} // namespace frosketch
