#include "frosketch/serialize.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "frosketch/error.hpp"
#include "frosketch/matrix_io.hpp"

namespace frosketch {

using nlohmann::json;

namespace {

void write_json(const json& j, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError("bad JSON sidecar " + path.string() + ": " + e.what(), e.byte);
  }
}

template <typename T>
T field(const json& j, const char* key, const std::filesystem::path& path) {
  if (!j.contains(key)) throw FormatError("sidecar " + path.string() + " lacks \"" + key + "\"", 0);
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw FormatError("sidecar " + path.string() + " field \"" + key + "\": " + e.what(), 0);
  }
}

void expect_kind(const json& j, const char* kind, const std::filesystem::path& path) {
  const auto got = field<std::string>(j, "kind", path);
  if (got != kind) throw FormatError("sidecar " + path.string() + " holds a " + got + ", expected " + kind, 0);
}

json sketch_header(const FdSketch& s, const char* kind) {
  return json{{"kind", kind}, {"ell", s.ell()}, {"d", s.d()}, {"occupied", s.occupied()}};
}

FdSketch read_sketch(const std::filesystem::path& path, const json& meta) {
  DenseMatrix b = load_matrix(path, MatrixFormat::fsk1);
  const auto ell = field<std::size_t>(meta, "ell", path);
  const auto d = field<std::size_t>(meta, "d", path);
  if (b.rows() != ell || b.cols() != d) throw FormatError("sketch matrix shape disagrees with sidecar", 4);
  FdSketch s = FdSketch::from_matrix(std::move(b));
  if (s.occupied() > field<std::size_t>(meta, "occupied", path)) {
    throw FormatError("sketch has nonzero rows beyond its recorded occupancy", 0);
  }
  return s;
}

} // namespace

std::filesystem::path sidecar_path(const std::filesystem::path& path) {
  std::filesystem::path p = path;
  p += ".json";
  return p;
}

void save_checkpoint(const FdSketch& sketch, const std::filesystem::path& path) {
  save_matrix(sketch.matrix(), path, MatrixFormat::fsk1);
  write_json(sketch_header(sketch, "fd"), sidecar_path(path));
}

void save_checkpoint(const FfdSketcher& sketcher, const std::filesystem::path& path) {
  save_matrix(sketcher.sketch().matrix(), path, MatrixFormat::fsk1);
  json meta = sketch_header(sketcher.sketch(), "ffd");
  meta["m"] = sketcher.m();
  meta["seed"] = sketcher.seed();
  meta["trial"] = sketcher.trial();
  json rows = json::array();
  const DenseMatrix pending = sketcher.buffer();
  for (std::size_t i = 0; i < pending.rows(); ++i) {
    const auto r = pending.row(i);
    rows.push_back(std::vector<double>(r.begin(), r.end()));
  }
  meta["buffer"] = std::move(rows);
  write_json(meta, sidecar_path(path));
}

FdSketch load_fd_checkpoint(const std::filesystem::path& path) {
  const json meta = read_json(sidecar_path(path));
  expect_kind(meta, "fd", path);
  return read_sketch(path, meta);
}

FfdSketcher load_ffd_checkpoint(const std::filesystem::path& path) {
  const auto side = sidecar_path(path);
  const json meta = read_json(side);
  expect_kind(meta, "ffd", side);
  FdSketch sketch = read_sketch(path, meta);
  const auto rows = field<std::vector<std::vector<double>>>(meta, "buffer", side);
  DenseMatrix pending(rows.size(), sketch.d());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != sketch.d()) throw FormatError("buffer row width disagrees with d", i);
    std::copy(rows[i].begin(), rows[i].end(), pending.row(i).begin());
  }
  return FfdSketcher::restore(std::move(sketch), field<std::size_t>(meta, "m", side),
                              field<std::uint64_t>(meta, "seed", side), field<std::uint64_t>(meta, "trial", side),
                              pending);
}

void save_model(const HashModel& model, const std::filesystem::path& path) {
  save_matrix(model.w, path, MatrixFormat::fsk1);
  write_json(json{{"kind", "model"}, {"d", model.d()}, {"r", model.r()}, {"mu", model.mu}}, sidecar_path(path));
}

HashModel load_model(const std::filesystem::path& path) {
  const auto side = sidecar_path(path);
  const json meta = read_json(side);
  expect_kind(meta, "model", side);
  HashModel model;
  model.w = load_matrix(path, MatrixFormat::fsk1);
  model.mu = field<std::vector<double>>(meta, "mu", side);
  if (model.w.rows() != field<std::size_t>(meta, "d", side) || model.w.cols() != field<std::size_t>(meta, "r", side) ||
      model.mu.size() != model.w.rows()) {
    throw FormatError("model matrix shape disagrees with sidecar", 4);
  }
  return model;
}

void save_summary(const WorkerSummary& summary, const std::filesystem::path& path) {
  save_matrix(summary.b, path, MatrixFormat::fsk1);
  write_json(json{{"kind", "worker_summary"},
                  {"ell", summary.b.rows()},
                  {"d", summary.b.cols()},
                  {"mu", summary.mu},
                  {"n", summary.n},
                  {"worker_id", summary.worker_id}},
             sidecar_path(path));
}

WorkerSummary load_summary(const std::filesystem::path& path) {
  const auto side = sidecar_path(path);
  const json meta = read_json(side);
  expect_kind(meta, "worker_summary", side);
  WorkerSummary s;
  s.b = load_matrix(path, MatrixFormat::fsk1);
  s.mu = field<std::vector<double>>(meta, "mu", side);
  s.n = field<std::uint64_t>(meta, "n", side);
  s.worker_id = field<std::uint32_t>(meta, "worker_id", side);
  if (s.b.rows() != field<std::size_t>(meta, "ell", side) || s.b.cols() != field<std::size_t>(meta, "d", side) ||
      s.mu.size() != s.b.cols()) {
    throw FormatError("summary matrix shape disagrees with sidecar", 4);
  }
  return s;
}

void write_codes(std::ostream& out, const BinaryCodes& codes) {
  require(codes.n() <= UINT32_MAX && codes.r() <= UINT32_MAX, "codes too large for FSKC");
  unsigned char header[16] = {};
  std::copy(kCodesMagic, kCodesMagic + 4, header);
  for (int b = 0; b < 4; ++b) {
    header[4 + b] = static_cast<unsigned char>((codes.n() >> (8 * b)) & 0xff);
    header[8 + b] = static_cast<unsigned char>((codes.r() >> (8 * b)) & 0xff);
  }
  out.write(reinterpret_cast<const char*>(header), 16);
  const std::size_t row_bytes = (codes.r() + 7) / 8;
  std::vector<unsigned char> row(row_bytes);
  for (std::size_t i = 0; i < codes.n(); ++i) {
    const auto words = codes.code(i);
    for (std::size_t byte = 0; byte < row_bytes; ++byte) {
      row[byte] = static_cast<unsigned char>((words[byte / 8] >> (8 * (byte % 8))) & 0xff);
    }
    out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row_bytes));
  }
}

BinaryCodes read_codes(std::istream& in) {
  unsigned char header[16];
  in.read(reinterpret_cast<char*>(header), 16);
  if (in.gcount() < 4 || !std::equal(kCodesMagic, kCodesMagic + 4, reinterpret_cast<const char*>(header))) {
    throw FormatError("bad FSKC magic", 0);
  }
  if (in.gcount() < 16) throw FormatError("truncated FSKC header", static_cast<std::size_t>(in.gcount()));
  std::size_t n = 0;
  std::size_t r = 0;
  for (int b = 0; b < 4; ++b) {
    n |= static_cast<std::size_t>(header[4 + b]) << (8 * b);
    r |= static_cast<std::size_t>(header[8 + b]) << (8 * b);
  }
  if (r == 0) throw FormatError("FSKC code length is zero", 8);
  BinaryCodes codes(n, r);
  const std::size_t row_bytes = (r + 7) / 8;
  std::vector<unsigned char> row(row_bytes);
  for (std::size_t i = 0; i < n; ++i) {
    in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row_bytes));
    if (static_cast<std::size_t>(in.gcount()) != row_bytes) {
      throw FormatError("truncated FSKC payload", 16 + i * row_bytes + static_cast<std::size_t>(in.gcount()));
    }
    auto words = codes.code(i);
    for (std::size_t byte = 0; byte < row_bytes; ++byte) {
      words[byte / 8] |= static_cast<std::uint64_t>(row[byte]) << (8 * (byte % 8));
    }
    if (r % 64 != 0 && (words.back() >> (r % 64)) != 0) {
      throw FormatError("FSKC padding bits set", 16 + i * row_bytes);
    }
  }
  return codes;
}

void save_codes(const BinaryCodes& codes, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_codes(out, codes);
  if (!out) throw IoError("write failed for " + path.string());
}

BinaryCodes load_codes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return read_codes(in);
}

} // namespace frosketch
