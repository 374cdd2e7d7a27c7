#pragma once

#include <filesystem>
#include <iosfwd>

#include "frosketch/dfrosh.hpp"
#include "frosketch/fd_sketch.hpp"
#include "frosketch/ffd_sketch.hpp"
#include "frosketch/frosh.hpp"

// On-disk artifacts are an FSK1 matrix at `path` plus a JSON sidecar at
// `path` + ".json" holding the non-matrix state.

namespace frosketch {

std::filesystem::path sidecar_path(const std::filesystem::path& path);

void save_checkpoint(const FdSketch& sketch, const std::filesystem::path& path);
void save_checkpoint(const FfdSketcher& sketcher, const std::filesystem::path& path);
FdSketch load_fd_checkpoint(const std::filesystem::path& path);
FfdSketcher load_ffd_checkpoint(const std::filesystem::path& path);

/// w as FSK1; sidecar {"kind":"model","d","r","mu"}.
void save_model(const HashModel& model, const std::filesystem::path& path);
HashModel load_model(const std::filesystem::path& path);

/// b as FSK1; sidecar {"kind":"worker_summary","ell","d","mu","n","worker_id"}.
void save_summary(const WorkerSummary& summary, const std::filesystem::path& path);
WorkerSummary load_summary(const std::filesystem::path& path);

// Codes: "FSKC", n (u32 LE), r (u32 LE), 4 zero bytes, then n rows of
// ceil(r/8) bytes with bit k of a code at bit k%8 of byte k/8.
inline constexpr char kCodesMagic[4] = {'F', 'S', 'K', 'C'};

void write_codes(std::ostream& out, const BinaryCodes& codes);
BinaryCodes read_codes(std::istream& in);
void save_codes(const BinaryCodes& codes, const std::filesystem::path& path);
BinaryCodes load_codes(const std::filesystem::path& path);

} // namespace frosketch
