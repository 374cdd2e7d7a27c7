#pragma once

#include <stdexcept>
#include <string>

namespace frosketch {

enum class ErrorKind {
  argument,
  io,
  format,
  numerical,
  stream_length,
};

// All library failures derive from Error so callers (and the C API) can map
// them to a status code without string matching.
class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

class ArgumentError : public Error {
public:
  explicit ArgumentError(const std::string& what) : Error(ErrorKind::argument, what) {}
};

class IoError : public Error {
public:
  explicit IoError(const std::string& what) : Error(ErrorKind::io, what) {}
};

// Malformed file content. offset is the byte (or line, for CSV) where parsing
// stopped.
class FormatError : public Error {
public:
  FormatError(const std::string& what, std::size_t offset)
      : Error(ErrorKind::format, what + " (at offset " + std::to_string(offset) + ")"),
        offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

private:
  std::size_t offset_;
};

class NumericalError : public Error {
public:
  explicit NumericalError(const std::string& what) : Error(ErrorKind::numerical, what) {}
};

class StreamLengthError : public Error {
public:
  explicit StreamLengthError(const std::string& what) : Error(ErrorKind::stream_length, what) {}
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw ArgumentError(msg);
}

} // namespace frosketch
