#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>

#include "dsacd/types.hpp"

namespace dsacd::runtime {

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Unreadable, corrupted or incompatible checkpoint.
class CheckpointError : public std::runtime_error {
 public:
  explicit CheckpointError(const std::string& what) : std::runtime_error(what) {}
  CheckpointError(const std::string& what, std::uint32_t expected, std::uint32_t found);
  std::uint32_t expected_version() const { return expected_; }
  std::uint32_t found_version() const { return found_; }

 private:
  std::uint32_t expected_ = kCheckpointVersion;
  std::uint32_t found_ = 0;
};

/// Named binary records behind a magic string and a format version, closed by
/// a checksum over everything before it.
class RecordWriter {
 public:
  void put(const std::string& name, const std::string& bytes);
  void put(const std::string& name, const Matrix& m);
  void put(const std::string& name, const Vector& v);
  void put(const std::string& name, double x);
  void put(const std::string& name, long long x);
  std::string finish(std::uint32_t version = kCheckpointVersion) const;

 private:
  std::map<std::string, std::string> records_;
};

class RecordReader {
 public:
  /// Verifies magic, version and checksum before anything is decoded.
  explicit RecordReader(const std::string& bytes, std::uint32_t expected_version = kCheckpointVersion);
  bool has(const std::string& name) const { return records_.count(name) > 0; }
  const std::string& bytes(const std::string& name) const;
  Matrix matrix(const std::string& name) const;
  Vector vector(const std::string& name) const;
  double scalar(const std::string& name) const;
  long long integer(const std::string& name) const;

 private:
  std::map<std::string, std::string> records_;
};

std::string read_file(const std::string& path);
/// Writes through a temporary file and renames it into place.
void write_file_atomic(const std::string& path, const std::string& bytes);

}  // namespace dsacd::runtime
