#include "dsacd/runtime/checkpoint.hpp"

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace dsacd::runtime {

namespace {

constexpr char kMagic[8] = {'D', 'S', 'A', 'C', 'D', 'C', 'K', 'P'};

std::uint64_t fnv1a(const char* data, std::size_t n) {
  std::uint64_t h = 1469598103934665603ULL;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= static_cast<unsigned char>(data[i]);
    h *= 1099511628211ULL;
  }
  return h;
}

template <typename T>
void append(std::string& out, T value) {
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.append(buf, sizeof(T));
}

template <typename T>
T take(const std::string& in, std::size_t& pos) {
  if (pos + sizeof(T) > in.size()) throw CheckpointError("checkpoint is truncated");
  T value;
  std::memcpy(&value, in.data() + pos, sizeof(T));
  pos += sizeof(T);
  return value;
}

std::string encode_matrix(const Matrix& m) {
  std::string out;
  append<std::int64_t>(out, m.rows());
  append<std::int64_t>(out, m.cols());
  out.append(reinterpret_cast<const char*>(m.data()), sizeof(double) * static_cast<std::size_t>(m.size()));
  return out;
}

}  // namespace

CheckpointError::CheckpointError(const std::string& what, std::uint32_t expected, std::uint32_t found)
    : std::runtime_error(what + " (expected format version " + std::to_string(expected) + ", found " +
                         std::to_string(found) + ")"),
      expected_(expected),
      found_(found) {}

void RecordWriter::put(const std::string& name, const std::string& bytes) { records_[name] = bytes; }
void RecordWriter::put(const std::string& name, const Matrix& m) { records_[name] = encode_matrix(m); }
void RecordWriter::put(const std::string& name, const Vector& v) { records_[name] = encode_matrix(Matrix(v)); }
void RecordWriter::put(const std::string& name, double x) { put(name, Vector(Vector::Constant(1, x))); }

void RecordWriter::put(const std::string& name, long long x) {
  std::string out;
  append<std::int64_t>(out, x);
  records_[name] = out;
}

std::string RecordWriter::finish(std::uint32_t version) const {
  std::string out(kMagic, sizeof(kMagic));
  append<std::uint32_t>(out, version);
  append<std::uint32_t>(out, static_cast<std::uint32_t>(records_.size()));
  for (const auto& [name, payload] : records_) {
    append<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    out += name;
    append<std::uint64_t>(out, payload.size());
    out += payload;
  }
  append<std::uint64_t>(out, fnv1a(out.data(), out.size()));
  return out;
}

RecordReader::RecordReader(const std::string& in, std::uint32_t expected_version) {
  if (in.size() < sizeof(kMagic) + 8 || std::memcmp(in.data(), kMagic, sizeof(kMagic)) != 0)
    throw CheckpointError("not a checkpoint file");
  std::size_t pos = sizeof(kMagic);
  const auto version = take<std::uint32_t>(in, pos);
  if (version != expected_version) throw CheckpointError("unsupported checkpoint version", expected_version, version);
  if (in.size() < pos + 4 + 8) throw CheckpointError("checkpoint is truncated");
  const std::size_t body = in.size() - 8;
  std::size_t tail = body;
  if (take<std::uint64_t>(in, tail) != fnv1a(in.data(), body)) throw CheckpointError("checkpoint checksum mismatch");
  const auto count = take<std::uint32_t>(in, pos);
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto name_len = take<std::uint32_t>(in, pos);
    if (pos + name_len > body) throw CheckpointError("checkpoint is truncated");
    std::string name = in.substr(pos, name_len);
    pos += name_len;
    const auto len = take<std::uint64_t>(in, pos);
    if (pos + len > body) throw CheckpointError("checkpoint is truncated");
    records_[name] = in.substr(pos, len);
    pos += len;
  }
  if (pos != body) throw CheckpointError("checkpoint has trailing bytes");
}

const std::string& RecordReader::bytes(const std::string& name) const {
  auto it = records_.find(name);
  if (it == records_.end()) throw CheckpointError("checkpoint is missing record '" + name + "'");
  return it->second;
}

Matrix RecordReader::matrix(const std::string& name) const {
  const std::string& b = bytes(name);
  std::size_t pos = 0;
  const auto rows = take<std::int64_t>(b, pos);
  const auto cols = take<std::int64_t>(b, pos);
  if (rows < 0 || cols < 0 || b.size() - pos != sizeof(double) * static_cast<std::size_t>(rows * cols))
    throw CheckpointError("checkpoint record '" + name + "' has a bad shape");
  Matrix m(rows, cols);
  std::memcpy(m.data(), b.data() + pos, b.size() - pos);
  return m;
}

Vector RecordReader::vector(const std::string& name) const {
  Matrix m = matrix(name);
  if (m.cols() != 1) throw CheckpointError("checkpoint record '" + name + "' is not a vector");
  return m.col(0);
}

double RecordReader::scalar(const std::string& name) const {
  Vector v = vector(name);
  if (v.size() != 1) throw CheckpointError("checkpoint record '" + name + "' is not a scalar");
  return v(0);
}

long long RecordReader::integer(const std::string& name) const {
  const std::string& b = bytes(name);
  std::size_t pos = 0;
  const auto x = take<std::int64_t>(b, pos);
  if (pos != b.size()) throw CheckpointError("checkpoint record '" + name + "' is not an integer");
  return x;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::string& path, const std::string& bytes) {
  const std::filesystem::path target(path);
  if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp + "'");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("write to '" + tmp + "' failed");
  }
  std::filesystem::rename(tmp, target);
}

}  // namespace dsacd::runtime
