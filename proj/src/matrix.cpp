#include "artsep/matrix.hpp"

#include <cstdio>
#include <cstring>
#include <memory>

#include "artsep/common.hpp"

namespace artsep {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_or_throw(const std::string& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) throw DataError("cannot open file: " + path);
  return f;
}

void put_u32(std::FILE* f, std::uint32_t x) {
  unsigned char b[4] = {static_cast<unsigned char>(x), static_cast<unsigned char>(x >> 8),
                        static_cast<unsigned char>(x >> 16), static_cast<unsigned char>(x >> 24)};
  std::fwrite(b, 1, 4, f);
}

std::uint32_t get_u32(std::FILE* f, const std::string& path) {
  unsigned char b[4];
  if (std::fread(b, 1, 4, f) != 4) throw DataError("truncated ARTF file: " + path);
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void write_header(std::FILE* f, std::size_t rows, std::size_t cols) {
  std::fwrite("ARTF", 1, 4, f);
  put_u32(f, static_cast<std::uint32_t>(rows));
  put_u32(f, static_cast<std::uint32_t>(cols));
}

std::pair<std::size_t, std::size_t> read_header(std::FILE* f, const std::string& path) {
  char magic[4];
  if (std::fread(magic, 1, 4, f) != 4 || std::memcmp(magic, "ARTF", 4) != 0)
    throw DataError("not an ARTF file: " + path);
  std::size_t rows = get_u32(f, path);
  std::size_t cols = get_u32(f, path);
  return {rows, cols};
}

long payload_size(std::FILE* f) {
  long here = std::ftell(f);
  std::fseek(f, 0, SEEK_END);
  long end = std::ftell(f);
  std::fseek(f, here, SEEK_SET);
  return end - here;
}

}  // namespace

void save_artf(const std::string& path, const MatD& m) {
  FilePtr f = open_or_throw(path, "wb");
  write_header(f.get(), m.rows, m.cols);
  std::vector<float> buf(m.v.size());
  for (std::size_t i = 0; i < m.v.size(); ++i) buf[i] = static_cast<float>(m.v[i]);
  if (!buf.empty() && std::fwrite(buf.data(), sizeof(float), buf.size(), f.get()) != buf.size())
    throw DataError("short write: " + path);
}

void save_artf(const std::string& path, const MatU8& m) {
  FilePtr f = open_or_throw(path, "wb");
  write_header(f.get(), m.rows, m.cols);
  if (!m.v.empty() && std::fwrite(m.v.data(), 1, m.v.size(), f.get()) != m.v.size())
    throw DataError("short write: " + path);
}

ArtfKind peek_artf_kind(const std::string& path) {
  FilePtr f = open_or_throw(path, "rb");
  auto [rows, cols] = read_header(f.get(), path);
  long n = payload_size(f.get());
  std::size_t cells = rows * cols;
  if (static_cast<std::size_t>(n) == cells * 4) return ArtfKind::F32;
  if (static_cast<std::size_t>(n) == cells) return ArtfKind::U8;
  if (cells == 0) return ArtfKind::F32;
  throw DataError("ARTF payload size does not match header: " + path);
}

MatD load_artf_f32(const std::string& path) {
  FilePtr f = open_or_throw(path, "rb");
  auto [rows, cols] = read_header(f.get(), path);
  MatD m(rows, cols);
  std::vector<float> buf(rows * cols);
  if (!buf.empty() && std::fread(buf.data(), sizeof(float), buf.size(), f.get()) != buf.size())
    throw DataError("truncated ARTF payload: " + path);
  for (std::size_t i = 0; i < buf.size(); ++i) m.v[i] = buf[i];
  return m;
}

MatU8 load_artf_u8(const std::string& path) {
  FilePtr f = open_or_throw(path, "rb");
  auto [rows, cols] = read_header(f.get(), path);
  MatU8 m(rows, cols);
  if (!m.v.empty() && std::fread(m.v.data(), 1, m.v.size(), f.get()) != m.v.size())
    throw DataError("truncated ARTF payload: " + path);
  return m;
}

}  // namespace artsep
