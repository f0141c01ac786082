#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace artsep {

// Minimal row-major dense matrix. Heavy lifting stays in explicit loops so
// kernels can be parallelized and checked against serial references.
template <class T>
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<T> v;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, T fill = T{}) : rows(r), cols(c), v(r * c, fill) {}

  T& operator()(std::size_t r, std::size_t c) { return v[r * cols + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return v[r * cols + c]; }

  T* row(std::size_t r) { return v.data() + r * cols; }
  const T* row(std::size_t r) const { return v.data() + r * cols; }

  bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }
  bool operator==(const Matrix& o) const { return rows == o.rows && cols == o.cols && v == o.v; }
};

using MatD = Matrix<double>;
using MatU8 = Matrix<std::uint8_t>;
using MatC = Matrix<std::complex<double>>;

// ARTF flat matrix container: little-endian header {magic "ARTF", rows u32,
// cols u32} followed by row-major payload. The payload is f32 for real
// matrices and u8 for binary matrices; a reader tells them apart by the
// payload length (rows*cols*4 vs rows*cols*1).
void save_artf(const std::string& path, const MatD& m);
void save_artf(const std::string& path, const MatU8& m);

enum class ArtfKind { F32, U8 };
ArtfKind peek_artf_kind(const std::string& path);
MatD load_artf_f32(const std::string& path);
MatU8 load_artf_u8(const std::string& path);

}  // namespace artsep
