// Small fixed-size real/complex vector and matrix helpers (no external deps).
#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>

#include "gravem/errors.hpp"

namespace gravem {

using Real = double;
using Complex = std::complex<Real>;

using Vec3 = std::array<Real, 3>;
using Vec4 = std::array<Real, 4>;
using CVec2 = std::array<Complex, 2>;
using CVec3 = std::array<Complex, 3>;
using CVec4 = std::array<Complex, 4>;

using Mat3 = std::array<std::array<Real, 3>, 3>;
using Mat4 = std::array<std::array<Real, 4>, 4>;
using CMat2 = std::array<std::array<Complex, 2>, 2>;
using CMat3 = std::array<std::array<Complex, 3>, 3>;
using CMat4 = std::array<std::array<Complex, 4>, 4>;

inline constexpr Real kPi = 3.14159265358979323846264338327950288;

// ---------------------------------------------------------------- vectors

inline Real dot(const Vec3& a, const Vec3& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

inline Real norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2],
          a[0] * b[1] - a[1] * b[0]};
}

inline Vec3 scaled(const Vec3& a, Real s) { return {a[0] * s, a[1] * s, a[2] * s}; }

inline Vec3 normalized(const Vec3& a) {
  const Real n = norm(a);
  if (n == 0.0) throw ZeroMomentum("cannot normalize a zero 3-vector");
  return scaled(a, 1.0 / n);
}

inline Vec3 operator+(const Vec3& a, const Vec3& b) {
  return {a[0] + b[0], a[1] + b[1], a[2] + b[2]};
}
inline Vec3 operator-(const Vec3& a, const Vec3& b) {
  return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}

inline CVec3 operator+(const CVec3& a, const CVec3& b) {
  return {a[0] + b[0], a[1] + b[1], a[2] + b[2]};
}
inline CVec3 scaled(const CVec3& a, Complex s) { return {a[0] * s, a[1] * s, a[2] * s}; }

inline CVec4 scaled(const CVec4& a, Complex s) {
  return {a[0] * s, a[1] * s, a[2] * s, a[3] * s};
}
inline CVec4 operator+(const CVec4& a, const CVec4& b) {
  return {a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]};
}
inline CVec4 operator-(const CVec4& a, const CVec4& b) {
  return {a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]};
}

// Euclidean (non-metric) dot products, no conjugation.
inline Complex cdot(const CVec3& a, const CVec3& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}
inline Complex cdot_conj(const CVec3& a, const CVec3& b) {
  return std::conj(a[0]) * b[0] + std::conj(a[1]) * b[1] + std::conj(a[2]) * b[2];
}

inline CVec4 embed_spatial(const CVec3& v) { return {Complex(0.0), v[0], v[1], v[2]}; }
inline CVec3 spatial_part(const CVec4& v) { return {v[1], v[2], v[3]}; }
inline Vec3 spatial_part(const Vec4& v) { return {v[1], v[2], v[3]}; }

// ---------------------------------------------------------------- matrices

template <class M>
inline M zero_matrix() {
  M m{};
  return m;
}

inline Mat3 identity3() {
  Mat3 m{};
  m[0][0] = m[1][1] = m[2][2] = 1.0;
  return m;
}

inline Vec3 mat_vec(const Mat3& m, const Vec3& v) {
  Vec3 r{};
  for (int i = 0; i < 3; ++i)
    r[i] = m[i][0] * v[0] + m[i][1] * v[1] + m[i][2] * v[2];
  return r;
}

inline CVec3 mat_vec(const Mat3& m, const CVec3& v) {
  CVec3 r{};
  for (int i = 0; i < 3; ++i)
    r[i] = m[i][0] * v[0] + m[i][1] * v[1] + m[i][2] * v[2];
  return r;
}

inline Mat3 mat_mul(const Mat3& a, const Mat3& b) {
  Mat3 r{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) r[i][j] += a[i][k] * b[k][j];
  return r;
}

inline Mat3 transpose(const Mat3& a) {
  Mat3 r{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r[i][j] = a[j][i];
  return r;
}

inline Real det3(const Mat3& m) {
  return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
         m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
         m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

inline Real det4(const Mat4& g) {
  // cofactor expansion via 3x3 minors of the first row
  Real det = 0.0;
  for (int c = 0; c < 4; ++c) {
    Mat3 minor{};
    for (int i = 1; i < 4; ++i) {
      int jj = 0;
      for (int j = 0; j < 4; ++j) {
        if (j == c) continue;
        minor[i - 1][jj++] = g[i][j];
      }
    }
    det += ((c % 2 == 0) ? 1.0 : -1.0) * g[0][c] * det3(minor);
  }
  return det;
}

// Gauss-Jordan inverse with partial pivoting.
inline Mat4 inverse4(const Mat4& g) {
  std::array<std::array<Real, 8>, 4> a{};
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) a[i][j] = g[i][j];
    a[i][4 + i] = 1.0;
  }
  for (int col = 0; col < 4; ++col) {
    int piv = col;
    for (int r = col + 1; r < 4; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    if (a[piv][col] == 0.0) throw Error("singular 4x4 matrix in inverse4");
    std::swap(a[col], a[piv]);
    const Real inv = 1.0 / a[col][col];
    for (int j = 0; j < 8; ++j) a[col][j] *= inv;
    for (int r = 0; r < 4; ++r) {
      if (r == col) continue;
      const Real f = a[r][col];
      if (f == 0.0) continue;
      for (int j = 0; j < 8; ++j) a[r][j] -= f * a[col][j];
    }
  }
  Mat4 out{};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) out[i][j] = a[i][4 + j];
  return out;
}

template <class M>
inline Real frobenius(const M& m) {
  Real s = 0.0;
  for (const auto& row : m)
    for (const auto& v : row) s += std::norm(Complex(v));
  return std::sqrt(s);
}

template <class M>
inline M mat_sub(const M& a, const M& b) {
  M r = a;
  for (std::size_t i = 0; i < r.size(); ++i)
    for (std::size_t j = 0; j < r[i].size(); ++j) r[i][j] = a[i][j] - b[i][j];
  return r;
}

template <class M>
inline M mat_add(const M& a, const M& b) {
  M r = a;
  for (std::size_t i = 0; i < r.size(); ++i)
    for (std::size_t j = 0; j < r[i].size(); ++j) r[i][j] = a[i][j] + b[i][j];
  return r;
}

template <class M, class S>
inline M mat_scaled(const M& a, S s) {
  M r = a;
  for (auto& row : r)
    for (auto& v : row) v = v * s;
  return r;
}

inline CMat3 outer(const CVec3& a, const CVec3& b) {
  CMat3 r{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r[i][j] = a[i] * b[j];
  return r;
}

inline CMat4 outer(const CVec4& a, const CVec4& b) {
  CMat4 r{};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) r[i][j] = a[i] * b[j];
  return r;
}

// (a (x) b + b (x) a) / 2
inline CMat4 sym_outer(const CVec4& a, const CVec4& b) {
  CMat4 r{};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) r[i][j] = 0.5 * (a[i] * b[j] + b[i] * a[j]);
  return r;
}

inline CMat4 embed_spatial(const CMat3& m) {
  CMat4 r{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r[i + 1][j + 1] = m[i][j];
  return r;
}

template <class M>
inline Real max_abs(const M& m) {
  Real mx = 0.0;
  for (const auto& row : m)
    for (const auto& v : row) mx = std::max(mx, std::abs(Complex(v)));
  return mx;
}

inline bool is_symmetric(const CMat4& m, Real tol) {
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      if (std::abs(m[i][j] - m[j][i]) > tol) return false;
  return true;
}

// Rodrigues rotation about a unit axis.
inline Mat3 rotation_matrix(const Vec3& axis, Real theta) {
  if (std::abs(norm(axis) - 1.0) > 1e-12)
    throw NonUnitAxis("rotation axis must be a unit vector");
  const Real c = std::cos(theta), s = std::sin(theta);
  const Real x = axis[0], y = axis[1], z = axis[2];
  Mat3 r{};
  r[0] = {c + x * x * (1 - c), x * y * (1 - c) - z * s, x * z * (1 - c) + y * s};
  r[1] = {y * x * (1 - c) + z * s, c + y * y * (1 - c), y * z * (1 - c) - x * s};
  r[2] = {z * x * (1 - c) - y * s, z * y * (1 - c) + x * s, c + z * z * (1 - c)};
  return r;
}

}  // namespace gravem
