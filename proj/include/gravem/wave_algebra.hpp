// Flat-space plane-wave algebra: helicity states, two-photon tensor waves,
// the mass-squared and total-helicity operators, and the circular-tensor
// factorization that linear polarizations do not admit.
#pragma once

#include <cmath>
#include <optional>
#include <utility>

#include "gravem/errors.hpp"
#include "gravem/linalg.hpp"

namespace gravem {

// ----------------------------------------------------------- polarizations

// Unit helicity polarization for propagation along z: (x +/- i y)/sqrt(2).
inline CVec3 axial_polarization(int helicity) {
  const Real r = 1.0 / std::sqrt(2.0);
  return {Complex(r, 0.0), Complex(0.0, helicity * r), Complex(0.0, 0.0)};
}

// Deterministic phase convention: rotate the z-axis solution onto p_hat by
// the unique rotation in the plane spanned by z and p_hat. p_hat = -z is
// taken to the rotation by pi about the y axis.
inline CVec3 helicity_polarization(const Vec3& p_hat, int helicity) {
  if (helicity != 1 && helicity != -1)
    throw InvalidHelicity("photon helicity must be +1 or -1");
  const CVec3 e0 = axial_polarization(helicity);
  const Real cz = p_hat[2];
  if (cz > 1.0 - 1e-14) return e0;
  if (cz < -1.0 + 1e-14) {
    Mat3 r = rotation_matrix({0.0, 1.0, 0.0}, kPi);
    return mat_vec(r, e0);
  }
  const Vec3 axis = normalized(cross(Vec3{0.0, 0.0, 1.0}, p_hat));
  const Mat3 r = rotation_matrix(axis, std::acos(std::clamp(cz, -1.0, 1.0)));
  return mat_vec(r, e0);
}

struct PlaneWave {
  Vec3 momentum{};      // spatial momentum p, omega = |p|
  Real omega = 0.0;
  int helicity = 0;     // +1 or -1
  CVec3 polarization{}; // unit e_lambda(p), transverse to p
};

inline PlaneWave make_plane_wave(const Vec3& p, int helicity) {
  const Real w = norm(p);
  if (w == 0.0) throw ZeroMomentum("plane wave requires |p| > 0");
  if (helicity != 1 && helicity != -1)
    throw InvalidHelicity("photon helicity must be +1 or -1");
  PlaneWave pw;
  pw.momentum = p;
  pw.omega = w;
  pw.helicity = helicity;
  pw.polarization = helicity_polarization(scaled(p, 1.0 / w), helicity);
  return pw;
}

// ----------------------------------------------------------- two-photon states

inline bool momenta_parallel(const Vec3& p, const Vec3& q, Real tol = 1e-12) {
  const Real pp = norm(p), qq = norm(q);
  return std::abs(dot(p, q) - pp * qq) <= tol * std::max(pp * qq, 1e-300);
}

// Unnormalized exchange-symmetric pair w1 (x) w2 + w2 (x) w1. When the two
// momenta are parallel the family parameters kappa = w1/(w1+w2) and
// alpha = kappa/(1-kappa) are recorded.
struct TwoPhotonState {
  PlaneWave first;
  PlaneWave second;
  bool parallel = false;
  std::optional<Real> kappa;
  std::optional<Real> alpha;
};

inline TwoPhotonState symmetrized_product(const PlaneWave& w1, const PlaneWave& w2) {
  TwoPhotonState st;
  st.first = w1;
  st.second = w2;
  st.parallel = momenta_parallel(w1.momentum, w2.momentum);
  if (st.parallel) {
    const Real k = w1.omega / (w1.omega + w2.omega);
    st.kappa = k;
    st.alpha = k / (1.0 - k);
  }
  return st;
}

// Two-particle mass-squared eigenvalue, -2(w w' - p.p'); zero iff the two
// momenta are parallel, strictly negative otherwise (the leading sign follows
// the source expression verbatim rather than the usual p^mu p_mu convention).
inline Real mass_squared(const TwoPhotonState& st) {
  return -2.0 * (st.first.omega * st.second.omega - dot(st.first.momentum, st.second.momentum));
}

// Sum of the two helicities; defined only for parallel momenta, where the
// symmetrized state is a total-helicity eigenstate along the common axis.
inline int total_helicity(const TwoPhotonState& st) {
  if (!st.parallel)
    throw NotHelicityEigenstate(
        "total helicity is defined only for parallel momenta (the symmetrized state is not "
        "an eigenstate along a single direction)");
  return st.first.helicity + st.second.helicity;
}

// Helicity 0 sectors have no gravitational counterpart.
inline bool has_gravitational_equivalent(const TwoPhotonState& st) {
  return st.parallel && st.first.helicity == st.second.helicity;
}

struct FourMomentumResult {
  Vec4 total{};             // (w + w', p + p')
  bool momentum_eigenstate = false;  // false for non-parallel momenta: sum only,
                                     // no nullity guarantee
};

inline FourMomentumResult four_momentum(const TwoPhotonState& st) {
  FourMomentumResult r;
  r.total[0] = st.first.omega + st.second.omega;
  for (int i = 0; i < 3; ++i) r.total[i + 1] = st.first.momentum[i] + st.second.momentum[i];
  r.momentum_eigenstate = st.parallel;
  return r;
}

// The one-parameter family of same-helicity pairs (kappa q, (1-kappa) q)
// equivalent to a tensor wave of momentum q and helicity lambda_g.
inline TwoPhotonState equivalent_tensor_family(const Vec3& q, int lambda_g, Real kappa) {
  if (lambda_g != 2 && lambda_g != -2)
    throw InvalidGravHelicity("tensor-wave helicity must be +2 or -2");
  if (!(kappa > 0.0 && kappa < 1.0))
    throw KappaOutOfRange(
        "kappa must lie strictly in (0,1); otherwise one factor would propagate backwards "
        "along the ray");
  if (norm(q) == 0.0) throw ZeroMomentum("tensor wave requires |q| > 0");
  const int lam = lambda_g / 2;
  return symmetrized_product(make_plane_wave(scaled(q, kappa), lam),
                             make_plane_wave(scaled(q, 1.0 - kappa), lam));
}

// -------------------------------------------------- transverse 2x2 tensors

// "plus" linear polarization x(x)x - y(x)y
inline CMat2 plus_tensor() {
  CMat2 t{};
  t[0][0] = 1.0;
  t[1][1] = -1.0;
  return t;
}

// "cross" linear polarization x(x)y + y(x)x
inline CMat2 cross_tensor() {
  CMat2 t{};
  t[0][1] = t[1][0] = 1.0;
  return t;
}

inline Real frobenius2(const CMat2& t) {
  Real s = 0.0;
  for (const auto& row : t)
    for (const auto& v : row) s += std::norm(v);
  return s;
}

// Factor a symmetric complex 2x2 tensor as a (x) a, if it has complex rank 1.
// Returns nullopt for rank-2 tensors (the linear polarizations s and m).
// Sign convention: the first nonzero component of a has argument in [0, pi).
inline std::optional<CVec2> factorize_circular(const CMat2& t, Real rel_tol = 1e-10) {
  const Real scale = frobenius2(t);
  if (scale == 0.0) throw DegenerateInput("cannot factorize the zero tensor");
  if (std::abs(t[0][1] - t[1][0]) > 1e-12 * std::sqrt(scale))
    throw NonSymmetricInput("factorization requires a symmetric tensor");
  const Complex det = t[0][0] * t[1][1] - t[0][1] * t[1][0];
  if (std::abs(det) > rel_tol * scale) return std::nullopt;
  // rank 1 symmetric: a_j^2 = t_jj, extract from the strongest column
  CVec2 a{};
  if (std::abs(t[0][0]) >= std::abs(t[1][1])) {
    a[0] = std::sqrt(t[0][0]);
    a[1] = (a[0] == Complex(0.0)) ? std::sqrt(t[1][1]) : t[0][1] / a[0];
  } else {
    a[1] = std::sqrt(t[1][1]);
    a[0] = t[0][1] / a[1];
  }
  // fix the global sign
  for (const auto& c : a) {
    if (std::abs(c) < 1e-15 * std::sqrt(scale)) continue;
    const Real arg = std::arg(c);
    if (!(arg >= 0.0 && arg < kPi)) {
      a[0] = -a[0];
      a[1] = -a[1];
    }
    break;
  }
  return a;
}

// ------------------------------------------------------------------ rotations

inline CVec3 rotate_about(const Vec3& axis, Real theta, const CVec3& v) {
  return mat_vec(rotation_matrix(axis, theta), v);
}

inline CMat3 rotate_about(const Vec3& axis, Real theta, const CMat3& t) {
  const Mat3 r = rotation_matrix(axis, theta);
  CMat3 out{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      Complex s = 0.0;
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) s += r[i][a] * r[j][b] * t[a][b];
      out[i][j] = s;
    }
  return out;
}

// ------------------------------------------------------- factorized fields

// A circularly polarized vector plane wave along +z, evaluated as
// polarization * exp(i k (z - t)).
struct VectorPlaneWaveField {
  CVec3 polarization{};
  Real wavenumber = 0.0;

  CVec3 operator()(Real z, Real t) const {
    const Complex phase = std::exp(Complex(0.0, wavenumber * (z - t)));
    return scaled(polarization, phase);
  }
};

// Split a helicity lambda_g tensor plane wave of frequency omega into its two
// vector factors with wavenumbers kappa*omega and (1-kappa)*omega.
inline std::pair<VectorPlaneWaveField, VectorPlaneWaveField> split_plane_wave(int lambda_g,
                                                                              Real omega,
                                                                              Real kappa) {
  if (lambda_g != 2 && lambda_g != -2)
    throw InvalidGravHelicity("tensor-wave helicity must be +2 or -2");
  if (!(kappa > 0.0 && kappa < 1.0))
    throw KappaOutOfRange("kappa must lie strictly in (0,1)");
  if (!(omega > 0.0)) throw ZeroMomentum("frequency must be > 0");
  const CVec3 e = axial_polarization(lambda_g / 2);
  return {VectorPlaneWaveField{e, kappa * omega},
          VectorPlaneWaveField{e, (1.0 - kappa) * omega}};
}

// Exchange-symmetric tensor sample of two vector fields taken at equal
// position and time in both factors: (f1 (x) f2 + f2 (x) f1)/2.
inline CMat3 symmetrized_field_sample(const VectorPlaneWaveField& f1,
                                      const VectorPlaneWaveField& f2, Real z, Real t) {
  const CVec3 a = f1(z, t), b = f2(z, t);
  CMat3 out{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) out[i][j] = 0.5 * (a[i] * b[j] + b[i] * a[j]);
  return out;
}

}  // namespace gravem
