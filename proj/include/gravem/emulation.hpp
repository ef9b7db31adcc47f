// Laboratory emulation pipeline: conformal shrinking of scenarios, the
// metric-to-medium constitutive map, an eikonal ray check through the
// compiled medium, and a kinematic model of the SPDC photon-pair source.
#pragma once

#include <cmath>
#include <functional>
#include <utility>

#include "gravem/errors.hpp"
#include "gravem/geodesic.hpp"
#include "gravem/linalg.hpp"
#include "gravem/metric.hpp"
#include "gravem/wave_algebra.hpp"

namespace gravem {

// -------------------------------------------------------- conformal scaling

inline MetricPtr conformal_scale_metric(MetricPtr m, Real s) { return scale_metric(std::move(m), s); }

struct FieldSample {
  Vec4 x{};
  Mat4 f{};  // antisymmetric field strength
};

inline void require_antisymmetric(const Mat4& f) {
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      if (f[i][j] != -f[j][i]) throw NonSymmetricInput("field strength must be antisymmetric");
}

// F'(x') = s^-2 F(x'/s), x' = s x.
inline FieldSample conformal_scale_field(const FieldSample& sample, Real s) {
  if (!(s > 0.0)) throw NonPositiveScale("scale factor must be > 0");
  require_antisymmetric(sample.f);
  FieldSample out;
  for (int i = 0; i < 4; ++i) out.x[i] = s * sample.x[i];
  out.f = mat_scaled(sample.f, 1.0 / (s * s));
  return out;
}

// ------------------------------------------------------------ medium compile

struct ConstitutiveTensors {
  Mat3 eps{};  // relative permittivity
  Mat3 mu{};   // relative permeability, equal to eps for metric media
  Vec3 w{};    // magnetoelectric coupling, zero for static metrics
};

// Constitutive map for a stationary metric: eps^ij = mu^ij = -sqrt(-g) g^ij / g_00,
// w_i = g_{0i} / g_00. Vacuum for the flat metric.
inline ConstitutiveTensors plebanski_medium(const Metric& m, const Event& e) {
  const Mat4 g = m.evaluate(e);
  if (!(g[0][0] > 0.0))
    throw ErgoregionOrHorizon("medium map requires g_00 > 0 (stationary exterior region)");
  const Real det = det4(g);
  const Mat4 ginv = inverse4(g);
  const Real root = std::sqrt(-det);
  ConstitutiveTensors out;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const Real v = -root * ginv[i + 1][j + 1] / g[0][0];
      out.eps[i][j] = v;
      out.mu[i][j] = v;
    }
    out.w[i] = g[0][i + 1] / g[0][0];
  }
  return out;
}

// Scalar effective refractive index of an impedance-matched medium.
inline Real effective_index(const ConstitutiveTensors& c) { return std::cbrt(det3(c.eps)); }

// ------------------------------------------------------------- medium rays

using MediumField = std::function<ConstitutiveTensors(const Vec3&)>;

struct MediumTraceResult {
  Real deflection_medium = 0.0;
  Real deflection_geodesic = 0.0;
  Real relative_deviation = 0.0;
};

namespace detail {

inline Real index_at(const MediumField& field, const Vec3& x) {
  return effective_index(field(x));
}

// d/dsigma (x, k) for H = (|k|^2 - n^2 omega^2)/2 with omega = 1;
// grad(n^2) by central differences of the compiled medium itself.
inline void eikonal_rhs(const MediumField& field, const Vec3& x, const Vec3& k, Vec3& dx,
                        Vec3& dk) {
  dx = k;
  for (int i = 0; i < 3; ++i) {
    const Real h = 1e-5 * std::max(1.0, std::abs(x[i]));
    Vec3 xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    const Real np = index_at(field, xp), nm = index_at(field, xm);
    dk[i] = 0.5 * (np * np - nm * nm) / (2.0 * h);
  }
}

}  // namespace detail

// Trace a ray through the compiled medium via the isotropic-index eikonal
// equations and return the Euclidean bending angle between launch and exit.
inline Real trace_medium_ray(const MediumField& field, const Vec3& start, const Vec3& direction,
                             Real exit_radius, Real step, std::uint64_t max_steps = 20'000'000) {
  Vec3 x = start;
  Vec3 k = scaled(normalized(direction), detail::index_at(field, start));
  const Vec3 k_in = normalized(k);
  std::uint64_t n = 0;
  bool went_inside = false;
  while (true) {
    const Real r = norm(x);
    if (!went_inside) {
      if (r < 0.999 * exit_radius) went_inside = true;
    } else if (r >= exit_radius) {
      break;
    }
    if (++n > max_steps) throw Error("medium ray exceeded max_steps");
    // RK4 on (x, k)
    Vec3 dx1, dk1, dx2, dk2, dx3, dk3, dx4, dk4;
    detail::eikonal_rhs(field, x, k, dx1, dk1);
    detail::eikonal_rhs(field, x + scaled(dx1, 0.5 * step), Vec3{k[0] + 0.5 * step * dk1[0],
                        k[1] + 0.5 * step * dk1[1], k[2] + 0.5 * step * dk1[2]}, dx2, dk2);
    detail::eikonal_rhs(field, x + scaled(dx2, 0.5 * step), Vec3{k[0] + 0.5 * step * dk2[0],
                        k[1] + 0.5 * step * dk2[1], k[2] + 0.5 * step * dk2[2]}, dx3, dk3);
    detail::eikonal_rhs(field, x + scaled(dx3, step), Vec3{k[0] + step * dk3[0],
                        k[1] + step * dk3[1], k[2] + step * dk3[2]}, dx4, dk4);
    for (int i = 0; i < 3; ++i) {
      x[i] += step / 6.0 * (dx1[i] + 2 * dx2[i] + 2 * dx3[i] + dx4[i]);
      k[i] += step / 6.0 * (dk1[i] + 2 * dk2[i] + 2 * dk3[i] + dk4[i]);
    }
  }
  const Vec3 k_out = normalized(k);
  return std::acos(std::clamp(dot(k_in, k_out), -1.0, 1.0));
}

// Compare medium-traced bending against the null geodesic of the metric the
// medium was compiled from. Requires a Cartesian-like chart so the medium's
// flat lab coordinates coincide with the chart coordinates.
inline MediumTraceResult medium_ray_check(const Metric& m, const MediumField& field,
                                          const Vec3& start, const Vec3& direction, Real omega,
                                          Real exit_radius, const RunControls& controls) {
  if (m.chart() == Chart::SchwarzschildSpherical)
    throw ConstraintViolation("medium ray check requires a cartesian-like chart");
  // geodesic route: integrate past the exit sphere, then trim
  Event e0{{0.0, start[0], start[1], start[2]}, m.chart()};
  NullRay ray = make_null_ray(m, e0, direction, omega);
  RayPath path = integrate_null_geodesic(m, ray, 3.0 * exit_radius / omega, controls);
  {
    bool went_inside = false;
    std::size_t cut = 0;
    for (std::size_t i = 0; i < path.samples.size(); ++i) {
      const Real r = norm(spatial_part(path.samples[i].x));
      if (!went_inside) {
        if (r < 0.999 * exit_radius) went_inside = true;
      } else if (r >= exit_radius) {
        cut = i + 1;
        break;
      }
    }
    if (cut == 0) throw Error("medium check geodesic did not exit the comparison sphere");
    path.samples.resize(cut);
  }
  MediumTraceResult out;
  out.deflection_geodesic = measure_deflection(m, path);
  out.deflection_medium =
      trace_medium_ray(field, start, direction, exit_radius, controls.step);
  out.relative_deviation = std::abs(out.deflection_medium - out.deflection_geodesic) /
                           std::max(out.deflection_geodesic, 1e-300);
  return out;
}

// ----------------------------------------------------------------- source

struct SpdcSourceSpec {
  Real pump_frequency = 0.0;   // omega_p (c = 1 units)
  Real kappa = 0.5;            // signal/idler frequency split
  Real crystal_length = 0.0;   // S, SI meters
  Real pump_wavenumber = 0.0;  // k_p, SI 1/meters
  Real pump_width = 0.0;       // w0, SI meters
  Complex amp_pp{1.0, 0.0};    // (+,+) pair amplitude
  Complex amp_mm{0.0, 0.0};    // (-,-) pair amplitude
  bool degenerate_filter = false;  // force kappa = 1/2
};

inline void validate(const SpdcSourceSpec& s) {
  if (!(s.pump_frequency > 0.0)) throw NonPositiveParameter("pump frequency must be > 0");
  if (!(s.kappa > 0.0 && s.kappa < 1.0))
    throw KappaOutOfRange("kappa must lie strictly in (0,1)");
  if (!(s.crystal_length > 0.0)) throw NonPositiveParameter("crystal length must be > 0");
  if (!(s.pump_wavenumber > 0.0)) throw NonPositiveParameter("pump wavenumber must be > 0");
  if (!(s.pump_width > 0.0)) throw NonPositiveParameter("pump width must be > 0");
}

// Classical, perfectly momentum-correlated two-photon state emitted along
// q_hat: a superposition of (+,+) and (-,-) same-helicity pairs with the
// pump frequency split as omega_s = kappa omega_p, omega_i = omega_p - omega_s.
struct SpdcState {
  Vec3 direction{};
  Real omega_pump = 0.0;
  Real omega_signal = 0.0;
  Real omega_idler = 0.0;  // omega_pump - omega_signal, exact by construction
  Real kappa = 0.5;
  Complex amp_pp{};
  Complex amp_mm{};
  TwoPhotonState pair_pp;
  TwoPhotonState pair_mm;
};

inline SpdcState spdc_state(const SpdcSourceSpec& spec, const Vec3& q_hat) {
  validate(spec);
  SpdcState st;
  st.direction = normalized(q_hat);
  st.kappa = spec.degenerate_filter ? 0.5 : spec.kappa;
  st.omega_pump = spec.pump_frequency;
  st.omega_signal = st.kappa * st.omega_pump;
  st.omega_idler = st.omega_pump - st.omega_signal;
  st.amp_pp = spec.amp_pp;
  st.amp_mm = spec.amp_mm;
  const Vec3 ps = scaled(st.direction, st.omega_signal);
  const Vec3 pi = scaled(st.direction, st.omega_idler);
  st.pair_pp = symmetrized_product(make_plane_wave(ps, +1), make_plane_wave(pi, +1));
  st.pair_mm = symmetrized_product(make_plane_wave(ps, -1), make_plane_wave(pi, -1));
  return st;
}

struct QualityReport {
  Real ratio = 0.0;        // w0 / sqrt(S / k_p)
  Real width_bound = 0.0;  // sqrt(S / k_p)
  bool good = false;
};

// Momentum-correlation figure of merit: the pump width must stay well below
// sqrt(S/k_p); longer crystals or tighter pumps improve it.
inline QualityReport momentum_correlation_quality(const SpdcSourceSpec& spec,
                                                  Real threshold = 0.2) {
  validate(spec);
  QualityReport q;
  q.width_bound = std::sqrt(spec.crystal_length / spec.pump_wavenumber);
  q.ratio = spec.pump_width / q.width_bound;
  q.good = q.ratio < threshold;
  return q;
}

// --------------------------------------------------------- coincidence field

// Evaluate both tensor factors at the same position and time along the
// propagation axis and return the exchange-symmetric product sample
// (f1 (x) f2 + f2 (x) f1)/2 -- the emulated tensor-wave sample.
inline CMat3 coincidence_amplitude(const TwoPhotonState& st, Real z, Real t) {
  const Real d = z - t;
  const Complex ph1 = std::exp(Complex(0.0, st.first.omega * d));
  const Complex ph2 = std::exp(Complex(0.0, st.second.omega * d));
  const CVec3 a = scaled(st.first.polarization, ph1);
  const CVec3 b = scaled(st.second.polarization, ph2);
  CMat3 out{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) out[i][j] = 0.5 * (a[i] * b[j] + b[i] * a[j]);
  return out;
}

inline CMat3 coincidence_amplitude(const SpdcState& st, Real z, Real t) {
  CMat3 out{};
  const Real d = z - t;
  const Complex pump_phase = std::exp(Complex(0.0, st.omega_signal * d)) *
                             std::exp(Complex(0.0, st.omega_idler * d));
  auto add = [&](Complex amp, const TwoPhotonState& pair) {
    if (amp == Complex(0.0)) return;
    const CVec3& e = pair.first.polarization;  // both photons share e for same helicity
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) out[i][j] += amp * pump_phase * e[i] * e[j];
  };
  add(st.amp_pp, st.pair_pp);
  add(st.amp_mm, st.pair_mm);
  return out;
}

}  // namespace gravem
