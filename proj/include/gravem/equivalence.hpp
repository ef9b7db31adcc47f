// Helicity frames, tensor decomposition into helicity +/-2 amplitudes, and
// the two propagation routes whose agreement is the core equivalence check:
// direct parallel transport of the polarization tensor versus transport of
// the two vector factors followed by their symmetrized outer product.
#pragma once

#include <cmath>
#include <vector>

#include "gravem/errors.hpp"
#include "gravem/geodesic.hpp"
#include "gravem/linalg.hpp"
#include "gravem/metric.hpp"
#include "gravem/wave_algebra.hpp"

namespace gravem {

// --------------------------------------------------------------- frames

struct HelicityFrame {
  Event event{};
  Vec4 p{};          // null propagation momentum (contravariant)
  CVec4 e_plus{};    // spatial, transverse, g(e,e) = 0, conjugate norm 1
  CVec4 e_minus{};
};

namespace detail {

// positive-definite spatial inner product h_ij = -g_ij (static charts)
inline Real spatial_dot(const Vec3& a, const Vec3& b, const Mat4& g) {
  Real s = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) s += -g[i + 1][j + 1] * a[i] * b[j];
  return s;
}

}  // namespace detail

// Deterministic helicity frame at an event: seed directions come from the
// flat-space convention (rotate x,y,z onto the momentum direction in the
// plane spanned by z and p), then Gram-Schmidt in the spatial metric.
inline HelicityFrame helicity_frame(const Metric& m, const Event& e, const Vec4& p,
                                    Real null_tol = 1e-8) {
  m.require_chart(e);
  const Mat4 g = m.evaluate(e);
  for (int i = 1; i < 4; ++i)
    if (std::abs(g[0][i]) > 1e-12)
      throw Error("helicity frames require a static (g_0i = 0) chart");
  const Real pp = inner_product(p, p, g);
  const Real scale = std::max(p[0] * p[0] * std::abs(g[0][0]), 1e-300);
  if (std::abs(pp) > null_tol * scale)
    throw NonNullMomentum("helicity frame requires a null momentum");
  if (!(p[0] > 0.0)) throw NonNullMomentum("helicity frame requires p^0 > 0");

  const Vec3 n_euclid = normalized(spatial_part(p));
  // flat-space seed triad (e1, e2, n)
  Vec3 e1{1.0, 0.0, 0.0}, e2{0.0, 1.0, 0.0};
  const Real cz = n_euclid[2];
  if (cz < -1.0 + 1e-14) {
    e1 = {-1.0, 0.0, 0.0};  // rotation by pi about y
    e2 = {0.0, 1.0, 0.0};
  } else if (cz < 1.0 - 1e-14) {
    const Vec3 axis = normalized(cross(Vec3{0.0, 0.0, 1.0}, n_euclid));
    const Mat3 r = rotation_matrix(axis, std::acos(std::clamp(cz, -1.0, 1.0)));
    e1 = mat_vec(r, Vec3{1.0, 0.0, 0.0});
    e2 = mat_vec(r, Vec3{0.0, 1.0, 0.0});
  }

  // Gram-Schmidt in the spatial metric, order (n, e1, e2)
  Vec3 n = spatial_part(p);
  n = scaled(n, 1.0 / std::sqrt(detail::spatial_dot(n, n, g)));
  Vec3 f1 = e1 - scaled(n, detail::spatial_dot(e1, n, g));
  f1 = scaled(f1, 1.0 / std::sqrt(detail::spatial_dot(f1, f1, g)));
  Vec3 f2 = e2 - scaled(n, detail::spatial_dot(e2, n, g)) -
            scaled(f1, detail::spatial_dot(e2, f1, g));
  f2 = scaled(f2, 1.0 / std::sqrt(detail::spatial_dot(f2, f2, g)));

  const Real r2 = 1.0 / std::sqrt(2.0);
  HelicityFrame fr;
  fr.event = e;
  fr.p = p;
  for (int i = 0; i < 3; ++i) {
    fr.e_plus[i + 1] = Complex(r2 * f1[i], r2 * f2[i]);
    fr.e_minus[i + 1] = Complex(r2 * f1[i], -r2 * f2[i]);
  }
  return fr;
}

// --------------------------------------------------- conjugating contractions

// <A, B> = g_ma g_nb conj(A^mn) B^ab
inline Complex tensor_inner(const CMat4& a, const CMat4& b, const Mat4& g) {
  CMat4 low{};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      Complex s = 0.0;
      for (int al = 0; al < 4; ++al)
        for (int be = 0; be < 4; ++be) s += g[i][al] * g[j][be] * b[al][be];
      low[i][j] = s;
    }
  Complex out = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) out += std::conj(a[i][j]) * low[i][j];
  return out;
}

// ------------------------------------------------------------- decomposition

struct HelicityAmplitudes {
  Complex c_plus{};
  Complex c_minus{};
  Complex c_zero{};   // mixed-term amplitude; vanishes for TT input
  Real reconstruction_residual = 0.0;
  bool tt_consistent = false;  // |c0| small relative to |c+| + |c-|
};

inline CMat4 helicity_basis_tensor(const HelicityFrame& fr, int lambda) {
  const CVec4& e = lambda > 0 ? fr.e_plus : fr.e_minus;
  return outer(e, e);
}

inline HelicityAmplitudes decompose_helicity(const CMat4& b, const HelicityFrame& fr,
                                             const Metric& m, Real tol = 1e-9) {
  const Mat4 g = m.evaluate(fr.event);
  if (!is_symmetric(b, 1e-9 * std::max(frobenius(b), 1.0)))
    throw NonSymmetricInput("helicity decomposition requires a symmetric tensor");
  {
    const Vec4 p_low = lower_index(fr.p, g);
    Real tv = 0.0;
    for (int nu = 0; nu < 4; ++nu) {
      Complex s = 0.0;
      for (int mu = 0; mu < 4; ++mu) s += p_low[mu] * b[mu][nu];
      tv = std::max(tv, std::abs(s));
    }
    const Real scale = std::max(frobenius(b) * std::abs(fr.p[0]), 1e-300);
    if (tv > 1e-6 * scale)
      throw NonTransverseInput("tensor is not transverse to the frame momentum");
  }

  const CMat4 tpp = outer(fr.e_plus, fr.e_plus);
  const CMat4 tmm = outer(fr.e_minus, fr.e_minus);
  CMat4 mixed = mat_add(outer(fr.e_plus, fr.e_minus), outer(fr.e_minus, fr.e_plus));

  HelicityAmplitudes amp;
  amp.c_plus = tensor_inner(tpp, b, g);
  amp.c_minus = tensor_inner(tmm, b, g);
  amp.c_zero = tensor_inner(mixed, b, g) / 2.0;

  CMat4 recon = mat_add(mat_add(mat_scaled(tpp, amp.c_plus), mat_scaled(tmm, amp.c_minus)),
                        mat_scaled(mixed, amp.c_zero));
  amp.reconstruction_residual =
      frobenius(mat_sub(b, recon)) / std::max(frobenius(b), 1e-300);
  amp.tt_consistent =
      std::abs(amp.c_zero) <= tol * (std::abs(amp.c_plus) + std::abs(amp.c_minus) + 1.0);
  return amp;
}

// ------------------------------------------------------------------- waves

struct GravitationalWave {
  Complex c_plus{};
  Complex c_minus{};
  Real kappa_plus = 0.5;
  Real kappa_minus = 0.5;
  Real phi0 = 0.0;
  HelicityFrame frame0{};
  RayPath path;
};

inline GravitationalWave assemble_gw(Complex c_plus, Complex c_minus,
                                     const HelicityFrame& frame, Real phi0, Real kappa_plus,
                                     Real kappa_minus, RayPath path) {
  if (!(kappa_plus > 0.0 && kappa_plus < 1.0) || !(kappa_minus > 0.0 && kappa_minus < 1.0))
    throw KappaOutOfRange("kappa must lie strictly in (0,1)");
  GravitationalWave w;
  w.c_plus = c_plus;
  w.c_minus = c_minus;
  w.kappa_plus = kappa_plus;
  w.kappa_minus = kappa_minus;
  w.phi0 = phi0;
  w.frame0 = frame;
  w.path = std::move(path);
  return w;
}

// c+ e+ (x) e+ e^{i phi0} + c- e- (x) e- e^{i phi0}
inline CMat4 start_tensor(const GravitationalWave& w) {
  const Complex ph = std::exp(Complex(0.0, w.phi0));
  return mat_add(mat_scaled(outer(w.frame0.e_plus, w.frame0.e_plus), w.c_plus * ph),
                 mat_scaled(outer(w.frame0.e_minus, w.frame0.e_minus), w.c_minus * ph));
}

// --------------------------------------------------------- gauge restoration

// Remove the null-direction (pure gauge) component so the tensor is purely
// spatial with respect to the chart's static observers. Preserves
// transversality, trace and all transverse components.
inline CVec4 project_spatial(const CVec4& v, const Vec4& p) {
  const Complex c = v[0] / p[0];
  CVec4 out = v;
  for (int i = 0; i < 4; ++i) out[i] -= c * p[i];
  return out;
}

inline CMat4 project_spatial(const CMat4& b, const Vec4& p) {
  CMat4 out = b;
  // rows: B - p (x) (B_0./p^0)
  for (int j = 0; j < 4; ++j) {
    const Complex c = out[0][j] / p[0];
    for (int i = 0; i < 4; ++i) out[i][j] -= c * p[i];
  }
  for (int i = 0; i < 4; ++i) {
    const Complex c = out[i][0] / p[0];
    for (int j = 0; j < 4; ++j) out[i][j] -= c * p[j];
  }
  return out;
}

// ------------------------------------------------------------- propagation

struct PolarizationTensorField {
  std::vector<Real> l;
  std::vector<CMat4> tensors;
  Real max_gauge_residual = 0.0;  // worst TT residual over the samples
};

inline void collect_gauge(PolarizationTensorField& field, const Metric& m,
                          const RayPath& path) {
  for (std::size_t i = 0; i < field.tensors.size(); ++i) {
    const auto& s = path.samples[i];
    const GaugeReport rep = check_tt_gauge(field.tensors[i], s.p, m, {s.x, path.chart});
    field.max_gauge_residual =
        std::max({field.max_gauge_residual, rep.spatial_residual, rep.trace_residual,
                  rep.transversality_residual});
  }
}

// Direct route: transport the assembled polarization tensor along the ray.
inline PolarizationTensorField propagate_direct(const GravitationalWave& w, const Metric& m,
                                                bool gauge_check = true) {
  const TensorTransportResult tr = parallel_transport_tensor(m, w.path, start_tensor(w));
  PolarizationTensorField field;
  field.l.reserve(w.path.samples.size());
  field.tensors.reserve(w.path.samples.size());
  for (std::size_t i = 0; i < w.path.samples.size(); ++i) {
    field.l.push_back(w.path.samples[i].l);
    field.tensors.push_back(project_spatial(tr.values[i], w.path.samples[i].p));
  }
  if (gauge_check) collect_gauge(field, m, w.path);
  return field;
}

// Factored route: transport the two helicity polarization vectors once,
// attach the kappa-split scalar phases to the factors, and sum the
// exchange-symmetric outer products weighted by c+/2 and c-/2.
inline PolarizationTensorField propagate_factored(const GravitationalWave& w, const Metric& m,
                                                  bool gauge_check = true) {
  const VectorTransportResult vp = parallel_transport_vector(m, w.path, w.frame0.e_plus);
  const VectorTransportResult vm = parallel_transport_vector(m, w.path, w.frame0.e_minus);

  // The eikonal phase is constant along its own ray, so each factor carries a
  // constant phase kappa*phi0 or (1-kappa)*phi0.
  const Complex fp_a = std::exp(Complex(0.0, w.kappa_plus * w.phi0));
  const Complex fp_b = std::exp(Complex(0.0, (1.0 - w.kappa_plus) * w.phi0));
  const Complex fm_a = std::exp(Complex(0.0, w.kappa_minus * w.phi0));
  const Complex fm_b = std::exp(Complex(0.0, (1.0 - w.kappa_minus) * w.phi0));

  PolarizationTensorField field;
  field.l.reserve(w.path.samples.size());
  field.tensors.reserve(w.path.samples.size());
  for (std::size_t i = 0; i < w.path.samples.size(); ++i) {
    const Vec4& p = w.path.samples[i].p;
    const CVec4 ep = project_spatial(vp.values[i], p);
    const CVec4 em = project_spatial(vm.values[i], p);
    CMat4 b{};
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) {
        const Complex plus =
            0.5 * ((ep[r] * fp_a) * (ep[c] * fp_b) + (ep[r] * fp_b) * (ep[c] * fp_a));
        const Complex minus =
            0.5 * ((em[r] * fm_a) * (em[c] * fm_b) + (em[r] * fm_b) * (em[c] * fm_a));
        b[r][c] = w.c_plus * plus + w.c_minus * minus;
      }
    field.l.push_back(w.path.samples[i].l);
    field.tensors.push_back(b);
  }
  if (gauge_check) collect_gauge(field, m, w.path);
  return field;
}

// ------------------------------------------------------------ phase series

namespace detail {

inline std::vector<Real> unwrap_args(const std::vector<Complex>& z) {
  std::vector<Real> out(z.size(), 0.0);
  Real acc = 0.0;
  for (std::size_t i = 1; i < z.size(); ++i) {
    const Complex a = z[i - 1], b = z[i];
    if (std::abs(a) == 0.0 || std::abs(b) == 0.0) {
      out[i] = acc;
      continue;
    }
    acc += std::arg(b / a);
    out[i] = acc;
  }
  return out;
}

}  // namespace detail

// Polarization (Wigner rotation) phase of a transported + helicity vector,
// referenced to the deterministic frame field along the path; zero at launch.
inline std::vector<Real> vector_polarization_phase(const Metric& m, const RayPath& path,
                                                   const std::vector<CVec4>& transported) {
  if (transported.size() != path.samples.size())
    throw GridMismatch("phase series requires one vector per path sample");
  std::vector<Complex> z(transported.size());
  for (std::size_t i = 0; i < transported.size(); ++i) {
    const auto& s = path.samples[i];
    const HelicityFrame fr = helicity_frame(m, {s.x, path.chart}, s.p);
    const Mat4 g = m.evaluate({s.x, path.chart});
    z[i] = -inner_product_conj(fr.e_plus, transported[i], g);
  }
  return detail::unwrap_args(z);
}

// Same phase for a tensor field, via its + helicity amplitude.
inline std::vector<Real> tensor_polarization_phase(const Metric& m, const RayPath& path,
                                                   const PolarizationTensorField& field) {
  if (field.tensors.size() != path.samples.size())
    throw GridMismatch("phase series requires one tensor per path sample");
  std::vector<Complex> z(field.tensors.size());
  for (std::size_t i = 0; i < field.tensors.size(); ++i) {
    const auto& s = path.samples[i];
    const HelicityFrame fr = helicity_frame(m, {s.x, path.chart}, s.p);
    const Mat4 g = m.evaluate({s.x, path.chart});
    z[i] = tensor_inner(outer(fr.e_plus, fr.e_plus), field.tensors[i], g);
  }
  return detail::unwrap_args(z);
}

// ------------------------------------------------------------------ report

struct EquivalenceReport {
  std::vector<Real> deviation;       // per-sample ||A-B||_F / max(||A||,||B||)
  Real max_deviation = 0.0;
  Real mean_deviation = 0.0;
  std::vector<Real> em_phase;
  std::vector<Real> gw_phase;
  Real phase_ratio = 2.0;            // fitted gw/em; exactly 2 in the zero-phase limit
  Real max_doubling_residual = 0.0;  // max |gw - 2 em|
  bool deviation_ok = false;
  bool phase_ok = false;
};

inline EquivalenceReport equivalence_report(const PolarizationTensorField& a,
                                            const PolarizationTensorField& b,
                                            const std::vector<Real>& em_phase,
                                            const std::vector<Real>& gw_phase,
                                            Real deviation_tol = 1e-7,
                                            Real phase_tol = 1e-9) {
  if (a.tensors.size() != b.tensors.size() || a.l.size() != b.l.size())
    throw GridMismatch("equivalence report requires identical sampling grids");
  for (std::size_t i = 0; i < a.l.size(); ++i)
    if (a.l[i] != b.l[i])
      throw GridMismatch("equivalence report requires identical sampling grids");
  if (em_phase.size() != gw_phase.size() ||
      (!em_phase.empty() && em_phase.size() != a.tensors.size()))
    throw GridMismatch("phase series do not match the sampling grid");

  EquivalenceReport rep;
  rep.deviation.resize(a.tensors.size());
  Real sum = 0.0;
  for (std::size_t i = 0; i < a.tensors.size(); ++i) {
    const Real na = frobenius(a.tensors[i]);
    const Real nb = frobenius(b.tensors[i]);
    const Real d = frobenius(mat_sub(a.tensors[i], b.tensors[i])) /
                   std::max(std::max(na, nb), 1e-300);
    rep.deviation[i] = d;
    rep.max_deviation = std::max(rep.max_deviation, d);
    sum += d;
  }
  rep.mean_deviation = a.tensors.empty() ? 0.0 : sum / static_cast<Real>(a.tensors.size());

  rep.em_phase = em_phase;
  rep.gw_phase = gw_phase;
  Real num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < em_phase.size(); ++i) {
    rep.max_doubling_residual =
        std::max(rep.max_doubling_residual, std::abs(gw_phase[i] - 2.0 * em_phase[i]));
    num += gw_phase[i] * em_phase[i];
    den += em_phase[i] * em_phase[i];
  }
  rep.phase_ratio = den > 0.0 ? num / den : 2.0;
  rep.deviation_ok = rep.max_deviation <= deviation_tol;
  rep.phase_ok = rep.max_doubling_residual <= phase_tol;
  return rep;
}

}  // namespace gravem
