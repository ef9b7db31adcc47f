// Null geodesic integration and parallel transport of complex polarization
// vectors/tensors along the ray, with constraint monitoring.
//
// The integrator state is (x^mu, p^mu) plus an optional transported payload.
// Transport re-runs the recorded step sequence of a RayPath so that vector
// and tensor transport see exactly the same trajectory arithmetic.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "gravem/errors.hpp"
#include "gravem/linalg.hpp"
#include "gravem/metric.hpp"

namespace gravem {

enum class IntegratorKind { RungeKutta4, Fehlberg45 };

inline std::string integrator_name(IntegratorKind k) {
  return k == IntegratorKind::RungeKutta4 ? "rk4" : "rk45";
}

inline IntegratorKind parse_integrator(const std::string& s) {
  if (s == "rk4") return IntegratorKind::RungeKutta4;
  if (s == "rk45") return IntegratorKind::Fehlberg45;
  throw ConstraintViolation("unknown integrator '" + s + "' (expected rk4 | rk45)");
}

struct RunControls {
  IntegratorKind integrator = IntegratorKind::RungeKutta4;
  Real step = 1e-2;            // fixed step (rk4) / initial step (rk45)
  Real rel_tol = 1e-10;        // rk45 error control
  Real abs_tol = 1e-12;
  std::uint64_t max_steps = 50'000'000;
  int project_null_every = 0;  // 0 = monitor only
  Real constraint_tol = 1e-9;  // gauge/conservation reporting threshold
};

struct NullRay {
  Event event{};
  Vec4 p{};       // contravariant phase-gradient momentum, p^0 > 0
  Real l = 0.0;   // affine parameter
};

struct PathSample {
  Real l = 0.0;
  Vec4 x{};
  Vec4 p{};
  Real null_residual = 0.0;  // |g p p| / omega0^2
};

struct RayPath {
  Chart chart = Chart::Cartesian;
  IntegratorKind integrator = IntegratorKind::RungeKutta4;
  Real omega0 = 1.0;               // |p^0| at launch, used to normalize drift
  std::vector<PathSample> samples; // samples.size() == steps.size() + 1
  std::vector<Real> steps;
};

// Solve g_00 (p^0)^2 + 2 g_0i p^0 p^i + g_ij p^i p^j = 0 for the positive root.
inline Real solve_null_time_component(const Mat4& g, const Vec3& p_spatial) {
  const Real a = g[0][0];
  Real b = 0.0, c = 0.0;
  for (int i = 0; i < 3; ++i) b += 2.0 * g[0][i + 1] * p_spatial[i];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) c += g[i + 1][j + 1] * p_spatial[i] * p_spatial[j];
  const Real disc = b * b - 4.0 * a * c;
  if (disc < 0.0 || a == 0.0)
    throw NonNullInitialMomentum("no positive-frequency null solution at this event");
  const Real root = (-b + std::sqrt(disc)) / (2.0 * a);
  if (!(root > 0.0))
    throw NonNullInitialMomentum("null condition has no positive p^0 root here");
  return root;
}

// Initial data from spatial direction + frequency; p^i = omega * dir_hat^i in
// the chart basis, p^0 from the null condition.
inline NullRay make_null_ray(const Metric& m, const Event& e, const Vec3& direction,
                             Real omega) {
  if (!(omega > 0.0)) throw ConstraintViolation("ray frequency must be > 0");
  const Vec3 n = normalized(direction);
  const Mat4 g = m.evaluate(e);
  NullRay ray;
  ray.event = e;
  const Vec3 ps = scaled(n, omega);
  ray.p = {solve_null_time_component(g, ps), ps[0], ps[1], ps[2]};
  ray.l = 0.0;
  return ray;
}

inline NullRay make_null_ray_from_momentum(const Metric& m, const Event& e, const Vec4& p,
                                           bool project = false, Real tol = 1e-10) {
  const Mat4 g = m.evaluate(e);
  NullRay ray;
  ray.event = e;
  ray.p = p;
  if (project) {
    ray.p[0] = solve_null_time_component(g, spatial_part(p));
  } else {
    const Real res = inner_product(p, p, g);
    const Real scale = std::max(p[0] * p[0] * std::abs(g[0][0]), 1e-300);
    if (std::abs(res) > tol * scale)
      throw NonNullInitialMomentum("initial momentum is not null within tolerance");
  }
  if (!(ray.p[0] > 0.0)) throw NonNullInitialMomentum("p^0 must be positive");
  return ray;
}

// ----------------------------------------------------------------- stepping

namespace detail {

// payload layouts: Vectors = up to 4 independently transported four-vectors
// (columns), Tensor = one symmetric 4x4 with both slots transported.
enum class PayloadKind { None, Vectors, Tensor };

struct OdeState {
  Vec4 x{}, p{};
  std::array<Complex, 16> q{};
};

inline void axpy(OdeState& y, Real a, const OdeState& k, int nq) {
  for (int i = 0; i < 4; ++i) {
    y.x[i] += a * k.x[i];
    y.p[i] += a * k.p[i];
  }
  for (int i = 0; i < nq; ++i) y.q[i] += a * k.q[i];
}

struct Rhs {
  const Metric* metric = nullptr;
  Chart chart = Chart::Cartesian;
  PayloadKind kind = PayloadKind::None;
  int ncols = 0;  // complex payload column count (Vectors) ; Tensor uses 16

  OdeState operator()(const OdeState& y) const {
    Event e{y.x, chart};
    const Christoffel gam = metric->christoffel(e);
    // A^mu_nu = Gamma^mu_{sigma nu} p^sigma
    Mat4 A{};
    for (int mu = 0; mu < 4; ++mu)
      for (int nu = 0; nu < 4; ++nu) {
        Real s = 0.0;
        for (int sg = 0; sg < 4; ++sg) s += gam[mu][sg][nu] * y.p[sg];
        A[mu][nu] = s;
      }
    OdeState d{};
    d.x = y.p;
    for (int mu = 0; mu < 4; ++mu) {
      Real s = 0.0;
      for (int nu = 0; nu < 4; ++nu) s += A[mu][nu] * y.p[nu];
      d.p[mu] = -s;
    }
    if (kind == PayloadKind::Vectors) {
      for (int c = 0; c < ncols; ++c)
        for (int mu = 0; mu < 4; ++mu) {
          Complex s = 0.0;
          for (int nu = 0; nu < 4; ++nu) s += A[mu][nu] * y.q[4 * c + nu];
          d.q[4 * c + mu] = -s;
        }
    } else if (kind == PayloadKind::Tensor) {
      // dB = -(A B + B A^T)
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
          Complex s = 0.0;
          for (int k = 0; k < 4; ++k)
            s += A[i][k] * y.q[4 * k + j] + y.q[4 * i + k] * A[j][k];
          d.q[4 * i + j] = -s;
        }
    }
    return d;
  }
};

inline int payload_size(PayloadKind kind, int ncols) {
  return kind == PayloadKind::Tensor ? 16 : 4 * ncols;
}

inline OdeState rk4_step(const Rhs& rhs, const OdeState& y, Real h) {
  const int nq = payload_size(rhs.kind, rhs.ncols);
  const OdeState k1 = rhs(y);
  OdeState y2 = y;
  axpy(y2, 0.5 * h, k1, nq);
  const OdeState k2 = rhs(y2);
  OdeState y3 = y;
  axpy(y3, 0.5 * h, k2, nq);
  const OdeState k3 = rhs(y3);
  OdeState y4 = y;
  axpy(y4, h, k3, nq);
  const OdeState k4 = rhs(y4);
  OdeState out = y;
  axpy(out, h / 6.0, k1, nq);
  axpy(out, h / 3.0, k2, nq);
  axpy(out, h / 3.0, k3, nq);
  axpy(out, h / 6.0, k4, nq);
  return out;
}

// Classical Fehlberg 4(5) pair; returns the 5th-order solution and the
// max scaled error of the embedded 4th-order estimate over (x, p).
inline OdeState rkf45_step(const Rhs& rhs, const OdeState& y, Real h, Real rel_tol,
                           Real abs_tol, Real* err_norm) {
  static constexpr Real a21 = 1.0 / 4.0;
  static constexpr Real a31 = 3.0 / 32.0, a32 = 9.0 / 32.0;
  static constexpr Real a41 = 1932.0 / 2197.0, a42 = -7200.0 / 2197.0,
                        a43 = 7296.0 / 2197.0;
  static constexpr Real a51 = 439.0 / 216.0, a52 = -8.0, a53 = 3680.0 / 513.0,
                        a54 = -845.0 / 4104.0;
  static constexpr Real a61 = -8.0 / 27.0, a62 = 2.0, a63 = -3544.0 / 2565.0,
                        a64 = 1859.0 / 4104.0, a65 = -11.0 / 40.0;
  static constexpr Real b51 = 16.0 / 135.0, b53 = 6656.0 / 12825.0,
                        b54 = 28561.0 / 56430.0, b55 = -9.0 / 50.0, b56 = 2.0 / 55.0;
  static constexpr Real b41 = 25.0 / 216.0, b43 = 1408.0 / 2565.0, b44 = 2197.0 / 4104.0,
                        b45 = -1.0 / 5.0;

  const int nq = payload_size(rhs.kind, rhs.ncols);
  const OdeState k1 = rhs(y);
  OdeState t = y;
  axpy(t, h * a21, k1, nq);
  const OdeState k2 = rhs(t);
  t = y;
  axpy(t, h * a31, k1, nq);
  axpy(t, h * a32, k2, nq);
  const OdeState k3 = rhs(t);
  t = y;
  axpy(t, h * a41, k1, nq);
  axpy(t, h * a42, k2, nq);
  axpy(t, h * a43, k3, nq);
  const OdeState k4 = rhs(t);
  t = y;
  axpy(t, h * a51, k1, nq);
  axpy(t, h * a52, k2, nq);
  axpy(t, h * a53, k3, nq);
  axpy(t, h * a54, k4, nq);
  const OdeState k5 = rhs(t);
  t = y;
  axpy(t, h * a61, k1, nq);
  axpy(t, h * a62, k2, nq);
  axpy(t, h * a63, k3, nq);
  axpy(t, h * a64, k4, nq);
  axpy(t, h * a65, k5, nq);
  const OdeState k6 = rhs(t);

  OdeState y5 = y;
  axpy(y5, h * b51, k1, nq);
  axpy(y5, h * b53, k3, nq);
  axpy(y5, h * b54, k4, nq);
  axpy(y5, h * b55, k5, nq);
  axpy(y5, h * b56, k6, nq);

  OdeState y4o = y;
  axpy(y4o, h * b41, k1, nq);
  axpy(y4o, h * b43, k3, nq);
  axpy(y4o, h * b44, k4, nq);
  axpy(y4o, h * b45, k5, nq);

  if (err_norm) {
    Real en = 0.0;
    for (int i = 0; i < 4; ++i) {
      en = std::max(en, std::abs(y5.x[i] - y4o.x[i]) /
                            (abs_tol + rel_tol * std::max(std::abs(y.x[i]), std::abs(y5.x[i]))));
      en = std::max(en, std::abs(y5.p[i] - y4o.p[i]) /
                            (abs_tol + rel_tol * std::max(std::abs(y.p[i]), std::abs(y5.p[i]))));
    }
    *err_norm = en;
  }
  return y5;
}

}  // namespace detail

// ------------------------------------------------------------- integration

inline Real null_residual(const Metric& m, const Event& e, const Vec4& p, Real omega0) {
  const Mat4 g = m.evaluate(e);
  return std::abs(inner_product(p, p, g)) / (omega0 * omega0);
}

inline RayPath integrate_null_geodesic(const Metric& m, const NullRay& start, Real l_end,
                                       const RunControls& controls = {}) {
  if (!(l_end > start.l))
    throw ConstraintViolation("l_end must exceed the ray's initial affine parameter");
  m.require_chart(start.event);
  {
    const Real res = null_residual(m, start.event, start.p, std::abs(start.p[0]));
    if (res > 1e-10)
      throw NonNullInitialMomentum("initial momentum violates the null condition (residual " +
                                   std::to_string(res) + ")");
  }

  RayPath path;
  path.chart = m.chart();
  path.integrator = controls.integrator;
  path.omega0 = std::abs(start.p[0]);

  detail::Rhs rhs;
  rhs.metric = &m;
  rhs.chart = m.chart();

  detail::OdeState y;
  y.x = start.event.x;
  y.p = start.p;
  Real l = start.l;
  path.samples.push_back({l, y.x, y.p, null_residual(m, {y.x, path.chart}, y.p, path.omega0)});

  Real h = controls.step > 0.0 ? controls.step : (l_end - l) / 1000.0;
  std::uint64_t accepted = 0;

  while (l < l_end) {
    if (accepted >= controls.max_steps)
      throw Error("geodesic integration exceeded max_steps");
    const Real h_min = 1e-14 * std::max(std::abs(l), std::abs(l_end));
    const Real rem = l_end - l;
    if (rem <= h_min) break;  // remainder below the span's fp resolution
    const bool last = h >= rem;
    const Real h_try = last ? rem : h;
    if (h_try < h_min) throw StepSizeUnderflow("step size underflow in geodesic integration");

    detail::OdeState y_next;
    if (controls.integrator == IntegratorKind::RungeKutta4) {
      y_next = detail::rk4_step(rhs, y, h_try);
    } else {
      Real err = 0.0;
      y_next = detail::rkf45_step(rhs, y, h_try, controls.rel_tol, controls.abs_tol, &err);
      if (err > 1.0 && h_try > h_min) {
        // reject and retry with a smaller step
        h = std::max(h_min, 0.9 * h_try * std::pow(err, -0.2));
        continue;
      }
      const Real grow = (err > 0.0) ? 0.9 * std::pow(err, -0.2) : 5.0;
      h = h_try * std::min(5.0, std::max(0.2, grow));
    }

    l = last ? l_end : l + h_try;
    y = y_next;
    ++accepted;
    if (controls.project_null_every > 0 &&
        accepted % static_cast<std::uint64_t>(controls.project_null_every) == 0) {
      const Mat4 g = m.evaluate({y.x, path.chart});
      y.p[0] = solve_null_time_component(g, spatial_part(y.p));
    }
    path.steps.push_back(h_try);
    path.samples.push_back(
        {l, y.x, y.p, null_residual(m, {y.x, path.chart}, y.p, path.omega0)});
  }
  return path;
}

// --------------------------------------------------------------- transport

struct VectorTransportResult {
  std::vector<CVec4> values;        // one entry per path sample
  Real max_norm_drift = 0.0;        // |g(v*, v)| deviation from the start value
  Real max_transversality = 0.0;    // max |g(p, v)| / p^0 along the path
};

struct TensorTransportResult {
  std::vector<CMat4> values;
  Real max_trace_drift = 0.0;       // |g_mn B^mn| deviation from the start value
  Real max_transversality = 0.0;    // max_nu |p_m B^mn| / p^0
  Real max_symmetry_residual = 0.0;
};

namespace detail {

template <class Sampler>
inline void replay_path(const RayPath& path, Rhs rhs, OdeState y, Sampler&& on_sample) {
  if (path.samples.empty()) throw EmptyPath("transport along an empty path");
  on_sample(0, y);
  for (std::size_t i = 0; i < path.steps.size(); ++i) {
    const Real h = path.steps[i];
    if (path.integrator == IntegratorKind::RungeKutta4)
      y = rk4_step(rhs, y, h);
    else
      y = rkf45_step(rhs, y, h, 0.0, 1.0, nullptr);  // fixed replay of accepted steps
    on_sample(i + 1, y);
  }
}

}  // namespace detail

inline VectorTransportResult parallel_transport_vector(const Metric& m, const RayPath& path,
                                                       const CVec4& v0) {
  if (path.samples.empty()) throw EmptyPath("transport along an empty path");
  detail::Rhs rhs;
  rhs.metric = &m;
  rhs.chart = path.chart;
  rhs.kind = detail::PayloadKind::Vectors;
  rhs.ncols = 1;

  detail::OdeState y;
  y.x = path.samples.front().x;
  y.p = path.samples.front().p;
  for (int i = 0; i < 4; ++i) y.q[i] = v0[i];

  VectorTransportResult out;
  out.values.resize(path.samples.size());
  Real norm0 = 0.0;
  detail::replay_path(path, rhs, y, [&](std::size_t i, const detail::OdeState& s) {
    CVec4 v{s.q[0], s.q[1], s.q[2], s.q[3]};
    out.values[i] = v;
    const Mat4 g = m.evaluate({s.x, path.chart});
    CVec4 p4{};
    for (int k = 0; k < 4; ++k) p4[k] = s.p[k];
    const Real nrm = std::abs(inner_product_conj(v, v, g));
    const Real tv = std::abs(inner_product(p4, v, g)) / s.p[0];
    if (i == 0)
      norm0 = nrm;
    else
      out.max_norm_drift = std::max(out.max_norm_drift, std::abs(nrm - norm0));
    out.max_transversality = std::max(out.max_transversality, tv);
  });
  return out;
}

inline TensorTransportResult parallel_transport_tensor(const Metric& m, const RayPath& path,
                                                       const CMat4& b0) {
  if (path.samples.empty()) throw EmptyPath("transport along an empty path");
  if (!is_symmetric(b0, 1e-12 * std::max(frobenius(b0), 1.0)))
    throw NonSymmetricInput("tensor transport requires a symmetric polarization tensor");

  detail::Rhs rhs;
  rhs.metric = &m;
  rhs.chart = path.chart;
  rhs.kind = detail::PayloadKind::Tensor;

  detail::OdeState y;
  y.x = path.samples.front().x;
  y.p = path.samples.front().p;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) y.q[4 * i + j] = 0.5 * (b0[i][j] + b0[j][i]);

  TensorTransportResult out;
  out.values.resize(path.samples.size());
  Real trace0 = 0.0;
  detail::replay_path(path, rhs, y, [&](std::size_t i, const detail::OdeState& s) {
    CMat4 b{};
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) b[r][c] = s.q[4 * r + c];
    out.values[i] = b;
    const Mat4 g = m.evaluate({s.x, path.chart});
    Complex tr = 0.0;
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) tr += g[r][c] * b[r][c];
    Vec4 p_low = lower_index(s.p, g);
    Real tv = 0.0;
    for (int c = 0; c < 4; ++c) {
      Complex s2 = 0.0;
      for (int r = 0; r < 4; ++r) s2 += p_low[r] * b[r][c];
      tv = std::max(tv, std::abs(s2) / s.p[0]);
    }
    Real sym = 0.0;
    for (int r = 0; r < 4; ++r)
      for (int c = r + 1; c < 4; ++c) sym = std::max(sym, std::abs(b[r][c] - b[c][r]));
    if (i == 0)
      trace0 = std::abs(tr);
    else
      out.max_trace_drift = std::max(out.max_trace_drift, std::abs(std::abs(tr) - trace0));
    out.max_transversality = std::max(out.max_transversality, tv);
    out.max_symmetry_residual = std::max(out.max_symmetry_residual, sym);
  });
  return out;
}

// ------------------------------------------------------------- gauge checks

struct GaugeReport {
  Real spatial_residual = 0.0;        // max |B_{mu 0}| (index lowered)
  Real trace_residual = 0.0;          // |g_mn B^mn|
  Real transversality_residual = 0.0; // max_nu |p_m B^mn| / p^0 (momentum-scale free)
  bool spatial_ok = false;
  bool traceless_ok = false;
  bool transverse_ok = false;
  bool pass() const { return spatial_ok && traceless_ok && transverse_ok; }
};

inline GaugeReport check_tt_gauge(const CMat4& b, const Vec4& p, const Metric& m,
                                  const Event& e, Real tol = 1e-9) {
  const Mat4 g = m.evaluate(e);
  GaugeReport rep;
  // lower both indices for the purely-spatial condition
  CMat4 low{};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      Complex s = 0.0;
      for (int a = 0; a < 4; ++a)
        for (int c = 0; c < 4; ++c) s += g[i][a] * g[j][c] * b[a][c];
      low[i][j] = s;
    }
  for (int mu = 0; mu < 4; ++mu)
    rep.spatial_residual =
        std::max({rep.spatial_residual, std::abs(low[mu][0]), std::abs(low[0][mu])});
  Complex tr = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) tr += g[i][j] * b[i][j];
  rep.trace_residual = std::abs(tr);
  const Vec4 p_low = lower_index(p, g);
  const Real pscale = std::max(std::abs(p[0]), 1e-300);
  for (int nu = 0; nu < 4; ++nu) {
    Complex s = 0.0;
    for (int mu = 0; mu < 4; ++mu) s += p_low[mu] * b[mu][nu];
    rep.transversality_residual =
        std::max(rep.transversality_residual, std::abs(s) / pscale);
  }
  rep.spatial_ok = rep.spatial_residual <= tol;
  rep.traceless_ok = rep.trace_residual <= tol;
  rep.transverse_ok = rep.transversality_residual <= tol;
  return rep;
}

struct DriftSummary {
  Real max_null = 0.0;
  Real mean_null = 0.0;
};

inline DriftSummary constraint_drift(const RayPath& path) {
  if (path.samples.empty()) throw EmptyPath("constraint drift of an empty path");
  DriftSummary d;
  Real sum = 0.0;
  for (const auto& s : path.samples) {
    d.max_null = std::max(d.max_null, s.null_residual);
    sum += s.null_residual;
  }
  d.mean_null = sum / static_cast<Real>(path.samples.size());
  return d;
}

// --------------------------------------------------------------- deflection

// Unit propagation direction in a local orthonormal spatial frame, embedded
// into Euclidean 3-space (identity for Cartesian-like charts, spherical
// embedding for the Schwarzschild chart). Valid where the chart is diagonal.
inline Vec3 embedded_direction(const Metric& m, const PathSample& s, Chart chart) {
  const Mat4 g = m.evaluate({s.x, chart});
  Vec3 o{};
  for (int i = 0; i < 3; ++i) o[i] = std::sqrt(-g[i + 1][i + 1]) * s.p[i + 1];
  if (chart == Chart::SchwarzschildSpherical) {
    const Real th = s.x[2], ph = s.x[3];
    const Vec3 er = {std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th)};
    const Vec3 et = {std::cos(th) * std::cos(ph), std::cos(th) * std::sin(ph), -std::sin(th)};
    const Vec3 ep = {-std::sin(ph), std::cos(ph), 0.0};
    o = scaled(er, o[0]) + scaled(et, o[1]) + scaled(ep, o[2]);
  }
  return normalized(o);
}

// Bending angle between the launch and exit directions of a ray.
inline Real measure_deflection(const Metric& m, const RayPath& path) {
  if (path.samples.size() < 2) throw EmptyPath("deflection needs at least two samples");
  const Vec3 din = embedded_direction(m, path.samples.front(), path.chart);
  const Vec3 dout = embedded_direction(m, path.samples.back(), path.chart);
  return std::acos(std::clamp(dot(din, dout), -1.0, 1.0));
}

}  // namespace gravem
