// Background geometry: charts, metrics, Christoffel symbols, curvature scale.
//
// Conventions: signature (+,-,-,-), c = 1, indices 0..3 = (t, spatial).
// All polarization/momentum vectors are stored with raised (contravariant)
// components; contractions go through the metric explicitly.
#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "gravem/errors.hpp"
#include "gravem/linalg.hpp"

namespace gravem {

enum class Chart { Cartesian, IsotropicCartesian, SchwarzschildSpherical };

inline std::string chart_name(Chart c) {
  switch (c) {
    case Chart::Cartesian: return "cartesian";
    case Chart::IsotropicCartesian: return "isotropic-cartesian";
    case Chart::SchwarzschildSpherical: return "schwarzschild";
  }
  return "?";
}

inline Chart parse_chart(const std::string& s) {
  if (s == "cartesian") return Chart::Cartesian;
  if (s == "isotropic-cartesian" || s == "isotropic") return Chart::IsotropicCartesian;
  if (s == "schwarzschild") return Chart::SchwarzschildSpherical;
  throw ConstraintViolation("unknown chart '" + s +
                            "' (expected cartesian | isotropic-cartesian | schwarzschild)");
}

struct Event {
  Vec4 x{};
  Chart chart = Chart::Cartesian;
};

inline bool finite(const Event& e) {
  for (Real v : e.x)
    if (!std::isfinite(v)) return false;
  return true;
}

// Gamma^mu_{alpha beta}, symmetric in the lower pair.
using Christoffel = std::array<Mat4, 4>;

inline Mat4 flat_eta() {
  Mat4 g{};
  g[0][0] = 1.0;
  g[1][1] = g[2][2] = g[3][3] = -1.0;
  return g;
}

class Metric;
using MetricPtr = std::shared_ptr<const Metric>;

// ---------------------------------------------------------------------------
// Metric interface. evaluate() must throw OutsideChartDomain outside the
// chart's validity region; christoffel()/kretschmann() default to finite
// differences of evaluate()/christoffel() and are overridden with closed
// forms by the built-in metrics.
// ---------------------------------------------------------------------------
class Metric {
 public:
  virtual ~Metric() = default;

  virtual std::string name() const = 0;
  virtual Chart chart() const = 0;
  virtual std::vector<std::pair<std::string, Real>> parameters() const { return {}; }

  virtual Mat4 evaluate(const Event& e) const = 0;
  virtual Christoffel christoffel(const Event& e) const { return fd_christoffel(e); }
  virtual Real kretschmann(const Event& e) const { return fd_kretschmann(e); }
  virtual bool flat() const { return false; }

  void require_chart(const Event& e) const {
    if (e.chart != chart())
      throw Error("event chart '" + chart_name(e.chart) + "' does not match metric chart '" +
                  chart_name(chart()) + "'");
    if (!finite(e)) throw OutsideChartDomain("non-finite event coordinates");
  }

  // Fourth-order central differences of the metric components.
  // Step h = fd_scale * max(1, |x_sigma|); 2e-3 sits near the optimum of the
  // h^4 truncation / eps/h round-off trade-off at double precision.
  Mat4 partial(const Event& e, int sigma, Real fd_scale = 2e-3) const {
    const Real h = fd_scale * std::max(1.0, std::abs(e.x[sigma]));
    if (e.x[sigma] + h == e.x[sigma])
      throw NumericalDerivativeFailure("finite-difference step underflow");
    auto shifted = [&](Real d) {
      Event s = e;
      s.x[sigma] += d;
      return evaluate(s);
    };
    const Mat4 p2 = shifted(2 * h), p1 = shifted(h), m1 = shifted(-h), m2 = shifted(-2 * h);
    Mat4 out{};
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        out[i][j] = (-p2[i][j] + 8 * p1[i][j] - 8 * m1[i][j] + m2[i][j]) / (12 * h);
    return out;
  }

  Christoffel fd_christoffel(const Event& e, Real fd_scale = 2e-3) const {
    const Mat4 g = evaluate(e);
    const Mat4 ginv = inverse4(g);
    std::array<Mat4, 4> dg{};
    for (int s = 0; s < 4; ++s) dg[s] = partial(e, s, fd_scale);
    Christoffel gam{};
    for (int mu = 0; mu < 4; ++mu)
      for (int a = 0; a < 4; ++a)
        for (int b = a; b < 4; ++b) {
          Real sum = 0.0;
          for (int lam = 0; lam < 4; ++lam)
            sum += ginv[mu][lam] * (dg[a][lam][b] + dg[b][lam][a] - dg[lam][a][b]);
          gam[mu][a][b] = 0.5 * sum;
          gam[mu][b][a] = gam[mu][a][b];
        }
    return gam;
  }

  // Kretschmann scalar R_{abcd} R^{abcd} from finite differences of the
  // connection. Adequate for diagnostics; built-ins override with closed forms.
  Real fd_kretschmann(const Event& e, Real fd_scale = 2e-3) const {
    const Mat4 g = evaluate(e);
    const Mat4 ginv = inverse4(g);
    const Christoffel gam = christoffel(e);
    // dGam[s][mu][a][b] = d_s Gamma^mu_{ab}
    std::array<Christoffel, 4> dgam{};
    for (int s = 0; s < 4; ++s) {
      const Real h = fd_scale * std::max(1.0, std::abs(e.x[s]));
      auto at = [&](Real d) {
        Event ev = e;
        ev.x[s] += d;
        return christoffel(ev);
      };
      const Christoffel p2 = at(2 * h), p1 = at(h), m1 = at(-h), m2 = at(-2 * h);
      for (int mu = 0; mu < 4; ++mu)
        for (int a = 0; a < 4; ++a)
          for (int b = 0; b < 4; ++b)
            dgam[s][mu][a][b] =
                (-p2[mu][a][b] + 8 * p1[mu][a][b] - 8 * m1[mu][a][b] + m2[mu][a][b]) / (12 * h);
    }
    // R^r_{s m n}
    std::array<std::array<Mat4, 4>, 4> up{};
    for (int r = 0; r < 4; ++r)
      for (int s = 0; s < 4; ++s)
        for (int m = 0; m < 4; ++m)
          for (int n = 0; n < 4; ++n) {
            Real v = dgam[m][r][n][s] - dgam[n][r][m][s];
            for (int lam = 0; lam < 4; ++lam)
              v += gam[r][m][lam] * gam[lam][n][s] - gam[r][n][lam] * gam[lam][m][s];
            up[r][s][m][n] = v;
          }
    // contract: K = g_{re} g^{sf} g^{mg} g^{nh} R^r_{smn} R^e_{fgh}
    Real k = 0.0;
    for (int r = 0; r < 4; ++r)
      for (int s = 0; s < 4; ++s)
        for (int m = 0; m < 4; ++m)
          for (int n = 0; n < 4; ++n) {
            const Real a = up[r][s][m][n];
            if (a == 0.0) continue;
            for (int e2 = 0; e2 < 4; ++e2)
              for (int f = 0; f < 4; ++f)
                for (int g2 = 0; g2 < 4; ++g2)
                  for (int h2 = 0; h2 < 4; ++h2) {
                    const Real w =
                        g[r][e2] * ginv[s][f] * ginv[m][g2] * ginv[n][h2];
                    if (w == 0.0) continue;
                    k += a * w * up[e2][f][g2][h2];
                  }
          }
    return k;
  }
};

// ------------------------------------------------------------- contractions

inline Complex inner_product(const CVec4& u, const CVec4& v, const Mat4& g) {
  Complex s = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) s += g[i][j] * u[i] * v[j];
  return s;
}

// metric-first argument order keeps this clear of std::inner_product
inline Complex inner_product_at(const Metric& m, const Event& e, const CVec4& u,
                                const CVec4& v) {
  m.require_chart(e);
  return inner_product(u, v, m.evaluate(e));
}

inline Complex inner_product_conj(const CVec4& u, const CVec4& v, const Mat4& g) {
  Complex s = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) s += g[i][j] * std::conj(u[i]) * v[j];
  return s;
}

inline Real inner_product(const Vec4& u, const Vec4& v, const Mat4& g) {
  Real s = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) s += g[i][j] * u[i] * v[j];
  return s;
}

inline CVec4 lower_index(const CVec4& u, const Mat4& g) {
  CVec4 r{};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) r[i] += g[i][j] * u[j];
  return r;
}

inline Vec4 lower_index(const Vec4& u, const Mat4& g) {
  Vec4 r{};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) r[i] += g[i][j] * u[j];
  return r;
}

// ------------------------------------------------------------------ metrics

class MinkowskiMetric final : public Metric {
 public:
  std::string name() const override { return "minkowski"; }
  Chart chart() const override { return Chart::Cartesian; }
  Mat4 evaluate(const Event& e) const override {
    require_chart(e);
    return flat_eta();
  }
  Christoffel christoffel(const Event& e) const override {
    require_chart(e);
    return Christoffel{};
  }
  Real kretschmann(const Event& e) const override {
    require_chart(e);
    return 0.0;
  }
  bool flat() const override { return true; }
};

// Schwarzschild exterior in the (t, r, theta, phi) chart.
class SchwarzschildMetric final : public Metric {
 public:
  explicit SchwarzschildMetric(Real r_s) : rs_(r_s) {
    if (rs_ < 0.0) throw ConstraintViolation("schwarzschild radius must be >= 0");
  }

  std::string name() const override { return "schwarzschild"; }
  Chart chart() const override { return Chart::SchwarzschildSpherical; }
  std::vector<std::pair<std::string, Real>> parameters() const override {
    return {{"r_s", rs_}};
  }
  Real schwarzschild_radius() const { return rs_; }

  void check_domain(const Event& e) const {
    require_chart(e);
    const Real r = e.x[1], th = e.x[2];
    if (r <= rs_) throw OutsideChartDomain("r <= r_s: event at or inside the horizon");
    if (r <= 0.0) throw OutsideChartDomain("r <= 0");
    if (std::sin(th) == 0.0)
      throw OutsideChartDomain("polar axis: spherical chart degenerate at sin(theta)=0");
  }

  Mat4 evaluate(const Event& e) const override {
    check_domain(e);
    const Real r = e.x[1], th = e.x[2];
    const Real f = 1.0 - rs_ / r;
    Mat4 g{};
    g[0][0] = f;
    g[1][1] = -1.0 / f;
    g[2][2] = -r * r;
    g[3][3] = -r * r * std::sin(th) * std::sin(th);
    return g;
  }

  Christoffel christoffel(const Event& e) const override {
    check_domain(e);
    const Real r = e.x[1], th = e.x[2];
    const Real f = 1.0 - rs_ / r;
    const Real st = std::sin(th), ct = std::cos(th);
    Christoffel gam{};
    gam[0][0][1] = gam[0][1][0] = rs_ / (2 * r * r * f);
    gam[1][0][0] = f * rs_ / (2 * r * r);
    gam[1][1][1] = -rs_ / (2 * r * r * f);
    gam[1][2][2] = -r * f;
    gam[1][3][3] = -r * f * st * st;
    gam[2][1][2] = gam[2][2][1] = 1.0 / r;
    gam[2][3][3] = -st * ct;
    gam[3][1][3] = gam[3][3][1] = 1.0 / r;
    gam[3][2][3] = gam[3][3][2] = ct / st;
    return gam;
  }

  Real kretschmann(const Event& e) const override {
    check_domain(e);
    const Real r = e.x[1];
    return 12.0 * rs_ * rs_ / std::pow(r, 6);
  }
  bool flat() const override { return rs_ == 0.0; }

 private:
  Real rs_;
};

// Static, spatially isotropic line element g = diag(T^2, -S^2, -S^2, -S^2)
// with T, S functions of rho = |x|. Covers the isotropic Schwarzschild chart
// and the weak-field lensing metric; Christoffels in closed form.
class IsotropicFormMetric : public Metric {
 public:
  Chart chart() const override { return Chart::Cartesian; }

  Mat4 evaluate(const Event& e) const override {
    const Real rho = radius_checked(e);
    const Real T = lapse(rho), S = stretch(rho);
    Mat4 g{};
    g[0][0] = T * T;
    g[1][1] = g[2][2] = g[3][3] = -S * S;
    return g;
  }

  Christoffel christoffel(const Event& e) const override {
    const Real rho = radius_checked(e);
    const Real T = lapse(rho), S = stretch(rho);
    const Real dT = dlapse(rho), dS = dstretch(rho);
    const Vec3 n = {e.x[1] / rho, e.x[2] / rho, e.x[3] / rho};
    Christoffel gam{};
    const Real lt = dT / T;         // d ln T
    const Real ls = dS / S;         // d ln S
    const Real att = T * dT / (S * S);
    for (int i = 0; i < 3; ++i) {
      gam[0][0][i + 1] = gam[0][i + 1][0] = lt * n[i];
      gam[i + 1][0][0] = att * n[i];
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k)
          gam[i + 1][j + 1][k + 1] =
              ls * ((i == j ? n[k] : 0.0) + (i == k ? n[j] : 0.0) - (j == k ? n[i] : 0.0));
    }
    return gam;
  }

  virtual Real min_radius() const = 0;

 protected:
  virtual Real lapse(Real rho) const = 0;     // T
  virtual Real stretch(Real rho) const = 0;   // S
  virtual Real dlapse(Real rho) const = 0;    // dT/drho
  virtual Real dstretch(Real rho) const = 0;  // dS/drho

  Real radius_checked(const Event& e) const {
    require_chart(e);
    const Real rho = std::sqrt(e.x[1] * e.x[1] + e.x[2] * e.x[2] + e.x[3] * e.x[3]);
    if (rho <= min_radius())
      throw OutsideChartDomain("rho <= " + std::to_string(min_radius()) +
                               ": event outside the chart's validity region");
    return rho;
  }
};

// Schwarzschild exterior in isotropic coordinates:
//   T = (1-a)/(1+a), S = (1+a)^2, a = r_s/(4 rho); areal radius rho (1+a)^2.
class SchwarzschildIsotropicMetric final : public IsotropicFormMetric {
 public:
  explicit SchwarzschildIsotropicMetric(Real r_s) : rs_(r_s) {
    if (rs_ < 0.0) throw ConstraintViolation("schwarzschild radius must be >= 0");
  }
  std::string name() const override { return "schwarzschild-isotropic"; }
  Chart chart() const override { return Chart::IsotropicCartesian; }
  std::vector<std::pair<std::string, Real>> parameters() const override {
    return {{"r_s", rs_}};
  }
  Real schwarzschild_radius() const { return rs_; }
  Real min_radius() const override { return rs_ / 4.0; }

  Real kretschmann(const Event& e) const override {
    const Real rho = radius_checked(e);
    const Real a = rs_ / (4.0 * rho);
    const Real r_areal = rho * (1.0 + a) * (1.0 + a);
    return 12.0 * rs_ * rs_ / std::pow(r_areal, 6);
  }
  bool flat() const override { return rs_ == 0.0; }

 protected:
  Real lapse(Real rho) const override {
    const Real a = rs_ / (4.0 * rho);
    return (1.0 - a) / (1.0 + a);
  }
  Real stretch(Real rho) const override {
    const Real a = rs_ / (4.0 * rho);
    return (1.0 + a) * (1.0 + a);
  }
  Real dlapse(Real rho) const override {
    const Real a = rs_ / (4.0 * rho);
    return 2.0 * a / (rho * (1.0 + a) * (1.0 + a));
  }
  Real dstretch(Real rho) const override {
    const Real a = rs_ / (4.0 * rho);
    return -2.0 * a * (1.0 + a) / rho;
  }

 private:
  Real rs_;
};

// Weak-field lensing metric eta + diag(2 Phi, 2 Phi, 2 Phi, 2 Phi),
// Phi = -GM/rho, i.e. T = sqrt(1+2 Phi), S = sqrt(1-2 Phi).
class WeakFieldMetric final : public IsotropicFormMetric {
 public:
  explicit WeakFieldMetric(Real gm) : gm_(gm) {
    if (gm_ < 0.0) throw ConstraintViolation("GM must be >= 0");
  }
  std::string name() const override { return "weak-field"; }
  std::vector<std::pair<std::string, Real>> parameters() const override {
    return {{"gm", gm_}};
  }
  Real gm() const { return gm_; }
  Real min_radius() const override { return 2.0 * gm_; }
  bool flat() const override { return gm_ == 0.0; }

 protected:
  Real lapse(Real rho) const override { return std::sqrt(1.0 - 2.0 * gm_ / rho); }
  Real stretch(Real rho) const override { return std::sqrt(1.0 + 2.0 * gm_ / rho); }
  Real dlapse(Real rho) const override {
    return (gm_ / (rho * rho)) / std::sqrt(1.0 - 2.0 * gm_ / rho);
  }
  Real dstretch(Real rho) const override {
    return -(gm_ / (rho * rho)) / std::sqrt(1.0 + 2.0 * gm_ / rho);
  }

 private:
  Real gm_;
};

// ---------------------------------------------------------------------------
// Sampled metric on a rectilinear grid, loaded from a whitespace-separated
// text file: one row per node, 4 coordinates followed by the 10 independent
// components g00 g01 g02 g03 g11 g12 g13 g22 g23 g33. Axes with a single
// node are treated as constant directions. Evaluation is multilinear.
// ---------------------------------------------------------------------------
class GridMetric final : public Metric {
 public:
  GridMetric(const std::string& path, Chart chart_tag) : chart_(chart_tag) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open metric grid file '" + path + "'");
    load(in);
    path_ = path;
  }
  GridMetric(std::istream& in, Chart chart_tag) : chart_(chart_tag) { load(in); }

  std::string name() const override { return "grid"; }
  Chart chart() const override { return chart_; }
  std::vector<std::pair<std::string, Real>> parameters() const override { return {}; }
  const std::string& source_path() const { return path_; }

  Mat4 evaluate(const Event& e) const override {
    require_chart(e);
    std::array<int, 4> i0{};
    std::array<Real, 4> w{};
    for (int a = 0; a < 4; ++a) {
      const auto& ax = axes_[a];
      const Real x = e.x[a];
      if (ax.size() == 1) {
        i0[a] = 0;
        w[a] = 0.0;
        continue;
      }
      if (x < ax.front() - 1e-12 || x > ax.back() + 1e-12)
        throw OutsideChartDomain("event outside the sampled grid along axis " +
                                 std::to_string(a));
      auto it = std::upper_bound(ax.begin(), ax.end(), x);
      int hi = std::min<int>(static_cast<int>(it - ax.begin()), static_cast<int>(ax.size()) - 1);
      int lo = std::max(hi - 1, 0);
      i0[a] = lo;
      w[a] = (ax[hi] == ax[lo]) ? 0.0 : (x - ax[lo]) / (ax[hi] - ax[lo]);
    }
    std::array<Real, 10> comp{};
    for (int corner = 0; corner < 16; ++corner) {
      Real weight = 1.0;
      std::array<int, 4> idx = i0;
      for (int a = 0; a < 4; ++a) {
        const bool upper = corner & (1 << a);
        if (upper) {
          if (axes_[a].size() == 1) { weight = 0.0; break; }
          idx[a] = std::min<int>(i0[a] + 1, static_cast<int>(axes_[a].size()) - 1);
          weight *= w[a];
        } else {
          weight *= 1.0 - w[a];
        }
      }
      if (weight == 0.0) continue;
      const auto& v = values_[flat_index(idx)];
      for (int c = 0; c < 10; ++c) comp[c] += weight * v[c];
    }
    return unpack(comp);
  }

  // Central differences with a step tied to the local grid spacing; the
  // interpolant is only piecewise smooth, so this is a first-order estimate.
  Christoffel christoffel(const Event& e) const override {
    const Mat4 g = evaluate(e);
    const Mat4 ginv = inverse4(g);
    std::array<Mat4, 4> dg{};
    for (int s = 0; s < 4; ++s) {
      if (axes_[s].size() == 1) continue;  // constant direction
      Real spacing = axes_[s].back() - axes_[s].front();
      for (std::size_t i = 0; i + 1 < axes_[s].size(); ++i)
        spacing = std::min(spacing, axes_[s][i + 1] - axes_[s][i]);
      const Real h = 0.49 * spacing;
      if (h <= 0.0 || e.x[s] + h == e.x[s])
        throw NumericalDerivativeFailure("grid spacing too small for finite differences");
      Event p = e, m = e;
      p.x[s] = std::min(e.x[s] + h, axes_[s].back());
      m.x[s] = std::max(e.x[s] - h, axes_[s].front());
      const Mat4 gp = evaluate(p), gm = evaluate(m);
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) dg[s][i][j] = (gp[i][j] - gm[i][j]) / (p.x[s] - m.x[s]);
    }
    Christoffel gam{};
    for (int mu = 0; mu < 4; ++mu)
      for (int a = 0; a < 4; ++a)
        for (int b = a; b < 4; ++b) {
          Real sum = 0.0;
          for (int lam = 0; lam < 4; ++lam)
            sum += ginv[mu][lam] * (dg[a][lam][b] + dg[b][lam][a] - dg[lam][a][b]);
          gam[mu][a][b] = 0.5 * sum;
          gam[mu][b][a] = gam[mu][a][b];
        }
    return gam;
  }

 private:
  static Mat4 unpack(const std::array<Real, 10>& c) {
    Mat4 g{};
    int k = 0;
    for (int i = 0; i < 4; ++i)
      for (int j = i; j < 4; ++j) {
        g[i][j] = g[j][i] = c[k++];
      }
    return g;
  }

  std::size_t flat_index(const std::array<int, 4>& idx) const {
    std::size_t f = 0;
    for (int a = 0; a < 4; ++a) f = f * axes_[a].size() + idx[a];
    return f;
  }

  void load(std::istream& in) {
    std::vector<std::array<Real, 14>> rows;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      std::istringstream ls(line);
      std::array<Real, 14> row{};
      int n = 0;
      Real v;
      while (ls >> v) {
        if (n < 14) row[n] = v;
        ++n;
      }
      if (n == 0) continue;
      if (n != 14)
        throw Error("metric grid line " + std::to_string(lineno) +
                    ": expected 14 numbers (4 coordinates + 10 components), got " +
                    std::to_string(n));
      rows.push_back(row);
    }
    if (rows.empty()) throw Error("metric grid file contains no data rows");
    for (int a = 0; a < 4; ++a) {
      std::vector<Real> ax;
      for (const auto& r : rows) ax.push_back(r[a]);
      std::sort(ax.begin(), ax.end());
      ax.erase(std::unique(ax.begin(), ax.end()), ax.end());
      axes_[a] = std::move(ax);
    }
    std::size_t total = 1;
    for (const auto& ax : axes_) total *= ax.size();
    if (total != rows.size())
      throw Error("metric grid is not a complete rectilinear product: " +
                  std::to_string(rows.size()) + " rows vs " + std::to_string(total) +
                  " expected nodes");
    values_.assign(total, {});
    for (const auto& r : rows) {
      std::array<int, 4> idx{};
      for (int a = 0; a < 4; ++a) {
        const auto& ax = axes_[a];
        idx[a] = static_cast<int>(std::lower_bound(ax.begin(), ax.end(), r[a]) - ax.begin());
      }
      auto& slot = values_[flat_index(idx)];
      for (int c = 0; c < 10; ++c) slot[c] = r[4 + c];
    }
  }

  Chart chart_;
  std::string path_;
  std::array<std::vector<Real>, 4> axes_;
  std::vector<std::array<Real, 10>> values_;
};

// ---------------------------------------------------------------------------
// Uniformly shrunk copy of a background: evaluates the base metric at x/s so
// features of coordinate size L appear at size s*L. The constant conformal
// prefactor of the scaling law is dropped; wave propagation cannot observe
// it, and dropping it keeps curvature lengths scaling as s*L.
// ---------------------------------------------------------------------------
class ScaledMetric final : public Metric {
 public:
  ScaledMetric(MetricPtr base, Real s) : base_(std::move(base)), s_(s) {
    if (!(s_ > 0.0)) throw NonPositiveScale("scale factor must be > 0");
  }

  std::string name() const override { return base_->name(); }
  Chart chart() const override { return base_->chart(); }
  std::vector<std::pair<std::string, Real>> parameters() const override {
    auto p = base_->parameters();
    p.emplace_back("scale", s_);
    return p;
  }
  MetricPtr base() const { return base_; }
  Real scale() const { return s_; }

  Event unscaled(const Event& e) const {
    Event u = e;
    for (auto& v : u.x) v /= s_;
    return u;
  }

  Mat4 evaluate(const Event& e) const override { return base_->evaluate(unscaled(e)); }
  Christoffel christoffel(const Event& e) const override {
    Christoffel gam = base_->christoffel(unscaled(e));
    for (auto& m : gam)
      for (auto& row : m)
        for (auto& v : row) v /= s_;
    return gam;
  }
  Real kretschmann(const Event& e) const override {
    return base_->kretschmann(unscaled(e)) / (s_ * s_ * s_ * s_);
  }
  bool flat() const override { return base_->flat(); }

 private:
  MetricPtr base_;
  Real s_;
};

// Composes scale factors instead of nesting wrappers, so the group property
// scale(s1) o scale(s2) = scale(s1*s2) holds exactly.
inline MetricPtr scale_metric(MetricPtr m, Real s) {
  if (!(s > 0.0)) throw NonPositiveScale("scale factor must be > 0");
  if (auto sm = std::dynamic_pointer_cast<const ScaledMetric>(m))
    return std::make_shared<ScaledMetric>(sm->base(), sm->scale() * s);
  return std::make_shared<ScaledMetric>(std::move(m), s);
}

// ------------------------------------------------------------ validity scale

// Background inhomogeneity length from the Kretschmann scalar, L = K^(-1/4);
// +infinity for (numerically) flat backgrounds.
inline Real curvature_length_scale(const Metric& m, const Event& e) {
  const Real k = m.kretschmann(e);
  if (k <= 1e-300) return std::numeric_limits<Real>::infinity();
  return std::pow(k, -0.25);
}

struct ValidityReport {
  Real wavelength = 0.0;
  Real curvature_length = 0.0;
  Real ratio = 0.0;
  enum class Verdict { Pass, Warn, Fail } verdict = Verdict::Pass;
};

inline const char* verdict_name(ValidityReport::Verdict v) {
  switch (v) {
    case ValidityReport::Verdict::Pass: return "pass";
    case ValidityReport::Verdict::Warn: return "warn";
    case ValidityReport::Verdict::Fail: return "fail";
  }
  return "?";
}

inline ValidityReport validity_ratio(Real lambda_h, const Metric& m, const Event& e,
                                     Real threshold = 0.01) {
  if (!(lambda_h > 0.0)) throw NonPositiveWavelength("wavelength must be > 0");
  ValidityReport rep;
  rep.wavelength = lambda_h;
  rep.curvature_length = curvature_length_scale(m, e);
  rep.ratio = std::isinf(rep.curvature_length) ? 0.0 : lambda_h / rep.curvature_length;
  if (rep.ratio < threshold)
    rep.verdict = ValidityReport::Verdict::Pass;
  else if (rep.ratio < 10.0 * threshold)
    rep.verdict = ValidityReport::Verdict::Warn;
  else
    rep.verdict = ValidityReport::Verdict::Fail;
  return rep;
}

// ------------------------------------------------------------------- factory

inline MetricPtr make_metric(const std::string& name,
                             const std::map<std::string, Real>& params,
                             const std::string& chart = "",
                             const std::string& grid_file = "") {
  auto param = [&](const std::string& key, Real fallback, bool required = false) {
    auto it = params.find(key);
    if (it != params.end()) return it->second;
    if (required) throw ConstraintViolation("metric '" + name + "' requires parameter '" + key + "'");
    return fallback;
  };
  if (name == "minkowski") return std::make_shared<MinkowskiMetric>();
  if (name == "schwarzschild") {
    const Real rs = param("r_s", 0.0, true);
    if (chart.empty())
      throw ConstraintViolation(
          "metric 'schwarzschild' requires an explicit chart (schwarzschild | isotropic-cartesian)");
    const Chart c = parse_chart(chart);
    if (c == Chart::SchwarzschildSpherical) return std::make_shared<SchwarzschildMetric>(rs);
    if (c == Chart::IsotropicCartesian)
      return std::make_shared<SchwarzschildIsotropicMetric>(rs);
    throw ConstraintViolation("schwarzschild metric has no cartesian chart");
  }
  if (name == "weak-field") return std::make_shared<WeakFieldMetric>(param("gm", 0.0, true));
  if (name == "grid") {
    if (grid_file.empty()) throw ConstraintViolation("metric 'grid' requires a file");
    return std::make_shared<GridMetric>(grid_file,
                                        chart.empty() ? Chart::Cartesian : parse_chart(chart));
  }
  throw ConstraintViolation("unknown metric '" + name +
                            "' (expected minkowski | schwarzschild | weak-field | grid)");
}

}  // namespace gravem
