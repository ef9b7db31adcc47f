// Scenario execution: one function per CLI subcommand. All data files are
// written with fixed formatting (17 significant digits, no timestamps) so
// identical configs produce bit-identical outputs.
#pragma once

#include <filesystem>
#include <fstream>
#include <future>
#include <sstream>
#include <string>
#include <vector>

#include "gravem/equivalence.hpp"
#include "gravem/scenario.hpp"

namespace gravem {

struct RunResult {
  int exit_code = 0;  // 0 all-pass, 2 failed check (errors surface as exceptions)
  std::string report;
};

namespace detail {

inline std::string fmt6(Real v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

inline void write_file(const std::string& dir, const std::string& name,
                       const std::string& content) {
  std::filesystem::create_directories(dir);
  std::ofstream out(std::filesystem::path(dir) / name, std::ios::binary);
  if (!out) throw Error("cannot write output file '" + name + "' in '" + dir + "'");
  out << content;
}

inline int table_stride(std::size_t rows, int requested) {
  if (requested > 0) return requested;
  const std::size_t target = 2000;
  return rows <= target ? 1 : static_cast<int>((rows + target - 1) / target);
}

inline Real ray_wavelength(const RunSpec& run, const RaySpec& ray) {
  return run.wavelength > 0.0 ? run.wavelength : 2.0 * kPi / ray.frequency;
}

inline Real ray_span(const RunSpec& run, const RaySpec& ray) {
  const Real l = ray.l_end != 0.0 ? ray.l_end : run.l_end;
  if (!(l > 0.0))
    throw ConstraintViolation("ray needs a positive l_end ([[ray]] l_end or [run] l_end)");
  return l;
}

inline RunControls run_controls(const RunSpec& run) {
  RunControls c;
  c.integrator = run.integrator;
  c.step = run.step;
  c.rel_tol = run.rel_tol;
  c.max_steps = run.max_steps;
  c.constraint_tol = run.tolerance;
  return c;
}

}  // namespace detail

// ---------------------------------------------------------------- propagate

inline RunResult run_propagate(const Scenario& sc_in, const std::string& out_dir) {
  const Scenario sc = apply_scale(sc_in);
  const MetricPtr metric = build_metric(sc.metric);
  if (sc.rays.empty())
    throw ConstraintViolation("propagate requires at least one [[ray]]");

  struct PerRay {
    RayPath path;
    DriftSummary drift;
    Real deflection = 0.0;
    ValidityReport validity_start;
    Real worst_ratio = 0.0;
  };

  auto work = [&](const RaySpec& rs) {
    PerRay out;
    const NullRay ray = build_ray(*metric, rs);
    out.path = integrate_null_geodesic(*metric, ray, detail::ray_span(sc.run, rs),
                                       detail::run_controls(sc.run));
    out.drift = constraint_drift(out.path);
    out.deflection = measure_deflection(*metric, out.path);
    const Real lambda = detail::ray_wavelength(sc.run, rs);
    out.validity_start =
        validity_ratio(lambda, *metric, ray.event, sc.run.validity_threshold);
    const int stride = detail::table_stride(out.path.samples.size(), 0);
    for (std::size_t i = 0; i < out.path.samples.size();
         i += static_cast<std::size_t>(stride)) {
      const auto& s = out.path.samples[i];
      const Real L = curvature_length_scale(*metric, {s.x, out.path.chart});
      out.worst_ratio = std::max(out.worst_ratio, std::isinf(L) ? 0.0 : lambda / L);
    }
    return out;
  };

  std::vector<std::future<PerRay>> jobs;
  for (const auto& rs : sc.rays)
    jobs.push_back(std::async(std::launch::async, work, rs));

  std::ostringstream rep;
  int exit_code = 0;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const PerRay r = jobs[i].get();
    const std::string tag = "ray_" + std::to_string(i);

    std::ostringstream csv;
    csv << "l,x0,x1,x2,x3,p0,p1,p2,p3,null_residual\n";
    const int stride = detail::table_stride(r.path.samples.size(), sc.output.stride);
    for (std::size_t k = 0; k < r.path.samples.size(); k += static_cast<std::size_t>(stride)) {
      const auto& s = r.path.samples[k];
      csv << detail::fmt_real(s.l);
      for (Real v : s.x) csv << ',' << detail::fmt_real(v);
      for (Real v : s.p) csv << ',' << detail::fmt_real(v);
      csv << ',' << detail::fmt_real(s.null_residual) << '\n';
    }
    detail::write_file(out_dir, tag + "_path.csv", csv.str());

    const bool drift_ok = r.drift.max_null <= sc.run.tolerance;
    if (!drift_ok) exit_code = 2;
    rep << tag << ".samples = " << r.path.samples.size() << '\n'
        << tag << ".max_null_residual = " << detail::fmt_real(r.drift.max_null) << '\n'
        << tag << ".mean_null_residual = " << detail::fmt_real(r.drift.mean_null) << '\n'
        << tag << ".deflection_rad = " << detail::fmt_real(r.deflection) << '\n'
        << tag << ".validity_start = " << verdict_name(r.validity_start.verdict) << '\n'
        << tag << ".validity_start_ratio = " << detail::fmt_real(r.validity_start.ratio)
        << '\n'
        << tag << ".validity_worst_ratio = " << detail::fmt_real(r.worst_ratio) << '\n'
        << tag << ".drift_check = " << (drift_ok ? "pass" : "fail") << '\n';
  }
  rep << "exit_code = " << exit_code << '\n';
  detail::write_file(out_dir, "propagate_report.txt", rep.str());
  return {exit_code, rep.str()};
}

// ---------------------------------------------------------- equivalence-check

inline RunResult run_equivalence(const Scenario& sc_in, const std::string& out_dir) {
  const Scenario sc = apply_scale(sc_in);
  const MetricPtr metric = build_metric(sc.metric);
  if (sc.rays.empty())
    throw ConstraintViolation("equivalence-check requires at least one [[ray]]");

  struct PerRay {
    EquivalenceReport report;
    Real gauge_residual = 0.0;
    Real minority_leak = 0.0;  // |c-|/|c+| (or inverse) at the far end
    Real kappa_delta = 0.0;    // factored output change under a kappa shift
    std::vector<Real> l;
  };

  auto work = [&](const RaySpec& rs) {
    PerRay out;
    const NullRay ray = build_ray(*metric, rs);
    RayPath path = integrate_null_geodesic(*metric, ray, detail::ray_span(sc.run, rs),
                                           detail::run_controls(sc.run));
    const HelicityFrame frame0 = helicity_frame(*metric, ray.event, ray.p);
    const GravitationalWave wave =
        assemble_gw(sc.wave.c_plus, sc.wave.c_minus, frame0, sc.wave.phi0,
                    sc.wave.kappa_plus, sc.wave.kappa_minus, path);

    const PolarizationTensorField direct = propagate_direct(wave, *metric);
    const PolarizationTensorField factored = propagate_factored(wave, *metric);
    out.gauge_residual = std::max(direct.max_gauge_residual, factored.max_gauge_residual);

    // polarization (Wigner) phases, referenced to the frame field along the ray
    const VectorTransportResult vres =
        parallel_transport_vector(*metric, path, frame0.e_plus);
    const std::vector<Real> em = vector_polarization_phase(*metric, path, vres.values);
    const std::vector<Real> gw = tensor_polarization_phase(*metric, path, direct);

    out.report = equivalence_report(direct, factored, em, gw, sc.run.deviation_tol,
                                    sc.run.tolerance);

    // kappa family invariance: shifting the split must not change the output
    GravitationalWave shifted = wave;
    shifted.kappa_plus = 1.0 - wave.kappa_plus;
    shifted.kappa_minus = 0.5 * wave.kappa_minus;
    const PolarizationTensorField fact2 = propagate_factored(shifted, *metric, false);
    for (std::size_t i = 0; i < factored.tensors.size(); ++i) {
      const Real d = frobenius(mat_sub(factored.tensors[i], fact2.tensors[i])) /
                     std::max(frobenius(factored.tensors[i]), 1e-300);
      out.kappa_delta = std::max(out.kappa_delta, d);
    }

    // helicity non-mixing at the far end
    {
      const auto& last = path.samples.back();
      const HelicityFrame fr_end =
          helicity_frame(*metric, {last.x, path.chart}, last.p);
      const HelicityAmplitudes amp =
          decompose_helicity(direct.tensors.back(), fr_end, *metric);
      const Real cp = std::abs(amp.c_plus), cm = std::abs(amp.c_minus);
      if (std::abs(sc.wave.c_minus) == 0.0 && std::abs(sc.wave.c_plus) != 0.0)
        out.minority_leak = cm / std::max(cp, 1e-300);
      else if (std::abs(sc.wave.c_plus) == 0.0 && std::abs(sc.wave.c_minus) != 0.0)
        out.minority_leak = cp / std::max(cm, 1e-300);
    }

    out.l = direct.l;
    return out;
  };

  std::vector<std::future<PerRay>> jobs;
  for (const auto& rs : sc.rays)
    jobs.push_back(std::async(std::launch::async, work, rs));

  std::ostringstream rep;
  int exit_code = 0;
  const Real gauge_tol = 10.0 * sc.run.tolerance;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const PerRay r = jobs[i].get();
    const std::string tag = "ray_" + std::to_string(i);

    std::ostringstream csv;
    csv << "l,deviation,em_phase,gw_phase,doubling_residual\n";
    const int stride = detail::table_stride(r.l.size(), sc.output.stride);
    for (std::size_t k = 0; k < r.l.size(); k += static_cast<std::size_t>(stride)) {
      csv << detail::fmt_real(r.l[k]) << ',' << detail::fmt_real(r.report.deviation[k]) << ','
          << detail::fmt_real(r.report.em_phase[k]) << ','
          << detail::fmt_real(r.report.gw_phase[k]) << ','
          << detail::fmt_real(std::abs(r.report.gw_phase[k] - 2.0 * r.report.em_phase[k]))
          << '\n';
    }
    detail::write_file(out_dir, tag + "_equivalence.csv", csv.str());

    const bool gauge_ok = r.gauge_residual <= gauge_tol;
    const bool kappa_ok = r.kappa_delta <= 1e-12;
    const bool mixing_ok = r.minority_leak <= sc.run.tolerance;
    if (!r.report.deviation_ok || !r.report.phase_ok || !gauge_ok || !kappa_ok || !mixing_ok)
      exit_code = 2;
    rep << tag << ".max_deviation = " << detail::fmt_real(r.report.max_deviation) << '\n'
        << tag << ".mean_deviation = " << detail::fmt_real(r.report.mean_deviation) << '\n'
        << tag << ".phase_ratio = " << detail::fmt_real(r.report.phase_ratio) << '\n'
        << tag << ".max_doubling_residual = "
        << detail::fmt_real(r.report.max_doubling_residual) << '\n'
        << tag << ".max_gauge_residual = " << detail::fmt_real(r.gauge_residual) << '\n'
        << tag << ".kappa_invariance_delta = " << detail::fmt_real(r.kappa_delta) << '\n'
        << tag << ".helicity_leak = " << detail::fmt_real(r.minority_leak) << '\n'
        << tag << ".deviation_check = " << (r.report.deviation_ok ? "pass" : "fail") << '\n'
        << tag << ".phase_doubling_check = " << (r.report.phase_ok ? "pass" : "fail") << '\n'
        << tag << ".gauge_check = " << (gauge_ok ? "pass" : "fail") << '\n'
        << tag << ".kappa_invariance_check = " << (kappa_ok ? "pass" : "fail") << '\n'
        << tag << ".helicity_mixing_check = " << (mixing_ok ? "pass" : "fail") << '\n';
  }
  rep << "exit_code = " << exit_code << '\n';
  detail::write_file(out_dir, "equivalence_report.txt", rep.str());
  return {exit_code, rep.str()};
}

// ------------------------------------------------------------------ algebra

inline RunResult run_algebra(const Scenario& sc_in, const std::string& out_dir) {
  const Scenario sc = apply_scale(sc_in);
  if (sc.states.empty())
    throw ConstraintViolation("algebra requires at least one [[state]]");

  std::ostringstream csv;
  csv << "index,p1x,p1y,p1z,h1,p2x,p2y,p2z,h2,mass2,parallel,total_helicity,"
         "grav_equivalent,kappa,alpha,P0,P1,P2,P3\n";
  std::ostringstream rep;
  for (std::size_t i = 0; i < sc.states.size(); ++i) {
    const auto& st = sc.states[i];
    const TwoPhotonState state = symmetrized_product(make_plane_wave(st.p1, st.helicity1),
                                                     make_plane_wave(st.p2, st.helicity2));
    const Real m2 = mass_squared(state);
    const FourMomentumResult fm = four_momentum(state);
    csv << i;
    for (Real v : st.p1) csv << ',' << detail::fmt_real(v);
    csv << ',' << st.helicity1;
    for (Real v : st.p2) csv << ',' << detail::fmt_real(v);
    csv << ',' << st.helicity2 << ',' << detail::fmt_real(m2) << ','
        << (state.parallel ? 1 : 0) << ',';
    if (state.parallel)
      csv << total_helicity(state);
    csv << ',' << (has_gravitational_equivalent(state) ? 1 : 0) << ',';
    if (state.kappa) csv << detail::fmt_real(*state.kappa);
    csv << ',';
    if (state.alpha) csv << detail::fmt_real(*state.alpha);
    for (Real v : fm.total) csv << ',' << detail::fmt_real(v);
    csv << '\n';

    rep << "state_" << i << ".mass2 = " << detail::fmt_real(m2) << '\n'
        << "state_" << i << ".sector = ";
    if (!state.parallel)
      rep << "non-parallel (not a helicity eigenstate)";
    else if (has_gravitational_equivalent(state))
      rep << "helicity " << total_helicity(state) << " (gravitational equivalent)";
    else
      rep << "helicity 0 (no gravitational equivalent)";
    rep << '\n';
  }
  detail::write_file(out_dir, "algebra_table.csv", csv.str());
  rep << "exit_code = 0\n";
  detail::write_file(out_dir, "algebra_report.txt", rep.str());
  return {0, rep.str()};
}

// ------------------------------------------------------------------- medium

inline RunResult run_medium(const Scenario& sc_in, const std::string& out_dir) {
  const Scenario sc = apply_scale(sc_in);
  if (!sc.medium.present)
    throw ConstraintViolation("medium requires a [medium] voxel grid section");
  if (sc.metric.chart.empty() && sc.metric.name != "minkowski" &&
      sc.metric.name != "weak-field")
    throw ConstraintViolation("medium compilation requires an explicit metric chart");
  const MetricPtr metric = build_metric(sc.metric);

  std::ostringstream out;
  out << "# gravem medium voxel export\n";
  out << "# metric = " << sc.metric.name;
  for (const auto& [k, v] : sc.metric.params) out << ' ' << k << '=' << detail::fmt_real(v);
  out << '\n';
  out << "# chart = " << chart_name(metric->chart()) << '\n';
  out << "# scale = " << detail::fmt_real(sc_in.scale) << '\n';
  out << "# columns: x y z eps_xx eps_xy eps_xz eps_yy eps_yz eps_zz"
         " mu_xx mu_xy mu_xz mu_yy mu_yz mu_zz w_x w_y w_z\n";

  Real max_asym = 0.0;
  for (int ix = 0; ix < sc.medium.counts[0]; ++ix)
    for (int iy = 0; iy < sc.medium.counts[1]; ++iy)
      for (int iz = 0; iz < sc.medium.counts[2]; ++iz) {
        const Vec3 x = {sc.medium.origin[0] + ix * sc.medium.spacing[0],
                        sc.medium.origin[1] + iy * sc.medium.spacing[1],
                        sc.medium.origin[2] + iz * sc.medium.spacing[2]};
        const Event e{{sc.medium.time, x[0], x[1], x[2]}, metric->chart()};
        const ConstitutiveTensors c = plebanski_medium(*metric, e);
        for (int a = 0; a < 3; ++a)
          for (int b = a + 1; b < 3; ++b)
            max_asym = std::max(max_asym, std::abs(c.eps[a][b] - c.eps[b][a]));
        out << detail::fmt_real(x[0]) << ' ' << detail::fmt_real(x[1]) << ' '
            << detail::fmt_real(x[2]);
        for (int a = 0; a < 3; ++a)
          for (int b = a; b < 3; ++b) out << ' ' << detail::fmt_real(c.eps[a][b]);
        for (int a = 0; a < 3; ++a)
          for (int b = a; b < 3; ++b) out << ' ' << detail::fmt_real(c.mu[a][b]);
        for (int a = 0; a < 3; ++a) out << ' ' << detail::fmt_real(c.w[a]);
        out << '\n';
      }
  detail::write_file(out_dir, "medium_voxels.txt", out.str());

  std::ostringstream rep;
  const bool sym_ok = max_asym <= 1e-12;
  rep << "voxels = "
      << sc.medium.counts[0] * sc.medium.counts[1] * sc.medium.counts[2] << '\n'
      << "max_eps_asymmetry = " << detail::fmt_real(max_asym) << '\n'
      << "symmetry_check = " << (sym_ok ? "pass" : "fail") << '\n';
  const int code = sym_ok ? 0 : 2;
  rep << "exit_code = " << code << '\n';
  detail::write_file(out_dir, "medium_report.txt", rep.str());
  return {code, rep.str()};
}

// -------------------------------------------------------------------- scale

inline RunResult run_scale(const Scenario& sc_in, const std::string& out_dir) {
  const Scenario folded = apply_scale(sc_in);
  const std::string text = serialize_scenario(folded);
  detail::write_file(out_dir, "scaled_config.toml", text);
  return {0, text};
}

// ------------------------------------------------------------------- source

inline RunResult run_source(const Scenario& sc_in, const std::string& out_dir) {
  const Scenario sc = apply_scale(sc_in);
  if (!sc.source.present)
    throw ConstraintViolation("source requires a [source] section");
  const SpdcState st = spdc_state(sc.source.spdc, {0.0, 0.0, 1.0});
  const QualityReport q = momentum_correlation_quality(sc.source.spdc);

  // energy conservation must hold bitwise by construction
  const bool energy_ok = (st.omega_signal + st.omega_idler) == st.omega_pump;

  // the coincidence sample is a kappa-family invariant
  Real kappa_delta = 0.0;
  {
    SpdcSourceSpec alt = sc.source.spdc;
    alt.kappa = 0.5;
    alt.degenerate_filter = false;
    const SpdcState st2 = spdc_state(alt, {0.0, 0.0, 1.0});
    for (Real zt : {0.0, 0.3, 1.1}) {
      const CMat3 a = coincidence_amplitude(st, zt, 0.1);
      const CMat3 b = coincidence_amplitude(st2, zt, 0.1);
      kappa_delta = std::max(kappa_delta, max_abs(mat_sub(a, b)));
    }
  }
  const bool kappa_ok = kappa_delta <= 1e-12;

  std::ostringstream rep;
  rep << "omega_pump = " << detail::fmt_real(st.omega_pump) << '\n'
      << "omega_signal = " << detail::fmt_real(st.omega_signal) << '\n'
      << "omega_idler = " << detail::fmt_real(st.omega_idler) << '\n'
      << "kappa = " << detail::fmt_real(st.kappa) << '\n'
      << "energy_conservation = " << (energy_ok ? "pass" : "fail") << '\n'
      << "pair_pp_helicity = " << total_helicity(st.pair_pp) << '\n'
      << "pair_mm_helicity = " << total_helicity(st.pair_mm) << '\n'
      << "amp_pp = [" << detail::fmt_real(st.amp_pp.real()) << ", "
      << detail::fmt_real(st.amp_pp.imag()) << "]\n"
      << "amp_mm = [" << detail::fmt_real(st.amp_mm.real()) << ", "
      << detail::fmt_real(st.amp_mm.imag()) << "]\n"
      << "quality_ratio = " << detail::fmt_real(q.ratio) << '\n'
      << "quality_width_bound = " << detail::fmt_real(q.width_bound) << '\n'
      << "quality_verdict = " << (q.good ? "good" : "bad") << '\n'
      << "coincidence_kappa_delta = " << detail::fmt_real(kappa_delta) << '\n'
      << "kappa_invariance_check = " << (kappa_ok ? "pass" : "fail") << '\n';
  const int code = (energy_ok && q.good && kappa_ok) ? 0 : 2;
  rep << "exit_code = " << code << '\n';
  detail::write_file(out_dir, "source_report.txt", rep.str());
  return {code, rep.str()};
}

// ---------------------------------------------------------------- dispatch

inline RunResult run_subcommand(const std::string& name, const Scenario& sc,
                                const std::string& out_dir) {
  if (name == "propagate") return run_propagate(sc, out_dir);
  if (name == "equivalence-check") return run_equivalence(sc, out_dir);
  if (name == "algebra") return run_algebra(sc, out_dir);
  if (name == "medium") return run_medium(sc, out_dir);
  if (name == "scale") return run_scale(sc, out_dir);
  if (name == "source") return run_source(sc, out_dir);
  throw ConstraintViolation("unknown subcommand '" + name + "'");
}

}  // namespace gravem
