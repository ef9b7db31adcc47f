#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "gravem/runner.hpp"
#include "gravem/scenario.hpp"

using namespace gravem;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* kMinimalFlat = R"(# minimal scenario
[metric]
name = "minkowski"

[[ray]]
start = [0, 0, 0, 0]
direction = [0, 0, 1]
frequency = 1.0
l_end = 5.0
)";

}  // namespace

TEST_CASE("minimal config parses with defaults applied") {
  const Scenario sc = parse_scenario(kMinimalFlat);
  CHECK(sc.metric.name == "minkowski");
  CHECK(sc.scale == 1.0);
  CHECK(sc.wave.c_plus == Complex(1.0, 0.0));
  CHECK(sc.wave.kappa_plus == 0.5);
  CHECK(sc.run.integrator == IntegratorKind::RungeKutta4);
  CHECK(sc.run.tolerance == 1e-9);
  CHECK(sc.run.deviation_tol == 1e-7);
  CHECK(sc.run.validity_threshold == 0.01);
  CHECK(sc.output.dir == "out");
  REQUIRE(sc.rays.size() == 1);
  CHECK(sc.rays[0].l_end == 5.0);
}

TEST_CASE("constraint violations name the broken rule") {
  const std::string bad = std::string(kMinimalFlat) + "\n[wave]\nkappa = 0.0\n";
  try {
    parse_scenario(bad);
    FAIL("expected ConstraintViolation");
  } catch (const ConstraintViolation& e) {
    CHECK(std::string(e.what()).find("kappa in (0,1)") != std::string::npos);
  }

  const std::string neg = std::string(kMinimalFlat) + "\n[scale]\ns = -2\n";
  CHECK_THROWS_AS(parse_scenario(neg), ConstraintViolation);

  // rays need either a start or the impact-parameter helper
  const char* no_launch = R"([metric]
name = "minkowski"
[[ray]]
frequency = 1.0
)";
  CHECK_THROWS_AS(parse_scenario(no_launch), ConstraintViolation);
}

TEST_CASE("unknown sections and keys get suggestions") {
  try {
    parse_scenario("[metrric]\nname = \"minkowski\"\n");
    FAIL("expected UnknownKey");
  } catch (const UnknownKey& e) {
    const std::string msg = e.what();
    CHECK(msg.find("metrric") != std::string::npos);
    CHECK(msg.find("did you mean 'metric'") != std::string::npos);
  }
  try {
    parse_scenario("[metric]\nname = \"minkowski\"\nchrat = \"cartesian\"\n");
    FAIL("expected UnknownKey");
  } catch (const UnknownKey& e) {
    CHECK(std::string(e.what()).find("did you mean 'chart'") != std::string::npos);
  }
}

TEST_CASE("syntax errors carry line and column") {
  try {
    parse_scenario("[metric]\nname = \n");
    FAIL("expected SyntaxError");
  } catch (const SyntaxError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_scenario("[metric\nname = \"x\"\n"), SyntaxError);
  CHECK_THROWS_AS(parse_scenario("key = 1\n"), SyntaxError);           // key before section
  CHECK_THROWS_AS(parse_scenario("[metric]\nname = \"a\"\nname = \"b\"\n"), SyntaxError);
  CHECK_THROWS_AS(parse_scenario("[metric]\nname = minkowski\n"), SyntaxError);  // unquoted
  CHECK_THROWS_AS(parse_scenario("[[metric]]\nname = \"minkowski\"\n"), SyntaxError);
}

TEST_CASE("typed accessors reject mismatched values") {
  CHECK_THROWS_AS(parse_scenario("[metric]\nname = 3\n"), ConstraintViolation);
  CHECK_THROWS_AS(parse_scenario("[metric]\nname = \"minkowski\"\n[scale]\ns = [1, 2]\n"),
                  ConstraintViolation);
  CHECK_THROWS_AS(
      parse_scenario("[metric]\nname = \"minkowski\"\n[[ray]]\nstart = [0, 0, 0]\n"),
      ConstraintViolation);
}

TEST_CASE("serialization round-trips to a fixpoint") {
  const char* cfg = R"([metric]
name = "schwarzschild"
chart = "schwarzschild"
r_s = 1.0

[scale]
s = 0.001

[wave]
c_plus = [0.707, -0.1]
c_minus = [0.1, 0.2]
kappa_plus = 0.3
kappa_minus = 0.7
phi0 = 1.25

[run]
step = 0.002
l_end = 123.5

[[ray]]
impact_parameter = 10
start_radius = 100
frequency = 2.0

[[state]]
p1 = [0, 0, 1]
helicity1 = 1
p2 = [0, 0, 2]
helicity2 = -1

[source]
pump_frequency = 2.0
kappa = 0.25
crystal_length = 0.02
pump_wavenumber = 1.5514e7
pump_width = 5e-6

[medium]
origin = [-2, -2, -2]
spacing = [2, 2, 2]
counts = [3, 3, 3]
)";
  const Scenario sc = parse_scenario(cfg);
  const std::string once = serialize_scenario(sc);
  const Scenario back = parse_scenario(once);
  CHECK(serialize_scenario(back) == once);

  // once the pending scale is folded, rescaling by one is the identity
  const std::string folded = serialize_scenario(apply_scale(back));
  CHECK(serialize_scenario(scale_scenario(parse_scenario(folded), 1.0)) == folded);
}

TEST_CASE("impact parameter launch conserves L/E = b exactly") {
  SchwarzschildMetric schw(1.0);
  RaySpec rs;
  rs.impact_parameter = 25.0;
  rs.start_radius = 200.0;
  rs.frequency = 2.0;
  const NullRay ray = build_ray(schw, rs);
  const Mat4 g = schw.evaluate(ray.event);
  CHECK(std::abs(inner_product(ray.p, ray.p, g)) < 1e-12);
  const Real energy = g[0][0] * ray.p[0];
  const Real angular = -g[3][3] * ray.p[3];
  CHECK(angular / energy == Catch::Approx(25.0).epsilon(1e-14));

  rs.start_radius = 10.0;  // inside the turning point for b = 25
  CHECK_THROWS_AS(build_ray(schw, rs), ConstraintViolation);
}

TEST_CASE("propagate subcommand writes deterministic tables") {
  const auto dir1 = std::filesystem::path("scenario_test_out1");
  const auto dir2 = std::filesystem::path("scenario_test_out2");
  std::filesystem::remove_all(dir1);
  std::filesystem::remove_all(dir2);

  const Scenario sc = parse_scenario(kMinimalFlat);
  const RunResult r1 = run_propagate(sc, dir1.string());
  const RunResult r2 = run_propagate(sc, dir2.string());
  CHECK(r1.exit_code == 0);
  CHECK(r1.report == r2.report);
  CHECK(slurp(dir1 / "ray_0_path.csv") == slurp(dir2 / "ray_0_path.csv"));
  CHECK(slurp(dir1 / "propagate_report.txt") == slurp(dir2 / "propagate_report.txt"));
  CHECK(r1.report.find("ray_0.drift_check = pass") != std::string::npos);

  std::filesystem::remove_all(dir1);
  std::filesystem::remove_all(dir2);
}

TEST_CASE("algebra subcommand tabulates the four sectors") {
  const char* cfg = R"([metric]
name = "minkowski"

[[state]]
p1 = [0, 0, 1]
helicity1 = 1
p2 = [0, 0, 2]
helicity2 = 1

[[state]]
p1 = [0, 0, 1]
helicity1 = -1
p2 = [0, 0, 2]
helicity2 = -1

[[state]]
p1 = [0, 0, 1]
helicity1 = 1
p2 = [0, 0, 2]
helicity2 = -1

[[state]]
p1 = [0, 0, 1]
helicity1 = -1
p2 = [0, 0, 2]
helicity2 = 1
)";
  const auto dir = std::filesystem::path("scenario_test_algebra");
  std::filesystem::remove_all(dir);
  const RunResult res = run_algebra(parse_scenario(cfg), dir.string());
  CHECK(res.exit_code == 0);
  CHECK(res.report.find("state_0.sector = helicity 2 (gravitational equivalent)") !=
        std::string::npos);
  CHECK(res.report.find("state_1.sector = helicity -2 (gravitational equivalent)") !=
        std::string::npos);
  CHECK(res.report.find("state_2.sector = helicity 0 (no gravitational equivalent)") !=
        std::string::npos);
  const std::string table = slurp(dir / "algebra_table.csv");
  CHECK(table.find("mass2") != std::string::npos);
  std::filesystem::remove_all(dir);
}

TEST_CASE("equivalence subcommand on the flat scenario exits clean") {
  std::string cfg = std::string(kMinimalFlat) + "\n[run]\nstep = 0.01\n";
  const auto dir = std::filesystem::path("scenario_test_equiv");
  std::filesystem::remove_all(dir);
  const RunResult res = run_equivalence(parse_scenario(cfg), dir.string());
  CHECK(res.exit_code == 0);
  CHECK(res.report.find("ray_0.deviation_check = pass") != std::string::npos);
  CHECK(res.report.find("ray_0.phase_ratio = 2") != std::string::npos);
  std::filesystem::remove_all(dir);
}

TEST_CASE("rays aimed inside the photon sphere surface chart errors") {
  const char* cfg = R"([metric]
name = "schwarzschild"
chart = "schwarzschild"
r_s = 1.0

[[ray]]
impact_parameter = 1.5
start_radius = 50
frequency = 1.0
l_end = 100

[run]
step = 0.001
)";
  const Scenario sc = parse_scenario(cfg);
  CHECK_THROWS_AS(run_propagate(sc, "scenario_test_plunge"), OutsideChartDomain);
  std::filesystem::remove_all("scenario_test_plunge");
}
