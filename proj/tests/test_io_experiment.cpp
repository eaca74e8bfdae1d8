#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "cournot/congestion.hpp"
#include "cournot/cost_model.hpp"
#include "cournot/errors.hpp"
#include "cournot/experiment.hpp"
#include "cournot/io.hpp"
#include "support.hpp"

using namespace cournot;
using nlohmann::json;
using testing::kPi;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("cournot_test_" + std::to_string(::getpid())) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_text(const fs::path& path, const std::string& text) { std::ofstream(path) << text; }

int cli(const std::string& args) {
  const std::string command = std::string(COURNOT_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

json small_fig1(const fs::path& out) {
  return {{"preset", "fig1"}, {"grid", {{"n_cells", 40}}}, {"mu", {{"n_points", 900}}}, {"output_dir", out.string()}};
}

}  // namespace

TEST_CASE("density CSV round trip") {
  const fs::path dir = scratch("density");
  std::mt19937_64 rng(3);
  const GridMeasure1D nu = normalize(testing::random_simplex(25, rng), Grid1D(0.1, 0.9, 25));
  io::write_density_csv(dir / "d.csv", nu);
  const GridMeasure1D back = io::read_density_csv(dir / "d.csv");
  CHECK(back.grid().n_cells == 25);
  CHECK(back.grid().y_min == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(back.grid().y_max == doctest::Approx(0.9).epsilon(1e-14));
  CHECK((back.density() - nu.density()).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("matrix CSV parsing") {
  const fs::path dir = scratch("matrix");
  write_text(dir / "m.csv", "a,b,c\n1,2,3\n4,5,6\n");
  const Matrix m = io::read_matrix_csv(dir / "m.csv");
  REQUIRE(m.rows() == 2);
  CHECK(m(1, 2) == 6.0);
  CHECK(io::read_vector_csv(dir / "m.csv")(0) == 3.0);

  write_text(dir / "bad.csv", "1,2\n3\n");
  try {
    io::read_matrix_csv(dir / "bad.csv");
    FAIL("expected InputError");
  } catch (const io::InputError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  CHECK_THROWS_AS(io::read_matrix_csv(dir / "missing.csv"), io::InputError);
  CHECK_THROWS_AS(io::write_coupling_csv(dir / "g.csv", Matrix::Zero(1001, 1000)), DomainError);
}

TEST_CASE("presets") {
  CHECK(app::preset_names().size() == 7);
  const app::ExperimentConfig fig1 = app::preset("fig1");
  CHECK(fig1.method == app::Method::Congestion);
  CHECK(fig1.y_max == doctest::Approx(kPi / 6.0));
  CHECK(fig1.n_cells == 200);
  CHECK(fig1.sampler.n_points == 10000);
  CHECK(fig1.potential_strength == 10.0);
  CHECK(fig1.potential_center == 0.1);

  const app::ExperimentConfig fig5 = app::preset("fig5");
  CHECK(fig5.method == app::Method::BestReplyAndSinkhorn);
  CHECK(fig5.epsilon == 1e-3);
  CHECK(fig5.interaction_strength == 1.0);
  CHECK(fig5.potential_center == doctest::Approx(kPi / 12.0));

  CHECK(app::preset("fig4_p8").p == 8.0);
  CHECK_THROWS_AS(app::preset("fig9"), app::ConfigError);
}

TEST_CASE("config parsing and validation") {
  const app::ExperimentConfig c = app::parse_config(
      json{{"preset", "fig3"}, {"grid", {{"n_cells", 50}}}, {"solver", {{"damping", 0.5}}}});
  CHECK(c.n_cells == 50);
  CHECK(c.solver.damping == 0.5);
  CHECK(c.method == app::Method::BestReply);

  try {
    app::parse_config(json{{"preset", "fig1"}, {"solver", {{"dampening", 0.5}}}});
    FAIL("expected ConfigError");
  } catch (const app::ConfigError& e) {
    CHECK(std::string(e.what()).find("solver.dampening") != std::string::npos);
  }
  CHECK_THROWS_AS(app::parse_config(json{{"grid", {{"n_cells", "many"}}}}), app::ConfigError);
  CHECK_THROWS_AS(app::parse_config(json{{"grid", {{"n_cells", 0}}}}), app::ConfigError);
  CHECK_THROWS_AS(app::parse_config(json{{"cost", "arc_power"}}), app::ConfigError);
  CHECK_THROWS_AS(app::parse_config(json{{"method", "gradient"}}), app::ConfigError);
  CHECK_THROWS_AS(app::parse_config(json{{"solver", {{"damping", 2.0}}}}), app::ConfigError);

  const fs::path dir = scratch("config");
  write_text(dir / "broken.json", "{\n  \"preset\": \"fig1\",\n  \"grid\": {\n}}}\n");
  try {
    app::load_config(dir / "broken.json");
    FAIL("expected ConfigError");
  } catch (const app::ConfigError& e) {
    CHECK(std::string(e.what()).find("broken.json:4") != std::string::npos);
  }
}

TEST_CASE("config hash ignores the output directory") {
  app::ExperimentConfig a = app::preset("fig1");
  app::ExperimentConfig b = a;
  b.output_dir = "elsewhere";
  CHECK(app::config_hash(a) == app::config_hash(b));
  b.n_cells = 100;
  CHECK(app::config_hash(a) != app::config_hash(b));
}

TEST_CASE("compare") {
  const Grid1D grid(0.0, 1.0, 10);
  std::mt19937_64 rng(5);
  const GridMeasure1D a = normalize(testing::random_simplex(10, rng), grid);
  const app::ComparisonReport same = app::compare(a, a);
  CHECK(same.w1 == 0.0);
  CHECK(same.l1 == 0.0);
  CHECK(same.argmax_offset == 0);
  CHECK(same.support_difference == 0);

  Vector x = Vector::Zero(10);
  Vector y = Vector::Zero(10);
  x(2) = 1.0;
  y(5) = 1.0;
  y(6) = 1.0;
  const app::ComparisonReport r = app::compare(normalize(x, grid), normalize(y, grid));
  CHECK(r.argmax_offset == 3);
  CHECK(r.support_difference == -1);
  CHECK(r.l1 == doctest::Approx(2.0));
  CHECK(r.w1 == doctest::Approx(0.35));
  CHECK_THROWS_AS(app::compare(a, GridMeasure1D::uniform(Grid1D(0.0, 1.0, 11))), ShapeError);
}

TEST_CASE("runs are deterministic and write a manifest") {
  const fs::path first = scratch("run_a");
  const fs::path second = scratch("run_b");
  std::ostringstream log;
  const app::RunOutcome a = app::run(app::parse_config(small_fig1(first)), {}, log);
  const app::RunOutcome b = app::run(app::parse_config(small_fig1(second)), {}, log);
  CHECK(a.converged);
  CHECK(a.exit_code() == 0);
  for (const char* name : {"density.csv", "profile.csv", "assignment.csv", "convergence.csv", "level_curves.csv"}) {
    REQUIRE(fs::exists(first / name));
    CHECK(slurp(first / name) == slurp(second / name));
  }
  const json manifest = json::parse(slurp(first / "manifest.json"));
  CHECK(manifest["preset"] == "fig1");
  CHECK(manifest["converged"] == true);
  CHECK(manifest["nestedness"]["is_nested"] == true);
  CHECK(manifest["config_hash"] == b.manifest["config_hash"]);
  CHECK(manifest.contains("optimality_residual"));
  CHECK(slurp(first / "density.csv").rfind("y,density\n", 0) == 0);
}

TEST_CASE("congestion equilibrium does not depend on the start") {
  const app::ExperimentConfig c = app::parse_config(small_fig1(scratch("two_start")));
  const PointCloudMeasure mu = c.sampler.sample();
  const auto cost = make_cost(c.cost);
  CongestionSpec spec;
  spec.potential = Potential::quadratic(c.potential_strength, c.potential_center);
  const Grid1D grid = c.grid();
  Vector skew(grid.n_cells);
  for (Index j = 0; j < grid.n_cells; ++j) skew(j) = std::exp(8.0 * grid.midpoint(j));
  const EquilibriumResult a = solve_congestion(*cost, mu, spec, GridMeasure1D::uniform(grid), c.solver);
  const EquilibriumResult b = solve_congestion(*cost, mu, spec, normalize(skew, grid), c.solver);
  REQUIRE(a.converged);
  REQUIRE(b.converged);
  CHECK(wasserstein1_1d(a.nu, b.nu) <= 10.0 * c.solver.tol_l1);
}

TEST_CASE("command line exit codes") {
  const fs::path dir = scratch("cli");
  write_text(dir / "ok.json", small_fig1(dir / "ok").dump());
  CHECK(cli("run --config " + (dir / "ok.json").string()) == 0);
  CHECK(fs::exists(dir / "ok" / "manifest.json"));

  json stalled = small_fig1(dir / "stalled");
  stalled["solver"] = {{"max_iters", 1}};
  write_text(dir / "stalled.json", stalled.dump());
  CHECK(cli("solve-congestion --config " + (dir / "stalled.json").string()) == 2);

  write_text(dir / "broken.json", "{ \"preset\": ");
  CHECK(cli("run --config " + (dir / "broken.json").string()) == 1);
  CHECK(cli("run --preset nope") == 1);
  CHECK(cli("run") == 1);
  CHECK(cli("frobnicate") == 1);

  json nested = small_fig1(dir / "nested");
  write_text(dir / "nested.json", nested.dump());
  CHECK(cli("check-nestedness --config " + (dir / "nested.json").string()) == 0);

  write_text(dir / "cost.csv", "0,1\n1,0\n");
  write_text(dir / "w.csv", "0.5\n0.5\n");
  CHECK(cli("oracle-ot --cost " + (dir / "cost.csv").string() + " --mu " + (dir / "w.csv").string() + " --nu " +
            (dir / "w.csv").string() + " --output " + (dir / "gamma.csv").string()) == 0);
  CHECK(slurp(dir / "gamma.csv").find("0,0,0.5") != std::string::npos);

  io::write_density_csv(dir / "a.csv", GridMeasure1D::uniform(Grid1D(0.0, 1.0, 10)));
  io::write_density_csv(dir / "b.csv", GridMeasure1D::uniform(Grid1D(0.0, 1.0, 12)));
  CHECK(cli("compare " + (dir / "a.csv").string() + " " + (dir / "a.csv").string() + " --output " +
            (dir / "cmp.csv").string()) == 0);
  CHECK(slurp(dir / "cmp.csv").rfind("metric,value\n", 0) == 0);
  CHECK(cli("compare " + (dir / "a.csv").string() + " " + (dir / "b.csv").string()) == 1);
}
