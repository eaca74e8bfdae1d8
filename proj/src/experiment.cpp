#include "cournot/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>

#include "cournot/best_reply.hpp"
#include "cournot/cost_model.hpp"
#include "cournot/errors.hpp"
#include "cournot/io.hpp"
#include "cournot/monge_ampere.hpp"
#include "cournot/nestedness.hpp"
#include "cournot/sinkhorn.hpp"

namespace cournot::app {

using nlohmann::json;

namespace {

constexpr double kPi = std::numbers::pi;

Method parse_method(const std::string& name) {
  if (name == "congestion") return Method::Congestion;
  if (name == "bestreply") return Method::BestReply;
  if (name == "sinkhorn") return Method::Sinkhorn;
  if (name == "bestreply+sinkhorn") return Method::BestReplyAndSinkhorn;
  throw ConfigError("method: unknown value '" + name + "'");
}

const char* scheme_name(SamplingScheme scheme) {
  return scheme == SamplingScheme::Stratified ? "stratified" : "tensor_polar";
}

// Field access with a dotted path in every diagnostic.
class Fields {
 public:
  Fields(const json& object, std::string path, std::set<std::string> known) : object_(object), path_(std::move(path)) {
    if (!object_.is_object()) throw ConfigError(where("") + "must be an object");
    for (const auto& item : object_.items())
      if (!known.count(item.key())) throw ConfigError(where(item.key()) + "unknown field");
  }

  bool has(const std::string& key) const { return object_.contains(key); }

  void read(const std::string& key, double& out) const {
    if (!has(key)) return;
    const json& value = object_.at(key);
    if (!value.is_number()) throw ConfigError(where(key) + "expected a number");
    out = value.get<double>();
    if (!std::isfinite(out)) throw ConfigError(where(key) + "must be finite");
  }

  template <typename Int>
  void read_integer(const std::string& key, Int& out) const {
    if (!has(key)) return;
    const json& value = object_.at(key);
    if (!value.is_number_integer()) throw ConfigError(where(key) + "expected an integer");
    out = value.get<Int>();
  }

  void read(const std::string& key, std::string& out) const {
    if (!has(key)) return;
    const json& value = object_.at(key);
    if (!value.is_string()) throw ConfigError(where(key) + "expected a string");
    out = value.get<std::string>();
  }

  Fields child(const std::string& key, std::set<std::string> known) const {
    return Fields(object_.at(key), where_path(key), std::move(known));
  }

 private:
  std::string where_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  std::string where(const std::string& key) const {
    const std::string p = where_path(key);
    return (p.empty() ? std::string("config") : p) + ": ";
  }

  const json& object_;
  std::string path_;
};

std::string hex(std::uint64_t value) {
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << value;
  return out.str();
}

std::size_t line_of(const std::string& text, std::size_t byte) {
  const auto end = text.begin() + static_cast<std::ptrdiff_t>(std::min(byte, text.size()));
  return 1 + static_cast<std::size_t>(std::count(text.begin(), end, '\n'));
}

struct Problem {
  std::unique_ptr<CostModel> cost;
  PointCloudMeasure mu;
  Grid1D grid;
};

Problem build_problem(const ExperimentConfig& config) {
  return {make_cost(config.cost, config.p), config.sampler.sample(), config.grid()};
}

GridMeasure1D initial_density(const ExperimentConfig& config, const Grid1D& grid) {
  if (config.nu0.kind == "uniform_on") return GridMeasure1D::uniform_on(grid, config.nu0.a, config.nu0.b);
  return GridMeasure1D::uniform(grid);
}

Potential potential_of(const ExperimentConfig& config) {
  return Potential::quadratic(config.potential_strength, config.potential_center).shifted(config.potential_shift);
}

CongestionSpec congestion_spec(const ExperimentConfig& config) {
  CongestionSpec spec;
  spec.fprime_shift = config.fprime_shift;
  spec.potential = potential_of(config);
  return spec;
}

InteractionSpec interaction_spec(const ExperimentConfig& config) {
  InteractionSpec spec;
  spec.potential = potential_of(config);
  spec.interaction =
      config.interaction_strength != 0.0 ? Interaction::quadratic(config.interaction_strength) : Interaction::none();
  return spec;
}

struct SolveOutput {
  EquilibriumResult result;
  std::optional<Matrix> coupling;
  std::vector<double> dual_objective;
};

SolveOutput solve(const ExperimentConfig& config, Method method, const Problem& problem, bool keep_coupling) {
  const GridMeasure1D nu0 = initial_density(config, problem.grid);
  switch (method) {
    case Method::Congestion:
      return {solve_congestion(*problem.cost, problem.mu, congestion_spec(config), nu0, config.solver), {}, {}};
    case Method::BestReply:
    case Method::BestReplyAndSinkhorn:
      return {solve_bestreply(*problem.cost, problem.mu, interaction_spec(config), nu0, config.solver), {}, {}};
    case Method::Sinkhorn: {
      SinkhornFunctional functional = interaction_spec(config);
      if (config.sinkhorn_functional == "congestion") functional = congestion_spec(config);
      SinkhornResult r =
          solve_sinkhorn(*problem.cost, problem.mu, functional, problem.grid, config.epsilon, config.solver, nu0,
                         keep_coupling);
      return {std::move(r.equilibrium), std::move(r.coupling), std::move(r.dual_objective_history)};
    }
  }
  throw ConfigError("method: unsupported");
}

json nestedness_summary(const NestednessReport& report) {
  return {{"is_nested", report.is_nested},
          {"violations", report.total_violations},
          {"tangencies", report.total_tangencies},
          {"stride", report.stride}};
}

json write_outputs(const ExperimentConfig& config, Method method, const Problem& problem, const SolveOutput& out,
                   const std::filesystem::path& dir) {
  const EquilibriumResult& r = out.result;
  io::write_density_csv(dir / "density.csv", r.nu);
  io::write_profile_csv(dir / "profile.csv", r.profile);
  io::write_assignment_csv(dir / "assignment.csv", problem.mu,
                           method == Method::Congestion ? r.map : assign_map(*problem.cost, problem.mu, r.profile));
  io::write_convergence_csv(dir / "convergence.csv", r);
  if (method == Method::BestReply || method == Method::BestReplyAndSinkhorn)
    io::write_replies_csv(dir / "replies.csv", problem.mu, r.map, problem.grid);

  std::vector<io::LevelCurveRecord> curves;
  const Index n = problem.grid.n_cells;
  const int count = static_cast<int>(std::min<Index>(config.curve_count, n));
  for (int c = 0; c < count; ++c) {
    const Index j = count == 1 ? n / 2 : (static_cast<Index>(c) * (n - 1)) / (count - 1);
    const double y = problem.grid.midpoint(j);
    curves.push_back({y, r.profile.k(j), level_curve(*problem.cost, y, r.profile.k(j), config.curve_resolution)});
  }
  io::write_level_curves_csv(dir / "level_curves.csv", curves);

  const NestednessReport nested = check_nestedness(*problem.cost, problem.mu, r.profile, config.stride);
  json manifest = {{"method", method_name(method)},
                   {"iterations", r.iterations},
                   {"converged", r.converged},
                   {"final_l1_delta", r.history.empty() ? 0.0 : r.history.back()},
                   {"residual", r.residual},
                   {"support_size", support_size(r.nu)},
                   {"nestedness", nestedness_summary(nested)}};
  if (method == Method::Congestion)
    manifest["optimality_residual"] = optimality_residual(r.profile, r.nu, congestion_spec(config));
  if (method == Method::BestReply || method == Method::BestReplyAndSinkhorn) {
    manifest["boundary_clamped"] = r.boundary_clamped;
    manifest["convexity_fallbacks"] = r.convexity_fallbacks;
  }
  if (!out.dual_objective.empty()) manifest["final_dual_objective"] = out.dual_objective.back();
  return manifest;
}

void write_manifest(const std::filesystem::path& dir, const json& manifest) {
  std::filesystem::create_directories(dir);
  std::ofstream file(dir / "manifest.json");
  if (!file) throw io::InputError("cannot write " + (dir / "manifest.json").string());
  file << manifest.dump(2) << '\n';
}

}  // namespace

const char* method_name(Method method) {
  switch (method) {
    case Method::Congestion: return "congestion";
    case Method::BestReply: return "bestreply";
    case Method::Sinkhorn: return "sinkhorn";
    case Method::BestReplyAndSinkhorn: return "bestreply+sinkhorn";
  }
  return "unknown";
}

json ExperimentConfig::to_json() const {
  json j = {{"preset", preset},
            {"method", method_name(method)},
            {"cost", cost},
            {"grid", {{"y_min", y_min}, {"y_max", y_max}, {"n_cells", n_cells}}},
            {"mu", {{"n_points", sampler.n_points}, {"scheme", scheme_name(sampler.scheme)}, {"seed", sampler.seed}}},
            {"potential", {{"strength", potential_strength}, {"center", potential_center}, {"shift", potential_shift}}},
            {"interaction", {{"strength", interaction_strength}}},
            {"congestion", {{"fprime_shift", fprime_shift}}},
            {"solver",
             {{"max_iters", solver.max_iters},
              {"tol_l1", solver.tol_l1},
              {"k_tol", solver.k_tol},
              {"damping", solver.damping}}},
            {"epsilon", epsilon},
            {"sinkhorn_functional", sinkhorn_functional},
            {"nu0", {{"kind", nu0.kind}, {"a", nu0.a}, {"b", nu0.b}}},
            {"output_dir", output_dir},
            {"curve_resolution", curve_resolution},
            {"curve_count", curve_count},
            {"stride", stride}};
  if (p) j["p"] = *p;
  return j;
}

std::vector<std::string> preset_names() {
  return {"fig1", "fig2_p4", "fig2_p8", "fig3", "fig4_p4", "fig4_p8", "fig5"};
}

ExperimentConfig preset(const std::string& name) {
  ExperimentConfig c;
  c.preset = name;
  c.output_dir = "out/" + name;
  if (name == "fig1" || name == "fig2_p4" || name == "fig2_p8") {
    c.method = Method::Congestion;
    c.y_min = 0.0;
    c.y_max = kPi / 6.0;
    c.potential_strength = 10.0;
    c.potential_center = 0.1;
    if (name != "fig1") {
      c.cost = "arc_power";
      c.p = name == "fig2_p4" ? 4.0 : 8.0;
    }
    // The undamped p = 8 iteration settles into a period-two oscillation.
    if (name == "fig2_p8") c.solver.damping = 0.5;
    return c;
  }
  if (name == "fig3" || name == "fig4_p4" || name == "fig4_p8" || name == "fig5") {
    c.method = name == "fig5" ? Method::BestReplyAndSinkhorn : Method::BestReply;
    c.y_min = 0.0;
    c.y_max = kPi / 2.0;
    c.potential_strength = 1.0;
    c.potential_center = kPi / 12.0;
    c.interaction_strength = 1.0;
    c.nu0 = {"uniform_on", 0.0, kPi / 6.0};
    if (name == "fig4_p4" || name == "fig4_p8") {
      c.cost = "arc_power";
      c.p = name == "fig4_p4" ? 4.0 : 8.0;
    }
    return c;
  }
  throw ConfigError("preset: unknown preset '" + name + "'");
}

ExperimentConfig parse_config(const json& j) {
  const Fields top(j, "",
                   {"preset", "method", "cost", "p", "grid", "mu", "potential", "interaction", "congestion", "solver",
                    "epsilon", "sinkhorn_functional", "nu0", "output_dir", "curve_resolution", "curve_count", "stride"});
  ExperimentConfig c;
  if (top.has("preset")) {
    std::string name;
    top.read("preset", name);
    c = preset(name);
  }
  if (top.has("method")) {
    std::string method;
    top.read("method", method);
    c.method = parse_method(method);
  }
  top.read("cost", c.cost);
  if (top.has("p")) {
    double p = 0.0;
    top.read("p", p);
    c.p = p;
  }
  if (top.has("grid")) {
    const Fields grid = top.child("grid", {"y_min", "y_max", "n_cells"});
    grid.read("y_min", c.y_min);
    grid.read("y_max", c.y_max);
    grid.read_integer("n_cells", c.n_cells);
  }
  if (top.has("mu")) {
    const Fields mu = top.child("mu", {"n_points", "scheme", "seed"});
    mu.read_integer("n_points", c.sampler.n_points);
    mu.read_integer("seed", c.sampler.seed);
    if (mu.has("scheme")) {
      std::string scheme;
      mu.read("scheme", scheme);
      if (scheme == "tensor_polar") c.sampler.scheme = SamplingScheme::TensorPolarQuadrature;
      else if (scheme == "stratified") c.sampler.scheme = SamplingScheme::Stratified;
      else throw ConfigError("mu.scheme: expected 'tensor_polar' or 'stratified'");
    }
  }
  if (top.has("potential")) {
    const Fields potential = top.child("potential", {"strength", "center", "shift"});
    potential.read("strength", c.potential_strength);
    potential.read("center", c.potential_center);
    potential.read("shift", c.potential_shift);
  }
  if (top.has("interaction")) top.child("interaction", {"strength"}).read("strength", c.interaction_strength);
  if (top.has("congestion")) top.child("congestion", {"fprime_shift"}).read("fprime_shift", c.fprime_shift);
  if (top.has("solver")) {
    const Fields solver = top.child("solver", {"max_iters", "tol_l1", "k_tol", "damping"});
    solver.read_integer("max_iters", c.solver.max_iters);
    solver.read("tol_l1", c.solver.tol_l1);
    solver.read("k_tol", c.solver.k_tol);
    solver.read("damping", c.solver.damping);
  }
  top.read("epsilon", c.epsilon);
  top.read("sinkhorn_functional", c.sinkhorn_functional);
  if (top.has("nu0")) {
    const Fields nu0 = top.child("nu0", {"kind", "a", "b"});
    nu0.read("kind", c.nu0.kind);
    nu0.read("a", c.nu0.a);
    nu0.read("b", c.nu0.b);
  }
  top.read("output_dir", c.output_dir);
  top.read_integer("curve_resolution", c.curve_resolution);
  top.read_integer("curve_count", c.curve_count);
  top.read_integer("stride", c.stride);

  try {
    make_cost(c.cost, c.p);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("cost: ") + e.what());
  }
  try {
    c.solver.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("solver: ") + e.what());
  }
  try {
    const Grid1D grid = c.grid();
    (void)grid;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("grid: ") + e.what());
  }
  if (c.nu0.kind != "uniform" && c.nu0.kind != "uniform_on")
    throw ConfigError("nu0.kind: expected 'uniform' or 'uniform_on'");
  if (c.sinkhorn_functional != "interaction" && c.sinkhorn_functional != "congestion")
    throw ConfigError("sinkhorn_functional: expected 'interaction' or 'congestion'");
  if (c.sampler.n_points < 1) throw ConfigError("mu.n_points: must be >= 1");
  if (!(c.epsilon > 0.0)) throw ConfigError("epsilon: must be > 0");
  if (c.curve_resolution < 2) throw ConfigError("curve_resolution: must be >= 2");
  if (c.curve_count < 0) throw ConfigError("curve_count: must be >= 0");
  if (c.stride < 1) throw ConfigError("stride: must be >= 1");
  if (c.output_dir.empty()) throw ConfigError("output_dir: must not be empty");
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot read config");
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ":" + std::to_string(line_of(text, e.byte)) + ": malformed JSON");
  }
  try {
    return parse_config(j);
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::uint64_t config_hash(const ExperimentConfig& config) {
  std::uint64_t hash = 14695981039346656037ULL;
  nlohmann::json canonical = config.to_json();
  canonical.erase("output_dir");
  for (const unsigned char ch : canonical.dump()) {
    hash ^= ch;
    hash *= 1099511628211ULL;
  }
  return hash;
}

std::vector<std::pair<std::string, double>> ComparisonReport::rows() const {
  return {{"w1", w1},
          {"l1", l1},
          {"argmax_offset", static_cast<double>(argmax_offset)},
          {"support_difference", static_cast<double>(support_difference)}};
}

ComparisonReport compare(const GridMeasure1D& a, const GridMeasure1D& b) {
  if (!(a.grid() == b.grid())) throw ShapeError("compare: grids differ");
  ComparisonReport report;
  report.w1 = wasserstein1_1d(a, b);
  report.l1 = l1_distance(a, b);
  Index argmax_a = 0;
  Index argmax_b = 0;
  a.density().maxCoeff(&argmax_a);
  b.density().maxCoeff(&argmax_b);
  report.argmax_offset = argmax_b - argmax_a;
  report.support_difference = support_size(a) - support_size(b);
  return report;
}

RunOutcome run(const ExperimentConfig& config, const RunOptions& options, std::ostream& log) {
  const Method method = options.method.value_or(config.method);
  const Problem problem = build_problem(config);
  const std::filesystem::path dir(config.output_dir);
  std::filesystem::create_directories(dir);

  json manifest = {{"preset", config.preset},
                   {"config_hash", hex(config_hash(config))},
                   {"config", config.to_json()}};
  RunOutcome outcome;

  auto run_one = [&](Method m, const std::filesystem::path& out_dir) {
    const bool keep = options.export_coupling.has_value() && m == Method::Sinkhorn;
    SolveOutput out = solve(config, m, problem, keep);
    if (keep) io::write_coupling_csv(*options.export_coupling, *out.coupling);
    json summary = write_outputs(config, m, problem, out, out_dir);
    log << method_name(m) << ": iterations=" << out.result.iterations
        << " converged=" << (out.result.converged ? "true" : "false") << " residual=" << out.result.residual
        << " support=" << support_size(out.result.nu) << '\n';
    outcome.densities.push_back(out.result.nu);
    return std::pair{out.result.converged, summary};
  };

  if (method == Method::BestReplyAndSinkhorn) {
    auto [br_ok, br] = run_one(Method::BestReply, dir / "bestreply");
    auto [sk_ok, sk] = run_one(Method::Sinkhorn, dir / "sinkhorn");
    const ComparisonReport report = compare(outcome.densities[0], outcome.densities[1]);
    io::write_metrics_csv(dir / "comparison.csv", report.rows());
    log << "compare: w1=" << report.w1 << " l1=" << report.l1 << " argmax_offset=" << report.argmax_offset
        << " support_difference=" << report.support_difference << '\n';
    manifest["method"] = method_name(method);
    manifest["runs"] = {{"bestreply", br}, {"sinkhorn", sk}};
    manifest["comparison"] = {{"w1", report.w1},
                              {"l1", report.l1},
                              {"argmax_offset", report.argmax_offset},
                              {"support_difference", report.support_difference},
                              {"two_dy", 2.0 * problem.grid.dy()}};
    manifest["converged"] = br_ok && sk_ok;
    outcome.converged = br_ok && sk_ok;
  } else {
    auto [ok, summary] = run_one(method, dir);
    manifest.update(summary);
    outcome.converged = ok;
  }
  write_manifest(dir, manifest);
  outcome.manifest = std::move(manifest);
  return outcome;
}

json nestedness_report(const ExperimentConfig& config) {
  const Method method = config.method == Method::BestReplyAndSinkhorn ? Method::BestReply : config.method;
  const Problem problem = build_problem(config);
  const SolveOutput out = solve(config, method, problem, false);
  const EquilibriumResult& r = out.result;
  const NestednessReport nested = check_nestedness(*problem.cost, problem.mu, r.profile, config.stride);
  const SufficientNestednessReport sufficient =
      sufficient_nestedness(*problem.cost, problem.mu, r.nu, r.profile, config.stride);
  json margin = nullptr;
  if (std::isfinite(sufficient.worst_margin)) margin = sufficient.worst_margin;
  return {{"is_nested", nested.is_nested},
          {"violations", nested.total_violations},
          {"worst_margin", margin},
          {"grid", {{"y_min", problem.grid.y_min}, {"y_max", problem.grid.y_max}, {"n_cells", problem.grid.n_cells}}},
          {"stride", config.stride}};
}

}  // namespace cournot::app
