// Command-line front end: experiment presets, solvers, oracle and comparison.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "cournot/experiment.hpp"
#include "cournot/io.hpp"
#include "cournot/lp_oracle.hpp"

namespace {

using cournot::app::ConfigError;
using cournot::app::Method;
using nlohmann::json;

constexpr int kInputError = 1;

struct Source {
  std::string config_path;
  std::string preset;
  std::string output_dir;

  cournot::app::ExperimentConfig load() const {
    cournot::app::ExperimentConfig config = preset.empty() ? cournot::app::load_config(config_path)
                                                           : cournot::app::parse_config(json{{"preset", preset}});
    if (!output_dir.empty()) config.output_dir = output_dir;
    return config;
  }
};

void add_source(CLI::App* cmd, Source& source) {
  auto* config = cmd->add_option("--config", source.config_path, "JSON config file");
  auto* preset = cmd->add_option("--preset", source.preset, "Preset name instead of a config file");
  config->excludes(preset);
  cmd->add_option("--output-dir", source.output_dir, "Override the output directory");
  cmd->callback([cmd, &source] {
    if (source.config_path.empty() && source.preset.empty())
      throw CLI::RequiredError(cmd->get_name() + ": --config or --preset");
  });
}

int run_config(const Source& source, std::optional<Method> method, const std::string& export_coupling) {
  const cournot::app::ExperimentConfig config = source.load();
  cournot::app::RunOptions options;
  options.method = method;
  if (!export_coupling.empty()) options.export_coupling = export_coupling;
  const auto outcome = cournot::app::run(config, options, std::cout);
  std::cout << "outputs: " << config.output_dir << '\n';
  return outcome.exit_code();
}

int oracle(const std::string& cost_path, const std::string& mu_path, const std::string& nu_path,
           const std::string& output) {
  const cournot::Matrix cost = cournot::io::read_matrix_csv(cost_path);
  const cournot::Vector mu = cournot::io::read_vector_csv(mu_path);
  const cournot::Vector nu = cournot::io::read_vector_csv(nu_path);
  const auto result = cournot::solve_exact_ot(cost, mu, nu);
  const auto certificate = cournot::verify_certificate(cost, mu, nu, result);
  if (!output.empty()) cournot::io::write_coupling_csv(output, result.coupling);
  const json report = {{"cost", result.cost},
                       {"pivots", result.pivots},
                       {"certificate_ok", certificate.ok()},
                       {"max_dual_violation", certificate.max_dual_violation},
                       {"max_slackness", certificate.max_slackness},
                       {"duality_gap", certificate.duality_gap}};
  std::cout << report.dump(2) << '\n';
  return 0;
}

int compare(const std::string& a_path, const std::string& b_path, const std::string& output) {
  const auto a = cournot::io::read_density_csv(a_path);
  const auto b = cournot::io::read_density_csv(b_path);
  const auto report = cournot::app::compare(a, b);
  if (!output.empty()) cournot::io::write_metrics_csv(output, report.rows());
  std::cout << "metric,value\n";
  for (const auto& [name, value] : report.rows()) std::cout << name << ',' << value << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cournot-Nash equilibria via multi-to-one optimal transport"};
  app.require_subcommand(1);

  Source source;
  std::string export_coupling;

  auto* run = app.add_subcommand("run", "Run the solver(s) a config or preset asks for");
  add_source(run, source);

  auto* congestion = app.add_subcommand("solve-congestion", "Congestion fixed-point solver");
  add_source(congestion, source);

  auto* bestreply = app.add_subcommand("solve-bestreply", "Best-reply iteration");
  add_source(bestreply, source);

  auto* sinkhorn = app.add_subcommand("solve-sinkhorn", "Generalized Sinkhorn solver");
  add_source(sinkhorn, source);
  sinkhorn->add_option("--export-coupling", export_coupling, "Write the M x N coupling as CSV (M*N <= 1e6)");

  auto* nested = app.add_subcommand("check-nestedness", "Solve, then report nestedness as JSON");
  add_source(nested, source);

  std::string cost_path;
  std::string mu_path;
  std::string nu_path;
  std::string output;
  auto* oracle_cmd = app.add_subcommand("oracle-ot", "Exact discrete OT with dual certificate");
  oracle_cmd->add_option("--cost", cost_path, "Cost matrix CSV")->required();
  oracle_cmd->add_option("--mu", mu_path, "Row weights CSV")->required();
  oracle_cmd->add_option("--nu", nu_path, "Column weights CSV")->required();
  oracle_cmd->add_option("--output", output, "Coupling CSV (i,j,gamma)");

  std::string a_path;
  std::string b_path;
  auto* compare_cmd = app.add_subcommand("compare", "Compare two density CSVs");
  compare_cmd->add_option("a", a_path, "First density CSV")->required();
  compare_cmd->add_option("b", b_path, "Second density CSV")->required();
  compare_cmd->add_option("--output", output, "Metrics CSV (metric,value)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kInputError;
  }

  try {
    if (*run) return run_config(source, std::nullopt, "");
    if (*congestion) return run_config(source, Method::Congestion, "");
    if (*bestreply) return run_config(source, Method::BestReply, "");
    if (*sinkhorn) return run_config(source, Method::Sinkhorn, export_coupling);
    if (*nested) {
      std::cout << cournot::app::nestedness_report(source.load()).dump(2) << '\n';
      return 0;
    }
    if (*oracle_cmd) return oracle(cost_path, mu_path, nu_path, output);
    if (*compare_cmd) return compare(a_path, b_path, output);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  }
  return kInputError;
}
