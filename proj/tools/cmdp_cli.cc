#include <exception>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "cmdp/cmdp.hpp"

namespace {

int run_command(const std::string& config_path) {
  cmdp::ExperimentConfig config = cmdp::load_experiment_config(config_path);
  cmdp::ExperimentResult result = cmdp::run_experiment(config);
  std::cout << cmdp::summary_to_json(result.summary).dump(2) << std::endl;
  return 0;
}

int check_command() {
  return cmdp::selfcheck::run_all(std::cout) ? 0 : 1;
}

int sweep_command(const std::string& config_path, const std::string& param,
                  const std::vector<double>& values) {
  if (param != "gamma")
    throw std::invalid_argument("sweep: unsupported parameter '" + param +
                                "' (only gamma)");
  if (values.empty()) throw std::invalid_argument("sweep: no values given");
  cmdp::ExperimentConfig config = cmdp::load_experiment_config(config_path);
  nlohmann::json rows = nlohmann::json::array();
  for (double value : values) {
    cmdp::ExperimentConfig variant = config;
    variant.agent.gamma_override = value;
    variant.output_dir.clear();
    cmdp::ExperimentResult result = cmdp::run_experiment(variant, false);
    nlohmann::json row = cmdp::summary_to_json(result.summary);
    row["gamma_override"] = value;
    rows.push_back(row);
  }
  std::cout << rows.dump(2) << std::endl;
  if (!config.output_dir.empty()) {
    std::filesystem::create_directories(config.output_dir);
    std::ofstream out(config.output_dir + "/sweep.json");
    if (!out)
      throw std::runtime_error("cannot open for writing: " +
                               config.output_dir + "/sweep.json");
    out << rows.dump(2) << '\n';
  }
  return 0;
}

int solve_command(const std::string& problem_path) {
  double epsilon = 1e-6;
  cmdp::SolverProblem problem =
      cmdp::load_solver_problem(problem_path, &epsilon);
  cmdp::SolverResult result = cmdp::solve(problem, epsilon);
  nlohmann::json j{
      {"objective_value", result.objective_value},
      {"fw_gap", result.fw_gap},
      {"iterations", result.iterations},
      {"converged", result.converged},
      {"epsilon", result.epsilon_requested},
      {"q_hat", result.q_hat.values},
  };
  std::cout << j.dump(2) << std::endl;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Regret laboratory for adversarial contextual MDPs"};
  app.require_subcommand(1);

  std::string config_path;
  std::string problem_path;
  std::string param = "gamma";
  std::vector<double> values;

  CLI::App* run_cmd =
      app.add_subcommand("run", "Execute an experiment from a JSON config");
  run_cmd->add_option("config", config_path, "config file path")->required();

  app.add_subcommand("check",
                     "Run the randomized invariant and property suite");

  CLI::App* sweep_cmd = app.add_subcommand(
      "sweep", "Rerun a config over a grid of parameter overrides");
  sweep_cmd->add_option("config", config_path, "config file path")->required();
  sweep_cmd->add_option("--param", param, "parameter to sweep (gamma)");
  sweep_cmd->add_option("--values", values, "override values")
      ->required()
      ->delimiter(',');

  CLI::App* solve_cmd = app.add_subcommand(
      "solve", "Solve one planning problem from a JSON problem file");
  solve_cmd->add_option("problem", problem_path, "problem file path")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (run_cmd->parsed()) return run_command(config_path);
    if (app.got_subcommand("check")) return check_command();
    if (sweep_cmd->parsed()) return sweep_command(config_path, param, values);
    if (solve_cmd->parsed()) return solve_command(problem_path);
  } catch (const cmdp::InvariantViolation& e) {
    std::cerr << "invariant violation: " << e.what() << std::endl;
    return 1;
  } catch (const cmdp::RealizabilityError& e) {
    std::cerr << "realizability violation: " << e.what() << std::endl;
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  }
  return 2;
}
