#include <cstdint>
#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "lexigp/experiment.hpp"

namespace {

int run_command(const CLI::App& cmd, const std::string& spec_path,
                std::uint64_t seed, int jobs, const std::string& out_dir,
                const lexigp::ProblemSpec& override_problem) {
  lexigp::ExperimentSpec spec = lexigp::load_spec(spec_path);
  if (cmd.count("--seed") > 0) spec.base_seed = seed;
  if (cmd.count("--jobs") > 0) spec.jobs = jobs;
  if (cmd.count("--out") > 0) spec.output_dir = out_dir;
  if (cmd.count("--data") > 0) spec.problems = {override_problem};
  spec.validate();

  const lexigp::ExperimentOutcome outcome = lexigp::run_experiment(spec);
  std::cout << "completed " << outcome.completed << " run(s) under "
            << spec.output_dir << "\n";
  for (const auto& failure : outcome.failures)
    std::cerr << "failed: " << failure.problem << "/" << failure.method
              << " run " << failure.run_index << ": " << failure.message
              << "\n";
  return outcome.ok() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Genetic programming over lexicase selection variants"};
  app.require_subcommand(1);

  std::string spec_path;
  std::uint64_t seed = 0;
  int jobs = 1;
  std::string out_dir;
  std::string data_csv;
  std::string delimiter = ",";
  lexigp::ProblemSpec override_problem;

  CLI::App* run_cmd =
      app.add_subcommand("run", "Execute every run of an experiment config");
  run_cmd->add_option("spec", spec_path, "experiment config JSON file")
      ->required()
      ->check(CLI::ExistingFile);
  run_cmd->add_option("--seed", seed, "override the base seed");
  run_cmd->add_option("--jobs", jobs, "worker threads (whole runs in parallel)")
      ->check(CLI::PositiveNumber);
  run_cmd->add_option("--out", out_dir, "override the output directory");
  run_cmd->add_option("--data", data_csv,
                      "run on this single CSV instead of the config problems");
  run_cmd->add_option("--target-col", override_problem.csv.target_column,
                      "target column of --data, -1 means last");
  run_cmd->add_flag("--has-header", override_problem.csv.has_header,
                    "--data starts with a header row");
  run_cmd->add_option("--delimiter", delimiter, "--data field delimiter");

  std::string report_dir;
  CLI::App* report_cmd = app.add_subcommand(
      "report", "Rebuild the report files for an existing output directory");
  report_cmd->add_option("dir", report_dir, "experiment output directory")
      ->required()
      ->check(CLI::ExistingDirectory);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) {
      if (delimiter.size() != 1) {
        std::cerr << "error: --delimiter must be a single character\n";
        return 2;
      }
      override_problem.csv_path = data_csv;
      override_problem.csv.delimiter = delimiter[0];
      return run_command(*run_cmd, spec_path, seed, jobs, out_dir,
                         override_problem);
    }
    lexigp::write_report(report_dir);
    std::cout << "report written under " << report_dir << "/report\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
