#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lexigp/dataset.hpp"
#include "lexigp/engine.hpp"

namespace lexigp {

struct ProblemSpec {
  std::string name;  // empty picks the csv file stem
  std::string csv_path;
  CsvOptions csv;
};

// The full battery description: every (problem, method, run_index) cell of
// the cross product executes exactly once.
struct ExperimentSpec {
  std::vector<ProblemSpec> problems;
  std::vector<SelectionConfig> methods;
  int runs = 30;
  std::uint64_t base_seed = 0;
  int population_size = 500;
  int base_generations = 50;
  double crossover_prob = 0.8;
  double mutation_prob = 0.05;
  std::string output_dir = "out";
  int jobs = 1;
  std::string manifest_path;  // optional dataset shape check

  void validate() const;
};

// Reads the declarative JSON config. Unknown keys fail loudly. An optional
// "grid" block expands into static epsilon x level cells plus one dynamic
// cell per level, appended after the explicit "methods" ids.
ExperimentSpec load_spec(const std::string& path);

// Fixed FNV-1a combination of the experiment seed with the run coordinates.
// The method id embeds every method parameter, so distinct cells get
// distinct streams and the mapping is stable across platforms.
std::uint64_t derive_seed(std::uint64_t base_seed, std::string_view problem,
                          std::string_view method_id, int run_index);

// Serialized per-run artifacts. Both are pure functions of the result: no
// timestamps, no environment, so reruns reproduce them byte for byte.
std::string result_json(const ExperimentResult& result, int run_index);
std::string trace_csv(std::span<const GenerationTrace> traces);

struct RunFailure {
  std::string problem;
  std::string method;
  int run_index = 0;
  std::string message;
};

struct ExperimentOutcome {
  int completed = 0;
  std::vector<RunFailure> failures;

  bool ok() const { return failures.empty(); }
};

// Executes the battery with spec.jobs worker threads (parallel over whole
// runs only), writing results/<problem>/<method>/run_NNN.json and
// traces/<problem>/<method>/run_NNN.csv under spec.output_dir, then the
// report files. A failed run leaves run_NNN.error.txt in place of its JSON
// and is skipped by the report.
ExperimentOutcome run_experiment(const ExperimentSpec& spec);

// Rebuilds report/median_table.{csv,txt}, report/boxplot_data.csv and
// report/curves/*.csv from the result files present under experiment_dir.
// Throws if there are none.
void write_report(const std::string& experiment_dir);

}  // namespace lexigp
