#include "lexigp/experiment.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <stdexcept>
#include <system_error>
#include <thread>
#include <utility>

#include "json.hpp"
#include "lexigp/stats.hpp"

namespace lexigp {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

[[noreturn]] void fail_spec(const std::string& message) {
  throw std::runtime_error("experiment config: " + message);
}

void require_keys(const json& object, std::initializer_list<const char*> allowed,
                  const char* where) {
  for (auto it = object.begin(); it != object.end(); ++it) {
    const bool known = std::any_of(allowed.begin(), allowed.end(),
                                   [&](const char* k) { return it.key() == k; });
    if (!known) fail_spec("unknown key \"" + it.key() + "\" in " + where);
  }
}

template <typename T>
void read_key(const json& object, const char* key, T& out) {
  if (!object.contains(key)) return;
  try {
    out = object.at(key).get<T>();
  } catch (const std::exception& e) {
    fail_spec(std::string("key \"") + key + "\": " + e.what());
  }
}

// Shortest decimal form that parses back to the same double.
std::string shortest(double v) {
  char buffer[64];
  const auto [end, ec] = std::to_chars(buffer, buffer + sizeof buffer, v);
  (void)ec;
  return std::string(buffer, end);
}

bool safe_path_component(std::string_view name) {
  if (name.empty() || name == "." || name == "..") return false;
  return std::all_of(name.begin(), name.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
           (c >= '0' && c <= '9') || c == '_' || c == '-' || c == '.';
  });
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << content;
  out.flush();
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::string run_stem(int run_index) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "run_%03d", run_index);
  return buffer;
}

}  // namespace

void ExperimentSpec::validate() const {
  if (problems.empty()) fail_spec("at least one problem is required");
  for (const auto& problem : problems) {
    if (problem.csv_path.empty()) fail_spec("every problem needs a csv path");
    if (!problem.name.empty() && !safe_path_component(problem.name))
      fail_spec("problem name \"" + problem.name +
                "\" is not usable as a directory name");
  }
  if (methods.empty()) fail_spec("at least one method is required");
  std::vector<std::string> ids;
  for (const auto& method : methods) {
    RunConfig probe;
    probe.population_size = population_size;
    probe.base_generations = base_generations;
    probe.selection = method;
    probe.crossover_prob = crossover_prob;
    probe.mutation_prob = mutation_prob;
    probe.validate();
    ids.push_back(method.id());
  }
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end())
    fail_spec("duplicate method: " +
              *std::adjacent_find(ids.begin(), ids.end()));
  if (runs < 1) fail_spec("runs must be >= 1");
  if (jobs < 1) fail_spec("jobs must be >= 1");
  if (output_dir.empty()) fail_spec("output_dir must not be empty");
}

ExperimentSpec load_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail_spec("cannot open " + path);
  json doc;
  try {
    in >> doc;
  } catch (const std::exception& e) {
    fail_spec(path + ": " + e.what());
  }
  if (!doc.is_object()) fail_spec("top level must be an object");
  require_keys(doc,
               {"problems", "methods", "grid", "runs", "base_seed",
                "population_size", "base_generations", "crossover_prob",
                "mutation_prob", "output_dir", "jobs", "manifest"},
               "the top level");

  ExperimentSpec spec;
  read_key(doc, "runs", spec.runs);
  read_key(doc, "base_seed", spec.base_seed);
  read_key(doc, "population_size", spec.population_size);
  read_key(doc, "base_generations", spec.base_generations);
  read_key(doc, "crossover_prob", spec.crossover_prob);
  read_key(doc, "mutation_prob", spec.mutation_prob);
  read_key(doc, "output_dir", spec.output_dir);
  read_key(doc, "jobs", spec.jobs);
  read_key(doc, "manifest", spec.manifest_path);

  if (!doc.contains("problems") || !doc.at("problems").is_array())
    fail_spec("\"problems\" must be an array");
  for (const auto& entry : doc.at("problems")) {
    if (!entry.is_object()) fail_spec("every problem must be an object");
    require_keys(entry, {"name", "csv", "target_column", "has_header", "delimiter"},
                 "a problem entry");
    ProblemSpec problem;
    read_key(entry, "name", problem.name);
    read_key(entry, "csv", problem.csv_path);
    if (problem.csv_path.empty()) fail_spec("problem entry without \"csv\"");
    read_key(entry, "target_column", problem.csv.target_column);
    read_key(entry, "has_header", problem.csv.has_header);
    std::string delimiter;
    read_key(entry, "delimiter", delimiter);
    if (!delimiter.empty()) {
      if (delimiter.size() != 1) fail_spec("\"delimiter\" must be one character");
      problem.csv.delimiter = delimiter[0];
    }
    spec.problems.push_back(std::move(problem));
  }

  if (doc.contains("methods")) {
    if (!doc.at("methods").is_array()) fail_spec("\"methods\" must be an array");
    for (const auto& entry : doc.at("methods")) {
      if (!entry.is_string()) fail_spec("method entries must be id strings");
      try {
        spec.methods.push_back(parse_selection_id(entry.get<std::string>()));
      } catch (const std::exception& e) {
        fail_spec(e.what());
      }
    }
  }

  if (doc.contains("grid")) {
    const json& grid = doc.at("grid");
    if (!grid.is_object()) fail_spec("\"grid\" must be an object");
    require_keys(grid, {"epsilons", "levels", "dynamic"}, "\"grid\"");
    std::vector<double> epsilons;
    std::vector<double> levels;
    bool dynamic = true;
    read_key(grid, "epsilons", epsilons);
    read_key(grid, "levels", levels);
    read_key(grid, "dynamic", dynamic);
    if (levels.empty()) fail_spec("\"grid\" needs a non-empty \"levels\" array");
    for (const double epsilon : epsilons) {
      for (const double level : levels) {
        SelectionConfig cell;
        cell.method = SelectionMethodKind::kDownsampledEpsilonLexicaseStatic;
        cell.epsilon = epsilon;
        cell.subsample_level = level;
        spec.methods.push_back(cell);
      }
    }
    if (dynamic) {
      for (const double level : levels) {
        SelectionConfig cell;
        cell.method = SelectionMethodKind::kDownsampledEpsilonLexicaseDynamic;
        cell.subsample_level = level;
        spec.methods.push_back(cell);
      }
    }
  }

  spec.validate();
  return spec;
}

std::uint64_t derive_seed(std::uint64_t base_seed, std::string_view problem,
                          std::string_view method_id, int run_index) {
  return Fnv1a{}
      .u64(base_seed)
      .sep()
      .str(problem)
      .sep()
      .str(method_id)
      .sep()
      .u64(static_cast<std::uint64_t>(run_index))
      .value();
}

std::string result_json(const ExperimentResult& result, int run_index) {
  const RunConfig& config = result.config;
  const long long per_generation_full =
      static_cast<long long>(config.population_size) * config.base_generations;
  ordered_json doc;
  doc["problem"] = result.dataset_name;
  doc["method"] = config.selection.id();
  doc["run_index"] = run_index;
  doc["seed"] = result.seed;
  doc["population_size"] = config.population_size;
  doc["base_generations"] = config.base_generations;
  doc["crossover_prob"] = config.crossover_prob;
  doc["mutation_prob"] = config.mutation_prob;
  doc["count_validation_in_budget"] = config.count_validation_in_budget;
  doc["behaviors_on_full_train"] = config.behaviors_on_full_train;
  doc["train_cases"] = result.ledger.budget_total / per_generation_full;
  doc["generations_executed"] = result.generations_executed;
  doc["budget_total"] = result.ledger.budget_total;
  doc["budget_spent"] = result.ledger.spent;
  doc["best_expression"] = canonical_string(result.best_individual);
  doc["validation_mse"] = result.validation_mse;
  doc["test_mse"] = result.test_mse;
  return doc.dump(2) + "\n";
}

std::string trace_csv(std::span<const GenerationTrace> traces) {
  std::string out =
      "generation,cumulative_evaluations,behavioral_diversity,"
      "hyperselections_1pct,hyperselections_5pct,hyperselections_10pct,"
      "mean_cases_used,mean_selected_rank,best_validation_mse\n";
  for (const GenerationTrace& trace : traces) {
    out += std::to_string(trace.generation);
    out += ',';
    out += std::to_string(trace.cumulative_evaluations);
    out += ',';
    out += shortest(trace.behavioral_diversity);
    out += ',';
    out += std::to_string(trace.hyperselections_1pct);
    out += ',';
    out += std::to_string(trace.hyperselections_5pct);
    out += ',';
    out += std::to_string(trace.hyperselections_10pct);
    out += ',';
    out += shortest(trace.mean_cases_used);
    out += ',';
    out += shortest(trace.mean_selected_rank);
    out += ',';
    out += shortest(trace.best_validation_mse);
    out += '\n';
  }
  return out;
}

ExperimentOutcome run_experiment(const ExperimentSpec& spec) {
  spec.validate();

  // Datasets load once and are shared read-only by every worker.
  std::vector<Dataset> datasets;
  datasets.reserve(spec.problems.size());
  for (const auto& problem : spec.problems) {
    Dataset data = load_csv(problem.csv_path, problem.csv, problem.name);
    if (!safe_path_component(data.name))
      fail_spec("dataset name \"" + data.name +
                "\" is not usable as a directory name");
    if (!spec.manifest_path.empty()) check_manifest(data, spec.manifest_path);
    datasets.push_back(std::move(data));
  }
  for (std::size_t i = 0; i + 1 < datasets.size(); ++i)
    for (std::size_t j = i + 1; j < datasets.size(); ++j)
      if (datasets[i].name == datasets[j].name)
        fail_spec("duplicate problem name " + datasets[i].name);

  std::vector<std::string> method_ids;
  method_ids.reserve(spec.methods.size());
  for (const auto& method : spec.methods) method_ids.push_back(method.id());

  const fs::path root(spec.output_dir);
  for (const auto& data : datasets) {
    for (const auto& id : method_ids) {
      fs::create_directories(root / "results" / data.name / id);
      fs::create_directories(root / "traces" / data.name / id);
    }
  }

  struct Task {
    int problem;
    int method;
    int run;
  };
  std::vector<Task> tasks;
  tasks.reserve(datasets.size() * method_ids.size() *
                static_cast<std::size_t>(spec.runs));
  for (int p = 0; p < static_cast<int>(datasets.size()); ++p)
    for (int m = 0; m < static_cast<int>(method_ids.size()); ++m)
      for (int r = 0; r < spec.runs; ++r) tasks.push_back({p, m, r});

  std::atomic<std::size_t> next{0};
  std::mutex mutex;
  ExperimentOutcome outcome;

  auto worker = [&] {
    while (true) {
      const std::size_t index = next.fetch_add(1);
      if (index >= tasks.size()) break;
      const Task task = tasks[index];
      const Dataset& data = datasets[static_cast<std::size_t>(task.problem)];
      const std::string& method_id =
          method_ids[static_cast<std::size_t>(task.method)];
      const std::string stem = run_stem(task.run);
      const fs::path result_dir = root / "results" / data.name / method_id;
      try {
        RunConfig config;
        config.population_size = spec.population_size;
        config.base_generations = spec.base_generations;
        config.selection = spec.methods[static_cast<std::size_t>(task.method)];
        config.crossover_prob = spec.crossover_prob;
        config.mutation_prob = spec.mutation_prob;
        config.seed = derive_seed(spec.base_seed, data.name, method_id, task.run);
        const ExperimentResult result = run(config, data);
        write_file(result_dir / (stem + ".json"), result_json(result, task.run));
        write_file(root / "traces" / data.name / method_id / (stem + ".csv"),
                   trace_csv(result.traces));
        const std::lock_guard<std::mutex> lock(mutex);
        ++outcome.completed;
      } catch (const std::exception& e) {
        {
          const std::lock_guard<std::mutex> lock(mutex);
          outcome.failures.push_back({data.name, method_id, task.run, e.what()});
        }
        try {
          write_file(result_dir / (stem + ".error.txt"),
                     std::string(e.what()) + "\n");
        } catch (...) {
          // The failure is already recorded; a second write error adds nothing.
        }
      }
    }
  };

  const int jobs = static_cast<int>(std::min<std::size_t>(
      static_cast<std::size_t>(spec.jobs), tasks.size()));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(jobs));
  for (int i = 0; i < jobs; ++i) pool.emplace_back(worker);
  for (auto& thread : pool) thread.join();

  std::sort(outcome.failures.begin(), outcome.failures.end(),
            [](const RunFailure& a, const RunFailure& b) {
              return std::tie(a.problem, a.method, a.run_index) <
                     std::tie(b.problem, b.method, b.run_index);
            });

  if (outcome.completed > 0) write_report(spec.output_dir);
  return outcome;
}

namespace {

// generation is dropped on read; curves are keyed by evaluations.
struct TraceRow {
  long long evaluations = 0;
  std::array<double, 7> metrics{};
};

std::vector<TraceRow> read_trace_csv(const fs::path& path) {
  std::ifstream in(path);
  std::vector<TraceRow> rows;
  if (!in) return rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (first) {
      first = false;
      continue;
    }
    if (line.empty()) continue;
    std::array<std::string_view, 9> fields;
    std::string_view rest(line);
    for (int i = 0; i < 9; ++i) {
      const std::size_t comma = rest.find(',');
      if (comma == std::string_view::npos) {
        if (i != 8) throw std::runtime_error("malformed trace row in " + path.string());
        fields[static_cast<std::size_t>(i)] = rest;
        rest = {};
      } else {
        fields[static_cast<std::size_t>(i)] = rest.substr(0, comma);
        rest.remove_prefix(comma + 1);
      }
    }
    TraceRow row;
    const std::string_view evals = fields[1];
    auto ec = std::from_chars(evals.data(), evals.data() + evals.size(),
                              row.evaluations);
    if (ec.ec != std::errc()) throw std::runtime_error("malformed trace row in " + path.string());
    for (int i = 0; i < 7; ++i) {
      const std::string_view field = fields[static_cast<std::size_t>(i + 2)];
      const auto res = std::from_chars(field.data(), field.data() + field.size(),
                                       row.metrics[static_cast<std::size_t>(i)]);
      if (res.ec != std::errc()) throw std::runtime_error("malformed trace row in " + path.string());
    }
    rows.push_back(row);
  }
  return rows;
}

struct RunRecord {
  std::string problem;
  std::string method;
  int run_index = 0;
  double test_mse = 0.0;
  long long bin_size = 0;  // population x training cases, one baseline generation
  fs::path trace_path;
};

const char* const kCurveHeader =
    "evaluations,runs,behavioral_diversity,hyperselections_1pct,"
    "hyperselections_5pct,hyperselections_10pct,mean_cases_used,"
    "mean_selected_rank,best_validation_mse\n";

}  // namespace

void write_report(const std::string& experiment_dir) {
  const fs::path root(experiment_dir);
  const fs::path results_root = root / "results";

  std::vector<fs::path> result_files;
  if (fs::exists(results_root)) {
    for (const auto& entry : fs::recursive_directory_iterator(results_root))
      if (entry.is_regular_file() && entry.path().extension() == ".json")
        result_files.push_back(entry.path());
  }
  std::sort(result_files.begin(), result_files.end());
  if (result_files.empty())
    throw std::runtime_error("no result files under " + results_root.string());

  std::vector<RunRecord> records;
  records.reserve(result_files.size());
  for (const auto& path : result_files) {
    std::ifstream in(path);
    json doc;
    try {
      in >> doc;
      RunRecord record;
      record.problem = doc.at("problem").get<std::string>();
      record.method = doc.at("method").get<std::string>();
      record.run_index = doc.at("run_index").get<int>();
      record.test_mse = doc.at("test_mse").get<double>();
      record.bin_size = doc.at("budget_total").get<long long>() /
                        doc.at("base_generations").get<long long>();
      record.trace_path = root / "traces" / record.problem / record.method /
                          (path.stem().string() + ".csv");
      records.push_back(std::move(record));
    } catch (const std::exception& e) {
      throw std::runtime_error("unreadable result " + path.string() + ": " +
                               e.what());
    }
  }

  const fs::path report = root / "report";
  fs::create_directories(report / "curves");

  // Batteries keep the sorted file order: problems alphabetical, methods
  // alphabetical inside each problem, runs by index.
  std::vector<RunBattery> batteries;
  std::vector<std::pair<std::size_t, std::size_t>> battery_spans;
  for (std::size_t i = 0; i < records.size();) {
    std::size_t j = i;
    RunBattery battery;
    battery.problem = records[i].problem;
    battery.method = records[i].method;
    while (j < records.size() && records[j].problem == battery.problem &&
           records[j].method == battery.method) {
      battery.test_mse.push_back(records[j].test_mse);
      ++j;
    }
    battery_spans.emplace_back(i, j);
    batteries.push_back(std::move(battery));
    i = j;
  }

  const ResultTable table = result_table(batteries);
  write_file(report / "median_table.csv", render_result_table_csv(table));
  write_file(report / "median_table.txt", render_result_table_text(table));

  std::string boxplot = "problem,method,run_index,test_mse\n";
  for (const auto& record : records) {
    boxplot += record.problem;
    boxplot += ',';
    boxplot += record.method;
    boxplot += ',';
    boxplot += std::to_string(record.run_index);
    boxplot += ',';
    boxplot += shortest(record.test_mse);
    boxplot += '\n';
  }
  write_file(report / "boxplot_data.csv", boxplot);

  for (std::size_t b = 0; b < batteries.size(); ++b) {
    const auto [begin, end] = battery_spans[b];
    const long long bin_size = records[begin].bin_size;
    for (std::size_t i = begin; i < end; ++i)
      if (records[i].bin_size != bin_size)
        throw std::runtime_error("mixed run configurations for " +
                                 batteries[b].problem + "/" + batteries[b].method);

    // Mean of each run's rows inside the bin, then the mean over the runs
    // that reached the bin. The divisor is always the count actually present.
    std::map<long long, std::pair<std::array<double, 7>, int>> bins;
    for (std::size_t i = begin; i < end; ++i) {
      const std::vector<TraceRow> rows = read_trace_csv(records[i].trace_path);
      if (rows.empty()) continue;
      std::map<long long, std::pair<std::array<double, 7>, int>> run_bins;
      for (const TraceRow& row : rows) {
        const long long bin = (row.evaluations + bin_size - 1) / bin_size;
        auto& [sums, count] = run_bins[bin];
        for (std::size_t k = 0; k < row.metrics.size(); ++k)
          sums[k] += row.metrics[k];
        ++count;
      }
      for (const auto& [bin, sums_count] : run_bins) {
        auto& [sums, count] = bins[bin];
        for (std::size_t k = 0; k < sums.size(); ++k)
          sums[k] += sums_count.first[k] / sums_count.second;
        ++count;
      }
    }

    std::string curve = kCurveHeader;
    for (const auto& [bin, sums_count] : bins) {
      curve += std::to_string(bin * bin_size);
      curve += ',';
      curve += std::to_string(sums_count.second);
      for (const double sum : sums_count.first) {
        curve += ',';
        curve += shortest(sum / sums_count.second);
      }
      curve += '\n';
    }
    write_file(report / "curves" /
                   (batteries[b].problem + "_" + batteries[b].method + ".csv"),
               curve);
  }
}

}  // namespace lexigp
