#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lexigp/dataset.hpp"
#include "lexigp/engine.hpp"
#include "lexigp/experiment.hpp"
#include "lexigp/expr.hpp"
#include "lexigp/selection.hpp"
#include "lexigp/stats.hpp"

namespace py = pybind11;
using namespace lexigp;

namespace {

py::dict trace_to_dict(const GenerationTrace& trace) {
  py::dict out;
  out["generation"] = trace.generation;
  out["cumulative_evaluations"] = trace.cumulative_evaluations;
  out["behavioral_diversity"] = trace.behavioral_diversity;
  out["hyperselections_1pct"] = trace.hyperselections_1pct;
  out["hyperselections_5pct"] = trace.hyperselections_5pct;
  out["hyperselections_10pct"] = trace.hyperselections_10pct;
  out["mean_cases_used"] = trace.mean_cases_used;
  out["mean_selected_rank"] = trace.mean_selected_rank;
  out["best_validation_mse"] = trace.best_validation_mse;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() =
      "Tree-based genetic programming for symbolic regression with "
      "lexicase-family parent selection";

  m.attr("WORST_ERROR") = kWorstError;

  py::class_<ExpressionTree>(m, "Expression")
      .def_static(
          "parse",
          [](const std::string& text, int dimension) {
            return parse_expression(text, dimension);
          },
          py::arg("text"), py::arg("dimension") = -1,
          "Parse the canonical prefix form, e.g. 'add(mul(x0, x0), 1.5)'")
      .def_property_readonly("size", &ExpressionTree::size)
      .def_property_readonly("depth", &ExpressionTree::depth)
      .def_property_readonly("required_dimension",
                             &ExpressionTree::required_dimension)
      .def(
          "evaluate",
          [](const ExpressionTree& tree, const std::vector<double>& features)
              -> std::optional<double> { return evaluate(tree, features); },
          py::arg("features"),
          "Value on one feature vector; None marks an invalid (non-finite) "
          "evaluation")
      .def("__str__",
           [](const ExpressionTree& tree) { return canonical_string(tree); })
      .def("__repr__", [](const ExpressionTree& tree) {
        return "Expression(" + canonical_string(tree) + ")";
      })
      .def("__eq__", [](const ExpressionTree& a, const ExpressionTree& b) {
        return a == b;
      });

  py::class_<Dataset>(m, "Dataset")
      .def_property_readonly("name",
                             [](const Dataset& d) { return d.name; })
      .def_property_readonly("dimension",
                             [](const Dataset& d) { return d.dimension; })
      .def_property_readonly("observations",
                             [](const Dataset& d) { return d.observations; })
      .def("row",
           [](const Dataset& d, int i) {
             if (i < 0 || i >= d.observations)
               throw py::index_error("row out of range");
             const auto row = d.row(i);
             return std::vector<double>(row.begin(), row.end());
           })
      .def("target", [](const Dataset& d, int i) {
        if (i < 0 || i >= d.observations)
          throw py::index_error("target out of range");
        return d.targets[static_cast<std::size_t>(i)];
      });

  m.def(
      "load_csv",
      [](const std::string& path, int target_column, bool has_header,
         const std::string& delimiter, const std::string& name) {
        if (delimiter.size() != 1)
          throw std::invalid_argument("delimiter must be a single character");
        CsvOptions options;
        options.target_column = target_column;
        options.has_header = has_header;
        options.delimiter = delimiter[0];
        return load_csv(path, options, name);
      },
      py::arg("path"), py::arg("target_column") = -1,
      py::arg("has_header") = false, py::arg("delimiter") = ",",
      py::arg("name") = "");

  m.def(
      "make_dataset",
      [](const std::string& name,
         const std::vector<std::vector<double>>& features,
         const std::vector<double>& targets) {
        if (features.empty())
          throw std::invalid_argument("features must not be empty");
        const std::size_t dimension = features.front().size();
        std::vector<double> flat;
        flat.reserve(features.size() * dimension);
        for (const auto& row : features) {
          if (row.size() != dimension)
            throw std::invalid_argument("ragged feature rows");
          flat.insert(flat.end(), row.begin(), row.end());
        }
        return make_dataset(name, std::move(flat), targets,
                            static_cast<int>(dimension));
      },
      py::arg("name"), py::arg("features"), py::arg("targets"));

  m.def("subset_size", &subset_size, py::arg("train_count"), py::arg("level"));
  m.def("generations_for_budget", &generations_for_budget,
        py::arg("subsample_level"), py::arg("base_generations") = 50);
  m.def("derive_seed", &derive_seed, py::arg("base_seed"), py::arg("problem"),
        py::arg("method"), py::arg("run_index"));

  m.def(
      "select_parents",
      [](const std::vector<std::vector<double>>& errors,
         const std::string& method, int count, std::uint64_t seed) {
        if (errors.empty() || errors.front().empty())
          throw std::invalid_argument("errors must be a non-empty matrix");
        const int rows = static_cast<int>(errors.size());
        const int cols = static_cast<int>(errors.front().size());
        ErrorMatrix matrix(rows, cols);
        for (int r = 0; r < rows; ++r) {
          if (static_cast<int>(errors[static_cast<std::size_t>(r)].size()) !=
              cols)
            throw std::invalid_argument("ragged error matrix");
          for (int c = 0; c < cols; ++c)
            matrix.at(r, c) =
                errors[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
        }
        const SelectionConfig config = parse_selection_id(method);
        Rng rng(seed);
        const auto records = select_parents(matrix, count, config, rng);
        std::vector<std::pair<int, int>> out;
        out.reserve(records.size());
        for (const auto& record : records)
          out.emplace_back(record.selected_index, record.cases_used);
        return out;
      },
      py::arg("errors"), py::arg("method"), py::arg("count"), py::arg("seed"),
      "One generation of parent selection on a squared-error matrix; returns "
      "(selected_index, cases_used) pairs");

  m.def(
      "run_gp",
      [](const Dataset& data, const std::string& method, int population_size,
         int base_generations, double crossover_prob, double mutation_prob,
         std::uint64_t seed, bool collect_traces) {
        RunConfig config;
        config.population_size = population_size;
        config.base_generations = base_generations;
        config.selection = parse_selection_id(method);
        config.crossover_prob = crossover_prob;
        config.mutation_prob = mutation_prob;
        config.seed = seed;
        config.collect_traces = collect_traces;
        ExperimentResult result;
        {
          py::gil_scoped_release release;
          result = run(config, data);
        }
        py::dict out;
        out["problem"] = result.dataset_name;
        out["method"] = result.config.selection.id();
        out["seed"] = result.seed;
        out["best_expression"] = canonical_string(result.best_individual);
        out["validation_mse"] = result.validation_mse;
        out["test_mse"] = result.test_mse;
        out["generations_executed"] = result.generations_executed;
        out["budget_total"] = result.ledger.budget_total;
        out["budget_spent"] = result.ledger.spent;
        py::list traces;
        for (const auto& trace : result.traces)
          traces.append(trace_to_dict(trace));
        out["traces"] = traces;
        return out;
      },
      py::arg("dataset"), py::arg("method"), py::arg("population_size") = 500,
      py::arg("base_generations") = 50, py::arg("crossover_prob") = 0.8,
      py::arg("mutation_prob") = 0.05, py::arg("seed") = 0,
      py::arg("collect_traces") = true,
      "One full GP run: split, evolve under the evaluation budget, report "
      "validation/test MSE of the selected individual");

  m.def(
      "wilcoxon_rank_sum",
      [](const std::vector<double>& a, const std::vector<double>& b) {
        return wilcoxon_rank_sum(a, b);
      },
      py::arg("a"), py::arg("b"));

  m.def(
      "holm_adjust",
      [](const std::vector<double>& p_values) { return holm_adjust(p_values); },
      py::arg("p_values"));

  m.def(
      "result_table_text",
      [](const std::vector<std::tuple<std::string, std::string,
                                      std::vector<double>>>& batteries) {
        std::vector<RunBattery> converted;
        converted.reserve(batteries.size());
        for (const auto& [problem, method, values] : batteries)
          converted.push_back({method, problem, values});
        return render_result_table_text(result_table(converted));
      },
      py::arg("batteries"),
      "Median table with Holm-adjusted pairwise significance; batteries are "
      "(problem, method, test_mse_per_run) tuples");
}
