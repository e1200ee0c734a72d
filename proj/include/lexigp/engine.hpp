#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lexigp/dataset.hpp"
#include "lexigp/expr.hpp"
#include "lexigp/metrics.hpp"
#include "lexigp/selection.hpp"

namespace lexigp {

// Mean squared error. Terms and the final mean saturate at the worst-error
// sentinel instead of overflowing.
double mse(std::span<const double> predictions, std::span<const double> targets);

// Sentinel-aware variant: invalid behavior slots contribute the worst-error
// value.
double mse(const BehaviorVector& behavior, std::span<const double> targets);

// Generation count that keeps the training-evaluation budget level when only
// a fraction of the cases is active per generation: round(base / s).
int generations_for_budget(double subsample_level, int base_generations = 50);

struct RunConfig {
  int population_size = 500;
  int base_generations = 50;
  SelectionConfig selection;
  double crossover_prob = 0.8;
  double mutation_prob = 0.05;
  std::uint64_t seed = 0;

  // Instrumentation switches. Validation sweeps and full-training behavior
  // evaluations are measurement, not fitness, so by default neither draws
  // from the evaluation budget and behaviors cover the full training set
  // even under subsampling (keeps diversity comparable across methods).
  bool count_validation_in_budget = false;
  bool behaviors_on_full_train = true;
  bool collect_traces = true;

  void validate() const;
};

struct BudgetLedger {
  long long budget_total = 0;
  long long spent = 0;
  std::vector<long long> per_generation;

  void charge(long long amount) {
    spent += amount;
    per_generation.push_back(amount);
  }
};

struct ExperimentResult {
  ExpressionTree best_individual;
  double validation_mse = 0.0;
  double test_mse = 0.0;
  std::vector<GenerationTrace> traces;
  std::uint64_t seed = 0;
  RunConfig config;
  std::string dataset_name;
  int generations_executed = 0;
  BudgetLedger ledger;
};

// Program outputs for every individual over `cases` (dataset row indices),
// plus the squared-error matrix against the targets on those same cases.
// Invalid outputs become worst-error entries.
struct EvaluatedPopulation {
  std::vector<BehaviorVector> behaviors;
  ErrorMatrix errors;
};
EvaluatedPopulation evaluate_population(
    const std::vector<ExpressionTree>& population, const Dataset& data,
    std::span<const int> cases);

// Single behavior sweep used by evaluate_population and the run loop.
BehaviorVector evaluate_behavior(const ExpressionTree& tree,
                                 const Dataset& data,
                                 std::span<const int> cases);

// Full generational run: initialization, per-generation subset draw,
// selection, variation, budget accounting, running validation argmin, one
// final test evaluation of the chosen individual. Deterministic in the seed.
ExperimentResult run(const RunConfig& config, const Dataset& data);

}  // namespace lexigp
