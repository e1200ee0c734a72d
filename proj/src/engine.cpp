#include "lexigp/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "lexigp/mathutil.hpp"

namespace lexigp {

namespace {

double saturate(double value) {
  // Catches infinities and NaN alike: the comparison is false for NaN.
  if (!(value <= kWorstError)) return kWorstError;
  return value;
}

double squared_error(double prediction, double target) {
  const double d = prediction - target;
  return saturate(d * d);
}

}  // namespace

double mse(std::span<const double> predictions,
           std::span<const double> targets) {
  if (predictions.empty())
    throw std::invalid_argument("mse: empty input");
  if (predictions.size() != targets.size())
    throw std::invalid_argument("mse: length mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i)
    sum += squared_error(predictions[i], targets[i]);
  if (!(sum <= kWorstError)) return kWorstError;
  return sum / static_cast<double>(predictions.size());
}

double mse(const BehaviorVector& behavior, std::span<const double> targets) {
  if (behavior.values.empty())
    throw std::invalid_argument("mse: empty input");
  if (behavior.values.size() != targets.size())
    throw std::invalid_argument("mse: length mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < targets.size(); ++i)
    sum += behavior.valid[i] ? squared_error(behavior.values[i], targets[i])
                             : kWorstError;
  if (!(sum <= kWorstError)) return kWorstError;
  return sum / static_cast<double>(targets.size());
}

int generations_for_budget(double subsample_level, int base_generations) {
  if (!(subsample_level > 0.0) || !(subsample_level <= 1.0))
    throw std::invalid_argument("subsampling level must be in (0, 1]");
  if (base_generations < 1)
    throw std::invalid_argument("base_generations must be >= 1");
  return static_cast<int>(std::llround(base_generations / subsample_level));
}

void RunConfig::validate() const {
  if (population_size < 2)
    throw std::invalid_argument("population_size must be >= 2");
  if (base_generations < 1)
    throw std::invalid_argument("base_generations must be >= 1");
  if (!(crossover_prob >= 0.0 && crossover_prob <= 1.0))
    throw std::invalid_argument("crossover_prob must be in [0, 1]");
  if (!(mutation_prob >= 0.0 && mutation_prob <= 1.0))
    throw std::invalid_argument("mutation_prob must be in [0, 1]");
  selection.validate();
}

BehaviorVector evaluate_behavior(const ExpressionTree& tree,
                                 const Dataset& data,
                                 std::span<const int> cases) {
  tree.validate(data.dimension);
  const auto& ops = tree.ops();
  const int size = tree.size();

  BehaviorVector out;
  out.values.assign(cases.size(), 0.0);
  out.valid.assign(cases.size(), 0);

  // Iterative reverse-prefix evaluation: operands are on the stack before
  // their operator is reached, with the left operand on top.
  std::vector<double> stack(static_cast<std::size_t>(size));
  for (std::size_t p = 0; p < cases.size(); ++p) {
    const auto row = data.row(cases[p]);
    int top = 0;
    bool ok = true;
    for (int k = size - 1; k >= 0 && ok; --k) {
      const Op& op = ops[static_cast<std::size_t>(k)];
      double r = 0.0;
      switch (op.kind) {
        case OpKind::kFeature:
          r = row[static_cast<std::size_t>(op.feature)];
          break;
        case OpKind::kConstant:
          r = op.value;
          break;
        case OpKind::kSin:
          r = std::sin(stack[static_cast<std::size_t>(--top)]);
          break;
        case OpKind::kCos:
          r = std::cos(stack[static_cast<std::size_t>(--top)]);
          break;
        case OpKind::kAdd: {
          const double a = stack[static_cast<std::size_t>(--top)];
          const double b = stack[static_cast<std::size_t>(--top)];
          r = a + b;
          break;
        }
        case OpKind::kSub: {
          const double a = stack[static_cast<std::size_t>(--top)];
          const double b = stack[static_cast<std::size_t>(--top)];
          r = a - b;
          break;
        }
        case OpKind::kMul: {
          const double a = stack[static_cast<std::size_t>(--top)];
          const double b = stack[static_cast<std::size_t>(--top)];
          r = a * b;
          break;
        }
        case OpKind::kAq: {
          const double a = stack[static_cast<std::size_t>(--top)];
          const double b = stack[static_cast<std::size_t>(--top)];
          r = a / std::sqrt(1.0 + b * b);
          break;
        }
      }
      if (!std::isfinite(r)) {
        ok = false;
        break;
      }
      stack[static_cast<std::size_t>(top++)] = r;
    }
    if (ok) {
      out.values[p] = stack[0];
      out.valid[p] = 1;
    }
  }
  return out;
}

EvaluatedPopulation evaluate_population(
    const std::vector<ExpressionTree>& population, const Dataset& data,
    std::span<const int> cases) {
  if (population.empty())
    throw std::invalid_argument("evaluate_population: empty population");
  if (cases.empty())
    throw std::invalid_argument("evaluate_population: no cases");

  EvaluatedPopulation out{
      {},
      ErrorMatrix(static_cast<int>(population.size()),
                  static_cast<int>(cases.size()),
                  std::vector<int>(cases.begin(), cases.end()))};
  out.behaviors.reserve(population.size());
  for (std::size_t i = 0; i < population.size(); ++i) {
    out.behaviors.push_back(evaluate_behavior(population[i], data, cases));
    const BehaviorVector& b = out.behaviors.back();
    for (std::size_t t = 0; t < cases.size(); ++t) {
      out.errors.at(static_cast<int>(i), static_cast<int>(t)) =
          b.valid[t] ? squared_error(b.values[t],
                                     data.targets[static_cast<std::size_t>(
                                         cases[t])])
                     : kWorstError;
    }
  }
  return out;
}

namespace {

std::vector<double> target_slice(const Dataset& data,
                                 std::span<const int> cases) {
  std::vector<double> targets;
  targets.reserve(cases.size());
  for (const int c : cases)
    targets.push_back(data.targets[static_cast<std::size_t>(c)]);
  return targets;
}

}  // namespace

ExperimentResult run(const RunConfig& config, const Dataset& data) {
  config.validate();

  Rng master(config.seed);
  Rng split_rng(master());
  Rng init_rng(master());
  const Split split = split_dataset(data, split_rng);

  const bool subsampled = config.selection.uses_subsampling() &&
                          config.selection.subsample_level < 1.0;
  const int generations =
      config.selection.uses_subsampling()
          ? generations_for_budget(config.selection.subsample_level,
                                   config.base_generations)
          : config.base_generations;

  ExperimentResult result;
  result.seed = config.seed;
  result.config = config;
  result.dataset_name = data.name;
  result.generations_executed = generations;
  result.ledger.budget_total = static_cast<long long>(split.train.size()) *
                               config.population_size *
                               config.base_generations;

  const std::vector<double> validation_targets =
      target_slice(data, split.validation);
  const std::vector<double> train_targets = target_slice(data, split.train);

  // Position of each dataset row inside the train list, for slicing
  // full-train behaviors down to the active subset.
  std::vector<int> train_position(static_cast<std::size_t>(data.observations),
                                  -1);
  for (std::size_t pos = 0; pos < split.train.size(); ++pos)
    train_position[static_cast<std::size_t>(split.train[pos])] =
        static_cast<int>(pos);

  std::vector<ExpressionTree> population = ramped_half_and_half(
      config.population_size, data.dimension, init_rng);

  ExpressionTree best_tree;
  double best_validation = std::numeric_limits<double>::infinity();
  bool have_best = false;

  const auto validation_sweep = [&](const std::vector<ExpressionTree>& trees) {
    for (const ExpressionTree& tree : trees) {
      const double v =
          mse(evaluate_behavior(tree, data, split.validation),
              validation_targets);
      // Strict improvement only, so the earliest minimizer is kept and the
      // result does not depend on sweep order.
      if (!have_best || v < best_validation) {
        best_tree = tree;
        best_validation = v;
        have_best = true;
      }
    }
    if (config.count_validation_in_budget)
      result.ledger.charge(static_cast<long long>(split.validation.size()) *
                           static_cast<long long>(trees.size()));
  };

  for (int g = 1; g <= generations; ++g) {
    Rng gen_rng(master());

    std::vector<int> active;
    if (subsampled) {
      active = draw_subset(split.train, config.selection.subsample_level,
                           gen_rng)
                   .indices;
    } else {
      active = split.train;
    }

    const bool full_behaviors = config.behaviors_on_full_train || !subsampled;
    const std::span<const int> behavior_cases =
        full_behaviors ? std::span<const int>(split.train)
                       : std::span<const int>(active);

    std::vector<BehaviorVector> behaviors;
    behaviors.reserve(population.size());
    for (const ExpressionTree& tree : population)
      behaviors.push_back(evaluate_behavior(tree, data, behavior_cases));

    ErrorMatrix errors(config.population_size,
                       static_cast<int>(active.size()), active);
    for (std::size_t i = 0; i < behaviors.size(); ++i) {
      const BehaviorVector& b = behaviors[i];
      for (std::size_t t = 0; t < active.size(); ++t) {
        const std::size_t slot =
            full_behaviors
                ? static_cast<std::size_t>(
                      train_position[static_cast<std::size_t>(active[t])])
                : t;
        errors.at(static_cast<int>(i), static_cast<int>(t)) =
            b.valid[slot]
                ? squared_error(
                      b.values[slot],
                      data.targets[static_cast<std::size_t>(active[t])])
                : kWorstError;
      }
    }

    result.ledger.charge(static_cast<long long>(active.size()) *
                         config.population_size);

    validation_sweep(population);

    const std::vector<SelectionRecord> records = select_parents(
        errors, config.population_size, config.selection, gen_rng);

    if (config.collect_traces) {
      GenerationTrace trace;
      trace.generation = g;
      trace.cumulative_evaluations = result.ledger.spent;
      trace.behavioral_diversity = behavioral_diversity(behaviors);

      std::unordered_map<std::string, int> tallies;
      for (const SelectionRecord& r : records)
        ++tallies[canonical_string(
            population[static_cast<std::size_t>(r.selected_index)])];
      const HyperselectionCounts counts =
          hyperselection_counts(tallies, static_cast<int>(records.size()));
      trace.hyperselections_1pct = counts.pct1;
      trace.hyperselections_5pct = counts.pct5;
      trace.hyperselections_10pct = counts.pct10;

      std::vector<double> mean_fitness(population.size());
      for (std::size_t i = 0; i < population.size(); ++i)
        mean_fitness[i] = mean_row_error(errors.row(static_cast<int>(i)));
      const std::vector<int> ranks = population_ranks(mean_fitness);
      const SpecialistStats stats = specialist_stats(records, ranks);
      trace.mean_cases_used = stats.mean_cases_used;
      trace.mean_selected_rank = stats.mean_selected_rank;
      trace.best_validation_mse = best_validation;
      result.traces.push_back(trace);
    }

    // varAnd-style variation over the selected parents, in event order.
    std::vector<ExpressionTree> offspring;
    offspring.reserve(population.size());
    for (const SelectionRecord& r : records)
      offspring.push_back(
          population[static_cast<std::size_t>(r.selected_index)]);
    for (std::size_t i = 0; i + 1 < offspring.size(); i += 2) {
      if (uniform_real(gen_rng, 0.0, 1.0) < config.crossover_prob) {
        auto [left, right] =
            subtree_crossover(offspring[i], offspring[i + 1], gen_rng);
        offspring[i] = std::move(left);
        offspring[i + 1] = std::move(right);
      }
    }
    for (ExpressionTree& child : offspring) {
      if (uniform_real(gen_rng, 0.0, 1.0) < config.mutation_prob)
        child = subtree_mutation(child, data.dimension, gen_rng);
    }
    population = std::move(offspring);
  }

  // The last variation round produced individuals the loop never scored.
  validation_sweep(population);

  result.best_individual = best_tree;
  result.validation_mse = best_validation;
  // The single test-set contact of the whole run.
  result.test_mse = mse(evaluate_behavior(best_tree, data, split.test),
                        target_slice(data, split.test));
  return result;
}

}  // namespace lexigp
