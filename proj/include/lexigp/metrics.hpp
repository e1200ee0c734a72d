#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "lexigp/selection.hpp"

namespace lexigp {

// Program outputs over a fixed case list. Slots where evaluation produced a
// non-finite value are flagged invalid and their stored value is 0.0, so
// equality over (values, valid) is well defined.
struct BehaviorVector {
  std::vector<double> values;
  std::vector<std::uint8_t> valid;

  int length() const { return static_cast<int>(values.size()); }
};

// Fraction of distinct behavior vectors, in [1/|P|, 1]. Distinctness is
// exact bit-level equality of the value slots plus the validity flags.
double behavioral_diversity(std::span<const BehaviorVector> behaviors);

// How many distinct individuals absorbed at least ceil(L% of total_events)
// selection events, for L = 1, 5, 10. Tallies are keyed by the canonical
// string of the selected individual.
struct HyperselectionCounts {
  int pct1 = 0;
  int pct5 = 0;
  int pct10 = 0;
};
HyperselectionCounts hyperselection_counts(
    const std::unordered_map<std::string, int>& tallies, int total_events);

// Competition ranking: rank(i) = 1 + |{j : fitness[j] < fitness[i]}|, so
// equal fitness shares a rank and the next rank skips accordingly.
std::vector<int> population_ranks(std::span<const double> mean_fitness);

// Per-generation means over the selection events: how many cases each event
// consumed and the rank of the individual it picked.
struct SpecialistStats {
  double mean_cases_used = 0.0;
  double mean_selected_rank = 0.0;
};
SpecialistStats specialist_stats(std::span<const SelectionRecord> records,
                                 std::span<const int> ranks);

struct GenerationTrace {
  int generation = 0;  // 1-based
  long long cumulative_evaluations = 0;
  double behavioral_diversity = 0.0;
  int hyperselections_1pct = 0;
  int hyperselections_5pct = 0;
  int hyperselections_10pct = 0;
  double mean_cases_used = 0.0;
  double mean_selected_rank = 0.0;
  double best_validation_mse = 0.0;  // running best up to this generation
};

}  // namespace lexigp
