#include "lexigp/metrics.hpp"

#include <algorithm>
#include <cstring>
#include <numeric>
#include <stdexcept>

namespace lexigp {

double behavioral_diversity(std::span<const BehaviorVector> behaviors) {
  if (behaviors.empty())
    throw std::invalid_argument("behavioral_diversity: empty population");
  const std::size_t length = behaviors.front().values.size();
  // One flat key per individual: validity byte then raw value bits per slot.
  std::vector<std::string> keys;
  keys.reserve(behaviors.size());
  for (const BehaviorVector& b : behaviors) {
    if (b.values.size() != length || b.valid.size() != length)
      throw std::invalid_argument("behavioral_diversity: length mismatch");
    std::string key;
    key.reserve(length * 9);
    for (std::size_t t = 0; t < length; ++t) {
      key.push_back(static_cast<char>(b.valid[t]));
      char bits[sizeof(double)];
      std::memcpy(bits, &b.values[t], sizeof bits);
      key.append(bits, sizeof bits);
    }
    keys.push_back(std::move(key));
  }
  std::sort(keys.begin(), keys.end());
  const auto distinct = std::unique(keys.begin(), keys.end()) - keys.begin();
  return static_cast<double>(distinct) / static_cast<double>(behaviors.size());
}

HyperselectionCounts hyperselection_counts(
    const std::unordered_map<std::string, int>& tallies, int total_events) {
  if (total_events < 1)
    throw std::invalid_argument("hyperselection_counts: no events");
  long long sum = 0;
  for (const auto& [_, count] : tallies) sum += count;
  if (sum != total_events)
    throw std::invalid_argument("hyperselection_counts: tallies sum to " +
                                std::to_string(sum) + ", expected " +
                                std::to_string(total_events));
  // ceil(L% of total) in integers; the comparison is inclusive, so an
  // individual exactly at the threshold counts.
  const auto threshold = [total_events](int percent) {
    return (static_cast<long long>(percent) * total_events + 99) / 100;
  };
  const long long t1 = threshold(1);
  const long long t5 = threshold(5);
  const long long t10 = threshold(10);
  HyperselectionCounts counts;
  for (const auto& [_, count] : tallies) {
    if (count >= t1) ++counts.pct1;
    if (count >= t5) ++counts.pct5;
    if (count >= t10) ++counts.pct10;
  }
  return counts;
}

std::vector<int> population_ranks(std::span<const double> mean_fitness) {
  if (mean_fitness.empty())
    throw std::invalid_argument("population_ranks: empty input");
  const std::size_t n = mean_fitness.size();
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return mean_fitness[static_cast<std::size_t>(a)] <
           mean_fitness[static_cast<std::size_t>(b)];
  });
  std::vector<int> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && mean_fitness[static_cast<std::size_t>(order[j])] ==
                        mean_fitness[static_cast<std::size_t>(order[i])])
      ++j;
    for (std::size_t k = i; k < j; ++k)
      ranks[static_cast<std::size_t>(order[k])] = static_cast<int>(i) + 1;
    i = j;
  }
  return ranks;
}

SpecialistStats specialist_stats(std::span<const SelectionRecord> records,
                                 std::span<const int> ranks) {
  if (records.empty())
    throw std::invalid_argument("specialist_stats: no selection events");
  double cases = 0.0;
  double rank = 0.0;
  for (const SelectionRecord& r : records) {
    cases += r.cases_used;
    rank += ranks[static_cast<std::size_t>(r.selected_index)];
  }
  const double n = static_cast<double>(records.size());
  return {cases / n, rank / n};
}

}  // namespace lexigp
