#pragma once

#include <span>
#include <string>
#include <vector>

namespace lexigp {

// Two-sided Wilcoxon rank-sum (Mann-Whitney U) p-value. Tie-free samples
// with both sizes under 10 take the exact enumeration path; everything
// else uses the normal approximation with midranks, tie-corrected variance
// and continuity correction. Two identical samples give p = 1.
double wilcoxon_rank_sum(std::span<const double> a, std::span<const double> b);

// Holm step-down adjustment: sort ascending, adjusted_(i) is the running
// maximum of min(1, (m - i) * p_(i)), results returned in input order.
std::vector<double> holm_adjust(std::span<const double> p_values);

// One method's test-set MSE values over a battery of runs on one problem.
struct RunBattery {
  std::string method;
  std::string problem;
  std::vector<double> test_mse;
};

struct PairwiseComparison {
  std::string problem;
  std::string method_a;
  std::string method_b;
  double raw_p = 1.0;
  double adjusted_p = 1.0;
  bool significant = false;  // adjusted_p < 0.05
};

struct ResultRow {
  std::string problem;
  std::string method;
  char label = 'a';          // per-problem letter, order of first appearance
  double median = 0.0;       // unrounded; renderers round to 3 decimals
  std::string improves_on;   // labels of methods this row significantly beats
};

// Medians plus pairwise significance. The Holm family is all method pairs
// within one problem; "improves on" requires a significant comparison and
// a strictly lower median.
struct ResultTable {
  std::vector<ResultRow> rows;
  std::vector<PairwiseComparison> comparisons;
};

ResultTable result_table(std::span<const RunBattery> batteries);

// Aligned plain-text rendering: a median block per problem followed by the
// pairwise p-values behind the labels.
std::string render_result_table_text(const ResultTable& table);

// CSV with one row per (problem, method): label, rounded display median,
// full-precision median, improves_on labels.
std::string render_result_table_csv(const ResultTable& table);

}  // namespace lexigp
