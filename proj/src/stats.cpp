#include "lexigp/stats.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "lexigp/mathutil.hpp"

namespace lexigp {

namespace {

// Midranks of `values` within the combined sorted sample.
std::vector<double> midranks(std::span<const double> combined_sorted,
                             std::span<const double> values) {
  std::vector<double> ranks;
  ranks.reserve(values.size());
  for (const double v : values) {
    const auto lower = std::lower_bound(combined_sorted.begin(),
                                        combined_sorted.end(), v);
    const auto upper = std::upper_bound(lower, combined_sorted.end(), v);
    const double first = static_cast<double>(lower - combined_sorted.begin());
    const double last = static_cast<double>(upper - combined_sorted.begin());
    ranks.push_back((first + 1.0 + last) / 2.0);
  }
  return ranks;
}

double exact_two_sided(int n1, int n2, double u_observed) {
  const int n = n1 + n2;
  const double mu = n1 * static_cast<double>(n2) / 2.0;
  const double distance = std::abs(u_observed - mu);

  // Every assignment of ranks 1..n to the first group, via mask
  // permutations. Sizes are < 10 per group here, so the count is small.
  std::vector<bool> mask(static_cast<std::size_t>(n), false);
  std::fill(mask.begin(), mask.begin() + n1, true);
  long long total = 0;
  long long hits = 0;
  do {
    long long rank_sum = 0;
    for (int i = 0; i < n; ++i)
      if (mask[static_cast<std::size_t>(i)]) rank_sum += i + 1;
    const double u =
        static_cast<double>(rank_sum) - n1 * (n1 + 1.0) / 2.0;
    ++total;
    if (std::abs(u - mu) >= distance - 1e-9) ++hits;
  } while (std::prev_permutation(mask.begin(), mask.end()));
  return static_cast<double>(hits) / static_cast<double>(total);
}

}  // namespace

double wilcoxon_rank_sum(std::span<const double> a,
                         std::span<const double> b) {
  if (a.empty() || b.empty())
    throw std::invalid_argument("wilcoxon_rank_sum: empty sample");
  const int n1 = static_cast<int>(a.size());
  const int n2 = static_cast<int>(b.size());
  const int n = n1 + n2;

  std::vector<double> combined;
  combined.reserve(static_cast<std::size_t>(n));
  combined.insert(combined.end(), a.begin(), a.end());
  combined.insert(combined.end(), b.begin(), b.end());
  for (const double v : combined)
    if (!std::isfinite(v))
      throw std::invalid_argument("wilcoxon_rank_sum: non-finite value");
  std::sort(combined.begin(), combined.end());

  const bool has_ties =
      std::adjacent_find(combined.begin(), combined.end()) != combined.end();

  const std::vector<double> ranks_a = midranks(combined, a);
  const double r1 = std::accumulate(ranks_a.begin(), ranks_a.end(), 0.0);
  const double u1 = r1 - n1 * (n1 + 1.0) / 2.0;
  const double u2 = n1 * static_cast<double>(n2) - u1;
  const double u = std::max(u1, u2);

  if (!has_ties && n1 < 10 && n2 < 10) return exact_two_sided(n1, n2, u1);

  double tie_term = 0.0;
  for (std::size_t i = 0; i < combined.size();) {
    std::size_t j = i;
    while (j < combined.size() && combined[j] == combined[i]) ++j;
    const double t = static_cast<double>(j - i);
    tie_term += t * t * t - t;
    i = j;
  }
  const double variance =
      (n1 * static_cast<double>(n2) / 12.0) *
      ((n + 1.0) - tie_term / (static_cast<double>(n) * (n - 1.0)));
  if (!(variance > 0.0)) return 1.0;

  const double z = (u - n1 * static_cast<double>(n2) / 2.0 - 0.5) /
                   std::sqrt(variance);
  return std::min(1.0, std::erfc(z / std::sqrt(2.0)));
}

std::vector<double> holm_adjust(std::span<const double> p_values) {
  for (const double p : p_values)
    if (!(p >= 0.0 && p <= 1.0))
      throw std::invalid_argument("holm_adjust: p-value outside [0, 1]");
  const std::size_t m = p_values.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return p_values[x] < p_values[y];
  });
  std::vector<double> adjusted(m);
  double running = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double scaled =
        std::min(1.0, static_cast<double>(m - i) * p_values[order[i]]);
    running = std::max(running, scaled);
    adjusted[order[i]] = running;
  }
  return adjusted;
}

ResultTable result_table(std::span<const RunBattery> batteries) {
  if (batteries.empty())
    throw std::invalid_argument("result_table: no batteries");
  for (const RunBattery& battery : batteries) {
    if (battery.test_mse.empty())
      throw std::invalid_argument("result_table: battery '" + battery.method +
                                  "' on '" + battery.problem +
                                  "' has no runs");
    for (const double v : battery.test_mse)
      if (!std::isfinite(v))
        throw std::invalid_argument("result_table: non-finite MSE in '" +
                                    battery.method + "' on '" +
                                    battery.problem + "'");
  }

  // Problems and methods keep their order of first appearance.
  std::vector<std::string> problems;
  for (const RunBattery& battery : batteries)
    if (std::find(problems.begin(), problems.end(), battery.problem) ==
        problems.end())
      problems.push_back(battery.problem);

  ResultTable table;
  for (const std::string& problem : problems) {
    std::vector<const RunBattery*> group;
    for (const RunBattery& battery : batteries)
      if (battery.problem == problem) group.push_back(&battery);

    for (std::size_t i = 0; i < group.size(); ++i)
      for (std::size_t j = i + 1; j < group.size(); ++j)
        if (group[i]->method == group[j]->method)
          throw std::invalid_argument("result_table: duplicate battery for '" +
                                      group[i]->method + "' on '" + problem +
                                      "'");
    if (group.size() > 26)
      throw std::invalid_argument("result_table: more than 26 methods on '" +
                                  problem + "'");

    const std::size_t row_base = table.rows.size();
    for (std::size_t i = 0; i < group.size(); ++i) {
      ResultRow row;
      row.problem = problem;
      row.method = group[i]->method;
      row.label = static_cast<char>('a' + i);
      row.median = median_of(group[i]->test_mse);
      table.rows.push_back(std::move(row));
    }

    if (group.size() < 2) continue;

    // Holm family: all pairs within this problem.
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    std::vector<double> raw;
    for (std::size_t i = 0; i < group.size(); ++i) {
      for (std::size_t j = i + 1; j < group.size(); ++j) {
        pairs.emplace_back(i, j);
        raw.push_back(
            wilcoxon_rank_sum(group[i]->test_mse, group[j]->test_mse));
      }
    }
    const std::vector<double> adjusted = holm_adjust(raw);

    for (std::size_t k = 0; k < pairs.size(); ++k) {
      const auto [i, j] = pairs[k];
      PairwiseComparison comparison;
      comparison.problem = problem;
      comparison.method_a = group[i]->method;
      comparison.method_b = group[j]->method;
      comparison.raw_p = raw[k];
      comparison.adjusted_p = adjusted[k];
      comparison.significant = adjusted[k] < 0.05;
      table.comparisons.push_back(std::move(comparison));

      if (adjusted[k] < 0.05) {
        ResultRow& row_i = table.rows[row_base + i];
        ResultRow& row_j = table.rows[row_base + j];
        if (row_i.median < row_j.median)
          row_i.improves_on.push_back(row_j.label);
        else if (row_j.median < row_i.median)
          row_j.improves_on.push_back(row_i.label);
      }
    }
  }
  return table;
}

namespace {

std::string fixed3(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string shortest(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

std::string render_result_table_text(const ResultTable& table) {
  std::size_t method_width = 6;
  std::size_t problem_width = 7;
  for (const ResultRow& row : table.rows) {
    method_width = std::max(method_width, row.method.size());
    problem_width = std::max(problem_width, row.problem.size());
  }

  std::ostringstream out;
  const auto pad = [&](const std::string& text, std::size_t width) {
    out << text << std::string(width - text.size() + 2, ' ');
  };
  pad("problem", problem_width);
  out << "  ";
  pad("method", method_width);
  out << "  median      improves on\n";

  for (const ResultRow& row : table.rows) {
    pad(row.problem, problem_width);
    out << row.label << " ";
    pad(row.method, method_width);
    const std::string median = fixed3(row.median);
    out << std::string(median.size() < 10 ? 10 - median.size() : 0, ' ')
        << median << "  " << row.improves_on << "\n";
  }

  if (!table.comparisons.empty()) {
    out << "\npairwise tests (Wilcoxon rank-sum, Holm-adjusted, alpha 0.05)\n";
    for (const PairwiseComparison& c : table.comparisons) {
      out << c.problem << ": " << c.method_a << " vs " << c.method_b
          << "  p=" << shortest(c.raw_p)
          << "  adjusted=" << shortest(c.adjusted_p)
          << (c.significant ? "  *" : "") << "\n";
    }
  }
  return out.str();
}

std::string render_result_table_csv(const ResultTable& table) {
  std::string out = "problem,label,method,median,median_full,improves_on\n";
  for (const ResultRow& row : table.rows) {
    out += row.problem;
    out += ',';
    out += row.label;
    out += ',';
    out += row.method;
    out += ',';
    out += fixed3(row.median);
    out += ',';
    out += shortest(row.median);
    out += ',';
    out += row.improves_on;
    out += '\n';
  }
  return out;
}

}  // namespace lexigp
