#pragma once

#include <limits>
#include <span>
#include <string>
#include <vector>

#include "lexigp/rng.hpp"

namespace lexigp {

// Squared errors stay finite: evaluations that blow up are recorded as the
// largest finite double so minima, medians and MSE remain well defined.
inline constexpr double kWorstError = std::numeric_limits<double>::max();

// Per-individual, per-case squared errors for one generation's candidate
// pool. Columns follow case_ids. Row equality classes (exact value
// equality across all columns) back the identical-error-vector loop break.
class ErrorMatrix {
 public:
  ErrorMatrix(int rows, int cols, std::vector<int> case_ids = {});

  double& at(int row, int col) {
    return data_[static_cast<std::size_t>(row) * cols_ + col];
  }
  double at(int row, int col) const {
    return data_[static_cast<std::size_t>(row) * cols_ + col];
  }
  std::span<const double> row(int r) const {
    return std::span<const double>(data_).subspan(
        static_cast<std::size_t>(r) * cols_, static_cast<std::size_t>(cols_));
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  const std::vector<int>& case_ids() const { return case_ids_; }

  // Computed on first use; ids are equal iff the rows compare equal
  // element by element.
  const std::vector<int>& row_classes() const;

 private:
  int rows_;
  std::size_t cols_;
  std::vector<double> data_;
  std::vector<int> case_ids_;
  mutable std::vector<int> row_classes_;
};

enum class SelectionMethodKind {
  kTournament,
  kLexicase,
  kEpsilonLexicase,
  kDownsampledEpsilonLexicaseStatic,
  kDownsampledEpsilonLexicaseDynamic,
};

// Scope of the MAD estimate behind the dynamic epsilon: recomputed over
// the surviving candidate pool at every filtering step (the default), or
// precomputed per case over the whole population once per selection round.
enum class MadScope { kPool, kGeneration };

struct SelectionConfig {
  SelectionMethodKind method = SelectionMethodKind::kTournament;
  int tournament_k = 5;
  double epsilon = 0.0;        // static downsampled variant
  double subsample_level = 1.0;  // s, downsampled variants
  MadScope mad_scope = MadScope::kPool;
  bool early_termination = true;

  bool uses_subsampling() const {
    return method == SelectionMethodKind::kDownsampledEpsilonLexicaseStatic ||
           method == SelectionMethodKind::kDownsampledEpsilonLexicaseDynamic;
  }
  void validate() const;
  std::string id() const;  // stable label, e.g. "down_eps_lexicase_static_eps1_s0.1"
};

SelectionConfig parse_selection_id(const std::string& id);

struct SelectionRecord {
  int selected_index = 0;
  int cases_used = 0;
};

// Mean of one error row. A sum that leaves the finite range collapses to
// the worst-error sentinel instead of dividing an overflowed value.
double mean_row_error(std::span<const double> errors);

// Tournament over aggregate fitness: k draws with replacement, lowest MSE
// wins, ties broken uniformly. total_cases is recorded as cases_used since
// an aggregate fitness consumes every case.
SelectionRecord tournament_select(std::span<const double> fitness, int k,
                                  Rng& rng, int total_cases);

// Plain lexicase: shuffle the cases, keep only exact per-case minima, stop
// once one candidate remains, the cases run out, or every survivor has an
// identical error vector (when early_termination is on). Remaining ties
// are broken uniformly.
SelectionRecord lexicase_select(const ErrorMatrix& errors, Rng& rng,
                                bool early_termination = true);

// Epsilon-lexicase with dynamic epsilon: candidates pass on case t when
// e_t <= e*_t + mad(e_t), where e*_t is the pool minimum and the MAD is
// taken per mad_scope.
SelectionRecord epsilon_lexicase_select(const ErrorMatrix& errors, Rng& rng,
                                        MadScope mad_scope = MadScope::kPool,
                                        bool early_termination = true);

// All |P| selection events of one generation over the same case subset,
// each with a freshly shuffled case order. config.method picks the static
// or dynamic threshold.
std::vector<SelectionRecord> downsampled_epsilon_lexicase_generation(
    const ErrorMatrix& subset_errors, int count, const SelectionConfig& config,
    Rng& rng);

// Uniform entry point used by the engine: dispatches on config.method and
// returns `count` records. Each selection event runs on its own random
// stream seeded from `rng`, so events are order-independent.
std::vector<SelectionRecord> select_parents(const ErrorMatrix& errors,
                                            int count,
                                            const SelectionConfig& config,
                                            Rng& rng);

}  // namespace lexigp
