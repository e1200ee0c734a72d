#include "lexigp/selection.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

#include "lexigp/mathutil.hpp"

namespace lexigp {

ErrorMatrix::ErrorMatrix(int rows, int cols, std::vector<int> case_ids)
    : rows_(rows),
      cols_(static_cast<std::size_t>(cols)),
      data_(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols), 0.0),
      case_ids_(std::move(case_ids)) {
  if (rows < 1 || cols < 1)
    throw std::invalid_argument("error matrix must be non-empty");
  if (case_ids_.empty()) {
    case_ids_.resize(static_cast<std::size_t>(cols));
    std::iota(case_ids_.begin(), case_ids_.end(), 0);
  }
  if (static_cast<int>(case_ids_.size()) != cols)
    throw std::invalid_argument("case_ids length must match column count");
}

const std::vector<int>& ErrorMatrix::row_classes() const {
  if (!row_classes_.empty()) return row_classes_;
  row_classes_.resize(static_cast<std::size_t>(rows_));
  // Group rows by content; the map key hashes the raw bytes and ties are
  // resolved by full comparison through the bucket's representative list.
  struct RowHash {
    const ErrorMatrix* m;
    std::size_t operator()(int r) const {
      std::size_t h = 0xcbf29ce484222325ULL;
      for (double v : m->row(r)) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof bits);
        h ^= bits;
        h *= 0x100000001b3ULL;
      }
      return h;
    }
  };
  struct RowEq {
    const ErrorMatrix* m;
    bool operator()(int a, int b) const {
      const auto ra = m->row(a);
      const auto rb = m->row(b);
      return std::equal(ra.begin(), ra.end(), rb.begin());
    }
  };
  std::unordered_map<int, int, RowHash, RowEq> classes(
      static_cast<std::size_t>(rows_), RowHash{this}, RowEq{this});
  int next_class = 0;
  for (int r = 0; r < rows_; ++r) {
    const auto [it, inserted] = classes.try_emplace(r, next_class);
    if (inserted) ++next_class;
    row_classes_[static_cast<std::size_t>(r)] = it->second;
  }
  return row_classes_;
}

void SelectionConfig::validate() const {
  if (method == SelectionMethodKind::kTournament && tournament_k < 1)
    throw std::invalid_argument("tournament size must be >= 1");
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon))
    throw std::invalid_argument("epsilon must be finite and >= 0");
  if (uses_subsampling() && !(subsample_level > 0.0 && subsample_level <= 1.0))
    throw std::invalid_argument("subsampling level must be in (0, 1]");
}

namespace {

std::string format_number(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

std::string SelectionConfig::id() const {
  switch (method) {
    case SelectionMethodKind::kTournament:
      return "tournament_k" + std::to_string(tournament_k);
    case SelectionMethodKind::kLexicase:
      return "lexicase";
    case SelectionMethodKind::kEpsilonLexicase:
      return "eps_lexicase";
    case SelectionMethodKind::kDownsampledEpsilonLexicaseStatic:
      return "down_eps_lexicase_static_eps" + format_number(epsilon) + "_s" +
             format_number(subsample_level);
    case SelectionMethodKind::kDownsampledEpsilonLexicaseDynamic:
      return "down_eps_lexicase_dynamic_s" + format_number(subsample_level);
  }
  return "unknown";
}

SelectionConfig parse_selection_id(const std::string& id) {
  SelectionConfig config;
  auto number_after = [&](const std::string& text, const std::string& prefix) {
    double value = 0.0;
    const char* begin = text.data() + prefix.size();
    const auto res = std::from_chars(begin, text.data() + text.size(), value);
    if (res.ec != std::errc())
      throw std::invalid_argument("bad selection id: " + id);
    return value;
  };
  if (id.starts_with("tournament_k")) {
    config.method = SelectionMethodKind::kTournament;
    config.tournament_k = static_cast<int>(number_after(id, "tournament_k"));
  } else if (id == "lexicase") {
    config.method = SelectionMethodKind::kLexicase;
  } else if (id == "eps_lexicase") {
    config.method = SelectionMethodKind::kEpsilonLexicase;
  } else if (id.starts_with("down_eps_lexicase_static_eps")) {
    config.method = SelectionMethodKind::kDownsampledEpsilonLexicaseStatic;
    const auto s_pos = id.rfind("_s");
    if (s_pos == std::string::npos)
      throw std::invalid_argument("bad selection id: " + id);
    config.epsilon = number_after(id.substr(0, s_pos), "down_eps_lexicase_static_eps");
    config.subsample_level = number_after(id.substr(s_pos), "_s");
  } else if (id.starts_with("down_eps_lexicase_dynamic_s")) {
    config.method = SelectionMethodKind::kDownsampledEpsilonLexicaseDynamic;
    config.subsample_level = number_after(id, "down_eps_lexicase_dynamic_s");
  } else {
    throw std::invalid_argument("unknown selection id: " + id);
  }
  config.validate();
  return config;
}

double mean_row_error(std::span<const double> errors) {
  if (errors.empty()) throw std::invalid_argument("mean of empty error row");
  double sum = 0.0;
  for (const double e : errors) sum += e;
  if (!(sum <= kWorstError)) return kWorstError;
  return sum / static_cast<double>(errors.size());
}

SelectionRecord tournament_select(std::span<const double> fitness, int k,
                                  Rng& rng, int total_cases) {
  if (fitness.empty()) throw std::invalid_argument("tournament: empty population");
  if (k < 1) throw std::invalid_argument("tournament: k must be >= 1");

  int best = -1;
  int ties = 0;
  for (int draw = 0; draw < k; ++draw) {
    const int i = static_cast<int>(uniform_index(rng, fitness.size()));
    if (best < 0 || fitness[static_cast<std::size_t>(i)] <
                        fitness[static_cast<std::size_t>(best)]) {
      best = i;
      ties = 1;
    } else if (fitness[static_cast<std::size_t>(i)] ==
               fitness[static_cast<std::size_t>(best)]) {
      // Reservoir-style uniform choice among tied entrants.
      ++ties;
      if (uniform_index(rng, static_cast<std::uint64_t>(ties)) == 0) best = i;
    }
  }
  return {best, total_cases};
}

namespace {

enum class ThresholdMode { kExactMin, kStaticEpsilon, kDynamicMad };

struct LexiParams {
  ThresholdMode mode = ThresholdMode::kExactMin;
  double epsilon = 0.0;                              // kStaticEpsilon
  const std::vector<double>* per_case_mad = nullptr;  // generation-scope MAD
  bool early_termination = true;
};

bool pool_is_uniform(const std::vector<int>& classes,
                     const std::vector<int>& pool) {
  const int first = classes[static_cast<std::size_t>(pool.front())];
  for (std::size_t i = 1; i < pool.size(); ++i)
    if (classes[static_cast<std::size_t>(pool[i])] != first) return false;
  return true;
}

SelectionRecord lexicase_event(const ErrorMatrix& errors,
                               const LexiParams& params, Rng& rng) {
  std::vector<int> pool(static_cast<std::size_t>(errors.rows()));
  std::iota(pool.begin(), pool.end(), 0);
  std::vector<int> order = shuffled_indices(errors.cols(), rng);
  const std::vector<int>& classes = errors.row_classes();

  std::vector<int> survivors;
  std::vector<double> pool_errors;
  int used = 0;
  for (const int t : order) {
    if (pool.size() <= 1) break;
    if (params.early_termination && pool_is_uniform(classes, pool)) break;

    double best = kWorstError;
    for (const int i : pool) best = std::min(best, errors.at(i, t));

    double threshold = best;
    switch (params.mode) {
      case ThresholdMode::kExactMin:
        break;
      case ThresholdMode::kStaticEpsilon:
        threshold = best + params.epsilon;
        break;
      case ThresholdMode::kDynamicMad:
        if (params.per_case_mad != nullptr) {
          threshold = best + (*params.per_case_mad)[static_cast<std::size_t>(t)];
        } else {
          pool_errors.clear();
          for (const int i : pool) pool_errors.push_back(errors.at(i, t));
          threshold = best + mad_of(pool_errors);
        }
        break;
    }

    survivors.clear();
    for (const int i : pool)
      if (errors.at(i, t) <= threshold) survivors.push_back(i);
    pool.swap(survivors);
    ++used;
  }

  const int pick =
      pool[static_cast<std::size_t>(uniform_index(rng, pool.size()))];
  return {pick, used};
}

std::vector<double> per_case_mad_over_population(const ErrorMatrix& errors) {
  std::vector<double> mads(static_cast<std::size_t>(errors.cols()));
  std::vector<double> column(static_cast<std::size_t>(errors.rows()));
  for (int t = 0; t < errors.cols(); ++t) {
    for (int i = 0; i < errors.rows(); ++i)
      column[static_cast<std::size_t>(i)] = errors.at(i, t);
    mads[static_cast<std::size_t>(t)] = mad_of(column);
  }
  return mads;
}

LexiParams params_for(const SelectionConfig& config,
                      const std::vector<double>* generation_mad) {
  LexiParams params;
  params.early_termination = config.early_termination;
  switch (config.method) {
    case SelectionMethodKind::kLexicase:
      params.mode = ThresholdMode::kExactMin;
      break;
    case SelectionMethodKind::kDownsampledEpsilonLexicaseStatic:
      params.mode = ThresholdMode::kStaticEpsilon;
      params.epsilon = config.epsilon;
      break;
    case SelectionMethodKind::kEpsilonLexicase:
    case SelectionMethodKind::kDownsampledEpsilonLexicaseDynamic:
      params.mode = ThresholdMode::kDynamicMad;
      params.per_case_mad =
          config.mad_scope == MadScope::kGeneration ? generation_mad : nullptr;
      break;
    case SelectionMethodKind::kTournament:
      throw std::invalid_argument("tournament is not a lexicase variant");
  }
  return params;
}

}  // namespace

SelectionRecord lexicase_select(const ErrorMatrix& errors, Rng& rng,
                                bool early_termination) {
  LexiParams params;
  params.mode = ThresholdMode::kExactMin;
  params.early_termination = early_termination;
  return lexicase_event(errors, params, rng);
}

SelectionRecord epsilon_lexicase_select(const ErrorMatrix& errors, Rng& rng,
                                        MadScope mad_scope,
                                        bool early_termination) {
  LexiParams params;
  params.mode = ThresholdMode::kDynamicMad;
  params.early_termination = early_termination;
  std::vector<double> generation_mad;
  if (mad_scope == MadScope::kGeneration) {
    generation_mad = per_case_mad_over_population(errors);
    params.per_case_mad = &generation_mad;
  }
  return lexicase_event(errors, params, rng);
}

std::vector<SelectionRecord> downsampled_epsilon_lexicase_generation(
    const ErrorMatrix& subset_errors, int count, const SelectionConfig& config,
    Rng& rng) {
  if (config.method != SelectionMethodKind::kDownsampledEpsilonLexicaseStatic &&
      config.method != SelectionMethodKind::kDownsampledEpsilonLexicaseDynamic)
    throw std::invalid_argument("config is not a downsampled lexicase variant");
  return select_parents(subset_errors, count, config, rng);
}

std::vector<SelectionRecord> select_parents(const ErrorMatrix& errors,
                                            int count,
                                            const SelectionConfig& config,
                                            Rng& rng) {
  if (count < 1) throw std::invalid_argument("select_parents: count < 1");
  config.validate();

  std::vector<SelectionRecord> records;
  records.reserve(static_cast<std::size_t>(count));

  if (config.method == SelectionMethodKind::kTournament) {
    std::vector<double> fitness(static_cast<std::size_t>(errors.rows()));
    for (int i = 0; i < errors.rows(); ++i)
      fitness[static_cast<std::size_t>(i)] = mean_row_error(errors.row(i));
    for (int event = 0; event < count; ++event) {
      Rng event_rng(rng());
      records.push_back(tournament_select(fitness, config.tournament_k,
                                          event_rng, errors.cols()));
    }
    return records;
  }

  std::vector<double> generation_mad;
  if (config.mad_scope == MadScope::kGeneration &&
      (config.method == SelectionMethodKind::kEpsilonLexicase ||
       config.method == SelectionMethodKind::kDownsampledEpsilonLexicaseDynamic))
    generation_mad = per_case_mad_over_population(errors);

  const LexiParams params = params_for(config, &generation_mad);
  errors.row_classes();  // build once, outside the event loop
  for (int event = 0; event < count; ++event) {
    Rng event_rng(rng());
    records.push_back(lexicase_event(errors, params, event_rng));
  }
  return records;
}

}  // namespace lexigp
