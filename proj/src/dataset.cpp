#include "lexigp/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace lexigp {

namespace {

// Splits one CSV line; empty trailing fields are kept so the column-count
// check can report them.
std::vector<std::string_view> split_line(std::string_view line, char delim) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(delim, start);
    if (pos == std::string_view::npos) {
      cells.push_back(line.substr(start));
      break;
    }
    cells.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return cells;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

double parse_cell(std::string_view cell, const std::string& path, int line_no,
                  int col_no) {
  const std::string_view t = trim(cell);
  double value = 0.0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), value);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size())
    throw std::runtime_error(path + ": row " + std::to_string(line_no) +
                             ", column " + std::to_string(col_no) +
                             ": '" + std::string(t) + "' is not numeric");
  if (!std::isfinite(value))
    throw std::runtime_error(path + ": row " + std::to_string(line_no) +
                             ", column " + std::to_string(col_no) +
                             ": non-finite value");
  return value;
}

}  // namespace

Dataset make_dataset(std::string name, std::vector<double> features,
                     std::vector<double> targets, int dimension) {
  if (dimension < 1) throw std::invalid_argument("dataset: dimension < 1");
  if (targets.empty()) throw std::invalid_argument("dataset: no observations");
  if (features.size() != targets.size() * static_cast<std::size_t>(dimension))
    throw std::invalid_argument("dataset: feature/target shape mismatch");
  for (double v : features)
    if (!std::isfinite(v)) throw std::invalid_argument("dataset: non-finite feature");
  for (double v : targets)
    if (!std::isfinite(v)) throw std::invalid_argument("dataset: non-finite target");
  Dataset d;
  d.name = std::move(name);
  d.features = std::move(features);
  d.targets = std::move(targets);
  d.dimension = dimension;
  d.observations = static_cast<int>(d.targets.size());
  return d;
}

Dataset load_csv(const std::string& path, const CsvOptions& options,
                 const std::string& name) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open data file: " + path);

  std::vector<double> features;
  std::vector<double> targets;
  int columns = -1;
  int target_col = options.target_column;
  int line_no = 0;
  std::string line;
  bool skip_next = options.has_header;
  while (std::getline(in, line)) {
    ++line_no;
    if (skip_next) {
      skip_next = false;
      continue;
    }
    if (trim(line).empty()) continue;
    const auto cells = split_line(line, options.delimiter);
    if (columns < 0) {
      columns = static_cast<int>(cells.size());
      if (columns < 2)
        throw std::runtime_error(path + ": need at least one feature column "
                                 "and one target column");
      if (target_col < 0) target_col = columns - 1;
      if (target_col >= columns)
        throw std::runtime_error(path + ": target column " +
                                 std::to_string(target_col) +
                                 " out of range for " +
                                 std::to_string(columns) + " columns");
    } else if (static_cast<int>(cells.size()) != columns) {
      throw std::runtime_error(path + ": row " + std::to_string(line_no) +
                               " has " + std::to_string(cells.size()) +
                               " columns, expected " + std::to_string(columns));
    }
    for (int c = 0; c < columns; ++c) {
      const double v = parse_cell(cells[static_cast<std::size_t>(c)], path,
                                  line_no, c + 1);
      if (c == target_col) targets.push_back(v);
      else features.push_back(v);
    }
  }
  if (targets.empty()) throw std::runtime_error(path + ": no data rows");

  std::string dataset_name = name;
  if (dataset_name.empty())
    dataset_name = std::filesystem::path(path).stem().string();
  return make_dataset(std::move(dataset_name), std::move(features),
                      std::move(targets), columns - 1);
}

Split split_dataset(const Dataset& data, std::array<double, 3> fractions,
                    Rng& rng) {
  const double sum = fractions[0] + fractions[1] + fractions[2];
  if (std::abs(sum - 1.0) > 1e-9)
    throw std::invalid_argument("split: fractions must sum to 1");
  const int n = data.observations;
  if (n < 3) throw std::invalid_argument("split: need at least 3 observations");

  // The 1e-9 nudge keeps floor() from dropping a whole case when f*n is an
  // integer that rounds down in floating point.
  const int n_train = static_cast<int>(std::floor(fractions[0] * n + 1e-9));
  const int n_val = static_cast<int>(std::floor(fractions[1] * n + 1e-9));
  const int n_test = n - n_train - n_val;
  if (n_train < 1 || n_val < 1 || n_test < 1)
    throw std::invalid_argument("split: a partition is empty at n = " +
                                std::to_string(n));

  std::vector<int> order = shuffled_indices(n, rng);
  Split split;
  split.train.assign(order.begin(), order.begin() + n_train);
  split.validation.assign(order.begin() + n_train,
                          order.begin() + n_train + n_val);
  split.test.assign(order.begin() + n_train + n_val, order.end());
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.validation.begin(), split.validation.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

int subset_size(int train_count, double s) {
  if (!(s > 0.0 && s <= 1.0))
    throw std::invalid_argument("subsampling level must be in (0, 1]");
  const int size = static_cast<int>(std::floor(s * train_count + 0.5 + 1e-9));
  return std::max(1, std::min(size, train_count));
}

CaseSubset draw_subset(std::span<const int> train_indices, double s, Rng& rng) {
  const int n = static_cast<int>(train_indices.size());
  if (n == 0) throw std::invalid_argument("draw_subset: empty training set");
  const int m = subset_size(n, s);

  // Partial Fisher-Yates: the first m slots become the sample.
  std::vector<int> pool(train_indices.begin(), train_indices.end());
  for (int i = 0; i < m; ++i) {
    const auto j =
        i + static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(n - i)));
    std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
  }
  pool.resize(static_cast<std::size_t>(m));
  return CaseSubset{std::move(pool), s};
}

void check_manifest(const Dataset& data, const std::string& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw std::runtime_error("cannot open manifest: " + manifest_path);
  nlohmann::json manifest;
  in >> manifest;
  if (!manifest.contains(data.name)) {
    std::ostringstream known;
    for (const auto& [key, _] : manifest.items()) known << ' ' << key;
    throw std::runtime_error("manifest has no entry for dataset '" + data.name +
                             "'; known:" + known.str());
  }
  const auto& entry = manifest.at(data.name);
  const int dim = entry.at("dimension").get<int>();
  const int obs = entry.at("observations").get<int>();
  if (dim != data.dimension || obs != data.observations)
    throw std::runtime_error(
        "dataset '" + data.name + "' has shape (" +
        std::to_string(data.dimension) + ", " + std::to_string(data.observations) +
        "), manifest expects (" + std::to_string(dim) + ", " +
        std::to_string(obs) + ")");
}

}  // namespace lexigp
