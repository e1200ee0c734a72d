#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "lexigp/rng.hpp"

namespace lexigp {

// A loaded regression problem. Row-major feature storage; immutable after
// load and shareable across threads.
struct Dataset {
  std::string name;
  std::vector<double> features;  // observations x dimension
  std::vector<double> targets;
  int dimension = 0;
  int observations = 0;

  std::span<const double> row(int i) const {
    return std::span<const double>(features)
        .subspan(static_cast<std::size_t>(i) * static_cast<std::size_t>(dimension),
                 static_cast<std::size_t>(dimension));
  }
};

struct CsvOptions {
  int target_column = -1;  // -1 selects the last column
  bool has_header = false;
  char delimiter = ',';
};

// Loads a numeric CSV. Every cell must parse as a finite number; errors
// name the offending file line and column. The dataset name defaults to
// the file stem.
Dataset load_csv(const std::string& path, const CsvOptions& options = {},
                 const std::string& name = "");

// Builds a Dataset directly from memory; used by tests and the bindings.
Dataset make_dataset(std::string name, std::vector<double> features,
                     std::vector<double> targets, int dimension);

struct Split {
  std::vector<int> train;
  std::vector<int> validation;
  std::vector<int> test;
};

// Random disjoint split covering all observations. Sizes are
// floor(f_train*n) and floor(f_val*n), with the remainder going to test.
Split split_dataset(const Dataset& data,
                    std::array<double, 3> fractions, Rng& rng);
inline Split split_dataset(const Dataset& data, Rng& rng) {
  return split_dataset(data, {0.7, 0.15, 0.15}, rng);
}

struct CaseSubset {
  std::vector<int> indices;  // dataset rows, drawn without replacement
  double level = 1.0;
};

// One generation's training subset: round-half-up of s*|train| cases,
// never fewer than one.
CaseSubset draw_subset(std::span<const int> train_indices, double s, Rng& rng);

int subset_size(int train_count, double s);

// Checks (dimension, observations) against a JSON manifest mapping dataset
// names to expected shapes. Throws on mismatch or unknown name.
void check_manifest(const Dataset& data, const std::string& manifest_path);

}  // namespace lexigp
