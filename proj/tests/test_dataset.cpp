#include "lexigp/dataset.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "lexigp/rng.hpp"

using lexigp::CsvOptions;
using lexigp::Dataset;
using lexigp::Rng;

namespace {

namespace fs = std::filesystem;

// Unique scratch file that removes itself when the test block ends.
struct TempFile {
  fs::path path;
  explicit TempFile(const std::string& contents) {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("lexigp_test_" + std::to_string(counter++) + ".csv");
    std::ofstream out(path);
    out << contents;
  }
  ~TempFile() { std::error_code ec; fs::remove(path, ec); }
};

Dataset uniform_dataset(int observations, int dimension) {
  std::vector<double> features;
  std::vector<double> targets;
  for (int i = 0; i < observations; ++i) {
    for (int d = 0; d < dimension; ++d)
      features.push_back(i * dimension + d);
    targets.push_back(i);
  }
  return lexigp::make_dataset("uniform", features, targets, dimension);
}

}  // namespace

TEST_CASE("csv loading handles headers, delimiters and target columns") {
  const TempFile file("a;b;y\n1;2;3\n4;5;6\n");
  CsvOptions options;
  options.has_header = true;
  options.delimiter = ';';
  const Dataset data = lexigp::load_csv(file.path.string(), options);
  CHECK(data.dimension == 2);
  CHECK(data.observations == 2);
  CHECK(data.targets == std::vector<double>{3, 6});
  CHECK(data.row(1)[0] == 4);
  CHECK(data.row(1)[1] == 5);

  CsvOptions first_target = options;
  first_target.target_column = 0;
  const Dataset flipped = lexigp::load_csv(file.path.string(), first_target);
  CHECK(flipped.targets == std::vector<double>{1, 4});
  CHECK(flipped.row(0)[0] == 2);
  CHECK(flipped.row(0)[1] == 3);
}

TEST_CASE("csv loading names the offending cell") {
  const TempFile file("1,2\n3,4\nbad,6\n");
  try {
    lexigp::load_csv(file.path.string(), {});
    FAIL("expected a parse failure");
  } catch (const std::exception& error) {
    const std::string message = error.what();
    CHECK(message.find("row 3") != std::string::npos);
    CHECK(message.find("column 1") != std::string::npos);
    CHECK(message.find("bad") != std::string::npos);
  }
}

TEST_CASE("csv loading rejects ragged rows and non-finite values") {
  const TempFile ragged("1,2,3\n4,5\n");
  CHECK_THROWS(lexigp::load_csv(ragged.path.string(), {}));
  const TempFile infinite("1,inf\n");
  CHECK_THROWS(lexigp::load_csv(infinite.path.string(), {}));
}

TEST_CASE("dataset name defaults to the file stem") {
  const TempFile file("1,2\n");
  const Dataset data = lexigp::load_csv(file.path.string(), {});
  CHECK(data.name == file.path.stem().string());
}

TEST_CASE("splits follow the floor rule and partition the index range") {
  const Dataset data = uniform_dataset(768, 2);
  Rng rng(42);
  const auto split = lexigp::split_dataset(data, rng);
  CHECK(split.train.size() == 537);
  CHECK(split.validation.size() == 115);
  CHECK(split.test.size() == 116);

  std::set<int> all;
  for (const auto* part : {&split.train, &split.validation, &split.test}) {
    CHECK(std::is_sorted(part->begin(), part->end()));
    all.insert(part->begin(), part->end());
  }
  CHECK(all.size() == 768);
  CHECK(*all.begin() == 0);
  CHECK(*all.rbegin() == 767);

  // Shuffled before partitioning: the train block is not simply the first
  // 537 indices.
  std::vector<int> prefix(537);
  std::iota(prefix.begin(), prefix.end(), 0);
  CHECK(split.train != prefix);
}

TEST_CASE("splits are reproducible from the seed") {
  const Dataset data = uniform_dataset(100, 1);
  Rng a(7);
  Rng b(7);
  const auto first = lexigp::split_dataset(data, a);
  const auto second = lexigp::split_dataset(data, b);
  CHECK(first.train == second.train);
  CHECK(first.validation == second.validation);
  CHECK(first.test == second.test);
}

TEST_CASE("subset sizes round half up and never reach zero") {
  CHECK(lexigp::subset_size(537, 0.1) == 54);
  CHECK(lexigp::subset_size(537, 0.2) == 107);
  CHECK(lexigp::subset_size(537, 0.3) == 161);
  CHECK(lexigp::subset_size(100, 0.1) == 10);
  CHECK(lexigp::subset_size(70, 0.3) == 21);
  CHECK(lexigp::subset_size(10, 0.25) == 3);
  CHECK(lexigp::subset_size(10, 1.0) == 10);
  CHECK(lexigp::subset_size(3, 0.001) == 1);
}

TEST_CASE("drawn subsets are distinct in-range training indices") {
  const std::vector<int> train = {3, 5, 8, 13, 21, 34, 55, 89, 144, 233};
  Rng rng(11);
  const auto subset = lexigp::draw_subset(train, 0.5, rng);
  CHECK(subset.level == 0.5);
  CHECK(subset.indices.size() == 5);
  std::set<int> seen;
  for (const int i : subset.indices) {
    CHECK(std::find(train.begin(), train.end(), i) != train.end());
    seen.insert(i);
  }
  CHECK(seen.size() == subset.indices.size());

  Rng replay(11);
  const auto again = lexigp::draw_subset(train, 0.5, replay);
  CHECK(again.indices == subset.indices);
}

TEST_CASE("full-level subsets cover every training case") {
  const std::vector<int> train = {2, 4, 6, 8};
  Rng rng(13);
  const auto subset = lexigp::draw_subset(train, 1.0, rng);
  std::set<int> seen(subset.indices.begin(), subset.indices.end());
  CHECK(seen == std::set<int>(train.begin(), train.end()));
}

TEST_CASE("manifest checking accepts matching shapes and names mismatches") {
  const TempFile manifest_file("");
  {
    std::ofstream out(manifest_file.path);
    out << R"({"uniform": {"dimension": 2, "observations": 30},)"
        << R"( "other": {"dimension": 4, "observations": 99}})";
  }
  const Dataset good = uniform_dataset(30, 2);
  CHECK_NOTHROW(lexigp::check_manifest(good, manifest_file.path.string()));

  const Dataset wrong_shape = uniform_dataset(31, 2);
  CHECK_THROWS_WITH_AS(
      lexigp::check_manifest(wrong_shape, manifest_file.path.string()),
      doctest::Contains("manifest expects"), std::runtime_error);

  Dataset unknown = uniform_dataset(30, 2);
  unknown.name = "mystery";
  try {
    lexigp::check_manifest(unknown, manifest_file.path.string());
    FAIL("expected a manifest failure");
  } catch (const std::exception& error) {
    const std::string message = error.what();
    CHECK(message.find("mystery") != std::string::npos);
    CHECK(message.find("uniform") != std::string::npos);
    CHECK(message.find("other") != std::string::npos);
  }
}

TEST_CASE("bundled reference manifest matches the published shapes") {
  const std::string path =
      std::string(LEXIGP_SOURCE_DIR) + "/data/uci_manifest.json";
  Dataset yacht = uniform_dataset(308, 6);
  yacht.name = "yacht";
  CHECK_NOTHROW(lexigp::check_manifest(yacht, path));
  Dataset housing = uniform_dataset(506, 13);
  housing.name = "housing";
  CHECK_NOTHROW(lexigp::check_manifest(housing, path));
  Dataset enc = uniform_dataset(768, 8);
  enc.name = "enc";
  CHECK_NOTHROW(lexigp::check_manifest(enc, path));
}
