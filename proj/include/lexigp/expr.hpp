#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lexigp/rng.hpp"

namespace lexigp {

// Primitive set: four binary functions (the quotient is the analytic
// quotient aq(a, b) = a / sqrt(1 + b^2), which is total), two unary
// trigonometric functions, feature terminals and ephemeral constants.
enum class OpKind : std::uint8_t {
  kAdd,
  kSub,
  kMul,
  kAq,
  kSin,
  kCos,
  kFeature,
  kConstant,
};

int arity(OpKind kind);

struct Op {
  OpKind kind;
  std::int32_t feature = 0;  // kFeature payload
  double value = 0.0;        // kConstant payload

  static Op add() { return {OpKind::kAdd}; }
  static Op sub() { return {OpKind::kSub}; }
  static Op mul() { return {OpKind::kMul}; }
  static Op aq() { return {OpKind::kAq}; }
  static Op sin() { return {OpKind::kSin}; }
  static Op cos() { return {OpKind::kCos}; }
  static Op x(std::int32_t index) { return {OpKind::kFeature, index}; }
  static Op constant(double v) { return {OpKind::kConstant, 0, v}; }
};

// A program individual stored as a prefix-order sequence of ops. Immutable
// after construction; a subtree is a contiguous slice, which keeps the
// variation operators to simple splices. A lone terminal has depth 0.
class ExpressionTree {
 public:
  static constexpr int kMaxDepth = 17;

  ExpressionTree() : ops_{Op::constant(0.0)} {}

  // Validates that `ops` encodes exactly one expression (arities consume
  // the sequence completely). Throws std::invalid_argument otherwise.
  static ExpressionTree from_prefix(std::vector<Op> ops);

  const std::vector<Op>& ops() const { return ops_; }
  int size() const { return static_cast<int>(ops_.size()); }
  int depth() const { return depth_; }

  // 1 + the largest feature index referenced; 0 for constant-only trees.
  int required_dimension() const { return required_dimension_; }

  // [begin, end) of the subtree rooted at node index `node`.
  std::pair<int, int> subtree_span(int node) const;

  // Throws if a feature index is out of range for `dimension` or the tree
  // exceeds the depth limit.
  void validate(int dimension, int max_depth = kMaxDepth) const;

  friend bool operator==(const ExpressionTree&, const ExpressionTree&);

 private:
  std::vector<Op> ops_;
  int depth_ = 0;
  int required_dimension_ = 0;
};

// Evaluates the tree on one feature vector. Returns nullopt (the invalid
// marker) if any intermediate or final value is non-finite; a plain NaN or
// infinity never escapes. Throws if `features` is shorter than the tree's
// required dimension.
std::optional<double> evaluate(const ExpressionTree& tree,
                               std::span<const double> features);

// Population initialization: target depths cycle over 0..4 and each block
// of five trees alternates between full and grow construction.
std::vector<ExpressionTree> ramped_half_and_half(int count, int dimension,
                                                 Rng& rng);

// Single trees, used by initialization and by subtree mutation.
ExpressionTree full_tree(int target_depth, int dimension, Rng& rng);
ExpressionTree grow_tree(int target_depth, int dimension, Rng& rng);

// Swaps one uniformly chosen subtree between the parents. An offspring
// deeper than the depth limit is replaced by its corresponding parent.
std::pair<ExpressionTree, ExpressionTree> subtree_crossover(
    const ExpressionTree& a, const ExpressionTree& b, Rng& rng);

// Replaces one uniformly chosen subtree with a fresh grow tree of depth
// <= 2. Returns the input unchanged if the result would exceed the depth
// limit.
ExpressionTree subtree_mutation(const ExpressionTree& tree, int dimension,
                                Rng& rng);

// Deterministic prefix rendering, e.g. "add(x0, mul(x1, -0.5))". Constants
// are printed with shortest round-trip precision, so two trees render
// equal strings iff they are structurally equal.
std::string canonical_string(const ExpressionTree& tree);

// Inverse of canonical_string. `dimension` < 0 skips the feature-range
// check. Throws std::invalid_argument with position information on
// malformed input.
ExpressionTree parse_expression(std::string_view text, int dimension = -1);

}  // namespace lexigp
