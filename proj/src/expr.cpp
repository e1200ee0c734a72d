#include "lexigp/expr.hpp"

#include <array>
#include <cassert>
#include <charconv>
#include <cmath>
#include <stdexcept>
#include <system_error>

namespace lexigp {

int arity(OpKind kind) {
  switch (kind) {
    case OpKind::kAdd:
    case OpKind::kSub:
    case OpKind::kMul:
    case OpKind::kAq:
      return 2;
    case OpKind::kSin:
    case OpKind::kCos:
      return 1;
    case OpKind::kFeature:
    case OpKind::kConstant:
      return 0;
  }
  return 0;
}

ExpressionTree ExpressionTree::from_prefix(std::vector<Op> ops) {
  if (ops.empty()) throw std::invalid_argument("expression: empty op list");

  // One pass checks well-formedness and computes depth and feature span.
  // `pending` holds, per open node, how many children are still expected.
  ExpressionTree tree;
  std::vector<int> pending;
  int max_depth = 0;
  int max_feature = -1;
  std::size_t consumed = 0;
  for (const Op& op : ops) {
    if (consumed > 0 && pending.empty())
      throw std::invalid_argument("expression: trailing ops after root");
    if (op.kind == OpKind::kFeature && op.feature < 0)
      throw std::invalid_argument("expression: negative feature index");
    max_depth = std::max(max_depth, static_cast<int>(pending.size()));
    if (op.kind == OpKind::kFeature) max_feature = std::max(max_feature, op.feature);
    ++consumed;
    const int n = arity(op.kind);
    if (n > 0) {
      pending.push_back(n);
    } else {
      while (!pending.empty() && --pending.back() == 0) pending.pop_back();
    }
  }
  if (!pending.empty())
    throw std::invalid_argument("expression: missing operands");

  tree.ops_ = std::move(ops);
  tree.depth_ = max_depth;
  tree.required_dimension_ = max_feature + 1;
  return tree;
}

std::pair<int, int> ExpressionTree::subtree_span(int node) const {
  assert(node >= 0 && node < size());
  int open = 1;
  int j = node;
  while (open > 0) {
    open += arity(ops_[static_cast<std::size_t>(j)].kind) - 1;
    ++j;
  }
  return {node, j};
}

void ExpressionTree::validate(int dimension, int max_depth) const {
  if (required_dimension_ > dimension)
    throw std::invalid_argument("expression references feature x" +
                                std::to_string(required_dimension_ - 1) +
                                " but the problem dimension is " +
                                std::to_string(dimension));
  if (depth_ > max_depth)
    throw std::invalid_argument("expression depth " + std::to_string(depth_) +
                                " exceeds the limit of " +
                                std::to_string(max_depth));
}

bool operator==(const ExpressionTree& a, const ExpressionTree& b) {
  if (a.ops_.size() != b.ops_.size()) return false;
  for (std::size_t i = 0; i < a.ops_.size(); ++i) {
    const Op& x = a.ops_[i];
    const Op& y = b.ops_[i];
    if (x.kind != y.kind) return false;
    if (x.kind == OpKind::kFeature && x.feature != y.feature) return false;
    if (x.kind == OpKind::kConstant && x.value != y.value) return false;
  }
  return true;
}

namespace {

std::optional<double> eval_node(std::span<const Op> ops, std::size_t& cursor,
                                std::span<const double> features) {
  const Op& op = ops[cursor++];
  switch (op.kind) {
    // Terminals are checked too: inputs and constants normally arrive
    // finite, but the invalid-marker contract holds for any tree.
    case OpKind::kFeature: {
      const double v = features[static_cast<std::size_t>(op.feature)];
      if (!std::isfinite(v)) return std::nullopt;
      return v;
    }
    case OpKind::kConstant:
      if (!std::isfinite(op.value)) return std::nullopt;
      return op.value;
    case OpKind::kSin:
    case OpKind::kCos: {
      const auto a = eval_node(ops, cursor, features);
      if (!a) return std::nullopt;
      const double r = op.kind == OpKind::kSin ? std::sin(*a) : std::cos(*a);
      if (!std::isfinite(r)) return std::nullopt;
      return r;
    }
    default: {
      const auto a = eval_node(ops, cursor, features);
      const auto b = eval_node(ops, cursor, features);
      if (!a || !b) return std::nullopt;
      double r = 0.0;
      switch (op.kind) {
        case OpKind::kAdd: r = *a + *b; break;
        case OpKind::kSub: r = *a - *b; break;
        case OpKind::kMul: r = *a * *b; break;
        case OpKind::kAq: r = *a / std::sqrt(1.0 + *b * *b); break;
        default: assert(false);
      }
      if (!std::isfinite(r)) return std::nullopt;
      return r;
    }
  }
}

}  // namespace

std::optional<double> evaluate(const ExpressionTree& tree,
                               std::span<const double> features) {
  if (static_cast<int>(features.size()) < tree.required_dimension())
    throw std::invalid_argument("evaluate: feature vector of length " +
                                std::to_string(features.size()) +
                                " is shorter than the required dimension " +
                                std::to_string(tree.required_dimension()));
  std::size_t cursor = 0;
  return eval_node(tree.ops(), cursor, features);
}

namespace {

constexpr std::array<OpKind, 6> kFunctions = {OpKind::kAdd, OpKind::kSub,
                                              OpKind::kMul, OpKind::kAq,
                                              OpKind::kSin, OpKind::kCos};

Op random_terminal(int dimension, Rng& rng) {
  // Terminal choices: one per feature plus the ephemeral constant, which
  // draws its value once at creation and keeps it for life.
  const auto pick = uniform_index(rng, static_cast<std::uint64_t>(dimension) + 1);
  if (pick < static_cast<std::uint64_t>(dimension))
    return Op::x(static_cast<std::int32_t>(pick));
  return Op::constant(uniform_real(rng, -1.0, 1.0));
}

Op random_function(Rng& rng) {
  return {kFunctions[uniform_index(rng, kFunctions.size())]};
}

void build_full(std::vector<Op>& out, int depth, int dimension, Rng& rng) {
  if (depth == 0) {
    out.push_back(random_terminal(dimension, rng));
    return;
  }
  const Op op = random_function(rng);
  out.push_back(op);
  for (int c = 0; c < arity(op.kind); ++c)
    build_full(out, depth - 1, dimension, rng);
}

void build_grow(std::vector<Op>& out, int depth, int dimension, Rng& rng) {
  const double terminal_ratio =
      static_cast<double>(dimension + 1) /
      static_cast<double>(dimension + 1 + static_cast<int>(kFunctions.size()));
  if (depth == 0 || uniform_real(rng, 0.0, 1.0) < terminal_ratio) {
    out.push_back(random_terminal(dimension, rng));
    return;
  }
  const Op op = random_function(rng);
  out.push_back(op);
  for (int c = 0; c < arity(op.kind); ++c)
    build_grow(out, depth - 1, dimension, rng);
}

}  // namespace

ExpressionTree full_tree(int target_depth, int dimension, Rng& rng) {
  std::vector<Op> ops;
  build_full(ops, target_depth, dimension, rng);
  return ExpressionTree::from_prefix(std::move(ops));
}

ExpressionTree grow_tree(int target_depth, int dimension, Rng& rng) {
  std::vector<Op> ops;
  build_grow(ops, target_depth, dimension, rng);
  return ExpressionTree::from_prefix(std::move(ops));
}

std::vector<ExpressionTree> ramped_half_and_half(int count, int dimension,
                                                 Rng& rng) {
  if (count < 1) throw std::invalid_argument("ramped_half_and_half: count < 1");
  if (dimension < 1)
    throw std::invalid_argument("ramped_half_and_half: dimension < 1");
  std::vector<ExpressionTree> trees;
  trees.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const int depth = i % 5;
    const bool full = (i / 5) % 2 == 0;
    trees.push_back(full ? full_tree(depth, dimension, rng)
                         : grow_tree(depth, dimension, rng));
  }
  return trees;
}

namespace {

ExpressionTree splice(const ExpressionTree& host, std::pair<int, int> hole,
                      std::span<const Op> graft) {
  std::vector<Op> ops;
  const auto& h = host.ops();
  ops.reserve(h.size() - static_cast<std::size_t>(hole.second - hole.first) +
              graft.size());
  ops.insert(ops.end(), h.begin(), h.begin() + hole.first);
  ops.insert(ops.end(), graft.begin(), graft.end());
  ops.insert(ops.end(), h.begin() + hole.second, h.end());
  return ExpressionTree::from_prefix(std::move(ops));
}

}  // namespace

std::pair<ExpressionTree, ExpressionTree> subtree_crossover(
    const ExpressionTree& a, const ExpressionTree& b, Rng& rng) {
  // Crossover points are uniform over all nodes, leaves included.
  const int node_a = static_cast<int>(uniform_index(rng, a.size()));
  const int node_b = static_cast<int>(uniform_index(rng, b.size()));
  const auto span_a = a.subtree_span(node_a);
  const auto span_b = b.subtree_span(node_b);
  const auto& ops_a = a.ops();
  const auto& ops_b = b.ops();

  ExpressionTree child_a =
      splice(a, span_a,
             std::span<const Op>(ops_b).subspan(
                 span_b.first, static_cast<std::size_t>(span_b.second - span_b.first)));
  ExpressionTree child_b =
      splice(b, span_b,
             std::span<const Op>(ops_a).subspan(
                 span_a.first, static_cast<std::size_t>(span_a.second - span_a.first)));

  if (child_a.depth() > ExpressionTree::kMaxDepth) child_a = a;
  if (child_b.depth() > ExpressionTree::kMaxDepth) child_b = b;
  return {std::move(child_a), std::move(child_b)};
}

ExpressionTree subtree_mutation(const ExpressionTree& tree, int dimension,
                                Rng& rng) {
  const int node = static_cast<int>(uniform_index(rng, tree.size()));
  const int target = static_cast<int>(uniform_index(rng, 3));
  const ExpressionTree graft = grow_tree(target, dimension, rng);
  ExpressionTree child =
      splice(tree, tree.subtree_span(node), std::span<const Op>(graft.ops()));
  if (child.depth() > ExpressionTree::kMaxDepth) return tree;
  return child;
}

namespace {

void append_double(std::string& out, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, res.ptr);
}

void render(std::span<const Op> ops, std::size_t& cursor, std::string& out) {
  const Op& op = ops[cursor++];
  switch (op.kind) {
    case OpKind::kFeature:
      out += 'x';
      out += std::to_string(op.feature);
      return;
    case OpKind::kConstant:
      append_double(out, op.value);
      return;
    case OpKind::kSin:
    case OpKind::kCos:
      out += op.kind == OpKind::kSin ? "sin(" : "cos(";
      render(ops, cursor, out);
      out += ')';
      return;
    default: {
      switch (op.kind) {
        case OpKind::kAdd: out += "add("; break;
        case OpKind::kSub: out += "sub("; break;
        case OpKind::kMul: out += "mul("; break;
        case OpKind::kAq: out += "aq("; break;
        default: assert(false);
      }
      render(ops, cursor, out);
      out += ", ";
      render(ops, cursor, out);
      out += ')';
      return;
    }
  }
}

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  std::vector<Op> parse() {
    std::vector<Op> ops;
    node(ops);
    skip_ws();
    if (pos_ != text_.size()) fail("trailing characters");
    return ops;
  }

 private:
  void node(std::vector<Op>& ops) {
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    const char c = text_[pos_];
    if (c == 'x' && pos_ + 1 < text_.size() && is_digit(text_[pos_ + 1])) {
      ++pos_;
      ops.push_back(Op::x(parse_int()));
      return;
    }
    if (is_digit(c) || c == '-' || c == '+' || c == '.') {
      ops.push_back(Op::constant(parse_double()));
      return;
    }
    const std::string_view name = parse_name();
    Op op;
    if (name == "add") op = Op::add();
    else if (name == "sub") op = Op::sub();
    else if (name == "mul") op = Op::mul();
    else if (name == "aq") op = Op::aq();
    else if (name == "sin") op = Op::sin();
    else if (name == "cos") op = Op::cos();
    else fail("unknown function '" + std::string(name) + "'");
    ops.push_back(op);
    expect('(');
    node(ops);
    for (int c2 = 1; c2 < arity(op.kind); ++c2) {
      expect(',');
      node(ops);
    }
    expect(')');
  }

  static bool is_digit(char c) { return c >= '0' && c <= '9'; }

  void skip_ws() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t'))
      ++pos_;
  }

  void expect(char c) {
    skip_ws();
    if (pos_ >= text_.size() || text_[pos_] != c)
      fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  std::string_view parse_name() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && text_[pos_] >= 'a' && text_[pos_] <= 'z')
      ++pos_;
    if (pos_ == start) fail("expected a function or terminal");
    return text_.substr(start, pos_ - start);
  }

  std::int32_t parse_int() {
    std::int32_t value = 0;
    const auto res =
        std::from_chars(text_.data() + pos_, text_.data() + text_.size(), value);
    if (res.ec != std::errc()) fail("bad feature index");
    pos_ = static_cast<std::size_t>(res.ptr - text_.data());
    return value;
  }

  double parse_double() {
    double value = 0.0;
    const auto res =
        std::from_chars(text_.data() + pos_, text_.data() + text_.size(), value);
    if (res.ec != std::errc()) fail("bad numeric literal");
    pos_ = static_cast<std::size_t>(res.ptr - text_.data());
    return value;
  }

  [[noreturn]] void fail(const std::string& what) {
    throw std::invalid_argument("parse error at offset " +
                                std::to_string(pos_) + ": " + what);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string canonical_string(const ExpressionTree& tree) {
  std::string out;
  out.reserve(static_cast<std::size_t>(tree.size()) * 6);
  std::size_t cursor = 0;
  render(tree.ops(), cursor, out);
  return out;
}

ExpressionTree parse_expression(std::string_view text, int dimension) {
  ExpressionTree tree = ExpressionTree::from_prefix(Parser(text).parse());
  if (dimension >= 0) tree.validate(dimension);
  else tree.validate(tree.required_dimension());
  return tree;
}

}  // namespace lexigp
