#pragma once

// Money functions m(l1..ln) as immutable expression trees.
//
// Grammar (see docs/grammar.md):
//
//   expr    = term { ("+" | "-") term } ;
//   term    = unary { ("*" | "/") unary } ;
//   unary   = "-" unary | power ;
//   power   = primary [ "^" unary ] ;          (right associative)
//   primary = number | identifier | "ln" "(" expr ")" | "(" expr ")" ;
//
// Identifiers match [a-z][a-z0-9]*. "l<k>" is variable k (1-based); every other
// identifier is a named constant bound at evaluation time. Subtraction and
// division are sugar: a - b == a + (-1)*b and a / b == a * b^(-1).

#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace ecotherm {

using ConstantMap = std::map<std::string, double, std::less<>>;

struct ExprNode;
using NodePtr = std::shared_ptr<const ExprNode>;

namespace node {
struct Number {
  double value;
};
struct Constant {
  std::string name;
};
struct Variable {
  std::size_t index;  // 1-based
};
struct Add {
  NodePtr lhs, rhs;
};
struct Mul {
  NodePtr lhs, rhs;
};
// Exponent must be free of variables; it may reference named constants.
struct Pow {
  NodePtr base, exponent;
};
struct Ln {
  NodePtr arg;
};
}  // namespace node

struct ExprNode {
  std::variant<node::Number, node::Constant, node::Variable, node::Add, node::Mul, node::Pow,
               node::Ln>
      data;
};

NodePtr make_number(double value);
NodePtr make_constant(std::string name);
NodePtr make_variable(std::size_t index);
NodePtr make_add(NodePtr lhs, NodePtr rhs);
NodePtr make_mul(NodePtr lhs, NodePtr rhs);
NodePtr make_pow(NodePtr base, NodePtr exponent);
NodePtr make_ln(NodePtr arg);

// A money function over n_vars microeconomic variables.
class MoneyExpr {
public:
  // Throws Error if a variable index is outside 1..n_vars or a power exponent
  // references a variable.
  MoneyExpr(NodePtr root, std::size_t n_vars);

  const ExprNode& root() const noexcept { return *root_; }
  const NodePtr& root_ptr() const noexcept { return root_; }
  std::size_t n_vars() const noexcept { return n_vars_; }

  friend bool operator==(const MoneyExpr& a, const MoneyExpr& b);

private:
  NodePtr root_;
  std::size_t n_vars_;
};

bool structurally_equal(const ExprNode& a, const ExprNode& b);

// Throws ParseError (syntax, unknown identifier, variable index out of range).
// When known_constants is given, any other named constant is rejected.
MoneyExpr parse_money_fn(std::string_view text, std::size_t n_vars,
                         const std::set<std::string, std::less<>>* known_constants = nullptr);

// Canonical, fully parenthesized text. parse(to_string(e)) == e.
std::string to_string(const MoneyExpr& expr);

// Throws EvalError on dimension mismatch, unbound constant, or ln of a
// non-positive value.
double eval_money_fn(const MoneyExpr& expr, std::span<const double> point,
                     const ConstantMap& constants);

std::vector<std::size_t> referenced_variables(const MoneyExpr& expr);
std::set<std::string, std::less<>> referenced_constants(const MoneyExpr& expr);

// Partition of the referenced variables into groups whose terms add up
// independently: m = sum_g m_g(l_g) (+ a variable-free part). A single group
// holding every referenced variable means no split exists. Groups and their
// members are sorted ascending.
std::vector<std::vector<std::size_t>> detect_separability(const MoneyExpr& expr);

struct SeparatedExpr {
  struct Group {
    std::vector<std::size_t> variables;
    NodePtr money;  // sum of the terms touching these variables
  };
  NodePtr constant_part;  // may be null
  std::vector<Group> groups;
};

// Splits the top-level sum along detect_separability. Each group expression
// keeps the original n_vars indexing.
SeparatedExpr separate(const MoneyExpr& expr);

// Expression compiled against a fixed constant map. Variable-free subtrees are
// folded at bind time. Cheap to copy; safe to call concurrently.
class BoundExpr {
public:
  double operator()(std::span<const double> point) const;
  std::size_t n_vars() const noexcept { return n_vars_; }

private:
  friend BoundExpr bind_constants(const MoneyExpr&, const ConstantMap&);
  friend BoundExpr bind_constants(const NodePtr&, std::size_t, const ConstantMap&);

  enum class Op : unsigned char { push, var, add, mul, pow, ln };
  struct Instr {
    Op op;
    std::size_t var = 0;  // 0-based
    double value = 0.0;
  };

  std::vector<Instr> code_;
  std::size_t max_depth_ = 0;
  std::size_t n_vars_ = 0;
};

// Throws EvalError on unbound constants, non-finite exponents, or folded
// constant subtrees that are invalid (ln of a non-positive constant).
BoundExpr bind_constants(const MoneyExpr& expr, const ConstantMap& constants);
BoundExpr bind_constants(const NodePtr& root, std::size_t n_vars, const ConstantMap& constants);

}  // namespace ecotherm
