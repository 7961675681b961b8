#include "ecotherm/expr.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "ecotherm/error.hpp"

namespace ecotherm {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

NodePtr make(auto&& alternative) {
  return std::make_shared<const ExprNode>(ExprNode{std::forward<decltype(alternative)>(alternative)});
}

void collect_variables(const ExprNode& n, std::set<std::size_t>& out) {
  std::visit(overloaded{
                 [](const node::Number&) {},
                 [](const node::Constant&) {},
                 [&](const node::Variable& v) { out.insert(v.index); },
                 [&](const node::Add& a) {
                   collect_variables(*a.lhs, out);
                   collect_variables(*a.rhs, out);
                 },
                 [&](const node::Mul& m) {
                   collect_variables(*m.lhs, out);
                   collect_variables(*m.rhs, out);
                 },
                 [&](const node::Pow& p) {
                   collect_variables(*p.base, out);
                   collect_variables(*p.exponent, out);
                 },
                 [&](const node::Ln& l) { collect_variables(*l.arg, out); },
             },
             n.data);
}

void collect_constants(const ExprNode& n, std::set<std::string, std::less<>>& out) {
  std::visit(overloaded{
                 [](const node::Number&) {},
                 [&](const node::Constant& c) { out.insert(c.name); },
                 [](const node::Variable&) {},
                 [&](const node::Add& a) {
                   collect_constants(*a.lhs, out);
                   collect_constants(*a.rhs, out);
                 },
                 [&](const node::Mul& m) {
                   collect_constants(*m.lhs, out);
                   collect_constants(*m.rhs, out);
                 },
                 [&](const node::Pow& p) {
                   collect_constants(*p.base, out);
                   collect_constants(*p.exponent, out);
                 },
                 [&](const node::Ln& l) { collect_constants(*l.arg, out); },
             },
             n.data);
}

bool has_variables(const ExprNode& n) {
  std::set<std::size_t> vars;
  collect_variables(n, vars);
  return !vars.empty();
}

void validate(const ExprNode& n, std::size_t n_vars) {
  std::visit(overloaded{
                 [](const node::Number& x) {
                   if (!std::isfinite(x.value)) throw Error("non-finite numeric literal");
                 },
                 [](const node::Constant&) {},
                 [&](const node::Variable& v) {
                   if (v.index < 1 || v.index > n_vars)
                     throw Error("variable index l" + std::to_string(v.index) +
                                 " out of range 1.." + std::to_string(n_vars));
                 },
                 [&](const node::Add& a) {
                   validate(*a.lhs, n_vars);
                   validate(*a.rhs, n_vars);
                 },
                 [&](const node::Mul& m) {
                   validate(*m.lhs, n_vars);
                   validate(*m.rhs, n_vars);
                 },
                 [&](const node::Pow& p) {
                   validate(*p.base, n_vars);
                   validate(*p.exponent, n_vars);
                   if (has_variables(*p.exponent))
                     throw Error("power exponent must not depend on variables");
                 },
                 [&](const node::Ln& l) { validate(*l.arg, n_vars); },
             },
             n.data);
}

// ---------------------------------------------------------------------------
// Parser

class Parser {
public:
  Parser(std::string_view text, std::size_t n_vars,
         const std::set<std::string, std::less<>>* known)
      : text_(text), n_vars_(n_vars), known_(known) {}

  NodePtr parse() {
    skip_space();
    if (pos_ == text_.size()) throw ParseError("empty expression", pos_);
    NodePtr e = expr();
    skip_space();
    if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return e;
  }

private:
  [[noreturn]] void fail(const std::string& message) const { throw ParseError(message, pos_); }

  void skip_space() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' ||
                                   text_[pos_] == '\n' || text_[pos_] == '\r'))
      ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr expr() {
    NodePtr lhs = term();
    for (;;) {
      if (accept('+')) {
        lhs = make_add(lhs, term());
      } else if (accept('-')) {
        lhs = make_add(lhs, negate(term()));
      } else {
        return lhs;
      }
    }
  }

  NodePtr term() {
    NodePtr lhs = unary();
    for (;;) {
      if (accept('*')) {
        lhs = make_mul(lhs, unary());
      } else if (accept('/')) {
        lhs = make_mul(lhs, make_pow(unary(), make_number(-1.0)));
      } else {
        return lhs;
      }
    }
  }

  NodePtr unary() {
    if (accept('-')) return negate(unary());
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    skip_space();
    if (accept('^')) {
      std::size_t at = pos_;
      NodePtr exponent = unary();
      if (has_variables(*exponent))
        throw ParseError("power exponent must not depend on variables", at);
      return make_pow(base, exponent);
    }
    return base;
  }

  NodePtr primary() {
    skip_space();
    if (pos_ == text_.size()) fail("unexpected end of expression");
    char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr inner = expr();
      if (!accept(')')) fail("expected ')'");
      return inner;
    }
    if ((c >= '0' && c <= '9') || c == '.') return number();
    if (c >= 'a' && c <= 'z') return identifier();
    fail("unexpected '" + std::string(1, c) + "'");
  }

  NodePtr number() {
    std::size_t start = pos_;
    while (pos_ < text_.size() && ((text_[pos_] >= '0' && text_[pos_] <= '9') || text_[pos_] == '.'))
      ++pos_;
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t mark = pos_++;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      if (pos_ < text_.size() && text_[pos_] >= '0' && text_[pos_] <= '9') {
        while (pos_ < text_.size() && text_[pos_] >= '0' && text_[pos_] <= '9') ++pos_;
      } else {
        pos_ = mark;  // "2e" is not an exponent; let the caller choke on 'e'
      }
    }
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, value);
    if (ec != std::errc() || ptr != text_.data() + pos_) {
      pos_ = start;
      fail("malformed number");
    }
    if (!std::isfinite(value)) {
      pos_ = start;
      fail("numeric literal out of range");
    }
    return make_number(value);
  }

  NodePtr identifier() {
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           ((text_[pos_] >= 'a' && text_[pos_] <= 'z') || (text_[pos_] >= '0' && text_[pos_] <= '9')))
      ++pos_;
    std::string name(text_.substr(start, pos_ - start));
    skip_space();
    bool call = pos_ < text_.size() && text_[pos_] == '(';

    if (name == "ln") {
      if (!call) fail("'ln' requires a parenthesized argument");
      ++pos_;
      NodePtr arg = expr();
      if (!accept(')')) fail("expected ')'");
      return make_ln(arg);
    }
    if (call) throw ParseError("unknown identifier '" + name + "'", start);

    if (name.size() > 1 && name[0] == 'l' &&
        std::all_of(name.begin() + 1, name.end(), [](char d) { return d >= '0' && d <= '9'; })) {
      std::size_t index = 0;
      auto [ptr, ec] = std::from_chars(name.data() + 1, name.data() + name.size(), index);
      if (ec != std::errc() || index < 1 || index > n_vars_)
        throw ParseError("variable index out of range: '" + name + "' (n_vars = " +
                             std::to_string(n_vars_) + ")",
                         start);
      return make_variable(index);
    }
    if (known_ != nullptr && !known_->contains(name))
      throw ParseError("unknown identifier '" + name + "'", start);
    return make_constant(std::move(name));
  }

  static NodePtr negate(NodePtr operand) {
    if (const auto* num = std::get_if<node::Number>(&operand->data)) return make_number(-num->value);
    return make_mul(make_number(-1.0), operand);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t n_vars_;
  const std::set<std::string, std::less<>>* known_;
};

// ---------------------------------------------------------------------------
// Printing

std::string format_number(double v) {
  std::array<char, 40> buf{};
  const auto end = std::to_chars(buf.data(), buf.data() + buf.size(), v).ptr;
  std::string s(buf.data(), end);
  if (v < 0 || (v == 0 && std::signbit(v))) return "(" + s + ")";
  return s;
}

void print(const ExprNode& n, std::string& out) {
  std::visit(overloaded{
                 [&](const node::Number& x) { out += format_number(x.value); },
                 [&](const node::Constant& c) { out += c.name; },
                 [&](const node::Variable& v) { out += "l" + std::to_string(v.index); },
                 [&](const node::Add& a) {
                   out += '(';
                   print(*a.lhs, out);
                   out += " + ";
                   print(*a.rhs, out);
                   out += ')';
                 },
                 [&](const node::Mul& m) {
                   out += '(';
                   print(*m.lhs, out);
                   out += " * ";
                   print(*m.rhs, out);
                   out += ')';
                 },
                 [&](const node::Pow& p) {
                   out += '(';
                   print(*p.base, out);
                   out += " ^ ";
                   print(*p.exponent, out);
                   out += ')';
                 },
                 [&](const node::Ln& l) {
                   out += "ln(";
                   print(*l.arg, out);
                   out += ')';
                 },
             },
             n.data);
}

// ---------------------------------------------------------------------------
// Evaluation

double checked_ln(double x) {
  if (!(x > 0.0)) {
    std::array<char, 40> buf{};
    std::snprintf(buf.data(), buf.size(), "%.17g", x);
    throw EvalError(std::string("ln of non-positive value ") + buf.data());
  }
  return std::log(x);
}

double checked_pow(double base, double exponent) {
  if (base < 0.0 && exponent != std::nearbyint(exponent))
    throw EvalError("non-integer power of a negative value");
  return std::pow(base, exponent);
}

double eval_node(const ExprNode& n, std::span<const double> point, const ConstantMap& constants) {
  return std::visit(
      overloaded{
          [](const node::Number& x) { return x.value; },
          [&](const node::Constant& c) {
            auto it = constants.find(c.name);
            if (it == constants.end()) throw EvalError("missing constant '" + c.name + "'");
            return it->second;
          },
          [&](const node::Variable& v) { return point[v.index - 1]; },
          [&](const node::Add& a) {
            return eval_node(*a.lhs, point, constants) + eval_node(*a.rhs, point, constants);
          },
          [&](const node::Mul& m) {
            return eval_node(*m.lhs, point, constants) * eval_node(*m.rhs, point, constants);
          },
          [&](const node::Pow& p) {
            return checked_pow(eval_node(*p.base, point, constants),
                               eval_node(*p.exponent, point, constants));
          },
          [&](const node::Ln& l) { return checked_ln(eval_node(*l.arg, point, constants)); },
      },
      n.data);
}

void flatten_sum(const NodePtr& n, std::vector<NodePtr>& terms) {
  if (const auto* a = std::get_if<node::Add>(&n->data)) {
    flatten_sum(a->lhs, terms);
    flatten_sum(a->rhs, terms);
  } else {
    terms.push_back(n);
  }
}

}  // namespace

// ---------------------------------------------------------------------------

NodePtr make_number(double value) { return make(node::Number{value}); }
NodePtr make_constant(std::string name) { return make(node::Constant{std::move(name)}); }
NodePtr make_variable(std::size_t index) { return make(node::Variable{index}); }
NodePtr make_add(NodePtr lhs, NodePtr rhs) { return make(node::Add{std::move(lhs), std::move(rhs)}); }
NodePtr make_mul(NodePtr lhs, NodePtr rhs) { return make(node::Mul{std::move(lhs), std::move(rhs)}); }
NodePtr make_pow(NodePtr base, NodePtr exponent) {
  return make(node::Pow{std::move(base), std::move(exponent)});
}
NodePtr make_ln(NodePtr arg) { return make(node::Ln{std::move(arg)}); }

MoneyExpr::MoneyExpr(NodePtr root, std::size_t n_vars) : root_(std::move(root)), n_vars_(n_vars) {
  if (!root_) throw Error("empty expression");
  if (n_vars_ == 0) throw Error("n_vars must be positive");
  validate(*root_, n_vars_);
}

bool structurally_equal(const ExprNode& a, const ExprNode& b) {
  if (a.data.index() != b.data.index()) return false;
  return std::visit(
      overloaded{
          [&](const node::Number& x) {
            const auto& y = std::get<node::Number>(b.data);
            return x.value == y.value && std::signbit(x.value) == std::signbit(y.value);
          },
          [&](const node::Constant& x) { return x.name == std::get<node::Constant>(b.data).name; },
          [&](const node::Variable& x) { return x.index == std::get<node::Variable>(b.data).index; },
          [&](const node::Add& x) {
            const auto& y = std::get<node::Add>(b.data);
            return structurally_equal(*x.lhs, *y.lhs) && structurally_equal(*x.rhs, *y.rhs);
          },
          [&](const node::Mul& x) {
            const auto& y = std::get<node::Mul>(b.data);
            return structurally_equal(*x.lhs, *y.lhs) && structurally_equal(*x.rhs, *y.rhs);
          },
          [&](const node::Pow& x) {
            const auto& y = std::get<node::Pow>(b.data);
            return structurally_equal(*x.base, *y.base) &&
                   structurally_equal(*x.exponent, *y.exponent);
          },
          [&](const node::Ln& x) {
            return structurally_equal(*x.arg, *std::get<node::Ln>(b.data).arg);
          },
      },
      a.data);
}

bool operator==(const MoneyExpr& a, const MoneyExpr& b) {
  return a.n_vars_ == b.n_vars_ && structurally_equal(*a.root_, *b.root_);
}

MoneyExpr parse_money_fn(std::string_view text, std::size_t n_vars,
                         const std::set<std::string, std::less<>>* known_constants) {
  if (n_vars == 0) throw ParseError("n_vars must be positive", 0);
  Parser parser(text, n_vars, known_constants);
  return MoneyExpr(parser.parse(), n_vars);
}

std::string to_string(const MoneyExpr& expr) {
  std::string out;
  print(expr.root(), out);
  return out;
}

double eval_money_fn(const MoneyExpr& expr, std::span<const double> point,
                     const ConstantMap& constants) {
  if (point.size() != expr.n_vars())
    throw EvalError("point has " + std::to_string(point.size()) + " coordinates, expected " +
                    std::to_string(expr.n_vars()));
  return eval_node(expr.root(), point, constants);
}

std::vector<std::size_t> referenced_variables(const MoneyExpr& expr) {
  std::set<std::size_t> vars;
  collect_variables(expr.root(), vars);
  return {vars.begin(), vars.end()};
}

std::set<std::string, std::less<>> referenced_constants(const MoneyExpr& expr) {
  std::set<std::string, std::less<>> names;
  collect_constants(expr.root(), names);
  return names;
}

SeparatedExpr separate(const MoneyExpr& expr) {
  std::vector<NodePtr> terms;
  flatten_sum(expr.root_ptr(), terms);

  const std::size_t n = expr.n_vars();
  std::vector<std::size_t> parent(n + 1);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };

  std::vector<std::set<std::size_t>> term_vars(terms.size());
  std::set<std::size_t> all;
  for (std::size_t t = 0; t < terms.size(); ++t) {
    collect_variables(*terms[t], term_vars[t]);
    if (term_vars[t].empty()) continue;
    std::size_t first = *term_vars[t].begin();
    for (std::size_t v : term_vars[t]) {
      all.insert(v);
      parent[find(v)] = find(first);
    }
  }

  SeparatedExpr out;
  std::map<std::size_t, std::size_t> group_of_root;
  for (std::size_t v : all) {
    std::size_t r = find(v);
    auto [it, inserted] = group_of_root.try_emplace(r, out.groups.size());
    if (inserted) out.groups.push_back({});
    out.groups[it->second].variables.push_back(v);
  }
  for (std::size_t t = 0; t < terms.size(); ++t) {
    if (term_vars[t].empty()) {
      out.constant_part = out.constant_part ? make_add(out.constant_part, terms[t]) : terms[t];
      continue;
    }
    auto& g = out.groups[group_of_root.at(find(*term_vars[t].begin()))];
    g.money = g.money ? make_add(g.money, terms[t]) : terms[t];
  }
  std::sort(out.groups.begin(), out.groups.end(),
            [](const auto& a, const auto& b) { return a.variables.front() < b.variables.front(); });
  return out;
}

std::vector<std::vector<std::size_t>> detect_separability(const MoneyExpr& expr) {
  std::vector<std::vector<std::size_t>> groups;
  for (auto& g : separate(expr).groups) groups.push_back(std::move(g.variables));
  return groups;
}

// ---------------------------------------------------------------------------
// Bound (compiled) expressions

BoundExpr bind_constants(const NodePtr& root, std::size_t n_vars, const ConstantMap& constants) {
  BoundExpr out;
  out.n_vars_ = n_vars;

  // Recursive emission with constant folding of variable-free subtrees.
  std::function<void(const ExprNode&)> go = [&](const ExprNode& n) {
    if (!has_variables(n)) {
      double v = eval_node(n, {}, constants);
      if (!std::isfinite(v)) throw EvalError("constant subexpression is not finite");
      out.code_.push_back({BoundExpr::Op::push, 0, v});
      return;
    }
    std::visit(overloaded{
                   [](const node::Number&) {},
                   [](const node::Constant&) {},
                   [&](const node::Variable& v) {
                     out.code_.push_back({BoundExpr::Op::var, v.index - 1, 0.0});
                   },
                   [&](const node::Add& a) {
                     go(*a.lhs);
                     go(*a.rhs);
                     out.code_.push_back({BoundExpr::Op::add});
                   },
                   [&](const node::Mul& m) {
                     go(*m.lhs);
                     go(*m.rhs);
                     out.code_.push_back({BoundExpr::Op::mul});
                   },
                   [&](const node::Pow& p) {
                     go(*p.base);
                     go(*p.exponent);
                     out.code_.push_back({BoundExpr::Op::pow});
                   },
                   [&](const node::Ln& l) {
                     go(*l.arg);
                     out.code_.push_back({BoundExpr::Op::ln});
                   },
               },
               n.data);
  };
  go(*root);

  std::size_t depth = 0;
  for (const auto& ins : out.code_) {
    switch (ins.op) {
      case BoundExpr::Op::push:
      case BoundExpr::Op::var:
        out.max_depth_ = std::max(out.max_depth_, ++depth);
        break;
      case BoundExpr::Op::add:
      case BoundExpr::Op::mul:
      case BoundExpr::Op::pow:
        --depth;
        break;
      case BoundExpr::Op::ln:
        break;
    }
  }
  return out;
}

BoundExpr bind_constants(const MoneyExpr& expr, const ConstantMap& constants) {
  return bind_constants(expr.root_ptr(), expr.n_vars(), constants);
}

double BoundExpr::operator()(std::span<const double> point) const {
  constexpr std::size_t inline_depth = 32;
  std::array<double, inline_depth> small{};
  std::vector<double> large;
  double* stack = small.data();
  if (max_depth_ > inline_depth) {
    large.resize(max_depth_);
    stack = large.data();
  }
  std::size_t top = 0;
  for (const auto& ins : code_) {
    switch (ins.op) {
      case Op::push:
        stack[top++] = ins.value;
        break;
      case Op::var:
        stack[top++] = point[ins.var];
        break;
      case Op::add:
        --top;
        stack[top - 1] += stack[top];
        break;
      case Op::mul:
        --top;
        stack[top - 1] *= stack[top];
        break;
      case Op::pow:
        --top;
        stack[top - 1] = checked_pow(stack[top - 1], stack[top]);
        break;
      case Op::ln:
        stack[top - 1] = checked_ln(stack[top - 1]);
        break;
    }
  }
  return stack[0];
}

}  // namespace ecotherm
