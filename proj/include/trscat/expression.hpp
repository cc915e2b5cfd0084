#pragma once

// Recursive-descent parser for potentials written as text, e.g.
//   "10+5*cos(4*pi*x)+5*tanh(x)*cos(2*pi*x)"
//
// expr    ::= term { ("+" | "-") term }
// term    ::= unary { ("*" | "/") unary }
// unary   ::= "-" unary | "+" unary | power
// power   ::= primary [ "^" unary ]          (right-associative)
// primary ::= number | "x" | "pi" | func "(" expr ")" | "(" expr ")"
// func    ::= cos | sin | tanh | exp | sqrt | abs

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <memory>
#include <string>
#include <string_view>
#include <variant>

#include "trscat/core.hpp"

namespace trscat {

class ParseError : public InputError {
public:
  ParseError(const std::string& what, std::size_t offset)
      : InputError(what + " at offset " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

private:
  std::size_t offset_;
};

enum class Func { Cos, Sin, Tanh, Exp, Sqrt, Abs };

inline constexpr std::array<std::pair<std::string_view, Func>, 6> kFunctions{{
    {"cos", Func::Cos},
    {"sin", Func::Sin},
    {"tanh", Func::Tanh},
    {"exp", Func::Exp},
    {"sqrt", Func::Sqrt},
    {"abs", Func::Abs},
}};

inline std::string_view func_name(Func f) {
  for (const auto& [name, id] : kFunctions)
    if (id == f) return name;
  return "?";
}

struct ExprNode;
using ExprPtr = std::shared_ptr<const ExprNode>;

struct NumberNode { double value; };
struct VarNode {};
struct NegNode { ExprPtr arg; };
struct BinaryNode { char op; ExprPtr lhs, rhs; };
struct CallNode { Func func; ExprPtr arg; };

struct ExprNode {
  std::variant<NumberNode, VarNode, NegNode, BinaryNode, CallNode> node;
};

/// Immutable parsed expression in the single variable x.
class Expression {
public:
  Expression() = default;

  static Expression parse(std::string_view text);

  double operator()(double x) const { return eval(*root_, x); }

  /// Fully parenthesized text that reparses to an equivalent tree.
  std::string to_string() const { return print(*root_); }

  const std::string& source() const noexcept { return source_; }

private:
  friend class ExpressionParser;

  static double eval(const ExprNode& n, double x) {
    return std::visit(
        [x](const auto& v) -> double {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, NumberNode>) {
            return v.value;
          } else if constexpr (std::is_same_v<T, VarNode>) {
            return x;
          } else if constexpr (std::is_same_v<T, NegNode>) {
            return -eval(*v.arg, x);
          } else if constexpr (std::is_same_v<T, BinaryNode>) {
            const double a = eval(*v.lhs, x);
            const double b = eval(*v.rhs, x);
            switch (v.op) {
              case '+': return a + b;
              case '-': return a - b;
              case '*': return a * b;
              case '/': return a / b;
              default: return std::pow(a, b);
            }
          } else {
            const double a = eval(*v.arg, x);
            switch (v.func) {
              case Func::Cos: return std::cos(a);
              case Func::Sin: return std::sin(a);
              case Func::Tanh: return std::tanh(a);
              case Func::Exp: return std::exp(a);
              case Func::Sqrt: return std::sqrt(a);
              default: return std::abs(a);
            }
          }
        },
        n.node);
  }

  static std::string print(const ExprNode& n) {
    return std::visit(
        [](const auto& v) -> std::string {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, NumberNode>) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.17g", v.value);
            return buf;
          } else if constexpr (std::is_same_v<T, VarNode>) {
            return "x";
          } else if constexpr (std::is_same_v<T, NegNode>) {
            return "(-" + print(*v.arg) + ")";
          } else if constexpr (std::is_same_v<T, BinaryNode>) {
            return "(" + print(*v.lhs) + v.op + print(*v.rhs) + ")";
          } else {
            return std::string(func_name(v.func)) + "(" + print(*v.arg) + ")";
          }
        },
        n.node);
  }

  ExprPtr root_ = std::make_shared<const ExprNode>(ExprNode{NumberNode{0.0}});
  std::string source_ = "0";
};

class ExpressionParser {
public:
  explicit ExpressionParser(std::string_view text) : text_(text) {}

  Expression run() {
    if (text_.find_first_not_of(" \t\r\n") == std::string_view::npos)
      throw ParseError("empty expression", 0);
    Expression e;
    e.root_ = expr();
    skip_ws();
    if (pos_ != text_.size())
      throw ParseError(std::string("unexpected '") + text_[pos_] + "'", pos_);
    e.source_ = std::string(text_);
    return e;
  }

private:
  static ExprPtr make(auto node) {
    return std::make_shared<const ExprNode>(ExprNode{std::move(node)});
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) {
      if (pos_ >= text_.size())
        throw ParseError(std::string("expected '") + c + "' but input ended", pos_);
      throw ParseError(std::string("expected '") + c + "'", pos_);
    }
  }

  ExprPtr expr() {
    ExprPtr lhs = term();
    for (;;) {
      if (accept('+')) lhs = make(BinaryNode{'+', lhs, term()});
      else if (accept('-')) lhs = make(BinaryNode{'-', lhs, term()});
      else return lhs;
    }
  }

  ExprPtr term() {
    ExprPtr lhs = unary();
    for (;;) {
      if (accept('*')) lhs = make(BinaryNode{'*', lhs, unary()});
      else if (accept('/')) lhs = make(BinaryNode{'/', lhs, unary()});
      else return lhs;
    }
  }

  ExprPtr unary() {
    if (accept('-')) return make(NegNode{unary()});
    if (accept('+')) return unary();
    return power();
  }

  ExprPtr power() {
    ExprPtr base = primary();
    if (accept('^')) return make(BinaryNode{'^', base, unary()});
    return base;
  }

  ExprPtr primary() {
    skip_ws();
    if (pos_ >= text_.size()) throw ParseError("unexpected end of input", pos_);
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      ExprPtr inner = expr();
      expect(')');
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    throw ParseError(std::string("unexpected '") + c + "'", pos_);
  }

  ExprPtr number() {
    const std::size_t start = pos_;
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text_.data() + pos_, text_.data() + text_.size(), value);
    if (ec != std::errc())
      throw ParseError("malformed number", start);
    pos_ = static_cast<std::size_t>(ptr - text_.data());
    return make(NumberNode{value});
  }

  ExprPtr identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    const std::string_view name = text_.substr(start, pos_ - start);
    if (name == "x") return make(VarNode{});
    if (name == "pi") return make(NumberNode{pi});
    for (const auto& [fname, id] : kFunctions) {
      if (name == fname) {
        expect('(');
        ExprPtr arg = expr();
        expect(')');
        return make(CallNode{id, arg});
      }
    }
    throw ParseError("unknown identifier '" + std::string(name) + "'", start);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

inline Expression Expression::parse(std::string_view text) {
  return ExpressionParser(text).run();
}

} // namespace trscat
