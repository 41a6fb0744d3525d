#pragma once

// Text format for polynomials:
//
//   3/2*x1^2*x2 - x2^4 + 1        (x1^2 and x1**2 are both accepted)
//   (1 - x*y)^2 + y^2             (parentheses and integer powers)
//   0.5*x - 1e-3                  (decimals are read as exact rationals)
//
// Whitespace is ignored.  Division is only allowed by constants.  Variables
// are either declared up front or collected in order of first appearance.

#include <cctype>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gradtent/error.hpp"
#include "gradtent/polynomial.hpp"

namespace gradtent {

struct ParsedPolynomial {
  Polynomial polynomial;
  std::vector<std::string> variables;
};

namespace detail {

class PolynomialParser {
 public:
  PolynomialParser(std::string_view text, std::vector<std::string> vars) : text_(text), vars_(std::move(vars)) {}

  Polynomial run() {
    Polynomial p = expression();
    skip_space();
    if (pos_ != text_.size()) fail("unexpected character '" + std::string(1, text_[pos_]) + "'");
    return p;
  }

 private:
  int n() const { return static_cast<int>(vars_.size()); }

  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, pos_); }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  bool accept_power() {
    skip_space();
    if (text_.substr(pos_, 2) == "**") {
      pos_ += 2;
      return true;
    }
    return accept('^');
  }

  Polynomial expression() {
    Polynomial acc = term();
    while (true) {
      if (accept('+'))
        acc += term();
      else if (accept('-'))
        acc -= term();
      else
        return acc;
    }
  }

  Polynomial term() {
    Polynomial acc = unary();
    while (true) {
      skip_space();
      if (text_.substr(pos_, 2) == "**") return acc;
      if (accept('*')) {
        acc *= unary();
      } else if (accept('/')) {
        const std::size_t at = pos_;
        Polynomial d = unary();
        if (!d.is_constant() || d.is_zero()) {
          pos_ = at;
          fail("division is only supported by nonzero constants");
        }
        acc *= Rational(1) / d.constant_term();
      } else {
        return acc;
      }
    }
  }

  Polynomial unary() {
    if (accept('-')) return -unary();
    if (accept('+')) return unary();
    return power();
  }

  Polynomial power() {
    Polynomial base = primary();
    if (accept_power()) {
      skip_space();
      const std::size_t start = pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      if (start == pos_) fail("expected a nonnegative integer exponent");
      const auto digits = text_.substr(start, pos_ - start);
      if (digits.size() > 4) fail("exponent too large");
      base = base.pow(static_cast<unsigned>(std::stoul(std::string(digits))));
    }
    return base;
  }

  Polynomial primary() {
    skip_space();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      Polynomial inner = expression();
      if (!accept(')')) fail("expected ')'");
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return Polynomial::constant(n(), number());
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::string name = identifier();
      for (int i = 0; i < n(); ++i)
        if (vars_[static_cast<std::size_t>(i)] == name) return Polynomial::variable(n(), i);
      fail("unknown variable '" + name + "'");
    }
    fail("unexpected character '" + std::string(1, c) + "'");
  }

  std::string identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    return std::string(text_.substr(start, pos_ - start));
  }

  // Exact value of a decimal literal such as 12, 0.25, 3.5e-4.
  Rational number() {
    std::string mantissa;
    int scale = 0;
    bool seen_dot = false;
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (std::isdigit(static_cast<unsigned char>(c))) {
        mantissa.push_back(c);
        if (seen_dot) ++scale;
      } else if (c == '.' && !seen_dot) {
        seen_dot = true;
      } else {
        break;
      }
      ++pos_;
    }
    if (mantissa.empty()) fail("malformed number");
    int exponent = 0;
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t look = pos_ + 1;
      int sign = 1;
      if (look < text_.size() && (text_[look] == '+' || text_[look] == '-')) {
        sign = text_[look] == '-' ? -1 : 1;
        ++look;
      }
      const std::size_t digits_start = look;
      while (look < text_.size() && std::isdigit(static_cast<unsigned char>(text_[look]))) ++look;
      if (look > digits_start) {
        const auto digits = text_.substr(digits_start, look - digits_start);
        if (digits.size() > 3) fail("decimal exponent too large");
        exponent = sign * std::stoi(std::string(digits));
        pos_ = look;
      }
    }
    mpz_class num(mantissa, 10);
    const int shift = exponent - scale;
    mpz_class ten_pow;
    mpz_ui_pow_ui(ten_pow.get_mpz_t(), 10, static_cast<unsigned long>(shift < 0 ? -shift : shift));
    Rational value = shift >= 0 ? Rational(num * ten_pow) : Rational(num, ten_pow);
    value.canonicalize();
    return value;
  }

  std::string_view text_;
  std::vector<std::string> vars_;
  std::size_t pos_ = 0;
};

inline bool is_identifier_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }

}  // namespace detail

/// Identifiers in order of first appearance (skipping exponent markers of decimal literals).
inline std::vector<std::string> detect_variables(std::string_view text) {
  std::vector<std::string> vars;
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      while (i < text.size() && (std::isdigit(static_cast<unsigned char>(text[i])) || text[i] == '.')) ++i;
      if (i < text.size() && (text[i] == 'e' || text[i] == 'E')) {
        std::size_t look = i + 1;
        if (look < text.size() && (text[look] == '+' || text[look] == '-')) ++look;
        if (look < text.size() && std::isdigit(static_cast<unsigned char>(text[look]))) {
          i = look;
          while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
        }
      }
      continue;
    }
    if (detail::is_identifier_start(c)) {
      const std::size_t start = i;
      while (i < text.size() && (std::isalnum(static_cast<unsigned char>(text[i])) || text[i] == '_')) ++i;
      std::string name(text.substr(start, i - start));
      if (std::find(vars.begin(), vars.end(), name) == vars.end()) vars.push_back(std::move(name));
      continue;
    }
    ++i;
  }
  return vars;
}

/// Parses `text`.  With `variables` empty, names are auto-detected; a
/// polynomial without any identifier is placed in one variable, "x1".
inline ParsedPolynomial parse_polynomial(std::string_view text, std::vector<std::string> variables = {}) {
  if (variables.empty()) variables = detect_variables(text);
  if (variables.empty()) variables = {"x1"};
  for (std::size_t i = 0; i < variables.size(); ++i)
    for (std::size_t j = i + 1; j < variables.size(); ++j)
      if (variables[i] == variables[j]) throw ParseError("duplicate variable '" + variables[i] + "'", 0);
  detail::PolynomialParser parser(text, variables);
  Polynomial p = parser.run();
  return {std::move(p), std::move(variables)};
}

}  // namespace gradtent
