// Recursive-descent parser for the field entry language.
//
//   matrix := "R(" scalar ")" | "Q(" scalar ")" | "diag(" scalar "," scalar ")"
//           | "[[" s "," s "],[" s "," s "]]" | matrix "*" matrix
//           | "conj(" matrix "," matrix ")"
//   scalar := number | "x1" | "x2" | "pi" | scalar op scalar
//           | ("sin"|"cos"|"exp"|"compf") "(" scalar ")" | "(" scalar ")"
//
// conj(C, B) builds C(fx) B(x) C(x)^-1 and compf(s) builds s(fx), both
// using the automorphism handed to parse(). Every accepted expression is
// checked for periodicity on the automorphism's cover.
#pragma once

#include <cctype>
#include <string>
#include <variant>
#include <vector>

#include "cocyclelab/expr.hpp"

namespace cocyclelab {

using ParsedField = std::variant<ScalarPtr, MatrixPtr>;

namespace detail {

struct Token {
  enum class Kind { Number, Ident, Sym, End } kind;
  std::string text;
  double value = 0.0;
  int line = 1, col = 1;
};

inline std::vector<Token> tokenize(const std::string& text) {
  std::vector<Token> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
      if (text[i + k] == '\n') { ++line; col = 1; }
      else ++col;
    }
    i += n;
  };
  while (i < text.size()) {
    char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) { advance(1); continue; }
    Token t;
    t.line = line;
    t.col = col;
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t j = i;
      while (j < text.size() && (std::isdigit(static_cast<unsigned char>(text[j])) || text[j] == '.')) ++j;
      if (j < text.size() && (text[j] == 'e' || text[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < text.size() && (text[k] == '+' || text[k] == '-')) ++k;
        if (k < text.size() && std::isdigit(static_cast<unsigned char>(text[k]))) {
          ++k;
          while (k < text.size() && std::isdigit(static_cast<unsigned char>(text[k]))) ++k;
          j = k;
        }
      }
      t.kind = Token::Kind::Number;
      t.text = text.substr(i, j - i);
      try {
        t.value = std::stod(t.text);
      } catch (const std::exception&) {
        throw parse_error("malformed number '" + t.text + "'", line, col);
      }
      advance(j - i);
    } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < text.size() && (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_')) ++j;
      t.kind = Token::Kind::Ident;
      t.text = text.substr(i, j - i);
      advance(j - i);
    } else if (std::string("+-*/(),[]").find(c) != std::string::npos) {
      t.kind = Token::Kind::Sym;
      t.text = std::string(1, c);
      advance(1);
    } else {
      throw parse_error(std::string("unexpected character '") + c + "'", line, col);
    }
    out.push_back(std::move(t));
  }
  Token end;
  end.kind = Token::Kind::End;
  end.line = line;
  end.col = col;
  out.push_back(end);
  return out;
}

class Parser {
 public:
  Parser(const std::string& text, const LatticeAutomorphism& f) : toks_(tokenize(text)), f_(f) {}

  ScalarPtr parse_scalar_full() {
    ScalarPtr e = parse_sum();
    expect_end();
    return e;
  }

  MatrixPtr parse_matrix_full() {
    MatrixPtr m = parse_matrix();
    expect_end();
    return m;
  }

  ParsedField parse_field_full() {
    if (looks_like_matrix()) return parse_matrix_full();
    return parse_scalar_full();
  }

 private:
  const Token& peek(std::size_t ahead = 0) const { return toks_[std::min(pos_ + ahead, toks_.size() - 1)]; }
  const Token& next() { return toks_[std::min(pos_++, toks_.size() - 1)]; }
  bool accept_sym(const char* s) {
    if (peek().kind == Token::Kind::Sym && peek().text == s) { ++pos_; return true; }
    return false;
  }
  void expect_sym(const char* s) {
    if (!accept_sym(s)) throw parse_error(std::string("expected '") + s + "', got '" + peek().text + "'", peek().line, peek().col);
  }
  void expect_end() {
    if (peek().kind != Token::Kind::End)
      throw parse_error("trailing input starting at '" + peek().text + "'", peek().line, peek().col);
  }

  bool looks_like_matrix() const {
    const Token& t = peek();
    if (t.kind == Token::Kind::Sym && t.text == "[") return true;
    if (t.kind == Token::Kind::Ident && (t.text == "R" || t.text == "Q" || t.text == "diag" || t.text == "conj"))
      return peek(1).kind == Token::Kind::Sym && peek(1).text == "(";
    return false;
  }

  MatrixPtr parse_matrix() {
    MatrixPtr m = parse_matrix_primary();
    while (accept_sym("*")) m = mx::product(m, parse_matrix_primary());
    return m;
  }

  MatrixPtr parse_matrix_primary() {
    const Token& t = peek();
    if (t.kind == Token::Kind::Sym && t.text == "[") {
      next();
      expect_sym("[");
      ScalarPtr a = parse_sum();
      expect_sym(",");
      ScalarPtr b = parse_sum();
      expect_sym("]");
      expect_sym(",");
      expect_sym("[");
      ScalarPtr c = parse_sum();
      expect_sym(",");
      ScalarPtr d = parse_sum();
      expect_sym("]");
      expect_sym("]");
      return mx::entries(a, b, c, d);
    }
    if (t.kind == Token::Kind::Ident) {
      if (t.text == "R" || t.text == "Q") {
        next();
        expect_sym("(");
        ScalarPtr s = parse_sum();
        expect_sym(")");
        return t.text == "R" ? mx::rotation(s) : mx::reflection(s);
      }
      if (t.text == "diag") {
        next();
        expect_sym("(");
        ScalarPtr a = parse_sum();
        expect_sym(",");
        ScalarPtr b = parse_sum();
        expect_sym(")");
        return mx::diagonal(a, b);
      }
      if (t.text == "conj") {
        next();
        expect_sym("(");
        MatrixPtr c = parse_matrix();
        expect_sym(",");
        MatrixPtr b = parse_matrix();
        expect_sym(")");
        return mx::conjugate(c, b, f_);
      }
    }
    throw parse_error("expected a matrix expression, got '" + t.text + "'", t.line, t.col);
  }

  ScalarPtr parse_sum() {
    ScalarPtr e = parse_term();
    for (;;) {
      if (accept_sym("+")) e = sx::add(e, parse_term());
      else if (accept_sym("-")) e = sx::sub(e, parse_term());
      else return e;
    }
  }

  ScalarPtr parse_term() {
    ScalarPtr e = parse_unary();
    for (;;) {
      if (accept_sym("*")) e = sx::mul(e, parse_unary());
      else if (accept_sym("/")) e = sx::div(e, parse_unary());
      else return e;
    }
  }

  ScalarPtr parse_unary() {
    if (accept_sym("-")) return sx::sub(sx::constant(0.0), parse_unary());
    if (accept_sym("+")) return parse_unary();
    return parse_primary();
  }

  ScalarPtr parse_primary() {
    const Token& t = peek();
    if (t.kind == Token::Kind::Number) {
      next();
      return sx::constant(t.value);
    }
    if (t.kind == Token::Kind::Ident) {
      if (t.text == "x1") { next(); return sx::coord(0); }
      if (t.text == "x2") { next(); return sx::coord(1); }
      if (t.text == "pi") { next(); return sx::constant(M_PI); }
      if (t.text == "sin" || t.text == "cos" || t.text == "exp" || t.text == "compf") {
        std::string name = t.text;
        next();
        expect_sym("(");
        ScalarPtr a = parse_sum();
        expect_sym(")");
        if (name == "sin") return sx::sin(a);
        if (name == "cos") return sx::cos(a);
        if (name == "exp") return sx::exp(a);
        return sx::compose(a, f_);
      }
      throw parse_error("unknown identifier '" + t.text + "'", t.line, t.col);
    }
    if (accept_sym("(")) {
      ScalarPtr e = parse_sum();
      expect_sym(")");
      return e;
    }
    throw parse_error("expected a scalar expression, got '" + t.text + "'", t.line, t.col);
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  LatticeAutomorphism f_;
};

}  // namespace detail

inline ScalarPtr parse_scalar(const std::string& text, const LatticeAutomorphism& f) {
  ScalarPtr e = detail::Parser(text, f).parse_scalar_full();
  check_periodic(e, f.q1, f.q2);
  return e;
}

inline MatrixPtr parse_matrix(const std::string& text, const LatticeAutomorphism& f) {
  MatrixPtr m = detail::Parser(text, f).parse_matrix_full();
  check_periodic(m, f.q1, f.q2);
  return m;
}

inline ParsedField parse_field(const std::string& text, const LatticeAutomorphism& f) {
  ParsedField p = detail::Parser(text, f).parse_field_full();
  if (std::holds_alternative<ScalarPtr>(p)) check_periodic(std::get<ScalarPtr>(p), f.q1, f.q2);
  else check_periodic(std::get<MatrixPtr>(p), f.q1, f.q2);
  return p;
}

}  // namespace cocyclelab
