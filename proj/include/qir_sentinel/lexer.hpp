#pragma once

#include <cctype>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "qir_sentinel/ast.hpp"

namespace qir_sentinel {

enum class TokenKind {
  Keyword,      // bare word: define, call, i64, void, to, ...
  GlobalIdent,  // @name
  LocalIdent,   // %name; whether it names a value or a type is decided by the parser
  Integer,
  Float,
  String,       // "..." or c"..."
  Punct,
  Label,        // name:
  AttrRef,      // #0
  Metadata,     // !name, !0
};

inline const char* to_string(TokenKind k) {
  switch (k) {
    case TokenKind::Keyword: return "keyword";
    case TokenKind::GlobalIdent: return "global identifier";
    case TokenKind::LocalIdent: return "local identifier";
    case TokenKind::Integer: return "integer";
    case TokenKind::Float: return "float";
    case TokenKind::String: return "string";
    case TokenKind::Punct: return "punctuation";
    case TokenKind::Label: return "label";
    case TokenKind::AttrRef: return "attribute reference";
    case TokenKind::Metadata: return "metadata";
  }
  return "?";
}

struct Token {
  TokenKind kind = TokenKind::Punct;
  std::string lexeme;  // exact source text
  std::string text;    // identifier name without sigil/quotes, or label without ':'
  SourceSpan span;

  bool is(TokenKind k, std::string_view lex) const { return kind == k && lexeme == lex; }
  bool is_punct(std::string_view p) const { return is(TokenKind::Punct, p); }
  bool is_keyword(std::string_view w) const { return is(TokenKind::Keyword, w); }

  friend bool operator==(const Token&, const Token&) = default;
};

struct ParseError {
  std::string message;
  SourceSpan span;
  std::vector<TokenKind> expected;
  std::optional<Token> got;  // absent at end of input

  friend bool operator==(const ParseError&, const ParseError&) = default;
};

namespace detail {

inline bool is_ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '$';
}
inline bool is_ident_char(char c) {
  return is_ident_start(c) || c == '-' || std::isdigit(static_cast<unsigned char>(c));
}
inline bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  /// Tokenizes everything; illegal characters and unterminated strings are
  /// recorded as errors and skipped so that lexing always finishes.
  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      skip_space_and_comments();
      if (pos_ >= src_.size()) break;
      if (auto t = next()) out.push_back(std::move(*t));
    }
    return out;
  }

  const std::vector<ParseError>& errors() const { return errors_; }

 private:
  char peek(std::size_t ahead = 0) const {
    return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
  }

  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_space_and_comments() {
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (c == ';') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v') {
        advance();
      } else {
        break;
      }
    }
  }

  Token make(TokenKind k, std::size_t start, std::uint32_t line, std::uint32_t col) {
    Token t;
    t.kind = k;
    t.lexeme = std::string(src_.substr(start, pos_ - start));
    t.span = SourceSpan{line, col, col + static_cast<std::uint32_t>(pos_ - start)};
    return t;
  }

  void error(std::string msg, std::uint32_t line, std::uint32_t col, std::uint32_t len) {
    ParseError e;
    e.message = std::move(msg);
    e.span = SourceSpan{line, col, col + len};
    errors_.push_back(std::move(e));
  }

  // Consumes a quoted string starting at '"'. Returns false when unterminated.
  bool scan_string() {
    advance();  // opening quote
    while (pos_ < src_.size() && src_[pos_] != '"') advance();
    if (pos_ >= src_.size()) return false;
    advance();
    return true;
  }

  std::optional<Token> next() {
    const std::size_t start = pos_;
    const std::uint32_t line = line_, col = col_;
    const char c = peek();

    if (c == '@' || c == '%') {
      advance();
      const TokenKind k = c == '@' ? TokenKind::GlobalIdent : TokenKind::LocalIdent;
      if (peek() == '"') {
        if (!scan_string()) {
          error("unterminated quoted identifier", line, col, 1);
          return std::nullopt;
        }
        Token t = make(k, start, line, col);
        t.text = t.lexeme.substr(2, t.lexeme.size() - 3);
        return t;
      }
      if (!is_ident_char(peek())) {
        error(std::string("expected identifier after '") + c + "'", line, col, 1);
        return std::nullopt;
      }
      while (is_ident_char(peek())) advance();
      Token t = make(k, start, line, col);
      t.text = t.lexeme.substr(1);
      return t;
    }

    if (c == '#') {
      advance();
      if (!is_digit(peek())) {
        error("expected attribute group number after '#'", line, col, 1);
        return std::nullopt;
      }
      while (is_digit(peek())) advance();
      return make(TokenKind::AttrRef, start, line, col);
    }

    if (c == '!') {
      advance();
      if (is_ident_char(peek())) {
        while (is_ident_char(peek())) advance();
        Token t = make(TokenKind::Metadata, start, line, col);
        t.text = t.lexeme.substr(1);
        return t;
      }
      return make(TokenKind::Punct, start, line, col);
    }

    if (c == '"') {
      if (!scan_string()) {
        error("unterminated string literal", line, col, 1);
        return std::nullopt;
      }
      Token t = make(TokenKind::String, start, line, col);
      t.text = t.lexeme.substr(1, t.lexeme.size() - 2);
      return t;
    }

    if (is_digit(c) || ((c == '-' || c == '+') && is_digit(peek(1)))) {
      return number(start, line, col);
    }

    if (c == 'c' && peek(1) == '"') {
      advance();
      if (!scan_string()) {
        error("unterminated string literal", line, col, 1);
        return std::nullopt;
      }
      Token t = make(TokenKind::String, start, line, col);
      t.text = t.lexeme.substr(2, t.lexeme.size() - 3);
      return t;
    }

    if (is_ident_start(c)) {
      if (c == '.' && peek(1) == '.' && peek(2) == '.') {
        advance();
        advance();
        advance();
        return make(TokenKind::Punct, start, line, col);
      }
      while (is_ident_char(peek())) advance();
      if (peek() == ':') {
        Token t = make(TokenKind::Label, start, line, col);
        t.text = t.lexeme;
        advance();
        t.lexeme += ':';
        t.span.col_end += 1;
        return t;
      }
      Token t = make(TokenKind::Keyword, start, line, col);
      t.text = t.lexeme;
      return t;
    }

    static constexpr std::string_view kPunct = "(){}[]<>,=*:|";
    if (kPunct.find(c) != std::string_view::npos) {
      advance();
      return make(TokenKind::Punct, start, line, col);
    }

    advance();
    char shown[8];
    if (std::isprint(static_cast<unsigned char>(c))) {
      std::snprintf(shown, sizeof shown, "'%c'", c);
    } else {
      std::snprintf(shown, sizeof shown, "\\x%02X", static_cast<unsigned char>(c));
    }
    error(std::string("illegal character ") + shown + " in input", line, col, 1);
    return std::nullopt;
  }

  std::optional<Token> number(std::size_t start, std::uint32_t line, std::uint32_t col) {
    if (peek() == '0' && (peek(1) == 'x' || peek(1) == 'X')) {
      advance();
      advance();
      while (std::isxdigit(static_cast<unsigned char>(peek()))) advance();
      return make(TokenKind::Float, start, line, col);
    }
    if (peek() == '-' || peek() == '+') advance();
    while (is_digit(peek())) advance();
    bool is_float = false;
    if (peek() == '.') {
      is_float = true;
      advance();
      while (is_digit(peek())) advance();
    }
    if ((peek() == 'e' || peek() == 'E') &&
        (is_digit(peek(1)) || ((peek(1) == '-' || peek(1) == '+') && is_digit(peek(2))))) {
      is_float = true;
      advance();
      if (peek() == '-' || peek() == '+') advance();
      while (is_digit(peek())) advance();
    }
    if (!is_float && peek() == ':') {
      Token t = make(TokenKind::Label, start, line, col);
      t.text = t.lexeme;
      advance();
      t.lexeme += ':';
      t.span.col_end += 1;
      return t;
    }
    return make(is_float ? TokenKind::Float : TokenKind::Integer, start, line, col);
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  std::uint32_t line_ = 1;
  std::uint32_t col_ = 1;
  std::vector<ParseError> errors_;
};

}  // namespace detail

/// Tokens of `source`, or the first lexical error.
inline std::variant<std::vector<Token>, ParseError> lex(std::string_view source) {
  detail::Lexer lexer(source);
  auto tokens = lexer.run();
  if (!lexer.errors().empty()) return lexer.errors().front();
  return tokens;
}

}  // namespace qir_sentinel
