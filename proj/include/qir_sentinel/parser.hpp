#pragma once

// Recursive-descent parser for the QIR dialect of LLVM IR text.
//
// Accepts opaque/struct type declarations, define/declare, labeled blocks,
// the instruction set {call, bitcast, inttoptr, store, load, getelementptr,
// icmp, alloca} plus phi (kept for reporting), and the terminators ret/br.
// Compiler noise (linkage keywords, parameter and function attributes,
// attribute groups, metadata, globals, target lines) is stored or skipped
// with a warning.

#include <algorithm>
#include <charconv>
#include <cstring>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "qir_sentinel/ast.hpp"
#include "qir_sentinel/lexer.hpp"

namespace qir_sentinel {

struct ParseWarning {
  std::string message;
  SourceSpan span;
  friend bool operator==(const ParseWarning&, const ParseWarning&) = default;
};

struct ParseOptions {
  std::size_t max_errors = 20;
};

struct ParseResult {
  std::optional<QirModule> module;  // present iff errors is empty
  std::vector<ParseError> errors;
  std::vector<ParseWarning> warnings;

  bool ok() const { return module.has_value(); }
};

namespace detail {

struct ParseFailure {
  ParseError error;
};

class Parser {
 public:
  Parser(std::string_view source, std::vector<Token> tokens, ParseOptions opts)
      : source_(source), toks_(std::move(tokens)), opts_(opts) {
    std::size_t start = 0;
    for (std::size_t i = 0; i <= source.size(); ++i) {
      if (i == source.size() || source[i] == '\n') {
        line_lengths_.push_back(static_cast<std::uint32_t>(i - start));
        start = i + 1;
      }
    }
  }

  QirModule run(std::string filename) {
    QirModule m;
    m.source_name = std::move(filename);
    while (!at_end() && !out_of_budget()) {
      try {
        top_level(m);
      } catch (const ParseFailure& f) {
        record(f.error);
        recover_top_level();
      }
    }
    return m;
  }

  std::vector<ParseError>& errors() { return errors_; }
  std::vector<ParseWarning>& warnings() { return warnings_; }

 private:
  // ---- token access -------------------------------------------------------

  bool at_end() const { return pos_ >= toks_.size(); }
  const Token& peek(std::size_t ahead = 0) const {
    static const Token kEnd{};
    return pos_ + ahead < toks_.size() ? toks_[pos_ + ahead] : kEnd;
  }
  bool exists(std::size_t ahead = 0) const { return pos_ + ahead < toks_.size(); }
  const Token& take() {
    const Token& t = peek();
    if (!at_end()) ++pos_;
    last_ = &t;
    return t;
  }
  bool check_punct(std::string_view p) const { return exists() && peek().is_punct(p); }
  bool check_keyword(std::string_view w) const { return exists() && peek().is_keyword(w); }
  bool accept_punct(std::string_view p) {
    if (!check_punct(p)) return false;
    take();
    return true;
  }
  bool accept_keyword(std::string_view w) {
    if (!check_keyword(w)) return false;
    take();
    return true;
  }

  [[noreturn]] void fail(std::string msg, std::vector<TokenKind> expected = {}) {
    ParseError e;
    e.message = std::move(msg);
    e.expected = std::move(expected);
    if (exists()) {
      e.got = peek();
      e.span = peek().span;
    } else if (!toks_.empty()) {
      const auto& t = toks_.back();
      e.span = SourceSpan{t.span.line, t.span.col_end, t.span.col_end + 1};
    } else {
      e.span = SourceSpan{1, 1, 2};
    }
    throw ParseFailure{std::move(e)};
  }

  std::string describe_next() const {
    return exists() ? "'" + peek().lexeme + "'" : "end of input";
  }

  void expect_punct(std::string_view p) {
    if (!accept_punct(p)) fail("expected '" + std::string(p) + "' but found " + describe_next(),
                               {TokenKind::Punct});
  }
  void expect_keyword(std::string_view w) {
    if (!accept_keyword(w)) fail("expected '" + std::string(w) + "' but found " + describe_next(),
                                 {TokenKind::Keyword});
  }
  const Token& expect_kind(TokenKind k, std::string_view what) {
    if (!exists() || peek().kind != k) {
      fail("expected " + std::string(what) + " but found " + describe_next(), {k});
    }
    return take();
  }

  void record(ParseError e) {
    if (errors_.size() < opts_.max_errors) errors_.push_back(std::move(e));
  }
  bool out_of_budget() const { return errors_.size() >= opts_.max_errors; }

  void warn(std::string msg, SourceSpan span) {
    warnings_.push_back(ParseWarning{std::move(msg), span});
  }

  struct DepthGuard {
    Parser& p;
    explicit DepthGuard(Parser& parser) : p(parser) {
      if (++p.depth_ > kMaxDepth) {
        --p.depth_;
        p.fail("nesting is too deep");
      }
    }
    ~DepthGuard() { --p.depth_; }
  };
  static constexpr int kMaxDepth = 64;

  // ---- numbers ------------------------------------------------------------

  std::int64_t int_value(const Token& t) {
    std::string_view s = t.lexeme;
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    std::int64_t v = 0;
    auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size()) {
      // Unsigned 64-bit literals wrap to their two's-complement value.
      std::uint64_t u = 0;
      auto ru = std::from_chars(s.data(), s.data() + s.size(), u);
      if (ru.ec != std::errc() || ru.ptr != s.data() + s.size()) {
        throw ParseFailure{ParseError{"integer literal out of range", t.span, {}, t}};
      }
      v = static_cast<std::int64_t>(u);
    }
    return v;
  }

  std::uint64_t uint_value(const Token& t) {
    std::uint64_t v = 0;
    auto r = std::from_chars(t.lexeme.data(), t.lexeme.data() + t.lexeme.size(), v);
    if (t.kind != TokenKind::Integer || r.ec != std::errc() ||
        r.ptr != t.lexeme.data() + t.lexeme.size()) {
      throw ParseFailure{ParseError{"expected a non-negative integer", t.span, {}, t}};
    }
    return v;
  }

  double float_value(const Token& t) {
    const std::string& s = t.lexeme;
    if (s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) {
      std::uint64_t bits = 0;
      auto r = std::from_chars(s.data() + 2, s.data() + s.size(), bits, 16);
      if (r.ec != std::errc() || r.ptr != s.data() + s.size() || s.size() > 18) {
        throw ParseFailure{ParseError{"malformed hexadecimal floating literal", t.span, {}, t}};
      }
      double d = 0;
      std::memcpy(&d, &bits, sizeof d);
      return d;
    }
    std::string_view v = s;
    if (!v.empty() && v.front() == '+') v.remove_prefix(1);
    double d = 0;
    auto r = std::from_chars(v.data(), v.data() + v.size(), d);
    if (r.ec != std::errc() || r.ptr != v.data() + v.size()) {
      throw ParseFailure{ParseError{"malformed floating literal", t.span, {}, t}};
    }
    return d;
  }

  // ---- types --------------------------------------------------------------

  static std::optional<std::uint32_t> int_type_width(const Token& t) {
    if (t.kind != TokenKind::Keyword || t.lexeme.size() < 2 || t.lexeme[0] != 'i') {
      return std::nullopt;
    }
    std::uint64_t w = 0;
    auto r = std::from_chars(t.lexeme.data() + 1, t.lexeme.data() + t.lexeme.size(), w);
    if (r.ec != std::errc() || r.ptr != t.lexeme.data() + t.lexeme.size()) return std::nullopt;
    if (w > (1u << 23)) return std::nullopt;
    return static_cast<std::uint32_t>(w);
  }

  bool starts_type() const {
    if (!exists()) return false;
    const Token& t = peek();
    if (t.kind == TokenKind::LocalIdent) return true;
    if (t.is_punct("[") || t.is_punct("{")) return true;
    if (t.kind != TokenKind::Keyword) return false;
    return t.lexeme == "void" || t.lexeme == "double" || int_type_width(t).has_value();
  }

  // In return position "(...)" normally starts the argument list; it belongs
  // to the type only when the closing paren is followed by '*'.
  bool function_pointer_follows() const {
    int depth = 0;
    for (std::size_t i = pos_; i < toks_.size(); ++i) {
      if (toks_[i].is_punct("(")) ++depth;
      if (toks_[i].is_punct(")") && --depth == 0) {
        return i + 1 < toks_.size() && toks_[i + 1].is_punct("*");
      }
    }
    return false;
  }

  Type parse_type(bool allow_function_suffix = true) {
    DepthGuard guard(*this);
    Type t = parse_base_type();
    while (true) {
      if (accept_punct("*")) {
        t = Type::pointer_to(std::move(t));
      } else if (check_punct("(") && (allow_function_suffix || function_pointer_follows())) {
        take();
        std::vector<Type> params;
        if (!check_punct(")")) {
          do {
            if (check_punct("...")) fail("variadic function types are not supported");
            params.push_back(parse_type());
          } while (accept_punct(","));
        }
        expect_punct(")");
        t = Type::function_of(std::move(t), std::move(params));
      } else {
        return t;
      }
    }
  }

  Type parse_base_type() {
    if (!exists()) fail("expected a type but found end of input", {TokenKind::Keyword});
    const Token& t = peek();
    if (t.kind == TokenKind::Keyword) {
      if (t.lexeme == "void") {
        take();
        return Type::void_type();
      }
      if (t.lexeme == "double") {
        take();
        return Type::real();
      }
      if (auto w = int_type_width(t)) {
        take();
        return Type::integer(*w);
      }
      if (t.lexeme == "ptr") fail("opaque pointer type 'ptr' is not supported");
      fail("expected a type but found '" + t.lexeme + "'", {TokenKind::Keyword});
    }
    if (t.kind == TokenKind::LocalIdent) {
      take();
      if (auto k = builtin_type_kind(t.text)) return Type::opaque(*k);
      return Type::named(t.text);
    }
    if (t.is_punct("[")) {
      take();
      const std::uint64_t n = uint_value(expect_kind(TokenKind::Integer, "array length"));
      expect_keyword("x");
      Type elem = parse_type();
      expect_punct("]");
      return Type::array_of(n, std::move(elem));
    }
    if (t.is_punct("{")) {
      take();
      std::vector<Type> fields;
      if (!check_punct("}")) {
        do {
          fields.push_back(parse_type());
        } while (accept_punct(","));
      }
      expect_punct("}");
      return Type::struct_of(std::move(fields));
    }
    fail("expected a type but found " + describe_next(), {TokenKind::Keyword});
  }

  // ---- values -------------------------------------------------------------

  TypedConstant parse_typed_constant() {
    TypedConstant tc;
    tc.type = parse_type();
    Operand v = parse_value(tc.type);
    if (auto* c = std::get_if<Constant>(&v)) {
      tc.value = std::move(*c);
    } else if (auto* g = std::get_if<GlobalRef>(&v)) {
      tc.value.kind = Constant::Kind::Global;
      tc.value.global = g->name;
    } else {
      fail_at(*last_, "local values are not allowed inside constants");
    }
    return tc;
  }

  [[noreturn]] void fail_at(const Token& t, std::string msg) {
    throw ParseFailure{ParseError{std::move(msg), t.span, {}, t}};
  }

  Constant parse_aggregate(const Type& type, bool brackets) {
    Constant c;
    c.kind = Constant::Kind::Aggregate;
    c.array_brackets = brackets;
    const char* close = brackets ? "]" : "}";
    if (!check_punct(close)) {
      do {
        c.elems.push_back(parse_typed_constant());
      } while (accept_punct(","));
    }
    expect_punct(close);
    if (type.kind == Type::Kind::Range && !brackets && c.elems.size() == 3) {
      bool ints = true;
      for (const auto& e : c.elems) {
        ints = ints && e.type == Type::integer(64) && e.value.kind == Constant::Kind::Int;
      }
      if (ints) {
        Constant r;
        r.kind = Constant::Kind::Range;
        r.range_start = c.elems[0].value.value;
        r.range_step = c.elems[1].value.value;
        r.range_end = c.elems[2].value.value;
        return r;
      }
    }
    return c;
  }

  Constant parse_const_expr(const Token& op_tok) {
    using Op = Constant::ExprOp;
    Constant c;
    c.kind = Constant::Kind::Expr;
    const std::string& op = op_tok.lexeme;
    c.op = op == "inttoptr"        ? Op::IntToPtr
           : op == "ptrtoint"      ? Op::PtrToInt
           : op == "bitcast"       ? Op::Bitcast
           : op == "getelementptr" ? Op::GetElementPtr
                                   : Op::ExtractValue;
    if (c.op == Op::GetElementPtr) c.inbounds = accept_keyword("inbounds");
    expect_punct("(");
    if (c.op == Op::GetElementPtr) {
      c.expr_types.push_back(parse_type());
      while (accept_punct(",")) c.elems.push_back(parse_typed_constant());
    } else if (c.op == Op::ExtractValue) {
      c.elems.push_back(parse_typed_constant());
      while (accept_punct(",")) {
        c.indices.push_back(int_value(expect_kind(TokenKind::Integer, "index")));
      }
    } else {
      c.elems.push_back(parse_typed_constant());
      expect_keyword("to");
      c.expr_types.push_back(parse_type());
    }
    expect_punct(")");
    return c;
  }

  Operand parse_value(const Type& type) {
    DepthGuard guard(*this);
    if (!exists()) fail("expected a value but found end of input");
    const Token& t = take();
    switch (t.kind) {
      case TokenKind::LocalIdent: return LocalRef{t.text};
      case TokenKind::GlobalIdent: return GlobalRef{t.text};
      case TokenKind::Integer: {
        const std::int64_t v = int_value(t);
        if (type.kind == Type::Kind::Int) return Constant::integer(type.width, v);
        if (type.kind == Type::Kind::Pauli) {
          Constant c;
          c.kind = Constant::Kind::Pauli;
          c.value = v;
          return c;
        }
        fail_at(t, "integer literal used with non-integer type");
      }
      case TokenKind::Float:
        if (type.kind != Type::Kind::Double) fail_at(t, "floating literal used with non-double type");
        return Constant::floating(float_value(t));
      case TokenKind::Keyword:
        if (t.lexeme == "true" || t.lexeme == "false") {
          if (type.kind != Type::Kind::Int) fail_at(t, "boolean literal used with non-integer type");
          return Constant::integer(type.width, t.lexeme == "true" ? 1 : 0);
        }
        if (t.lexeme == "null") {
          if (!type.is_pointer()) fail_at(t, "'null' requires a pointer type");
          return Constant::null();
        }
        if (t.lexeme == "undef" || t.lexeme == "poison") {
          Constant c;
          c.kind = Constant::Kind::Undef;
          return c;
        }
        if (t.lexeme == "zeroinitializer") {
          Constant c;
          c.kind = Constant::Kind::ZeroInit;
          return c;
        }
        if (t.lexeme == "inttoptr" || t.lexeme == "ptrtoint" || t.lexeme == "bitcast" ||
            t.lexeme == "getelementptr" || t.lexeme == "extractvalue") {
          return parse_const_expr(t);
        }
        fail_at(t, "expected a value but found '" + t.lexeme + "'");
      case TokenKind::Punct:
        if (t.lexeme == "{") return parse_aggregate(type, false);
        if (t.lexeme == "[") return parse_aggregate(type, true);
        break;
      default:
        break;
    }
    fail_at(t, "expected a value but found '" + t.lexeme + "'");
  }

  TypedOperand parse_typed_operand() {
    TypedOperand op;
    op.type = parse_type();
    skip_param_attributes();
    op.value = parse_value(op.type);
    return op;
  }

  // ---- attributes and noise ----------------------------------------------

  static bool is_param_attribute(const Token& t) {
    static const std::set<std::string, std::less<>> kAttrs = {
        "nocapture", "readonly", "readnone", "writeonly", "noundef", "nonnull", "noalias",
        "signext", "zeroext", "inreg", "returned", "immarg", "nofree", "align",
        "dereferenceable", "dereferenceable_or_null", "nest", "byval", "sret"};
    return t.kind == TokenKind::Keyword && kAttrs.count(t.lexeme) > 0;
  }

  void skip_param_attributes() {
    while (exists() && is_param_attribute(peek())) {
      const Token& a = take();
      warn("ignored parameter attribute '" + a.lexeme + "'", a.span);
      if (a.lexeme == "align") {
        expect_kind(TokenKind::Integer, "alignment");
      } else if (accept_punct("(")) {
        while (exists() && !check_punct(")")) take();
        expect_punct(")");
      }
    }
  }

  // Function attributes trailing a signature or call, on the same line.
  void skip_trailing_attributes(std::uint32_t line) {
    while (exists() && peek().span.line == line &&
           (peek().kind == TokenKind::AttrRef ||
            (peek().kind == TokenKind::Keyword && !is_top_level_keyword(peek())))) {
      const Token& a = take();
      warn("ignored function attribute '" + a.lexeme + "'", a.span);
    }
  }

  static bool is_top_level_keyword(const Token& t) {
    return t.kind == TokenKind::Keyword &&
           (t.lexeme == "define" || t.lexeme == "declare" || t.lexeme == "attributes" ||
            t.lexeme == "source_filename" || t.lexeme == "target");
  }

  void skip_line(std::uint32_t line) {
    while (exists() && peek().span.line == line) take();
  }

  // `, !dbg !7` style attachments after an instruction.
  void skip_metadata_attachments() {
    while (check_punct(",") && exists(1) && peek(1).kind == TokenKind::Metadata) {
      take();
      const Token& md = take();
      warn("ignored metadata attachment '" + md.lexeme + "'", md.span);
      while (exists() && peek().kind == TokenKind::Metadata) take();
    }
  }

  std::optional<std::uint64_t> parse_align_suffix() {
    if (check_punct(",") && exists(1) && peek(1).is_keyword("align")) {
      take();
      take();
      return uint_value(expect_kind(TokenKind::Integer, "alignment"));
    }
    return std::nullopt;
  }

  // ---- top level ----------------------------------------------------------

  void recover_top_level() {
    if (!at_end()) take();
    while (!at_end()) {
      const Token& t = peek();
      if (t.is_keyword("define") || t.is_keyword("declare") || t.is_keyword("attributes")) return;
      if (t.kind == TokenKind::LocalIdent && exists(2) && peek(1).is_punct("=") &&
          peek(2).is_keyword("type")) {
        return;
      }
      take();
    }
  }

  void top_level(QirModule& m) {
    const Token& t = peek();
    if (t.kind == TokenKind::LocalIdent) {
      type_declaration(m);
    } else if (t.is_keyword("define") || t.is_keyword("declare")) {
      m.functions.push_back(function());
    } else if (t.is_keyword("attributes")) {
      const Token& a = take();
      warn("skipped attribute group", a.span);
      expect_kind(TokenKind::AttrRef, "attribute group number");
      expect_punct("=");
      expect_punct("{");
      int depth = 1;
      while (exists() && depth > 0) {
        if (peek().is_punct("{")) ++depth;
        if (peek().is_punct("}")) --depth;
        take();
      }
      if (depth > 0) fail("unterminated attribute group");
    } else if (t.kind == TokenKind::Metadata || t.is_keyword("source_filename") ||
               t.is_keyword("target") || t.kind == TokenKind::GlobalIdent) {
      const char* what = t.kind == TokenKind::Metadata      ? "skipped metadata definition"
                         : t.kind == TokenKind::GlobalIdent ? "skipped global variable"
                                                            : "skipped module directive";
      warn(what, t.span);
      skip_line(t.span.line);
    } else {
      fail("expected a type declaration, 'define' or 'declare' but found " + describe_next(),
           {TokenKind::Keyword, TokenKind::LocalIdent});
    }
  }

  void type_declaration(QirModule& m) {
    const Token& name = take();
    expect_punct("=");
    expect_keyword("type");
    TypeDecl d;
    d.name = name.text;
    d.span = span_from(name);
    if (accept_keyword("opaque")) {
      d.span = span_from(name);
      m.types.push_back(std::move(d));
      return;
    }
    d.body = parse_type();
    d.span = span_from(name);
    m.types.push_back(std::move(d));
  }

  static bool is_linkage_keyword(const Token& t) {
    return t.kind == TokenKind::Keyword && t.lexeme != "void" && t.lexeme != "double" &&
           !int_type_width(t).has_value();
  }

  Function function() {
    const Token& head = take();
    Function f;
    f.is_declaration = head.lexeme == "declare";
    while (exists() && is_linkage_keyword(peek())) f.linkage.push_back(take().lexeme);
    f.ret_type = parse_type(false);
    f.name = expect_kind(TokenKind::GlobalIdent, "function name").text;
    expect_punct("(");
    if (!check_punct(")")) {
      do {
        if (check_punct("...")) fail("variadic functions are not supported");
        Param p;
        p.type = parse_type();
        skip_param_attributes();
        if (exists() && peek().kind == TokenKind::LocalIdent) p.name = take().text;
        f.params.push_back(std::move(p));
      } while (accept_punct(","));
    }
    const Token& close = peek();
    expect_punct(")");
    f.span = SourceSpan{head.span.line, head.span.col_start, close.span.col_end};
    skip_trailing_attributes(close.span.line);
    if (f.is_declaration) return f;

    expect_punct("{");
    function_body(f);
    return f;
  }

  void function_body(Function& f) {
    Block* current = nullptr;
    bool terminated = false;
    bool damaged = false;

    auto close_block = [&](const SourceSpan& where) {
      if (current && !terminated && !damaged) {
        record(ParseError{"block '" + current->label + "' has no terminator", where, {}, std::nullopt});
      }
    };

    while (true) {
      if (out_of_budget()) {
        pos_ = toks_.size();
        return;
      }
      if (!exists()) {
        record(ParseError{"unexpected end of input inside @" + f.name,
                          toks_.empty() ? SourceSpan{1, 1, 2} : toks_.back().span, {}, std::nullopt});
        return;
      }
      const Token& t = peek();
      if (t.is_punct("}")) {
        close_block(t.span);
        if (f.blocks.empty()) {
          record(ParseError{"function body has no blocks", t.span, {}, t});
        }
        take();
        return;
      }
      if (t.is_keyword("define") || t.is_keyword("declare")) {
        record(ParseError{"missing '}' at end of @" + f.name, t.span, {TokenKind::Punct}, t});
        return;
      }
      if (t.kind == TokenKind::Label) {
        close_block(t.span);
        take();
        f.blocks.push_back(Block{});
        current = &f.blocks.back();
        current->label = t.text;
        current->span = t.span;
        terminated = false;
        damaged = false;
        continue;
      }
      if (current && terminated) {
        record(ParseError{"expected a block label or '}' after terminator, found '" + t.lexeme + "'",
                          t.span, {TokenKind::Label}, t});
        skip_line(t.span.line);
        damaged = true;
        continue;
      }
      if (!current) {
        f.blocks.push_back(Block{});
        current = &f.blocks.back();
        current->span = SourceSpan{t.span.line, t.span.col_start, t.span.col_start};
      }
      const std::uint32_t line = t.span.line;
      try {
        statement(*current, terminated);
        skip_metadata_attachments();
        if (exists() && peek().span.line == line && !peek().is_punct("}")) {
          fail("unexpected " + describe_next() + " after instruction");
        }
      } catch (const ParseFailure& failure) {
        record(failure.error);
        // Hand back a '}' or label that the failed statement ran into.
        if (pos_ > 0 && pos_ <= toks_.size()) {
          const Token& last = toks_[pos_ - 1];
          if (last.span.line > line && (last.is_punct("}") || last.kind == TokenKind::Label ||
                                        last.is_keyword("define") || last.is_keyword("declare"))) {
            --pos_;
          }
        }
        skip_line(line);
        damaged = true;
      }
    }
  }

  SourceSpan span_from(const Token& first) const {
    SourceSpan s{first.span.line, first.span.col_start, first.span.col_end};
    if (last_) {
      if (last_->span.line == first.span.line) {
        s.col_end = last_->span.col_end;
      } else if (first.span.line - 1 < line_lengths_.size()) {
        s.col_end = line_lengths_[first.span.line - 1] + 1;
      }
    }
    return s;
  }

  void statement(Block& b, bool& terminated) {
    const Token& first = peek();
    if (first.kind == TokenKind::LocalIdent && exists(1) && peek(1).is_punct("=")) {
      take();
      take();
      if (!exists()) fail("expected an instruction after '='");
      const Token& op = peek();
      if (op.is_keyword("phi")) {
        take();
        PhiNode phi;
        phi.result = first.text;
        phi.type = parse_type();
        do {
          expect_punct("[");
          Operand v = parse_value(phi.type);
          expect_punct(",");
          const Token& l = expect_kind(TokenKind::LocalIdent, "incoming block label");
          expect_punct("]");
          phi.incoming.emplace_back(std::move(v), l.text);
        } while (accept_punct(","));
        phi.span = span_from(first);
        if (!b.instructions.empty()) {
          throw ParseFailure{ParseError{"phi must appear at the start of a block", phi.span, {}, first}};
        }
        b.phis.push_back(std::move(phi));
        return;
      }
      Instruction inst;
      inst.body = named_instruction(first.text);
      inst.span = span_from(first);
      b.instructions.push_back(std::move(inst));
      return;
    }

    if (first.is_keyword("call") || first.is_keyword("tail") || first.is_keyword("musttail") ||
        first.is_keyword("notail")) {
      Instruction inst;
      inst.body = call(std::nullopt);
      inst.span = span_from(first);
      b.instructions.push_back(std::move(inst));
      return;
    }
    if (first.is_keyword("store")) {
      take();
      StoreInst s;
      if (accept_keyword("volatile")) warn("ignored 'volatile'", last_->span);
      s.value = parse_typed_operand();
      expect_punct(",");
      s.dest = parse_typed_operand();
      s.align = parse_align_suffix();
      Instruction inst;
      inst.body = std::move(s);
      inst.span = span_from(first);
      b.instructions.push_back(std::move(inst));
      return;
    }
    if (first.is_keyword("ret")) {
      take();
      Terminator term;
      const bool bare_void = exists() && peek().is_keyword("void") &&
                             !(exists(1) && (peek(1).is_punct("(") || peek(1).is_punct("*")));
      if (bare_void) {
        take();
        term.body = RetVoid{};
      } else {
        if (!starts_type()) fail("'ret' requires 'void' or a typed value", {TokenKind::Keyword});
        term.body = RetValue{parse_typed_operand()};
      }
      term.span = span_from(first);
      b.terminator = std::move(term);
      terminated = true;
      return;
    }
    if (first.is_keyword("br")) {
      take();
      Terminator term;
      if (accept_keyword("label")) {
        term.body = Branch{expect_kind(TokenKind::LocalIdent, "branch target").text};
      } else {
        Type ct = parse_type();
        if (ct != Type::integer(1)) fail_at(*last_, "branch condition must have type i1");
        CondBranch cb;
        cb.cond = parse_value(ct);
        expect_punct(",");
        expect_keyword("label");
        cb.then_label = expect_kind(TokenKind::LocalIdent, "branch target").text;
        expect_punct(",");
        expect_keyword("label");
        cb.else_label = expect_kind(TokenKind::LocalIdent, "branch target").text;
        term.body = std::move(cb);
      }
      term.span = span_from(first);
      b.terminator = std::move(term);
      terminated = true;
      return;
    }
    if (first.kind == TokenKind::Keyword) {
      fail("unsupported instruction '" + first.lexeme + "'", {TokenKind::Keyword});
    }
    fail("expected an instruction but found " + describe_next(),
         {TokenKind::Keyword, TokenKind::LocalIdent});
  }

  InstructionBody named_instruction(const std::string& result) {
    const Token& op = peek();
    if (op.is_keyword("call") || op.is_keyword("tail") || op.is_keyword("musttail") ||
        op.is_keyword("notail")) {
      return call(result);
    }
    if (op.kind != TokenKind::Keyword) fail("expected an opcode but found " + describe_next());
    take();
    if (op.lexeme == "bitcast" || op.lexeme == "inttoptr") {
      TypedOperand v = parse_typed_operand();
      expect_keyword("to");
      Type to = parse_type();
      if (op.lexeme == "bitcast") return BitcastInst{result, std::move(v), std::move(to)};
      return IntToPtrInst{result, std::move(v), std::move(to)};
    }
    if (op.lexeme == "load") {
      if (accept_keyword("volatile")) warn("ignored 'volatile'", last_->span);
      LoadInst l;
      l.result = result;
      l.type = parse_type();
      expect_punct(",");
      l.src = parse_typed_operand();
      l.align = parse_align_suffix();
      return l;
    }
    if (op.lexeme == "getelementptr") {
      GetElementPtrInst g;
      g.result = result;
      g.inbounds = accept_keyword("inbounds");
      g.source_type = parse_type();
      expect_punct(",");
      g.base = parse_typed_operand();
      while (check_punct(",") && !(exists(1) && peek(1).kind == TokenKind::Metadata)) {
        take();
        g.indices.push_back(parse_typed_operand());
      }
      return g;
    }
    if (op.lexeme == "icmp") {
      static const std::set<std::string, std::less<>> kPreds = {
          "eq", "ne", "ugt", "uge", "ult", "ule", "sgt", "sge", "slt", "sle"};
      const Token& pred = expect_kind(TokenKind::Keyword, "comparison predicate");
      if (!kPreds.count(pred.lexeme)) fail_at(pred, "unknown icmp predicate '" + pred.lexeme + "'");
      ICmpInst c;
      c.result = result;
      c.predicate = pred.lexeme;
      c.type = parse_type();
      c.lhs = parse_value(c.type);
      expect_punct(",");
      c.rhs = parse_value(c.type);
      return c;
    }
    if (op.lexeme == "alloca") {
      AllocaInst a;
      a.result = result;
      a.type = parse_type();
      if (check_punct(",") && exists(1) && !peek(1).is_keyword("align") &&
          peek(1).kind != TokenKind::Metadata) {
        take();
        a.count = parse_typed_operand();
      }
      a.align = parse_align_suffix();
      return a;
    }
    fail_at(op, "unsupported instruction '" + op.lexeme + "'");
  }

  CallInst call(std::optional<std::string> result) {
    CallInst c;
    c.result = std::move(result);
    if (accept_keyword("tail")) {
      c.tail = true;
    } else if (check_keyword("musttail") || check_keyword("notail")) {
      warn("ignored call marker '" + peek().lexeme + "'", peek().span);
      take();
    }
    expect_keyword("call");
    while (exists() && peek().kind == TokenKind::Keyword && !starts_type()) {
      warn("ignored call attribute '" + peek().lexeme + "'", peek().span);
      take();
    }
    c.ret_type = parse_type(false);
    c.callee = expect_kind(TokenKind::GlobalIdent, "callee").text;
    expect_punct("(");
    if (!check_punct(")")) {
      do {
        c.args.push_back(parse_typed_operand());
      } while (accept_punct(","));
    }
    const Token& close = peek();
    expect_punct(")");
    skip_trailing_attributes(close.span.line);
    return c;
  }

  std::string_view source_;
  std::vector<Token> toks_;
  ParseOptions opts_;
  std::size_t pos_ = 0;
  const Token* last_ = nullptr;
  int depth_ = 0;
  std::vector<std::uint32_t> line_lengths_;
  std::vector<ParseError> errors_;
  std::vector<ParseWarning> warnings_;
};

}  // namespace detail

/// Parses `source` into a module. On failure, `errors` holds up to
/// `opts.max_errors` errors ordered by position and `module` is empty.
inline ParseResult parse_module(std::string_view source, std::string filename,
                                ParseOptions opts = {}) {
  detail::Lexer lexer(source);
  std::vector<Token> tokens = lexer.run();
  detail::Parser parser(source, std::move(tokens), opts);
  QirModule m = parser.run(std::move(filename));

  ParseResult result;
  result.errors = lexer.errors();
  for (auto& e : parser.errors()) result.errors.push_back(std::move(e));
  std::stable_sort(result.errors.begin(), result.errors.end(),
                   [](const ParseError& a, const ParseError& b) { return a.span < b.span; });
  if (result.errors.size() > opts.max_errors) result.errors.resize(opts.max_errors);
  result.warnings = std::move(parser.warnings());
  if (result.errors.empty()) result.module = std::move(m);
  return result;
}

}  // namespace qir_sentinel
