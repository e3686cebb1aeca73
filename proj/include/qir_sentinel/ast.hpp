#pragma once

// Typed, span-carrying syntax tree for the QIR subset of LLVM IR.

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

namespace qir_sentinel {

/// Location of a construct in its source file. Lines and columns are 1-based;
/// the column range is half-open, [col_start, col_end). A zero line marks a
/// synthesized node with no source position.
struct SourceSpan {
  std::uint32_t line = 0;
  std::uint32_t col_start = 0;
  std::uint32_t col_end = 0;

  friend bool operator==(const SourceSpan&, const SourceSpan&) = default;
  friend auto operator<=>(const SourceSpan&, const SourceSpan&) = default;
};

struct Type {
  enum class Kind {
    Int,
    Double,
    Pointer,
    Array,     // [N x T]
    Function,  // elems = {ret, params...}
    Struct,
    Named,
    Pauli,
    Range,
    Result,
    Qubit,
    QirArray,  // the opaque %Array
    Tuple,
    Void,
  };

  Kind kind = Kind::Void;
  std::uint32_t width = 0;  // Int
  std::uint64_t count = 0;  // Array
  std::string name;         // Named
  std::vector<Type> elems;

  static Type of(Kind k) {
    Type t;
    t.kind = k;
    return t;
  }
  static Type integer(std::uint32_t bits) {
    Type t = of(Kind::Int);
    t.width = bits;
    return t;
  }
  static Type real() { return of(Kind::Double); }
  static Type void_type() { return of(Kind::Void); }
  static Type opaque(Kind k) { return of(k); }
  static Type named(std::string n) {
    Type t = of(Kind::Named);
    t.name = std::move(n);
    return t;
  }
  static Type pointer_to(Type pointee) {
    Type t = of(Kind::Pointer);
    t.elems.push_back(std::move(pointee));
    return t;
  }
  static Type array_of(std::uint64_t n, Type elem) {
    Type t = of(Kind::Array);
    t.count = n;
    t.elems.push_back(std::move(elem));
    return t;
  }
  static Type struct_of(std::vector<Type> fields) {
    Type t = of(Kind::Struct);
    t.elems = std::move(fields);
    return t;
  }
  static Type function_of(Type ret, std::vector<Type> params) {
    Type t = of(Kind::Function);
    t.elems.push_back(std::move(ret));
    for (auto& p : params) t.elems.push_back(std::move(p));
    return t;
  }
  static Type qubit_ptr() { return pointer_to(opaque(Kind::Qubit)); }
  static Type array_ptr() { return pointer_to(opaque(Kind::QirArray)); }
  static Type result_ptr() { return pointer_to(opaque(Kind::Result)); }

  bool is_void() const { return kind == Kind::Void; }
  bool is_pointer() const { return kind == Kind::Pointer; }
  const Type& pointee() const { return elems.front(); }

  friend bool operator==(const Type&, const Type&) = default;
};

inline bool is_qubit_ptr(const Type& t) {
  return t.is_pointer() && t.pointee().kind == Type::Kind::Qubit;
}
inline bool is_qubit_slot_ptr(const Type& t) {
  return t.is_pointer() && is_qubit_ptr(t.pointee());
}
inline bool is_array_ptr(const Type& t) {
  return t.is_pointer() && t.pointee().kind == Type::Kind::QirArray;
}

/// Built-in type for a `%Name` spelling, or nullopt for user-named types.
inline std::optional<Type::Kind> builtin_type_kind(std::string_view name) {
  if (name == "Qubit") return Type::Kind::Qubit;
  if (name == "Result") return Type::Kind::Result;
  if (name == "Array") return Type::Kind::QirArray;
  if (name == "Tuple") return Type::Kind::Tuple;
  if (name == "Pauli") return Type::Kind::Pauli;
  if (name == "Range") return Type::Kind::Range;
  return std::nullopt;
}

inline bool is_opaque_builtin(Type::Kind k) {
  return k == Type::Kind::Qubit || k == Type::Kind::Result ||
         k == Type::Kind::QirArray || k == Type::Kind::Tuple;
}

struct TypedConstant;

struct Constant {
  enum class Kind {
    Int,        // also i1 true/false
    Double,
    Null,
    Undef,
    ZeroInit,
    Range,      // %Range { i64 start, i64 step, i64 end }
    Pauli,      // %Pauli <code>
    Aggregate,  // { ... } or [ ... ]
    Expr,       // constant expression, never interpreted beyond inttoptr
    Global,     // address of @global inside a constant expression
  };
  enum class ExprOp { IntToPtr, PtrToInt, Bitcast, GetElementPtr, ExtractValue };

  Kind kind = Kind::Int;
  std::uint32_t width = 0;  // Int
  std::int64_t value = 0;   // Int, Pauli
  double real = 0.0;        // Double
  std::int64_t range_start = 0, range_step = 0, range_end = 0;
  bool array_brackets = false;  // Aggregate spelled with [ ] rather than { }

  // Aggregate elements, or constant-expression operands.
  std::vector<TypedConstant> elems;

  // Constant expressions.
  ExprOp op = ExprOp::Bitcast;
  bool inbounds = false;
  std::vector<Type> expr_types;  // GEP source type and/or cast target type
  std::vector<std::int64_t> indices;  // extractvalue indices

  std::string global;  // Global

  static Constant integer(std::uint32_t w, std::int64_t v);
  static Constant floating(double d);
  static Constant null();

  friend bool operator==(const Constant& a, const Constant& b);
};

struct TypedConstant {
  Type type;
  Constant value;
  friend bool operator==(const TypedConstant&, const TypedConstant&) = default;
};

inline Constant Constant::integer(std::uint32_t w, std::int64_t v) {
  Constant c;
  c.kind = Kind::Int;
  c.width = w;
  c.value = v;
  return c;
}
inline Constant Constant::floating(double d) {
  Constant c;
  c.kind = Kind::Double;
  c.real = d;
  return c;
}
inline Constant Constant::null() {
  Constant c;
  c.kind = Kind::Null;
  return c;
}

inline bool operator==(const Constant& a, const Constant& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Constant::Kind::Int:
      return a.width == b.width && a.value == b.value;
    case Constant::Kind::Double:
      return a.real == b.real || (a.real != a.real && b.real != b.real);
    case Constant::Kind::Null:
    case Constant::Kind::Undef:
    case Constant::Kind::ZeroInit:
      return true;
    case Constant::Kind::Range:
      return a.range_start == b.range_start && a.range_step == b.range_step &&
             a.range_end == b.range_end;
    case Constant::Kind::Pauli:
      return a.value == b.value;
    case Constant::Kind::Aggregate:
      return a.array_brackets == b.array_brackets && a.elems == b.elems;
    case Constant::Kind::Expr:
      return a.op == b.op && a.inbounds == b.inbounds && a.elems == b.elems &&
             a.expr_types == b.expr_types && a.indices == b.indices;
    case Constant::Kind::Global:
      return a.global == b.global;
  }
  return false;
}

struct LocalRef {
  std::string name;
  friend bool operator==(const LocalRef&, const LocalRef&) = default;
};
struct GlobalRef {
  std::string name;
  friend bool operator==(const GlobalRef&, const GlobalRef&) = default;
};

using Operand = std::variant<LocalRef, GlobalRef, Constant>;

struct TypedOperand {
  Type type;
  Operand value;
  friend bool operator==(const TypedOperand&, const TypedOperand&) = default;
};

struct CallInst {
  std::optional<std::string> result;
  bool tail = false;
  Type ret_type;
  std::string callee;
  std::vector<TypedOperand> args;
  friend bool operator==(const CallInst&, const CallInst&) = default;
};

struct BitcastInst {
  std::string result;
  TypedOperand value;
  Type to;
  friend bool operator==(const BitcastInst&, const BitcastInst&) = default;
};

struct IntToPtrInst {
  std::string result;
  TypedOperand value;
  Type to;
  friend bool operator==(const IntToPtrInst&, const IntToPtrInst&) = default;
};

struct StoreInst {
  TypedOperand value;
  TypedOperand dest;
  std::optional<std::uint64_t> align;
  friend bool operator==(const StoreInst&, const StoreInst&) = default;
};

struct LoadInst {
  std::string result;
  Type type;
  TypedOperand src;
  std::optional<std::uint64_t> align;
  friend bool operator==(const LoadInst&, const LoadInst&) = default;
};

struct GetElementPtrInst {
  std::string result;
  bool inbounds = false;
  Type source_type;
  TypedOperand base;
  std::vector<TypedOperand> indices;
  friend bool operator==(const GetElementPtrInst&, const GetElementPtrInst&) = default;
};

struct ICmpInst {
  std::string result;
  std::string predicate;
  Type type;
  Operand lhs;
  Operand rhs;
  friend bool operator==(const ICmpInst&, const ICmpInst&) = default;
};

struct AllocaInst {
  std::string result;
  Type type;
  std::optional<TypedOperand> count;
  std::optional<std::uint64_t> align;
  friend bool operator==(const AllocaInst&, const AllocaInst&) = default;
};

using InstructionBody = std::variant<CallInst, BitcastInst, IntToPtrInst, StoreInst,
                                     LoadInst, GetElementPtrInst, ICmpInst, AllocaInst>;

struct Instruction {
  InstructionBody body;
  SourceSpan span;
  friend bool operator==(const Instruction&, const Instruction&) = default;
};

/// Local name bound by an instruction, if any.
inline std::optional<std::string> result_name(const Instruction& inst) {
  return std::visit(
      [](const auto& i) -> std::optional<std::string> {
        using T = std::decay_t<decltype(i)>;
        if constexpr (std::is_same_v<T, CallInst>) {
          return i.result;
        } else if constexpr (std::is_same_v<T, StoreInst>) {
          return std::nullopt;
        } else {
          return i.result;
        }
      },
      inst.body);
}

struct RetValue {
  TypedOperand value;
  friend bool operator==(const RetValue&, const RetValue&) = default;
};
struct RetVoid {
  friend bool operator==(const RetVoid&, const RetVoid&) = default;
};
struct CondBranch {
  Operand cond;
  std::string then_label;
  std::string else_label;
  friend bool operator==(const CondBranch&, const CondBranch&) = default;
};
struct Branch {
  std::string label;
  friend bool operator==(const Branch&, const Branch&) = default;
};

struct Terminator {
  std::variant<RetValue, RetVoid, CondBranch, Branch> body;
  SourceSpan span;
  friend bool operator==(const Terminator&, const Terminator&) = default;
};

/// Represented so it can be reported; the analyzer gives it no meaning.
struct PhiNode {
  std::string result;
  Type type;
  std::vector<std::pair<Operand, std::string>> incoming;
  SourceSpan span;
  friend bool operator==(const PhiNode&, const PhiNode&) = default;
};

struct Block {
  std::string label;  // empty for an unlabeled entry block
  std::vector<PhiNode> phis;
  std::vector<Instruction> instructions;
  Terminator terminator;
  SourceSpan span;
  friend bool operator==(const Block&, const Block&) = default;
};

struct Param {
  Type type;
  std::optional<std::string> name;
  friend bool operator==(const Param&, const Param&) = default;
};

struct Function {
  std::string name;
  std::vector<std::string> linkage;  // e.g. "internal", stored verbatim
  Type ret_type;
  std::vector<Param> params;
  std::vector<Block> blocks;  // first block is the entry
  bool is_declaration = false;
  SourceSpan span;

  const Block* find_block(std::string_view label) const {
    for (const auto& b : blocks)
      if (b.label == label) return &b;
    return nullptr;
  }

  friend bool operator==(const Function&, const Function&) = default;
};

struct TypeDecl {
  std::string name;
  std::optional<Type> body;  // nullopt = opaque
  SourceSpan span;
  friend bool operator==(const TypeDecl&, const TypeDecl&) = default;
};

struct QirModule {
  std::string source_name;
  std::vector<TypeDecl> types;
  std::vector<Function> functions;

  const Function* find_function(std::string_view name) const {
    for (const auto& f : functions)
      if (f.name == name) return &f;
    return nullptr;
  }
  const TypeDecl* find_type(std::string_view name) const {
    for (const auto& t : types)
      if (t.name == name) return &t;
    return nullptr;
  }
  std::size_t definition_count() const {
    std::size_t n = 0;
    for (const auto& f : functions) n += f.is_declaration ? 0 : 1;
    return n;
  }
  std::size_t declaration_count() const { return functions.size() - definition_count(); }

  friend bool operator==(const QirModule&, const QirModule&) = default;
};

/// Copy of `m` with every span zeroed and the source name cleared, for
/// structural comparison.
inline QirModule strip_spans(QirModule m) {
  m.source_name.clear();
  for (auto& t : m.types) t.span = {};
  for (auto& f : m.functions) {
    f.span = {};
    for (auto& b : f.blocks) {
      b.span = {};
      b.terminator.span = {};
      for (auto& p : b.phis) p.span = {};
      for (auto& i : b.instructions) i.span = {};
    }
  }
  return m;
}

}  // namespace qir_sentinel
