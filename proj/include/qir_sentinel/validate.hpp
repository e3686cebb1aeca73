#pragma once

#include <set>
#include <string>
#include <vector>

#include "qir_sentinel/ast.hpp"

namespace qir_sentinel {

struct StructuralError {
  enum class Kind {
    DanglingLabel,
    DuplicateLabel,
    DuplicateName,
    DuplicateFunction,
    DuplicateType,
    OpaqueByValue,
    UnresolvedType,
    UndeclaredCallee,
    UnsupportedPhi,
    InvalidIntWidth,
    IntLiteralOverflow,
    PauliOutOfRange,
    CallResultMismatch,
    EmptyDefinition,
  };

  Kind kind;
  std::string message;
  std::string function;  // empty for module-level errors
  SourceSpan span;

  friend bool operator==(const StructuralError&, const StructuralError&) = default;
};

inline const char* to_string(StructuralError::Kind k) {
  switch (k) {
    case StructuralError::Kind::DanglingLabel: return "DanglingLabel";
    case StructuralError::Kind::DuplicateLabel: return "DuplicateLabel";
    case StructuralError::Kind::DuplicateName: return "DuplicateName";
    case StructuralError::Kind::DuplicateFunction: return "DuplicateFunction";
    case StructuralError::Kind::DuplicateType: return "DuplicateType";
    case StructuralError::Kind::OpaqueByValue: return "OpaqueByValue";
    case StructuralError::Kind::UnresolvedType: return "UnresolvedType";
    case StructuralError::Kind::UndeclaredCallee: return "UndeclaredCallee";
    case StructuralError::Kind::UnsupportedPhi: return "UnsupportedPhi";
    case StructuralError::Kind::InvalidIntWidth: return "InvalidIntWidth";
    case StructuralError::Kind::IntLiteralOverflow: return "IntLiteralOverflow";
    case StructuralError::Kind::PauliOutOfRange: return "PauliOutOfRange";
    case StructuralError::Kind::CallResultMismatch: return "CallResultMismatch";
    case StructuralError::Kind::EmptyDefinition: return "EmptyDefinition";
  }
  return "?";
}

namespace detail {

class ModuleValidator {
 public:
  explicit ModuleValidator(const QirModule& m) : module_(m) {
    for (const auto& t : m.types) {
      if (!t.body) opaque_names_.insert(t.name);
    }
  }

  std::vector<StructuralError> run() {
    std::set<std::string> seen_types;
    for (const auto& t : module_.types) {
      if (!seen_types.insert(t.name).second) {
        add(StructuralError::Kind::DuplicateType, "type %" + t.name + " is declared twice", t.span);
      }
      if (t.body) check_type(*t.body, /*under_pointer=*/false, t.span);
    }

    std::set<std::string> seen_fns;
    for (const auto& f : module_.functions) {
      fn_ = f.name;
      if (!seen_fns.insert(f.name).second) {
        add(StructuralError::Kind::DuplicateFunction, "function @" + f.name + " is defined twice",
            f.span);
      }
      check_function(f);
    }
    fn_.clear();
    return std::move(errors_);
  }

 private:
  void add(StructuralError::Kind k, std::string msg, SourceSpan span) {
    errors_.push_back(StructuralError{k, std::move(msg), fn_, span});
  }

  // `under_pointer` is true when `t` is the direct pointee of a pointer type.
  void check_type(const Type& t, bool under_pointer, SourceSpan span) {
    using K = Type::Kind;
    switch (t.kind) {
      case K::Int:
        if (t.width == 0) add(StructuralError::Kind::InvalidIntWidth, "integer width must be >= 1", span);
        break;
      case K::Named:
        if (t.name.empty() || !module_.find_type(t.name)) {
          add(StructuralError::Kind::UnresolvedType, "type %" + t.name + " is not declared", span);
        } else if (!under_pointer && opaque_names_.count(t.name)) {
          add(StructuralError::Kind::OpaqueByValue,
              "opaque type %" + t.name + " may only be used through a pointer", span);
        }
        break;
      case K::Qubit:
      case K::Result:
      case K::QirArray:
      case K::Tuple:
        if (!under_pointer) {
          add(StructuralError::Kind::OpaqueByValue,
              "opaque type may only be used through a pointer", span);
        }
        break;
      case K::Pointer:
        check_type(t.pointee(), true, span);
        break;
      case K::Array:
      case K::Struct:
        for (const auto& e : t.elems) check_type(e, false, span);
        break;
      case K::Function:
        for (std::size_t i = 0; i < t.elems.size(); ++i) {
          // void is a legal function result.
          if (i == 0 && t.elems[0].is_void()) continue;
          check_type(t.elems[i], false, span);
        }
        break;
      default:
        break;
    }
  }

  void check_constant(const Type& type, const Constant& c, SourceSpan span) {
    switch (c.kind) {
      case Constant::Kind::Int:
        if (c.width >= 1 && c.width < 64) {
          const __int128 lo = -(static_cast<__int128>(1) << (c.width - 1));
          const __int128 hi = (static_cast<__int128>(1) << c.width) - 1;
          if (c.value < lo || c.value > hi) {
            add(StructuralError::Kind::IntLiteralOverflow,
                "literal " + std::to_string(c.value) + " does not fit in i" +
                    std::to_string(c.width),
                span);
          }
        }
        break;
      case Constant::Kind::Pauli:
        if (c.value < 0 || c.value > 3) {
          add(StructuralError::Kind::PauliOutOfRange,
              "Pauli code " + std::to_string(c.value) + " is outside 0..3", span);
        }
        break;
      case Constant::Kind::Aggregate:
      case Constant::Kind::Expr:
        for (const auto& e : c.elems) {
          check_type(e.type, false, span);
          check_constant(e.type, e.value, span);
        }
        for (const auto& t : c.expr_types) check_type(t, false, span);
        break;
      default:
        break;
    }
    (void)type;
  }

  void check_operand(const TypedOperand& op, SourceSpan span) {
    check_type(op.type, false, span);
    if (const auto* c = std::get_if<Constant>(&op.value)) check_constant(op.type, *c, span);
  }

  void bind(std::set<std::string>& names, const std::string& name, SourceSpan span) {
    if (!names.insert(name).second) {
      add(StructuralError::Kind::DuplicateName, "%" + name + " is assigned more than once", span);
    }
  }

  void check_function(const Function& f) {
    if (!f.ret_type.is_void()) check_type(f.ret_type, false, f.span);
    for (const auto& p : f.params) check_type(p.type, false, f.span);

    if (f.is_declaration) return;
    if (f.blocks.empty()) {
      add(StructuralError::Kind::EmptyDefinition, "definition of @" + f.name + " has no blocks",
          f.span);
      return;
    }

    std::set<std::string> names;
    for (const auto& p : f.params)
      if (p.name) bind(names, *p.name, f.span);

    std::set<std::string> labels;
    for (const auto& b : f.blocks) {
      if (!labels.insert(b.label).second) {
        add(StructuralError::Kind::DuplicateLabel, "block label '" + b.label + "' is used twice",
            b.span);
      }
    }

    for (const auto& b : f.blocks) {
      for (const auto& phi : b.phis) {
        add(StructuralError::Kind::UnsupportedPhi,
            "phi nodes are not supported (%" + phi.result + ")", phi.span);
        bind(names, phi.result, phi.span);
      }
      for (const auto& inst : b.instructions) check_instruction(inst, names);
      check_terminator(b.terminator, labels);
    }
  }

  void check_instruction(const Instruction& inst, std::set<std::string>& names) {
    if (auto r = result_name(inst)) bind(names, *r, inst.span);
    std::visit(
        [&](const auto& i) {
          using T = std::decay_t<decltype(i)>;
          if constexpr (std::is_same_v<T, CallInst>) {
            if (!i.ret_type.is_void()) check_type(i.ret_type, false, inst.span);
            for (const auto& a : i.args) check_operand(a, inst.span);
            if (i.ret_type.is_void() == i.result.has_value()) {
              add(StructuralError::Kind::CallResultMismatch,
                  i.result ? "call to a void function cannot bind %" + *i.result
                           : "call result of @" + i.callee + " must be bound to a name",
                  inst.span);
            }
            if (!module_.find_function(i.callee)) {
              add(StructuralError::Kind::UndeclaredCallee,
                  "call to undeclared function @" + i.callee, inst.span);
            }
          } else if constexpr (std::is_same_v<T, BitcastInst> || std::is_same_v<T, IntToPtrInst>) {
            check_operand(i.value, inst.span);
            check_type(i.to, false, inst.span);
          } else if constexpr (std::is_same_v<T, StoreInst>) {
            check_operand(i.value, inst.span);
            check_operand(i.dest, inst.span);
          } else if constexpr (std::is_same_v<T, LoadInst>) {
            check_type(i.type, false, inst.span);
            check_operand(i.src, inst.span);
          } else if constexpr (std::is_same_v<T, GetElementPtrInst>) {
            check_type(i.source_type, false, inst.span);
            check_operand(i.base, inst.span);
            for (const auto& ix : i.indices) check_operand(ix, inst.span);
          } else if constexpr (std::is_same_v<T, ICmpInst>) {
            check_type(i.type, false, inst.span);
            if (const auto* c = std::get_if<Constant>(&i.lhs)) check_constant(i.type, *c, inst.span);
            if (const auto* c = std::get_if<Constant>(&i.rhs)) check_constant(i.type, *c, inst.span);
          } else if constexpr (std::is_same_v<T, AllocaInst>) {
            check_type(i.type, false, inst.span);
            if (i.count) check_operand(*i.count, inst.span);
          }
        },
        inst.body);
  }

  void check_terminator(const Terminator& t, const std::set<std::string>& labels) {
    auto need = [&](const std::string& l) {
      if (!labels.count(l)) {
        add(StructuralError::Kind::DanglingLabel, "branch to undefined label '" + l + "'", t.span);
      }
    };
    if (const auto* r = std::get_if<RetValue>(&t.body)) {
      check_operand(r->value, t.span);
    } else if (const auto* cb = std::get_if<CondBranch>(&t.body)) {
      need(cb->then_label);
      need(cb->else_label);
    } else if (const auto* br = std::get_if<Branch>(&t.body)) {
      need(br->label);
    }
  }

  const QirModule& module_;
  std::set<std::string> opaque_names_;
  std::string fn_;
  std::vector<StructuralError> errors_;
};

}  // namespace detail

/// Every violated well-formedness rule of `module`; empty means well-formed.
inline std::vector<StructuralError> validate_module(const QirModule& module) {
  return detail::ModuleValidator(module).run();
}

}  // namespace qir_sentinel
