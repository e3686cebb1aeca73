#pragma once

// Emits textual IR in the dialect accepted by parse_module.

#include <charconv>
#include <cmath>
#include <cstring>
#include <sstream>
#include <string>

#include "qir_sentinel/ast.hpp"

namespace qir_sentinel {

inline std::string print_type(const Type& t) {
  using K = Type::Kind;
  switch (t.kind) {
    case K::Int: return "i" + std::to_string(t.width);
    case K::Double: return "double";
    case K::Pointer: return print_type(t.pointee()) + "*";
    case K::Array:
      return "[" + std::to_string(t.count) + " x " + print_type(t.elems.front()) + "]";
    case K::Function: {
      std::string s = print_type(t.elems.front()) + " (";
      for (std::size_t i = 1; i < t.elems.size(); ++i) {
        if (i > 1) s += ", ";
        s += print_type(t.elems[i]);
      }
      return s + ")";
    }
    case K::Struct: {
      if (t.elems.empty()) return "{}";
      std::string s = "{ ";
      for (std::size_t i = 0; i < t.elems.size(); ++i) {
        if (i) s += ", ";
        s += print_type(t.elems[i]);
      }
      return s + " }";
    }
    case K::Named: return "%" + t.name;
    case K::Pauli: return "%Pauli";
    case K::Range: return "%Range";
    case K::Result: return "%Result";
    case K::Qubit: return "%Qubit";
    case K::QirArray: return "%Array";
    case K::Tuple: return "%Tuple";
    case K::Void: return "void";
  }
  return "?";
}

namespace detail {

inline bool is_plain_identifier(const std::string& name) {
  if (name.empty()) return false;
  for (char c : name) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '_' || c == '.' || c == '$' || c == '-';
    if (!ok) return false;
  }
  return true;
}

inline std::string sigil_name(char sigil, const std::string& name) {
  if (is_plain_identifier(name)) return std::string(1, sigil) + name;
  return std::string(1, sigil) + "\"" + name + "\"";
}

inline std::string print_double(double d) {
  if (!std::isfinite(d)) {
    std::uint64_t bits = 0;
    std::memcpy(&bits, &d, sizeof bits);
    char buf[19] = "0x";
    auto r = std::to_chars(buf + 2, buf + sizeof buf, bits, 16);
    std::string hex(buf + 2, r.ptr);
    while (hex.size() < 16) hex.insert(hex.begin(), '0');
    for (auto& c : hex) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return "0x" + hex;
  }
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, d, std::chars_format::scientific);
  std::string s(buf, r.ptr);
  // LLVM requires a decimal point in floating literals.
  if (s.find('.') == std::string::npos) s.insert(s.find('e'), ".0");
  return s;
}

}  // namespace detail

inline std::string print_constant(const Type& type, const Constant& c);

inline std::string print_typed_constant(const TypedConstant& tc) {
  return print_type(tc.type) + " " + print_constant(tc.type, tc.value);
}

inline std::string print_constant(const Type& type, const Constant& c) {
  switch (c.kind) {
    case Constant::Kind::Int:
      if (c.width == 1 && (c.value == 0 || c.value == 1)) return c.value ? "true" : "false";
      return std::to_string(c.value);
    case Constant::Kind::Double: return detail::print_double(c.real);
    case Constant::Kind::Null: return "null";
    case Constant::Kind::Undef: return "undef";
    case Constant::Kind::ZeroInit: return "zeroinitializer";
    case Constant::Kind::Range:
      return "{ i64 " + std::to_string(c.range_start) + ", i64 " + std::to_string(c.range_step) +
             ", i64 " + std::to_string(c.range_end) + " }";
    case Constant::Kind::Pauli: return std::to_string(c.value);
    case Constant::Kind::Aggregate: {
      std::string s = c.array_brackets ? "[" : "{";
      for (std::size_t i = 0; i < c.elems.size(); ++i) {
        s += i ? ", " : " ";
        s += print_typed_constant(c.elems[i]);
      }
      s += c.elems.empty() ? "" : " ";
      return s + (c.array_brackets ? "]" : "}");
    }
    case Constant::Kind::Expr: {
      using Op = Constant::ExprOp;
      std::string s;
      switch (c.op) {
        case Op::IntToPtr: s = "inttoptr"; break;
        case Op::PtrToInt: s = "ptrtoint"; break;
        case Op::Bitcast: s = "bitcast"; break;
        case Op::GetElementPtr: s = "getelementptr"; break;
        case Op::ExtractValue: s = "extractvalue"; break;
      }
      if (c.inbounds) s += " inbounds";
      s += " (";
      if (c.op == Op::GetElementPtr) {
        s += print_type(c.expr_types.front());
        for (const auto& e : c.elems) s += ", " + print_typed_constant(e);
      } else if (c.op == Op::ExtractValue) {
        s += print_typed_constant(c.elems.front());
        for (auto ix : c.indices) s += ", " + std::to_string(ix);
      } else {
        s += print_typed_constant(c.elems.front()) + " to " + print_type(c.expr_types.front());
      }
      return s + ")";
    }
    case Constant::Kind::Global: return detail::sigil_name('@', c.global);
  }
  (void)type;
  return "?";
}

inline std::string print_operand(const Type& type, const Operand& op) {
  if (const auto* l = std::get_if<LocalRef>(&op)) return detail::sigil_name('%', l->name);
  if (const auto* g = std::get_if<GlobalRef>(&op)) return detail::sigil_name('@', g->name);
  return print_constant(type, std::get<Constant>(op));
}

inline std::string print_typed_operand(const TypedOperand& op) {
  return print_type(op.type) + " " + print_operand(op.type, op.value);
}

namespace detail {

inline std::string align_suffix(const std::optional<std::uint64_t>& align) {
  return align ? ", align " + std::to_string(*align) : std::string();
}

inline std::string local(const std::string& n) { return sigil_name('%', n); }

}  // namespace detail

inline std::string print_instruction(const Instruction& inst) {
  using detail::local;
  return std::visit(
      [](const auto& i) -> std::string {
        using T = std::decay_t<decltype(i)>;
        if constexpr (std::is_same_v<T, CallInst>) {
          std::string s;
          if (i.result) s = local(*i.result) + " = ";
          if (i.tail) s += "tail ";
          s += "call " + print_type(i.ret_type) + " " + detail::sigil_name('@', i.callee) + "(";
          for (std::size_t k = 0; k < i.args.size(); ++k) {
            if (k) s += ", ";
            s += print_typed_operand(i.args[k]);
          }
          return s + ")";
        } else if constexpr (std::is_same_v<T, BitcastInst>) {
          return local(i.result) + " = bitcast " + print_typed_operand(i.value) + " to " +
                 print_type(i.to);
        } else if constexpr (std::is_same_v<T, IntToPtrInst>) {
          return local(i.result) + " = inttoptr " + print_typed_operand(i.value) + " to " +
                 print_type(i.to);
        } else if constexpr (std::is_same_v<T, StoreInst>) {
          return "store " + print_typed_operand(i.value) + ", " + print_typed_operand(i.dest) +
                 detail::align_suffix(i.align);
        } else if constexpr (std::is_same_v<T, LoadInst>) {
          return local(i.result) + " = load " + print_type(i.type) + ", " +
                 print_typed_operand(i.src) + detail::align_suffix(i.align);
        } else if constexpr (std::is_same_v<T, GetElementPtrInst>) {
          std::string s = local(i.result) + " = getelementptr ";
          if (i.inbounds) s += "inbounds ";
          s += print_type(i.source_type) + ", " + print_typed_operand(i.base);
          for (const auto& ix : i.indices) s += ", " + print_typed_operand(ix);
          return s;
        } else if constexpr (std::is_same_v<T, ICmpInst>) {
          return local(i.result) + " = icmp " + i.predicate + " " + print_type(i.type) + " " +
                 print_operand(i.type, i.lhs) + ", " + print_operand(i.type, i.rhs);
        } else if constexpr (std::is_same_v<T, AllocaInst>) {
          std::string s = local(i.result) + " = alloca " + print_type(i.type);
          if (i.count) s += ", " + print_typed_operand(*i.count);
          return s + detail::align_suffix(i.align);
        }
      },
      inst.body);
}

inline std::string print_terminator(const Terminator& t) {
  if (const auto* r = std::get_if<RetValue>(&t.body)) return "ret " + print_typed_operand(r->value);
  if (std::holds_alternative<RetVoid>(t.body)) return "ret void";
  if (const auto* cb = std::get_if<CondBranch>(&t.body)) {
    return "br i1 " + print_operand(Type::integer(1), cb->cond) + ", label " +
           detail::local(cb->then_label) + ", label " + detail::local(cb->else_label);
  }
  return "br label " + detail::local(std::get<Branch>(t.body).label);
}

inline std::string print_function(const Function& f) {
  std::ostringstream out;
  out << (f.is_declaration ? "declare " : "define ");
  for (const auto& l : f.linkage) out << l << ' ';
  out << print_type(f.ret_type) << ' ' << detail::sigil_name('@', f.name) << '(';
  for (std::size_t i = 0; i < f.params.size(); ++i) {
    if (i) out << ", ";
    out << print_type(f.params[i].type);
    if (f.params[i].name) out << ' ' << detail::local(*f.params[i].name);
  }
  out << ')';
  if (f.is_declaration) {
    out << '\n';
    return out.str();
  }
  out << " {\n";
  for (std::size_t bi = 0; bi < f.blocks.size(); ++bi) {
    const auto& b = f.blocks[bi];
    if (bi) out << '\n';
    if (!b.label.empty()) {
      out << (detail::is_plain_identifier(b.label) ? b.label : "\"" + b.label + "\"") << ":\n";
    }
    for (const auto& phi : b.phis) {
      out << "  " << detail::local(phi.result) << " = phi " << print_type(phi.type) << ' ';
      for (std::size_t k = 0; k < phi.incoming.size(); ++k) {
        if (k) out << ", ";
        out << "[ " << print_operand(phi.type, phi.incoming[k].first) << ", "
            << detail::local(phi.incoming[k].second) << " ]";
      }
      out << '\n';
    }
    for (const auto& inst : b.instructions) out << "  " << print_instruction(inst) << '\n';
    out << "  " << print_terminator(b.terminator) << '\n';
  }
  out << "}\n";
  return out.str();
}

inline std::string print_module(const QirModule& m) {
  std::ostringstream out;
  out << "; source: " << (m.source_name.empty() ? "<unnamed>" : m.source_name) << '\n';
  if (!m.types.empty()) out << '\n';
  for (const auto& t : m.types) {
    out << detail::sigil_name('%', t.name) << " = type "
        << (t.body ? print_type(*t.body) : std::string("opaque")) << '\n';
  }
  for (const auto& f : m.functions) out << '\n' << print_function(f);
  return out.str();
}

}  // namespace qir_sentinel
