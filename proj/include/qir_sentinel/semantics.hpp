#pragma once

// Path-sensitive symbolic execution of QIR over (environment x ledger).
//
// Each runtime/intrinsic call is mapped to a transfer function. A violated
// premise emits a diagnostic, skips the operation's effect and lets the path
// continue; with fail_fast the path halts at its first error instead.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "qir_sentinel/ast.hpp"
#include "qir_sentinel/config.hpp"
#include "qir_sentinel/diagnostic.hpp"
#include "qir_sentinel/ledger.hpp"

namespace qir_sentinel {

struct Unknown {
  friend bool operator==(const Unknown&, const Unknown&) = default;
};
struct QubitRef {
  QubitHandle handle;
  friend bool operator==(const QubitRef&, const QubitRef&) = default;
};
struct ArrayRef {
  ArrayHandle handle;
  friend bool operator==(const ArrayRef&, const ArrayRef&) = default;
};
/// i8* returned by array_get_element_ptr_1d.
struct ElemPtr {
  ArrayHandle array;
  std::optional<std::int64_t> index;
  friend bool operator==(const ElemPtr&, const ElemPtr&) = default;
};
/// ElemPtr cast to %Qubit**.
struct QubitPtrSlot {
  ArrayHandle array;
  std::optional<std::int64_t> index;
  friend bool operator==(const QubitPtrSlot&, const QubitPtrSlot&) = default;
};
struct ResultRef {
  SourceSpan site;
  friend bool operator==(const ResultRef&, const ResultRef&) = default;
};
struct Classical {
  std::optional<std::int64_t> integer;
  std::optional<double> real;
  friend bool operator==(const Classical&, const Classical&) = default;
};

using AbstractValue =
    std::variant<Unknown, QubitRef, ArrayRef, ElemPtr, QubitPtrSlot, ResultRef, Classical>;

struct CallFrame {
  std::string function;
  SourceSpan call_site;  // zero for the entry frame
  friend bool operator==(const CallFrame&, const CallFrame&) = default;
};

struct ExecState {
  std::map<std::string, AbstractValue> env;
  Ledger ledger;
  // Qubit held by each (array id, index) slot.
  std::map<std::pair<std::uint64_t, std::int64_t>, QubitHandle> slots;
  std::map<std::uint64_t, ArrayHandle> arrays;  // every array seen on this path
  std::map<std::uint64_t, std::vector<TraceEvent>> qubit_history;
  std::map<std::uint64_t, std::vector<TraceEvent>> array_history;
  std::map<std::int64_t, QubitHandle> static_qubits;
  std::vector<CallFrame> call_stack;
  std::uint64_t next_id = 1;
  std::uint64_t path_id = 0;
  bool halted = false;

  const std::string& function() const {
    static const std::string kNone;
    return call_stack.empty() ? kNone : call_stack.back().function;
  }
};

struct AnalysisResult {
  std::vector<Diagnostic> diagnostics;  // deduplicated and sorted
  std::vector<ExecState> final_states;  // returned, halted or truncated paths
  bool complete = true;
};

namespace detail {

struct QisCallee {
  std::string gate;
  std::string functor;  // body, ctl, adj, ctladj
};

inline std::optional<QisCallee> split_qis_callee(std::string_view callee) {
  constexpr std::string_view kPrefix = "__quantum__qis__";
  if (callee.substr(0, kPrefix.size()) != kPrefix) return std::nullopt;
  std::string_view rest = callee.substr(kPrefix.size());
  const auto sep = rest.rfind("__");
  if (sep == std::string_view::npos || sep == 0) return QisCallee{std::string(rest), ""};
  return QisCallee{std::string(rest.substr(0, sep)), std::string(rest.substr(sep + 2))};
}

inline bool starts_with(std::string_view s, std::string_view p) {
  return s.substr(0, p.size()) == p;
}

}  // namespace detail

class Analyzer {
 public:
  explicit Analyzer(const QirModule& module, AnalysisConfig config = {},
                    GateTable gates = GateTable::builtin())
      : module_(module), config_(std::move(config)), gates_(std::move(gates)) {}

  /// Explores every path of `entry`. Throws std::invalid_argument when
  /// `entry` is not a defined function.
  AnalysisResult run(const std::string& entry) {
    const Function* fn = module_.find_function(entry);
    if (!fn || fn->is_declaration) {
      throw std::invalid_argument("@" + entry + " is not a defined function");
    }
    diagnostics_.clear();
    abandoned_.clear();
    entry_ = entry;
    paths_ = 1;
    complete_ = true;

    AnalysisResult result;
    for (auto& o : exec_function(*fn, initial_state(*fn))) result.final_states.push_back(std::move(o.state));
    for (auto& s : abandoned_) result.final_states.push_back(std::move(s));
    abandoned_.clear();
    result.diagnostics = dedupe_and_sort(std::move(diagnostics_));
    diagnostics_.clear();
    result.complete = complete_;
    return result;
  }

  /// Entry state: %Qubit* parameters are live distinct qubits, %Array*
  /// parameters are live arrays of unknown length.
  ExecState initial_state(const Function& fn) {
    ExecState st;
    st.call_stack.push_back(CallFrame{fn.name, {}});
    for (std::size_t i = 0; i < fn.params.size(); ++i) {
      const Param& p = fn.params[i];
      AbstractValue v = Unknown{};
      if (is_qubit_ptr(p.type)) {
        QubitHandle q{st.next_id++, ParameterQubit{i}};
        st.ledger = add_qubit(st.ledger, q);
        note_qubit(st, q, "passed in as parameter", fn.span);
        v = QubitRef{q};
      } else if (is_array_ptr(p.type)) {
        ArrayHandle a{st.next_id++, ArrayHandle::Origin::Parameter, std::nullopt, fn.span};
        st.ledger = add_array(st.ledger, a);
        st.arrays[a.id] = a;
        note_array(st, a, "passed in as parameter", fn.span);
        v = ArrayRef{a};
      }
      if (p.name) st.env[*p.name] = v;
    }
    return st;
  }

  const std::vector<Diagnostic>& diagnostics() const { return diagnostics_; }
  const AnalysisConfig& config() const { return config_; }
  void set_entry_name(std::string entry) { entry_ = std::move(entry); }

  /// Live: in Q, or a member of an allocated or parameter array. Rows of
  /// arrays built with array_create_1d only borrow their members.
  bool qubit_live(const ExecState& st, const QubitHandle& q) const {
    return has_qubit(st.ledger, q) || owning_array(st, q).has_value();
  }

  /// Earliest live allocated/parameter row containing q.
  std::optional<ArrayHandle> owning_array(const ExecState& st, const QubitHandle& q) const {
    for (const auto& row : st.ledger.arrays) {
      if (row.array.origin == ArrayHandle::Origin::Created) continue;
      if (std::find(row.members.begin(), row.members.end(), q) != row.members.end()) {
        return row.array;
      }
    }
    return std::nullopt;
  }

  // ---- rules --------------------------------------------------------------

  void exec_qubit_allocate(ExecState& st, const std::string& result, SourceSpan span) {
    QubitHandle q{st.next_id++, DynamicSingle{span}};
    st.ledger = add_qubit(st.ledger, q);
    note_qubit(st, q, "allocated", span);
    bind(st, result, QubitRef{q});
  }

  void exec_qubit_allocate_array(ExecState& st, const std::string& result, const AbstractValue& n,
                                 SourceSpan span) {
    ArrayHandle a{st.next_id++, ArrayHandle::Origin::Allocated, known_length(n), span};
    if (!a.length) {
      emit(st, DiagnosticKind::AnalysisGap, "QARR_ALLOC", span,
           "array length is not a known non-negative constant; index checks are disabled", {});
    }
    st.ledger = add_array(st.ledger, a);
    st.arrays[a.id] = a;
    note_array(st, a, "allocated", span);
    for (std::uint64_t i = 0; a.length && i < *a.length; ++i) {
      QubitHandle q{st.next_id++, DynamicArrayMember{a.id, i}};
      st.ledger = add_member(st.ledger, a, q);
      st.slots[{a.id, static_cast<std::int64_t>(i)}] = q;
      note_qubit(st, q, "allocated in array", span);
    }
    bind(st, result, ArrayRef{a});
  }

  void exec_qubit_release(ExecState& st, const AbstractValue& arg, SourceSpan span) {
    const auto* ref = std::get_if<QubitRef>(&arg);
    if (!ref) {
      mismatch(st, arg, "qubit", "Q_DEALLOC", span);
      return;
    }
    const QubitHandle& q = ref->handle;
    if (q.is_static()) {
      emit(st, DiagnosticKind::ReleaseStaticQubit, "Q_DEALLOC", span, "", qubit_trace(st, q));
      return;
    }
    if (owning_array(st, q)) {
      emit(st, DiagnosticKind::ReleaseQubitInArray, "Q_DEALLOC", span, "", qubit_trace(st, q));
      return;
    }
    if (!has_qubit(st.ledger, q)) {
      emit(st, was_released(st.qubit_history, q.id) ? DiagnosticKind::DoubleReleaseQubit
                                                    : DiagnosticKind::UseAfterReleaseQubit,
           "Q_DEALLOC", span, "", qubit_trace(st, q));
      return;
    }
    st.ledger = remove_qubit(st.ledger, q);
    note_qubit(st, q, "released", span);
  }

  void exec_qubit_release_array(ExecState& st, const AbstractValue& arg, SourceSpan span) {
    const auto* ref = std::get_if<ArrayRef>(&arg);
    if (!ref) {
      mismatch(st, arg, "qubit array", "QARR_DEALLOC", span);
      return;
    }
    const ArrayHandle& a = ref->handle;
    if (!has_array(st.ledger, a)) {
      emit(st, was_released(st.array_history, a.id) ? DiagnosticKind::DoubleReleaseArray
                                                     : DiagnosticKind::UseAfterReleaseArray,
           "QARR_DEALLOC", span, "", array_trace(st, a));
      return;
    }
    const std::vector<QubitHandle> members = *row_members(st.ledger, a);
    st.ledger = remove_array(st.ledger, a);
    note_array(st, a, "released", span);
    for (const auto& q : members) note_qubit(st, q, "released with its array", span);
  }

  void exec_array_create_1d(ExecState& st, const std::string& result, const AbstractValue& elem_size,
                            const AbstractValue& n, SourceSpan span) {
    (void)elem_size;
    ArrayHandle a{st.next_id++, ArrayHandle::Origin::Created, known_length(n), span};
    st.ledger = add_array(st.ledger, a);
    st.arrays[a.id] = a;
    note_array(st, a, "created", span);
    bind(st, result, ArrayRef{a});
  }

  void exec_get_element_ptr(ExecState& st, const std::string& result, const AbstractValue& array,
                            const AbstractValue& index) {
    const auto* ref = std::get_if<ArrayRef>(&array);
    if (!ref) {
      bind(st, result, Unknown{});
      return;
    }
    std::optional<std::int64_t> ix;
    if (const auto* c = std::get_if<Classical>(&index)) ix = c->integer;
    bind(st, result, ElemPtr{ref->handle, ix});
  }

  void exec_load_qubit(ExecState& st, const std::string& result, const QubitPtrSlot& slot,
                       SourceSpan span) {
    const ArrayHandle& a = slot.array;
    if (!has_array(st.ledger, a)) {
      emit(st, DiagnosticKind::LoadFromReleasedArray, "Q_LOAD", span, "", array_trace(st, a));
      bind(st, result, Unknown{});
      return;
    }
    if (out_of_bounds(a, slot.index)) {
      emit(st, DiagnosticKind::IndexOutOfBounds, "Q_LOAD", span,
           bounds_message(a, *slot.index),
           array_trace(st, a));
      bind(st, result, Unknown{});
      return;
    }
    if (!slot.index) {
      emit(st, DiagnosticKind::AnalysisGap, "Q_LOAD", span,
           "array index is not a constant; loaded qubit is not tracked", {});
      bind(st, result, Unknown{});
      return;
    }
    const auto key = std::make_pair(a.id, *slot.index);
    auto it = st.slots.find(key);
    if (it == st.slots.end()) {
      if (a.origin == ArrayHandle::Origin::Created) {
        emit(st, DiagnosticKind::AnalysisGap, "Q_LOAD", span,
             "slot " + std::to_string(*slot.index) + " was never stored; loaded qubit is not tracked",
             {});
        bind(st, result, Unknown{});
        return;
      }
      // Parameter arrays and allocated arrays of unknown length: members
      // materialize on first load.
      QubitHandle q{st.next_id++, DynamicArrayMember{a.id, static_cast<std::uint64_t>(*slot.index)}};
      note_qubit(st, q, "first loaded from array", span);
      it = st.slots.emplace(key, q).first;
    }
    const QubitHandle q = it->second;
    st.ledger = add_member(st.ledger, a, q);
    bind(st, result, QubitRef{q});
  }

  void exec_store_qubit(ExecState& st, const AbstractValue& value, const QubitPtrSlot& slot,
                        SourceSpan span) {
    const ArrayHandle& a = slot.array;
    const auto* ref = std::get_if<QubitRef>(&value);
    if (!ref) {
      if (slot.index) st.slots.erase({a.id, *slot.index});
      if (std::holds_alternative<Unknown>(value)) {
        emit(st, DiagnosticKind::AnalysisGap, "QARR_CREATE", span,
             "stored value is not a tracked qubit; slot contents are unknown", {});
      } else {
        mismatch(st, value, "qubit", "QARR_CREATE", span);
      }
      return;
    }
    const QubitHandle& q = ref->handle;
    if (!has_array(st.ledger, a)) {
      emit(st, DiagnosticKind::UseAfterReleaseArray, "QARR_CREATE", span, "", array_trace(st, a));
      return;
    }
    if (!qubit_live(st, q)) {
      emit(st, DiagnosticKind::UseAfterReleaseQubit, "QARR_CREATE", span, "", qubit_trace(st, q));
      return;
    }
    if (out_of_bounds(a, slot.index)) {
      emit(st, DiagnosticKind::IndexOutOfBounds, "QARR_CREATE", span,
           bounds_message(a, *slot.index),
           array_trace(st, a));
      return;
    }
    if (has_member(st.ledger, a, q)) {
      emit(st, DiagnosticKind::CloneInArrayStore, "QARR_CREATE", span, "", qubit_trace(st, q));
      return;
    }
    st.ledger = add_member(st.ledger, a, q);
    if (slot.index) {
      st.slots[{a.id, *slot.index}] = q;
    } else {
      emit(st, DiagnosticKind::AnalysisGap, "QARR_CREATE", span,
           "array index is not a constant; slot contents are unknown", {});
    }
    note_qubit(st, q, "stored into array", span);
    if (membership_count(st.ledger, q) > 1) {
      emit(st, DiagnosticKind::MultiArrayMembershipNote, "QARR_CREATE", span, "",
           qubit_trace(st, q));
    }
  }

  /// Every qubit argument must be live; the gate has no ledger effect.
  void exec_gate_single(ExecState& st, const std::string& callee,
                        const std::vector<AbstractValue>& args, SourceSpan span) {
    bool any_qubit = false;
    for (const auto& v : args) {
      if (const auto* ref = std::get_if<QubitRef>(&v)) {
        any_qubit = true;
        if (!qubit_live(st, ref->handle)) {
          emit(st, DiagnosticKind::UseAfterReleaseQubit, "SG_OP", span, "in call to @" + callee,
               qubit_trace(st, ref->handle));
        }
      }
    }
    if (!any_qubit) {
      emit(st, DiagnosticKind::AnalysisGap, "SG_OP", span,
           "target of @" + callee + " is not a tracked qubit", {});
    }
  }

  /// First argument is the control array, last the target.
  void exec_gate_ctl(ExecState& st, const std::string& callee, const AbstractValue& controls,
                     const AbstractValue& target, SourceSpan span) {
    const auto* ctl = std::get_if<ArrayRef>(&controls);
    const auto* tgt = std::get_if<QubitRef>(&target);
    if (!ctl) mismatch(st, controls, "control array", "CG_OP", span);
    if (!tgt) {
      if (std::holds_alternative<Unknown>(target) || std::holds_alternative<Classical>(target)) {
        emit(st, DiagnosticKind::AnalysisGap, "CG_OP", span,
             "target of @" + callee + " is not a tracked qubit", {});
      } else {
        mismatch(st, target, "qubit", "CG_OP", span);
      }
    }
    if (tgt && !qubit_live(st, tgt->handle)) {
      emit(st, DiagnosticKind::UseAfterReleaseQubit, "CG_OP", span, "in call to @" + callee,
           qubit_trace(st, tgt->handle));
    }
    if (ctl && !has_array(st.ledger, ctl->handle)) {
      emit(st, DiagnosticKind::UseAfterReleaseArray, "CG_OP", span, "in call to @" + callee,
           array_trace(st, ctl->handle));
    }
    if (ctl && tgt && has_member(st.ledger, ctl->handle, tgt->handle)) {
      emit(st, DiagnosticKind::CloneControlTarget, "CG_OP", span, "in call to @" + callee,
           qubit_trace(st, tgt->handle));
    }
  }

  void exec_measure(ExecState& st, const AbstractValue& paulis, const AbstractValue& qubits,
                    const std::string& result, SourceSpan span) {
    if (!std::holds_alternative<ArrayRef>(paulis) && !std::holds_alternative<Unknown>(paulis)) {
      mismatch(st, paulis, "Pauli array", "MEASURE", span);
    }
    const auto* ref = std::get_if<ArrayRef>(&qubits);
    if (!ref) {
      mismatch(st, qubits, "qubit array", "MEASURE", span);
      bind(st, result, Unknown{});
      return;
    }
    if (!has_array(st.ledger, ref->handle)) {
      emit(st, DiagnosticKind::MeasureReleasedArray, "MEASURE", span, "",
           array_trace(st, ref->handle));
      bind(st, result, Unknown{});
      return;
    }
    bind(st, result, ResultRef{span});
  }

  /// Static qubit for a constant address; equal addresses share one handle.
  QubitHandle static_qubit(ExecState& st, std::optional<std::int64_t> address, SourceSpan span) {
    if (address) {
      if (auto it = st.static_qubits.find(*address); it != st.static_qubits.end()) return it->second;
    }
    QubitHandle q{st.next_id++, StaticQubit{address, span}};
    if (address) st.static_qubits.emplace(*address, q);
    st.ledger = add_qubit(st.ledger, q);
    note_qubit(st, q, "static qubit first referenced", span);
    return q;
  }

  void exec_inttoptr_qubit(ExecState& st, const std::string& result, const AbstractValue& address,
                           SourceSpan span) {
    std::optional<std::int64_t> addr;
    if (const auto* c = std::get_if<Classical>(&address)) addr = c->integer;
    if (!addr) {
      emit(st, DiagnosticKind::AnalysisGap, "plumbing", span,
           "static qubit address is not a constant; using a fresh handle", {});
    }
    bind(st, result, QubitRef{static_qubit(st, addr, span)});
  }

 private:
  struct Outcome {
    ExecState state;
    AbstractValue value;
  };

  struct WorkItem {
    ExecState st;
    const Block* block;
    std::size_t index;
    std::map<const Block*, std::size_t> visits;
  };

  // ---- bookkeeping --------------------------------------------------------

  void emit(ExecState& st, DiagnosticKind kind, std::string rule, SourceSpan span,
            const std::string& detail, std::vector<TraceEvent> trace) {
    Diagnostic d;
    d.kind = kind;
    d.severity = severity_of(kind);
    d.rule = std::move(rule);
    d.span = span;
    d.message = message_template(kind);
    if (!detail.empty()) d.message += " (" + detail + ")";
    d.trace = std::move(trace);
    d.function = st.function();
    d.entry = entry_;
    if (config_.fail_fast && d.severity == Severity::Error) st.halted = true;
    diagnostics_.push_back(std::move(d));
  }

  void mismatch(ExecState& st, const AbstractValue& v, const char* expected, const char* rule,
                SourceSpan span) {
    if (std::holds_alternative<Unknown>(v)) {
      emit(st, DiagnosticKind::AnalysisGap, rule, span,
           std::string("expected a ") + expected + " but the operand is not tracked", {});
    } else {
      emit(st, DiagnosticKind::TypeMismatch, rule, span,
           std::string("expected a ") + expected + ", found " + kind_name(v), {});
    }
  }

  static const char* kind_name(const AbstractValue& v) {
    switch (v.index()) {
      case 0: return "an untracked value";
      case 1: return "a qubit";
      case 2: return "a qubit array";
      case 3: return "an element pointer";
      case 4: return "a qubit slot";
      case 5: return "a measurement result";
      default: return "a classical value";
    }
  }

  void note_qubit(ExecState& st, const QubitHandle& q, std::string event, SourceSpan span) {
    st.qubit_history[q.id].push_back(TraceEvent{std::move(event), span, st.function()});
  }
  void note_array(ExecState& st, const ArrayHandle& a, std::string event, SourceSpan span) {
    st.array_history[a.id].push_back(TraceEvent{std::move(event), span, st.function()});
  }

  static bool was_released(const std::map<std::uint64_t, std::vector<TraceEvent>>& hist,
                           std::uint64_t id) {
    auto it = hist.find(id);
    if (it == hist.end()) return false;
    return std::any_of(it->second.begin(), it->second.end(), [](const TraceEvent& e) {
      return detail::starts_with(e.event, "released");
    });
  }

  static std::vector<TraceEvent> history(const std::map<std::uint64_t, std::vector<TraceEvent>>& h,
                                         std::uint64_t id) {
    auto it = h.find(id);
    return it == h.end() ? std::vector<TraceEvent>{} : it->second;
  }
  std::vector<TraceEvent> qubit_trace(const ExecState& st, const QubitHandle& q) const {
    return history(st.qubit_history, q.id);
  }
  std::vector<TraceEvent> array_trace(const ExecState& st, const ArrayHandle& a) const {
    return history(st.array_history, a.id);
  }

  static std::optional<std::uint64_t> known_length(const AbstractValue& n) {
    if (const auto* c = std::get_if<Classical>(&n)) {
      if (c->integer && *c->integer >= 0) return static_cast<std::uint64_t>(*c->integer);
    }
    return std::nullopt;
  }

  static bool out_of_bounds(const ArrayHandle& a, std::optional<std::int64_t> index) {
    if (!index) return false;
    if (*index < 0) return true;
    return a.length && static_cast<std::uint64_t>(*index) >= *a.length;
  }

  static std::string bounds_message(const ArrayHandle& a, std::int64_t index) {
    if (!a.length) return "index " + std::to_string(index) + " is negative";
    return "index " + std::to_string(index) + " is outside array of length " +
           std::to_string(*a.length);
  }

  static void bind(ExecState& st, const std::string& name, AbstractValue v) {
    if (!name.empty()) st.env[name] = std::move(v);
  }

  // ---- evaluation ---------------------------------------------------------

  AbstractValue eval(ExecState& st, const Type& type, const Operand& op, SourceSpan span) {
    if (const auto* l = std::get_if<LocalRef>(&op)) {
      auto it = st.env.find(l->name);
      return it == st.env.end() ? AbstractValue{Unknown{}} : it->second;
    }
    if (std::holds_alternative<GlobalRef>(op)) return Unknown{};
    return eval_constant(st, type, std::get<Constant>(op), span);
  }

  AbstractValue eval_constant(ExecState& st, const Type& type, const Constant& c, SourceSpan span) {
    switch (c.kind) {
      case Constant::Kind::Int:
        return Classical{c.value, std::nullopt};
      case Constant::Kind::Pauli:
        return Classical{c.value, std::nullopt};
      case Constant::Kind::Double:
        return Classical{std::nullopt, c.real};
      case Constant::Kind::Null:
        // Base-profile programs spell static qubit 0 as null.
        if (is_qubit_ptr(type)) return QubitRef{static_qubit(st, 0, span)};
        return Unknown{};
      case Constant::Kind::Expr:
        if (c.op == Constant::ExprOp::IntToPtr && is_qubit_ptr(type) && !c.elems.empty()) {
          const auto& inner = c.elems.front();
          if (inner.value.kind == Constant::Kind::Int) {
            return QubitRef{static_qubit(st, inner.value.value, span)};
          }
        }
        return Unknown{};
      default:
        return Unknown{};
    }
  }

  AbstractValue eval(ExecState& st, const TypedOperand& op, SourceSpan span) {
    return eval(st, op.type, op.value, span);
  }

  // ---- instructions -------------------------------------------------------

  /// Executes one non-inlined instruction.
  void exec_instruction(ExecState& st, const Instruction& inst) {
    const SourceSpan span = inst.span;
    std::visit(
        [&](const auto& i) {
          using T = std::decay_t<decltype(i)>;
          if constexpr (std::is_same_v<T, CallInst>) {
            exec_call(st, i, span);
          } else if constexpr (std::is_same_v<T, BitcastInst>) {
            AbstractValue v = eval(st, i.value, span);
            if (const auto* e = std::get_if<ElemPtr>(&v); e && is_qubit_slot_ptr(i.to)) {
              v = QubitPtrSlot{e->array, e->index};
            }
            bind(st, i.result, std::move(v));
          } else if constexpr (std::is_same_v<T, IntToPtrInst>) {
            AbstractValue v = eval(st, i.value, span);
            if (is_qubit_ptr(i.to)) {
              exec_inttoptr_qubit(st, i.result, v, span);
            } else {
              bind(st, i.result, Unknown{});
            }
          } else if constexpr (std::is_same_v<T, StoreInst>) {
            AbstractValue dest = eval(st, i.dest, span);
            if (const auto* slot = std::get_if<QubitPtrSlot>(&dest); slot && is_qubit_ptr(i.value.type)) {
              AbstractValue v = eval(st, i.value, span);
              exec_store_qubit(st, v, *slot, span);
            }
          } else if constexpr (std::is_same_v<T, LoadInst>) {
            AbstractValue src = eval(st, i.src, span);
            if (const auto* slot = std::get_if<QubitPtrSlot>(&src); slot && is_qubit_ptr(i.type)) {
              exec_load_qubit(st, i.result, *slot, span);
            } else {
              bind(st, i.result, Unknown{});
            }
          } else if constexpr (std::is_same_v<T, ICmpInst>) {
            bind(st, i.result, compare(i.predicate, eval(st, i.type, i.lhs, span),
                                       eval(st, i.type, i.rhs, span)));
          } else {
            bind(st, i.result, Unknown{});
          }
        },
        inst.body);
  }

  static AbstractValue compare(const std::string& pred, const AbstractValue& l,
                               const AbstractValue& r) {
    const auto* a = std::get_if<Classical>(&l);
    const auto* b = std::get_if<Classical>(&r);
    if (!a || !b || !a->integer || !b->integer) return Unknown{};
    const std::int64_t x = *a->integer, y = *b->integer;
    const auto ux = static_cast<std::uint64_t>(x), uy = static_cast<std::uint64_t>(y);
    bool v = false;
    if (pred == "eq") v = x == y;
    else if (pred == "ne") v = x != y;
    else if (pred == "slt") v = x < y;
    else if (pred == "sle") v = x <= y;
    else if (pred == "sgt") v = x > y;
    else if (pred == "sge") v = x >= y;
    else if (pred == "ult") v = ux < uy;
    else if (pred == "ule") v = ux <= uy;
    else if (pred == "ugt") v = ux > uy;
    else if (pred == "uge") v = ux >= uy;
    else return Unknown{};
    return Classical{v ? 1 : 0, std::nullopt};
  }

  void exec_call(ExecState& st, const CallInst& call, SourceSpan span) {
    std::vector<AbstractValue> args;
    args.reserve(call.args.size());
    for (const auto& a : call.args) args.push_back(eval(st, a, span));
    const std::string result = call.result.value_or("");
    const std::string& c = call.callee;
    auto arg = [&](std::size_t i) { return i < args.size() ? args[i] : AbstractValue{Unknown{}}; };

    if (c == "__quantum__rt__qubit_allocate") return exec_qubit_allocate(st, result, span);
    if (c == "__quantum__rt__qubit_allocate_array") {
      return exec_qubit_allocate_array(st, result, arg(0), span);
    }
    if (c == "__quantum__rt__qubit_release") return exec_qubit_release(st, arg(0), span);
    if (c == "__quantum__rt__qubit_release_array") return exec_qubit_release_array(st, arg(0), span);
    if (c == "__quantum__rt__array_create_1d") {
      return exec_array_create_1d(st, result, arg(0), arg(1), span);
    }
    if (c == "__quantum__rt__array_get_element_ptr_1d") {
      return exec_get_element_ptr(st, result, arg(0), arg(1));
    }
    if (c == "__quantum__rt__array_get_size_1d") {
      const AbstractValue v = arg(0);
      const auto* a = std::get_if<ArrayRef>(&v);
      if (a && a->handle.length) {
        bind(st, result, Classical{static_cast<std::int64_t>(*a->handle.length), std::nullopt});
      } else {
        bind(st, result, Unknown{});
      }
      return;
    }
    if (auto qis = detail::split_qis_callee(c)) {
      if (qis->gate == "measure" && qis->functor == "body") {
        return exec_measure(st, arg(0), arg(1), result, span);
      }
      if (qis->functor == "body" && gates_.single.count(qis->gate)) {
        exec_gate_single(st, c, args, span);
        bind(st, result, Unknown{});
        return;
      }
      if (qis->functor == "ctl" && gates_.controlled.count(qis->gate)) {
        exec_gate_ctl(st, c, arg(0), args.empty() ? AbstractValue{Unknown{}} : args.back(), span);
        bind(st, result, Unknown{});
        return;
      }
      exec_unrecognized_qis(st, call, args, span);
      return;
    }
    // Other runtime functions, declared-only functions and calls that could
    // not be inlined have no ledger effect.
    bind(st, result, Unknown{});
  }

  void exec_unrecognized_qis(ExecState& st, const CallInst& call,
                             const std::vector<AbstractValue>& args, SourceSpan span) {
    for (const auto& v : args) {
      if (const auto* q = std::get_if<QubitRef>(&v); q && !qubit_live(st, q->handle)) {
        emit(st, DiagnosticKind::UseAfterReleaseQubit, "SG_OP", span, "in call to @" + call.callee,
             qubit_trace(st, q->handle));
      }
      if (const auto* a = std::get_if<ArrayRef>(&v); a && !has_array(st.ledger, a->handle)) {
        emit(st, DiagnosticKind::UseAfterReleaseArray, "CG_OP", span, "in call to @" + call.callee,
             array_trace(st, a->handle));
      }
    }
    emit(st, DiagnosticKind::AnalysisGap, "plumbing", span,
         "@" + call.callee + " is not a recognized gate; only operand liveness was checked", {});
    AbstractValue r = Unknown{};
    if (call.ret_type == Type::result_ptr()) r = ResultRef{span};
    bind(st, call.result.value_or(""), r);
  }

  // ---- control flow -------------------------------------------------------

  /// Callee to inline, or nullptr when the call is handled in place. Emits a
  /// note when inlining is refused.
  const Function* inline_target(ExecState& st, const CallInst& call, SourceSpan span) {
    const Function* f = module_.find_function(call.callee);
    if (!f || f->is_declaration) return nullptr;
    for (const auto& frame : st.call_stack) {
      if (frame.function == f->name) {
        emit(st, DiagnosticKind::AnalysisGap, "plumbing", span,
             "recursive call to @" + f->name + " is not inlined; its result is unknown", {});
        return nullptr;
      }
    }
    if (st.call_stack.size() > config_.max_inline_depth) {
      emit(st, DiagnosticKind::AnalysisGap, "plumbing", span,
           "inlining depth limit reached at @" + f->name + "; its result is unknown", {});
      return nullptr;
    }
    return f;
  }

  std::vector<Outcome> inline_call(const ExecState& caller, const Function& callee,
                                   const CallInst& call, SourceSpan span) {
    ExecState st = caller;
    std::map<std::string, AbstractValue> env;
    for (std::size_t i = 0; i < callee.params.size(); ++i) {
      AbstractValue v = Unknown{};
      if (i < call.args.size()) v = eval(st, call.args[i], span);
      if (callee.params[i].name) env[*callee.params[i].name] = std::move(v);
    }
    st.env = std::move(env);
    st.call_stack.push_back(CallFrame{callee.name, span});
    std::vector<Outcome> outs = exec_function(callee, std::move(st));
    for (auto& o : outs) {
      o.state.env = caller.env;
      o.state.call_stack.pop_back();
      bind(o.state, call.result.value_or(""), o.value);
    }
    return outs;
  }

  std::vector<Outcome> exec_function(const Function& fn, ExecState start) {
    std::vector<Outcome> outcomes;
    if (fn.blocks.empty()) {
      outcomes.push_back(Outcome{std::move(start), Unknown{}});
      return outcomes;
    }
    std::vector<WorkItem> work;
    work.push_back(WorkItem{std::move(start), &fn.blocks.front(), 0, {}});
    work.back().visits[&fn.blocks.front()] = 1;

    while (!work.empty()) {
      WorkItem it = std::move(work.back());
      work.pop_back();

      bool suspended = false;
      while (!it.st.halted && it.index < it.block->instructions.size()) {
        const Instruction& inst = it.block->instructions[it.index];
        if (const auto* call = std::get_if<CallInst>(&inst.body)) {
          if (const Function* callee = inline_target(it.st, *call, inst.span)) {
            std::vector<Outcome> outs = inline_call(it.st, *callee, *call, inst.span);
            for (auto o = outs.rbegin(); o != outs.rend(); ++o) {
              work.push_back(WorkItem{std::move(o->state), it.block, it.index + 1, it.visits});
            }
            suspended = true;
            break;
          }
        }
        exec_instruction(it.st, inst);
        ++it.index;
      }
      if (suspended) continue;
      if (it.st.halted) {
        outcomes.push_back(Outcome{std::move(it.st), Unknown{}});
        continue;
      }

      const Terminator& term = it.block->terminator;
      if (const auto* r = std::get_if<RetValue>(&term.body)) {
        AbstractValue v = eval(it.st, r->value, term.span);
        outcomes.push_back(Outcome{std::move(it.st), std::move(v)});
      } else if (std::holds_alternative<RetVoid>(term.body)) {
        outcomes.push_back(Outcome{std::move(it.st), Unknown{}});
      } else if (const auto* br = std::get_if<Branch>(&term.body)) {
        follow(work, std::move(it), fn, br->label, term.span);
      } else {
        const auto& cb = std::get<CondBranch>(term.body);
        AbstractValue c = eval(it.st, Type::integer(1), cb.cond, term.span);
        const auto* k = std::get_if<Classical>(&c);
        if (k && k->integer) {
          follow(work, std::move(it), fn, *k->integer != 0 ? cb.then_label : cb.else_label, term.span);
        } else if (paths_ >= config_.max_paths) {
          if (complete_) {
            emit(it.st, DiagnosticKind::Incomplete, "plumbing", term.span,
                 "path limit of " + std::to_string(config_.max_paths) +
                     " reached; only the first branch is explored from here on",
                 {});
          }
          complete_ = false;
          follow(work, std::move(it), fn, cb.then_label, term.span);
        } else {
          ++paths_;
          WorkItem other = it;
          other.st.path_id = paths_ - 1;
          // The then-branch is pushed last so it runs first.
          follow(work, std::move(other), fn, cb.else_label, term.span);
          follow(work, std::move(it), fn, cb.then_label, term.span);
        }
      }
    }
    return outcomes;
  }

  void follow(std::vector<WorkItem>& work, WorkItem it, const Function& fn, const std::string& label,
              SourceSpan span) {
    const Block* target = fn.find_block(label);
    if (!target) {
      emit(it.st, DiagnosticKind::AnalysisGap, "plumbing", span,
           "branch to unknown label '" + label + "'; path dropped", {});
      abandoned_.push_back(std::move(it.st));
      return;
    }
    if (++it.visits[target] > config_.max_unroll + 1) {
      emit(it.st, DiagnosticKind::Incomplete, "plumbing", span,
           "loop unrolled " + std::to_string(config_.max_unroll) + " time(s); path truncated", {});
      complete_ = false;
      abandoned_.push_back(std::move(it.st));
      return;
    }
    it.block = target;
    it.index = 0;
    work.push_back(std::move(it));
  }

  const QirModule& module_;
  AnalysisConfig config_;
  GateTable gates_;
  std::string entry_;
  std::vector<Diagnostic> diagnostics_;
  std::vector<ExecState> abandoned_;
  std::size_t paths_ = 1;
  bool complete_ = true;
};

/// Diagnostics of one entry point.
inline std::vector<Diagnostic> analyze_function(const QirModule& module, const std::string& entry,
                                                const AnalysisConfig& config = {},
                                                const GateTable& gates = GateTable::builtin()) {
  return Analyzer(module, config, gates).run(entry).diagnostics;
}

/// Diagnostics of config.entry, or of every defined function when unset.
inline std::vector<Diagnostic> analyze_module(const QirModule& module,
                                              const AnalysisConfig& config = {},
                                              const GateTable& gates = GateTable::builtin()) {
  std::vector<Diagnostic> all;
  Analyzer analyzer(module, config, gates);
  for (const auto& f : module.functions) {
    if (f.is_declaration) continue;
    if (config.entry && f.name != *config.entry) continue;
    for (auto& d : analyzer.run(f.name).diagnostics) all.push_back(std::move(d));
  }
  return dedupe_and_sort(std::move(all));
}

}  // namespace qir_sentinel
