#pragma once

// Straight-line qubit programs: random, safe-by-construction and seeded with
// one violation. Each trace prints as a single-function QIR module and can be
// replayed by a small name-based interpreter that shares no code with the
// analyzer.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "qir_sentinel/parser.hpp"
#include "qir_sentinel/semantics.hpp"

namespace qir_sentinel::testing {

enum class OpKind { Alloc, Release, AllocArray, ReleaseArray, CreateArray, Store, Load, Gate, GateCtl, Measure, Static };

// q / a name qubit and array variables; def is the variable an op defines.
struct TraceOp {
  OpKind kind;
  int q = -1;
  int a = -1;
  int def = -1;
  std::int64_t index = 0;  // Store, Load
  std::int64_t n = 0;      // AllocArray, CreateArray
  std::int64_t addr = 0;   // Static
};

struct Trace {
  std::vector<TraceOp> ops;
  int qvars = 0;
  int avars = 0;

  int new_q() { return qvars++; }
  int new_a() { return avars++; }
};

struct Program {
  std::string text;
  std::vector<std::uint32_t> op_line;  // line of the statement each op is judged at
};

inline Program emit_program(const Trace& t) {
  Program p;
  std::ostringstream out;
  std::uint32_t line = 0;
  auto put = [&](const std::string& s) {
    out << s << '\n';
    return ++line;
  };
  put("%Qubit = type opaque");
  put("%Array = type opaque");
  put("%Result = type opaque");
  put("");
  put("define void @main() {");
  put("entry:");
  int tmp = 0;
  auto qv = [](int i) { return "%q" + std::to_string(i); };
  auto av = [](int i) { return "%a" + std::to_string(i); };
  for (const auto& op : t.ops) {
    std::uint32_t at = 0;
    switch (op.kind) {
      case OpKind::Alloc:
        at = put("  " + qv(op.def) + " = call %Qubit* @__quantum__rt__qubit_allocate()");
        break;
      case OpKind::Release:
        at = put("  call void @__quantum__rt__qubit_release(%Qubit* " + qv(op.q) + ")");
        break;
      case OpKind::AllocArray:
        at = put("  " + av(op.def) + " = call %Array* @__quantum__rt__qubit_allocate_array(i64 " +
                 std::to_string(op.n) + ")");
        break;
      case OpKind::ReleaseArray:
        at = put("  call void @__quantum__rt__qubit_release_array(%Array* " + av(op.a) + ")");
        break;
      case OpKind::CreateArray:
        at = put("  " + av(op.def) + " = call %Array* @__quantum__rt__array_create_1d(i32 8, i64 " +
                 std::to_string(op.n) + ")");
        break;
      case OpKind::Store:
      case OpKind::Load: {
        const std::string ptr = "%p" + std::to_string(tmp), slot = "%s" + std::to_string(tmp);
        ++tmp;
        put("  " + ptr + " = call i8* @__quantum__rt__array_get_element_ptr_1d(%Array* " + av(op.a) +
            ", i64 " + std::to_string(op.index) + ")");
        put("  " + slot + " = bitcast i8* " + ptr + " to %Qubit**");
        if (op.kind == OpKind::Store) {
          at = put("  store %Qubit* " + qv(op.q) + ", %Qubit** " + slot);
        } else {
          at = put("  " + qv(op.def) + " = load %Qubit*, %Qubit** " + slot);
        }
        break;
      }
      case OpKind::Gate:
        if (op.index % 2 == 0) {
          at = put("  call void @__quantum__qis__h__body(%Qubit* " + qv(op.q) + ")");
        } else {
          at = put("  call void @__quantum__qis__rz__body(double 0.5, %Qubit* " + qv(op.q) + ")");
        }
        break;
      case OpKind::GateCtl:
        at = put("  call void @__quantum__qis__x__ctl(%Array* " + av(op.a) + ", %Qubit* " + qv(op.q) + ")");
        break;
      case OpKind::Measure:
        at = put("  %r" + std::to_string(tmp++) + " = call %Result* @__quantum__qis__measure__body(%Array* " +
                 av(op.a) + ", %Array* " + av(op.a) + ")");
        break;
      case OpKind::Static:
        at = put("  " + qv(op.def) + " = inttoptr i64 " + std::to_string(op.addr) + " to %Qubit*");
        break;
    }
    p.op_line.push_back(at);
  }
  put("  ret void");
  put("}");
  put("");
  put("declare %Qubit* @__quantum__rt__qubit_allocate()");
  put("declare void @__quantum__rt__qubit_release(%Qubit*)");
  put("declare %Array* @__quantum__rt__qubit_allocate_array(i64)");
  put("declare void @__quantum__rt__qubit_release_array(%Array*)");
  put("declare %Array* @__quantum__rt__array_create_1d(i32, i64)");
  put("declare i8* @__quantum__rt__array_get_element_ptr_1d(%Array*, i64)");
  put("declare void @__quantum__qis__h__body(%Qubit*)");
  put("declare void @__quantum__qis__rz__body(double, %Qubit*)");
  put("declare void @__quantum__qis__x__ctl(%Array*, %Qubit*)");
  put("declare %Result* @__quantum__qis__measure__body(%Array*, %Array*)");
  p.text = out.str();
  return p;
}

// ---- canonical outcome ----------------------------------------------------

/// Ledger with qubits and arrays named by where they came from:
/// q@L single allocated at line L, A@L / C@L allocated / created array,
/// A@L[i] its member, A@L[i]@M a member materialized by a load at line M,
/// sN the static qubit at address N.
struct CanonLedger {
  std::vector<std::string> qubits;
  std::vector<std::pair<std::string, std::vector<std::string>>> rows;
  friend bool operator==(const CanonLedger&, const CanonLedger&) = default;
};

struct Outcome {
  CanonLedger ledger;
  std::vector<std::string> kinds;  // sorted multiset of diagnostic kinds
  friend bool operator==(const Outcome&, const Outcome&) = default;
};

inline std::string describe(const Outcome& o) {
  std::ostringstream s;
  s << "Q:";
  for (const auto& q : o.ledger.qubits) s << ' ' << q;
  s << "\nQA:";
  for (const auto& [a, ms] : o.ledger.rows) {
    s << ' ' << a << '{';
    for (const auto& m : ms) s << m << ',';
    s << '}';
  }
  s << "\nkinds:";
  for (const auto& k : o.kinds) s << ' ' << k;
  return s.str();
}

inline std::string canon_array(const ArrayHandle& a) {
  return (a.origin == ArrayHandle::Origin::Created ? "C@" : "A@") + std::to_string(a.site.line);
}

inline std::string canon_qubit(const ExecState& st, const QubitHandle& q) {
  if (const auto* s = std::get_if<DynamicSingle>(&q.origin)) return "q@" + std::to_string(s->site.line);
  if (const auto* s = std::get_if<StaticQubit>(&q.origin)) {
    return s->address ? "s" + std::to_string(*s->address) : "s?";
  }
  if (const auto* p = std::get_if<ParameterQubit>(&q.origin)) return "p" + std::to_string(p->index);
  const auto& m = std::get<DynamicArrayMember>(q.origin);
  std::string name = canon_array(st.arrays.at(m.array_id)) + "[" + std::to_string(m.index) + "]";
  auto h = st.qubit_history.find(q.id);
  if (h != st.qubit_history.end() && !h->second.empty() && h->second.front().event == "first loaded from array") {
    name += "@" + std::to_string(h->second.front().span.line);
  }
  return name;
}

inline Outcome analyzer_outcome(const std::string& text) {
  auto parsed = parse_module(text, "trace.ll");
  if (!parsed.ok()) throw std::runtime_error("trace did not parse: " + parsed.errors.front().message);
  Analyzer an(*parsed.module, AnalysisConfig{});
  AnalysisResult r = an.run("main");
  if (r.final_states.size() != 1) throw std::runtime_error("straight-line trace forked");
  const ExecState& st = r.final_states.front();
  Outcome o;
  for (const auto& q : st.ledger.qubits) o.ledger.qubits.push_back(canon_qubit(st, q));
  for (const auto& row : st.ledger.arrays) {
    std::vector<std::string> ms;
    for (const auto& q : row.members) ms.push_back(canon_qubit(st, q));
    o.ledger.rows.emplace_back(canon_array(row.array), std::move(ms));
  }
  for (const auto& d : r.diagnostics) o.kinds.push_back(to_string(d.kind));
  std::sort(o.kinds.begin(), o.kinds.end());
  return o;
}

// ---- reference replayer ---------------------------------------------------

class Replayer {
 public:
  Outcome run(const Trace& t, const Program& p) {
    qv_.assign(static_cast<std::size_t>(t.qvars), std::nullopt);
    av_.assign(static_cast<std::size_t>(t.avars), "");
    for (std::size_t i = 0; i < t.ops.size(); ++i) step(t.ops[i], p.op_line[i]);
    Outcome o;
    o.ledger.qubits = Q_;
    o.ledger.rows = QA_;
    o.kinds = kinds_;
    std::sort(o.kinds.begin(), o.kinds.end());
    return o;
  }

 private:
  struct ArrayInfo {
    bool created = false;
    std::int64_t length = 0;
  };

  void diag(const char* k) { kinds_.emplace_back(k); }

  bool in_q(const std::string& q) const { return std::find(Q_.begin(), Q_.end(), q) != Q_.end(); }
  std::vector<std::string>* row(const std::string& a) {
    for (auto& [name, ms] : QA_)
      if (name == a) return &ms;
    return nullptr;
  }
  bool owned(const std::string& q) const {
    for (const auto& [name, ms] : QA_) {
      if (info_.at(name).created) continue;
      if (std::find(ms.begin(), ms.end(), q) != ms.end()) return true;
    }
    return false;
  }
  bool live(const std::string& q) const { return in_q(q) || owned(q); }
  int rows_containing(const std::string& q) const {
    int n = 0;
    for (const auto& [name, ms] : QA_) n += std::count(ms.begin(), ms.end(), q) > 0;
    return n;
  }
  bool oob(const std::string& a, std::int64_t i) const { return i < 0 || i >= info_.at(a).length; }
  static void add_unique(std::vector<std::string>& v, const std::string& x) {
    if (std::find(v.begin(), v.end(), x) == v.end()) v.push_back(x);
  }

  void step(const TraceOp& op, std::uint32_t line) {
    const std::string L = std::to_string(line);
    switch (op.kind) {
      case OpKind::Alloc: {
        const std::string q = "q@" + L;
        Q_.push_back(q);
        qv_[op.def] = q;
        break;
      }
      case OpKind::Static: {
        const std::string q = "s" + std::to_string(op.addr);
        if (!statics_.count(q)) {
          statics_.insert(q);
          Q_.push_back(q);
        }
        qv_[op.def] = q;
        break;
      }
      case OpKind::AllocArray:
      case OpKind::CreateArray: {
        const bool created = op.kind == OpKind::CreateArray;
        const std::string a = (created ? "C@" : "A@") + L;
        info_[a] = ArrayInfo{created, op.n};
        std::vector<std::string> ms;
        if (!created) {
          for (std::int64_t i = 0; i < op.n; ++i) {
            ms.push_back(a + "[" + std::to_string(i) + "]");
            slots_[{a, i}] = ms.back();
          }
        }
        QA_.emplace_back(a, ms);
        av_[op.def] = a;
        break;
      }
      case OpKind::Release: {
        const auto& q = qv_[op.q];
        if (!q) return diag("AnalysisGap");
        if (statics_.count(*q)) return diag("ReleaseStaticQubit");
        if (owned(*q)) return diag("ReleaseQubitInArray");
        if (!in_q(*q)) return diag(released_.count(*q) ? "DoubleReleaseQubit" : "UseAfterReleaseQubit");
        Q_.erase(std::find(Q_.begin(), Q_.end(), *q));
        released_.insert(*q);
        break;
      }
      case OpKind::ReleaseArray: {
        const std::string& a = av_[op.a];
        auto* ms = row(a);
        if (!ms) return diag(released_arrays_.count(a) ? "DoubleReleaseArray" : "UseAfterReleaseArray");
        const std::vector<std::string> members = *ms;
        QA_.erase(std::find_if(QA_.begin(), QA_.end(), [&](const auto& r) { return r.first == a; }));
        for (const auto& m : members) {
          auto it = std::find(Q_.begin(), Q_.end(), m);
          if (it != Q_.end()) Q_.erase(it);
          released_.insert(m);
        }
        released_arrays_.insert(a);
        break;
      }
      case OpKind::Store: {
        const std::string& a = av_[op.a];
        const auto& q = qv_[op.q];
        if (!q) {
          slots_.erase({a, op.index});
          return diag("AnalysisGap");
        }
        if (!row(a)) return diag("UseAfterReleaseArray");
        if (!live(*q)) return diag("UseAfterReleaseQubit");
        if (oob(a, op.index)) return diag("IndexOutOfBounds");
        auto* ms = row(a);
        if (std::find(ms->begin(), ms->end(), *q) != ms->end()) return diag("CloneInArrayStore");
        ms->push_back(*q);
        slots_[{a, op.index}] = *q;
        if (rows_containing(*q) > 1) diag("MultiArrayMembershipNote");
        break;
      }
      case OpKind::Load: {
        const std::string& a = av_[op.a];
        qv_[op.def] = std::nullopt;
        if (!row(a)) return diag("LoadFromReleasedArray");
        if (oob(a, op.index)) return diag("IndexOutOfBounds");
        auto it = slots_.find({a, op.index});
        if (it == slots_.end()) {
          if (info_.at(a).created) return diag("AnalysisGap");
          it = slots_.emplace(std::make_pair(a, op.index), a + "[" + std::to_string(op.index) + "]@" + L).first;
        }
        add_unique(*row(a), it->second);
        qv_[op.def] = it->second;
        break;
      }
      case OpKind::Gate: {
        const auto& q = qv_[op.q];
        if (!q) return diag("AnalysisGap");
        if (!live(*q)) diag("UseAfterReleaseQubit");
        break;
      }
      case OpKind::GateCtl: {
        const std::string& a = av_[op.a];
        const auto& q = qv_[op.q];
        if (!q) diag("AnalysisGap");
        if (q && !live(*q)) diag("UseAfterReleaseQubit");
        auto* ms = row(a);
        if (!ms) diag("UseAfterReleaseArray");
        if (ms && q && std::find(ms->begin(), ms->end(), *q) != ms->end()) diag("CloneControlTarget");
        break;
      }
      case OpKind::Measure:
        if (!row(av_[op.a])) diag("MeasureReleasedArray");
        break;
    }
  }

  std::vector<std::optional<std::string>> qv_;
  std::vector<std::string> av_;
  std::vector<std::string> Q_;
  std::vector<std::pair<std::string, std::vector<std::string>>> QA_;
  std::map<std::string, ArrayInfo> info_;
  std::map<std::pair<std::string, std::int64_t>, std::string> slots_;
  std::set<std::string> statics_, released_, released_arrays_;
  std::vector<std::string> kinds_;
};

// ---- generators -----------------------------------------------------------

/// Unconstrained random trace; every operand refers to some earlier variable.
inline Trace random_trace(std::mt19937_64& rng, int length) {
  Trace t;
  auto below = [&](std::int64_t n) { return std::uniform_int_distribution<std::int64_t>(0, n - 1)(rng); };
  std::vector<std::int64_t> alen;
  for (int i = 0; i < length; ++i) {
    TraceOp op{OpKind::Alloc};
    int k = static_cast<int>(below(11));
    if (t.qvars == 0 && (k == 1 || k == 7 || k == 5 || k == 8)) k = 0;
    if (t.avars == 0 && (k == 3 || k == 5 || k == 6 || k >= 8)) k = 2;
    switch (k) {
      case 0: op.kind = OpKind::Alloc; op.def = t.new_q(); break;
      case 1: op.kind = OpKind::Release; op.q = static_cast<int>(below(t.qvars)); break;
      case 2:
        op.kind = below(2) ? OpKind::AllocArray : OpKind::CreateArray;
        op.n = below(4);
        op.def = t.new_a();
        alen.push_back(op.n);
        break;
      case 3: op.kind = OpKind::ReleaseArray; op.a = static_cast<int>(below(t.avars)); break;
      case 4: op.kind = OpKind::Static; op.addr = below(3); op.def = t.new_q(); break;
      case 5:
      case 6:
        op.kind = k == 5 ? OpKind::Store : OpKind::Load;
        op.a = static_cast<int>(below(t.avars));
        op.index = below(alen[op.a] + 2) - (below(8) == 0 ? 1 : 0);
        if (k == 5) op.q = static_cast<int>(below(t.qvars));
        else op.def = t.new_q();
        break;
      case 7: op.kind = OpKind::Gate; op.q = static_cast<int>(below(t.qvars)); op.index = below(2); break;
      case 8:
        op.kind = OpKind::GateCtl;
        op.a = static_cast<int>(below(t.avars));
        op.q = static_cast<int>(below(t.qvars));
        break;
      default: op.kind = OpKind::Measure; op.a = static_cast<int>(below(t.avars)); break;
    }
    t.ops.push_back(op);
  }
  return t;
}

/// Builds traces from operations whose preconditions hold in its own model
/// of which qubits and arrays are live; can also splice in one violation.
class SafeBuilder {
 public:
  enum class Violation { UseAfterRelease, Cloning };

  explicit SafeBuilder(std::uint64_t seed) : rng_(seed) {}

  Trace safe(int length) {
    reset();
    while (static_cast<int>(t_.ops.size()) < length) step();
    return t_;
  }

  /// Safe prefix, one violation of the given class, safe suffix.
  Trace unsafe(Violation v, int prefix, int suffix) {
    reset();
    for (int i = 0; i < prefix; ++i) step();
    if (v == Violation::UseAfterRelease) inject_use_after_release();
    else inject_cloning();
    for (int i = 0; i < suffix; ++i) step();
    return t_;
  }

 private:
  struct ArrayModel {
    bool created = false;
    bool live = true;
    std::int64_t n = 0;
    std::map<std::int64_t, std::string> contents;  // created arrays only
  };

  std::int64_t below(std::int64_t n) { return std::uniform_int_distribution<std::int64_t>(0, n - 1)(rng_); }

  void reset() {
    t_ = Trace{};
    ident_.clear();
    single_live_.clear();
    dead_static_.clear();
    arrays_.clear();
  }

  bool is_member(const std::string& id) const { return id.rfind("M", 0) == 0; }
  int member_owner(const std::string& id) const { return std::stoi(id.substr(1, id.find('[') - 1)); }
  bool live(const std::string& id) const {
    if (is_member(id)) return arrays_.at(member_owner(id)).live;
    return single_live_.count(id) > 0;
  }

  std::vector<int> live_qvars(bool singles_only = false) const {
    std::vector<int> out;
    for (int v = 0; v < t_.qvars; ++v) {
      const std::string& id = ident_.at(v);
      if (!live(id)) continue;
      if (singles_only && (is_member(id) || id[0] == 's')) continue;
      out.push_back(v);
    }
    return out;
  }
  std::vector<int> live_avars(int which) const {  // 0 any, 1 allocated, 2 created
    std::vector<int> out;
    for (const auto& [v, m] : arrays_) {
      if (!m.live) continue;
      if (which == 1 && m.created) continue;
      if (which == 2 && !m.created) continue;
      out.push_back(v);
    }
    return out;
  }
  template <class V>
  auto any_of(const V& v) {
    return v[static_cast<std::size_t>(below(static_cast<std::int64_t>(v.size())))];
  }

  int alloc() {
    TraceOp op{OpKind::Alloc};
    op.def = t_.new_q();
    ident_[op.def] = "S" + std::to_string(op.def);
    single_live_.insert(ident_[op.def]);
    t_.ops.push_back(op);
    return op.def;
  }
  int array(bool created, std::int64_t n) {
    TraceOp op{created ? OpKind::CreateArray : OpKind::AllocArray};
    op.n = n;
    op.def = t_.new_a();
    arrays_[op.def] = ArrayModel{created, true, n, {}};
    t_.ops.push_back(op);
    return op.def;
  }
  int load(int a, std::int64_t i) {
    TraceOp op{OpKind::Load};
    op.a = a;
    op.index = i;
    op.def = t_.new_q();
    ident_[op.def] = "M" + std::to_string(a) + "[" + std::to_string(i) + "]";
    t_.ops.push_back(op);
    return op.def;
  }
  void store(int q, int a, std::int64_t i) {
    TraceOp op{OpKind::Store};
    op.q = q;
    op.a = a;
    op.index = i;
    arrays_[a].contents[i] = ident_[q];
    t_.ops.push_back(op);
  }
  void release(int q) {
    TraceOp op{OpKind::Release};
    op.q = q;
    single_live_.erase(ident_[q]);
    t_.ops.push_back(op);
  }
  void release_array(int a) {
    TraceOp op{OpKind::ReleaseArray};
    op.a = a;
    auto& m = arrays_[a];
    m.live = false;
    // Releasing a row drops its members from Q, so borrowed singles die too.
    for (const auto& [i, id] : m.contents) {
      if (!is_member(id)) single_live_.erase(id);
      if (id[0] == 's') dead_static_.insert(id);
    }
    t_.ops.push_back(op);
  }
  void simple(OpKind k, int q, int a) {
    TraceOp op{k};
    op.q = q;
    op.a = a;
    op.index = below(2);
    t_.ops.push_back(op);
  }

  int create_with_room() {
    auto cs = live_avars(2);
    for (int c : cs) {
      if (static_cast<std::int64_t>(arrays_[c].contents.size()) < arrays_[c].n) return c;
    }
    return array(true, 2 + below(3));
  }

  void step() {
    switch (below(12)) {
      case 0: alloc(); return;
      case 1: array(below(2) == 0, 1 + below(3)); return;
      case 2: {
        const std::int64_t addr = below(3);
        const std::string id = "s" + std::to_string(addr);
        if (dead_static_.count(id)) return alloc(), void();
        TraceOp op{OpKind::Static};
        op.addr = addr;
        op.def = t_.new_q();
        ident_[op.def] = id;
        single_live_.insert(id);
        t_.ops.push_back(op);
        return;
      }
      case 3:
      case 4: {
        auto qs = live_qvars();
        if (qs.empty()) return alloc(), void();
        return simple(OpKind::Gate, any_of(qs), -1);
      }
      case 5: {
        auto as = live_avars(1);
        if (as.empty()) return array(false, 1 + below(3)), void();
        const int a = any_of(as);
        load(a, below(arrays_[a].n));
        return;
      }
      case 6: {
        auto qs = live_qvars();
        if (qs.empty()) return alloc(), void();
        const int q = any_of(qs);
        const int c = create_with_room();
        auto& m = arrays_[c];
        for (const auto& [i, id] : m.contents)
          if (id == ident_[q]) return;
        std::int64_t i = 0;
        while (m.contents.count(i)) ++i;
        store(q, c, i);
        return;
      }
      case 7: {
        auto qs = live_qvars();
        auto as = live_avars(0);
        if (qs.empty() || as.empty()) return alloc(), void();
        const int q = any_of(qs);
        const int a = any_of(as);
        const auto& m = arrays_[a];
        if (!m.created) {
          if (is_member(ident_[q]) && member_owner(ident_[q]) == a) return;
        } else {
          for (const auto& [i, id] : m.contents)
            if (id == ident_[q]) return;
        }
        return simple(OpKind::GateCtl, q, a);
      }
      case 8: {
        auto as = live_avars(0);
        if (as.empty()) return array(false, 2), void();
        return simple(OpKind::Measure, -1, any_of(as));
      }
      case 9: {
        auto qs = live_qvars(true);
        if (qs.empty()) return alloc(), void();
        return release(any_of(qs));
      }
      default: {
        auto as = live_avars(0);
        if (as.empty() || below(3) != 0) return alloc(), void();
        return release_array(any_of(as));
      }
    }
  }

  void inject_use_after_release() {
    switch (below(6)) {
      case 0:
      case 1: {
        auto qs = live_qvars(true);
        const int q = qs.empty() ? alloc() : any_of(qs);
        release(q);
        if (below(2)) step();
        if (live(ident_[q])) return simple(OpKind::Gate, q, -1);  // cannot happen, kept honest
        switch (below(4)) {
          case 0: return simple(OpKind::Gate, q, -1);
          case 1: return release(q);
          case 2: {
            TraceOp op{OpKind::Store};  // aborts, so the model is left alone
            op.q = q;
            op.a = create_with_room();
            t_.ops.push_back(op);
            return;
          }
          default: return simple(OpKind::GateCtl, q, array(true, 1));
        }
      }
      case 2: {
        const int a = array(false, 2);
        const int m = load(a, 1);
        release_array(a);
        return simple(OpKind::Gate, m, -1);
      }
      default: {
        auto as = live_avars(0);
        const int a = as.empty() ? array(below(2) == 0, 2) : any_of(as);
        release_array(a);
        switch (below(4)) {
          case 0: return simple(OpKind::Measure, -1, a);
          case 1: return release_array(a);
          case 2: {
            TraceOp op{OpKind::Load};
            op.a = a;
            op.index = 0;
            op.def = t_.new_q();
            ident_[op.def] = "dead" + std::to_string(op.def);
            t_.ops.push_back(op);
            return;
          }
          default: return simple(OpKind::GateCtl, alloc(), a);
        }
      }
    }
  }

  void inject_cloning() {
    auto qs = live_qvars();
    const int q = qs.empty() ? alloc() : any_of(qs);
    switch (below(3)) {
      case 0: {
        const int c = array(true, 2 + below(3));
        store(q, c, 0);
        TraceOp op{OpKind::Store};
        op.q = q;
        op.a = c;
        op.index = 1;
        t_.ops.push_back(op);
        return;
      }
      case 1: {
        const int c = array(true, 1 + below(3));
        store(q, c, 0);
        return simple(OpKind::GateCtl, q, c);
      }
      default: {
        const int a = array(false, 1 + below(3));
        const int m = load(a, below(arrays_[a].n));
        return simple(OpKind::GateCtl, m, a);
      }
    }
  }

  std::mt19937_64 rng_;
  Trace t_;
  std::map<int, std::string> ident_;
  std::set<std::string> single_live_;
  std::set<std::string> dead_static_;
  std::map<int, ArrayModel> arrays_;
};

inline bool is_use_after_release_kind(DiagnosticKind k) {
  switch (k) {
    case DiagnosticKind::UseAfterReleaseQubit:
    case DiagnosticKind::UseAfterReleaseArray:
    case DiagnosticKind::DoubleReleaseQubit:
    case DiagnosticKind::DoubleReleaseArray:
    case DiagnosticKind::LoadFromReleasedArray:
    case DiagnosticKind::MeasureReleasedArray:
      return true;
    default:
      return false;
  }
}

inline bool is_cloning_kind(DiagnosticKind k) {
  return k == DiagnosticKind::CloneInArrayStore || k == DiagnosticKind::CloneControlTarget;
}

}  // namespace qir_sentinel::testing
