#pragma once

// Qubit management model: Q is the ordered set of live single qubits, QA the
// insertion-ordered table of live arrays, each row holding its member qubits.
// Every operation is pure: it takes a Ledger by const reference and returns
// the updated copy.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "qir_sentinel/ast.hpp"

namespace qir_sentinel {

/// Raised when a ledger precondition is violated. Signals an analyzer bug,
/// never a defect in the analyzed program.
class LedgerFault : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct DynamicSingle {
  SourceSpan site;
  friend bool operator==(const DynamicSingle&, const DynamicSingle&) = default;
};
struct DynamicArrayMember {
  std::uint64_t array_id = 0;
  std::uint64_t index = 0;
  friend bool operator==(const DynamicArrayMember&, const DynamicArrayMember&) = default;
};
struct StaticQubit {
  std::optional<std::int64_t> address;  // nullopt when the address was not a constant
  SourceSpan site;
  friend bool operator==(const StaticQubit&, const StaticQubit&) = default;
};
/// Qubit passed into the entry function.
struct ParameterQubit {
  std::size_t index = 0;
  friend bool operator==(const ParameterQubit&, const ParameterQubit&) = default;
};

using QubitOrigin = std::variant<DynamicSingle, DynamicArrayMember, StaticQubit, ParameterQubit>;

struct QubitHandle {
  std::uint64_t id = 0;
  QubitOrigin origin;

  bool is_static() const { return std::holds_alternative<StaticQubit>(origin); }

  // Identity is the id alone.
  friend bool operator==(const QubitHandle& a, const QubitHandle& b) { return a.id == b.id; }
  friend bool operator<(const QubitHandle& a, const QubitHandle& b) { return a.id < b.id; }
};

struct ArrayHandle {
  enum class Origin {
    Allocated,  // qubit_allocate_array: owns fresh qubits
    Created,    // array_create_1d: holds qubits owned elsewhere
    Parameter,  // %Array* argument of the entry function
  };

  std::uint64_t id = 0;
  Origin origin = Origin::Allocated;
  std::optional<std::uint64_t> length;  // nullopt when unknown
  SourceSpan site;

  friend bool operator==(const ArrayHandle& a, const ArrayHandle& b) { return a.id == b.id; }
  friend bool operator<(const ArrayHandle& a, const ArrayHandle& b) { return a.id < b.id; }
};

inline const char* to_string(ArrayHandle::Origin o) {
  switch (o) {
    case ArrayHandle::Origin::Allocated: return "allocated";
    case ArrayHandle::Origin::Created: return "created";
    case ArrayHandle::Origin::Parameter: return "parameter";
  }
  return "?";
}

struct LedgerRow {
  ArrayHandle array;
  std::vector<QubitHandle> members;  // insertion order, no duplicates
  friend bool operator==(const LedgerRow& a, const LedgerRow& b) {
    return a.array == b.array && a.members == b.members;
  }
};

struct Ledger {
  std::vector<QubitHandle> qubits;  // Q, insertion order
  std::vector<LedgerRow> arrays;    // QA, insertion order

  friend bool operator==(const Ledger&, const Ledger&) = default;
};

namespace detail {

inline bool contains(const std::vector<QubitHandle>& v, const QubitHandle& q) {
  return std::find(v.begin(), v.end(), q) != v.end();
}

inline const LedgerRow* find_row(const Ledger& l, const ArrayHandle& a) {
  for (const auto& r : l.arrays)
    if (r.array == a) return &r;
  return nullptr;
}

inline std::string span_text(const SourceSpan& s) {
  return std::to_string(s.line) + ":" + std::to_string(s.col_start);
}

}  // namespace detail

/// Appends q to Q.
inline Ledger add_qubit(const Ledger& l, const QubitHandle& q) {
  if (detail::contains(l.qubits, q)) {
    throw LedgerFault("qubit q" + std::to_string(q.id) + " is already in Q");
  }
  Ledger out = l;
  out.qubits.push_back(q);
  return out;
}

/// Appends an empty row for a to QA.
inline Ledger add_array(const Ledger& l, const ArrayHandle& a) {
  if (detail::find_row(l, a)) {
    throw LedgerFault("array a" + std::to_string(a.id) + " is already in QA");
  }
  Ledger out = l;
  out.arrays.push_back(LedgerRow{a, {}});
  return out;
}

inline bool has_qubit(const Ledger& l, const QubitHandle& q) {
  return detail::contains(l.qubits, q);
}

inline bool has_array(const Ledger& l, const ArrayHandle& a) {
  return detail::find_row(l, a) != nullptr;
}

/// Removes q from Q.
inline Ledger remove_qubit(const Ledger& l, const QubitHandle& q) {
  if (!detail::contains(l.qubits, q)) {
    throw LedgerFault("qubit q" + std::to_string(q.id) + " is not in Q");
  }
  Ledger out = l;
  out.qubits.erase(std::find(out.qubits.begin(), out.qubits.end(), q));
  return out;
}

/// Removes the row of a from QA; members of that row also leave Q.
inline Ledger remove_array(const Ledger& l, const ArrayHandle& a) {
  const LedgerRow* row = detail::find_row(l, a);
  if (!row) throw LedgerFault("array a" + std::to_string(a.id) + " is not in QA");
  Ledger out;
  for (const auto& q : l.qubits) {
    if (!detail::contains(row->members, q)) out.qubits.push_back(q);
  }
  for (const auto& r : l.arrays) {
    if (!(r.array == a)) out.arrays.push_back(r);
  }
  return out;
}

/// Adds q to the row of a; a no-op when q is already there.
inline Ledger add_member(const Ledger& l, const ArrayHandle& a, const QubitHandle& q) {
  if (!detail::find_row(l, a)) {
    throw LedgerFault("array a" + std::to_string(a.id) + " is not in QA");
  }
  Ledger out = l;
  for (auto& r : out.arrays) {
    if (r.array == a && !detail::contains(r.members, q)) r.members.push_back(q);
  }
  return out;
}

inline bool has_member(const Ledger& l, const ArrayHandle& a, const QubitHandle& q) {
  const LedgerRow* row = detail::find_row(l, a);
  return row && detail::contains(row->members, q);
}

/// Earliest-inserted row containing q.
inline std::optional<ArrayHandle> find_array_of(const Ledger& l, const QubitHandle& q) {
  for (const auto& r : l.arrays)
    if (detail::contains(r.members, q)) return r.array;
  return std::nullopt;
}

/// Number of rows containing q.
inline std::size_t membership_count(const Ledger& l, const QubitHandle& q) {
  return static_cast<std::size_t>(std::count_if(
      l.arrays.begin(), l.arrays.end(),
      [&](const LedgerRow& r) { return detail::contains(r.members, q); }));
}

inline const std::vector<QubitHandle>* row_members(const Ledger& l, const ArrayHandle& a) {
  const LedgerRow* row = detail::find_row(l, a);
  return row ? &row->members : nullptr;
}

inline std::string describe(const QubitHandle& q) {
  std::string s = "q" + std::to_string(q.id) + " ";
  std::visit(
      [&](const auto& o) {
        using T = std::decay_t<decltype(o)>;
        if constexpr (std::is_same_v<T, DynamicSingle>) {
          s += "dynamic @" + detail::span_text(o.site);
        } else if constexpr (std::is_same_v<T, DynamicArrayMember>) {
          s += "member a" + std::to_string(o.array_id) + "[" + std::to_string(o.index) + "]";
        } else if constexpr (std::is_same_v<T, StaticQubit>) {
          s += "static " + (o.address ? std::to_string(*o.address) : std::string("?")) + " @" +
               detail::span_text(o.site);
        } else {
          s += "parameter #" + std::to_string(o.index);
        }
      },
      q.origin);
  return s;
}

inline std::string describe(const ArrayHandle& a) {
  return "a" + std::to_string(a.id) + " " + to_string(a.origin) + " len=" +
         (a.length ? std::to_string(*a.length) : std::string("?")) + " @" +
         detail::span_text(a.site);
}

/// Stable debug dump: one line per Q entry, then one block per QA row.
inline std::string dump(const Ledger& l) {
  std::ostringstream out;
  out << "Q (" << l.qubits.size() << ")\n";
  for (const auto& q : l.qubits) out << "  " << describe(q) << '\n';
  out << "QA (" << l.arrays.size() << ")\n";
  for (const auto& r : l.arrays) {
    out << "  " << describe(r.array) << '\n';
    for (const auto& q : r.members) out << "    " << describe(q) << '\n';
  }
  return out.str();
}

}  // namespace qir_sentinel
