#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "qir_sentinel/ast.hpp"

namespace qir_sentinel {

enum class DiagnosticKind {
  UseAfterReleaseQubit,
  UseAfterReleaseArray,
  ReleaseQubitInArray,
  DoubleReleaseQubit,
  DoubleReleaseArray,
  ReleaseStaticQubit,
  CloneInArrayStore,
  CloneControlTarget,
  MeasureReleasedArray,
  LoadFromReleasedArray,
  IndexOutOfBounds,
  MultiArrayMembershipNote,
  TypeMismatch,
  AnalysisGap,
  Incomplete,
};

enum class Severity { Error, Note };

inline constexpr DiagnosticKind kAllDiagnosticKinds[] = {
    DiagnosticKind::UseAfterReleaseQubit,  DiagnosticKind::UseAfterReleaseArray,
    DiagnosticKind::ReleaseQubitInArray,   DiagnosticKind::DoubleReleaseQubit,
    DiagnosticKind::DoubleReleaseArray,    DiagnosticKind::ReleaseStaticQubit,
    DiagnosticKind::CloneInArrayStore,     DiagnosticKind::CloneControlTarget,
    DiagnosticKind::MeasureReleasedArray,  DiagnosticKind::LoadFromReleasedArray,
    DiagnosticKind::IndexOutOfBounds,      DiagnosticKind::MultiArrayMembershipNote,
    DiagnosticKind::TypeMismatch,          DiagnosticKind::AnalysisGap,
    DiagnosticKind::Incomplete,
};

inline const char* to_string(DiagnosticKind k) {
  switch (k) {
    case DiagnosticKind::UseAfterReleaseQubit: return "UseAfterReleaseQubit";
    case DiagnosticKind::UseAfterReleaseArray: return "UseAfterReleaseArray";
    case DiagnosticKind::ReleaseQubitInArray: return "ReleaseQubitInArray";
    case DiagnosticKind::DoubleReleaseQubit: return "DoubleReleaseQubit";
    case DiagnosticKind::DoubleReleaseArray: return "DoubleReleaseArray";
    case DiagnosticKind::ReleaseStaticQubit: return "ReleaseStaticQubit";
    case DiagnosticKind::CloneInArrayStore: return "CloneInArrayStore";
    case DiagnosticKind::CloneControlTarget: return "CloneControlTarget";
    case DiagnosticKind::MeasureReleasedArray: return "MeasureReleasedArray";
    case DiagnosticKind::LoadFromReleasedArray: return "LoadFromReleasedArray";
    case DiagnosticKind::IndexOutOfBounds: return "IndexOutOfBounds";
    case DiagnosticKind::MultiArrayMembershipNote: return "MultiArrayMembershipNote";
    case DiagnosticKind::TypeMismatch: return "TypeMismatch";
    case DiagnosticKind::AnalysisGap: return "AnalysisGap";
    case DiagnosticKind::Incomplete: return "Incomplete";
  }
  return "?";
}

inline std::optional<DiagnosticKind> diagnostic_kind_from_string(std::string_view s) {
  for (auto k : kAllDiagnosticKinds)
    if (s == to_string(k)) return k;
  return std::nullopt;
}

inline Severity severity_of(DiagnosticKind k) {
  switch (k) {
    case DiagnosticKind::MultiArrayMembershipNote:
    case DiagnosticKind::TypeMismatch:
    case DiagnosticKind::AnalysisGap:
    case DiagnosticKind::Incomplete:
      return Severity::Note;
    default:
      return Severity::Error;
  }
}

inline const char* to_string(Severity s) { return s == Severity::Error ? "error" : "note"; }

inline std::optional<Severity> severity_from_string(std::string_view s) {
  if (s == "error") return Severity::Error;
  if (s == "note") return Severity::Note;
  return std::nullopt;
}

/// Fixed message template per kind.
inline const char* message_template(DiagnosticKind k) {
  switch (k) {
    case DiagnosticKind::UseAfterReleaseQubit: return "qubit is used after it was released";
    case DiagnosticKind::UseAfterReleaseArray: return "qubit array is used after it was released";
    case DiagnosticKind::ReleaseQubitInArray:
      return "qubit belongs to a qubit array and cannot be released on its own";
    case DiagnosticKind::DoubleReleaseQubit: return "qubit is released twice";
    case DiagnosticKind::DoubleReleaseArray: return "qubit array is released twice";
    case DiagnosticKind::ReleaseStaticQubit: return "static qubit cannot be released";
    case DiagnosticKind::CloneInArrayStore:
      return "qubit is stored twice into the same array (qubit cloning)";
    case DiagnosticKind::CloneControlTarget:
      return "target qubit is also a control qubit (qubit cloning)";
    case DiagnosticKind::MeasureReleasedArray: return "measurement of a released qubit array";
    case DiagnosticKind::LoadFromReleasedArray: return "qubit loaded from a released array";
    case DiagnosticKind::IndexOutOfBounds: return "array index is out of bounds";
    case DiagnosticKind::MultiArrayMembershipNote: return "qubit is a member of several arrays";
    case DiagnosticKind::TypeMismatch: return "operand does not have the expected kind";
    case DiagnosticKind::AnalysisGap: return "value could not be tracked";
    case DiagnosticKind::Incomplete: return "analysis stopped before exploring every path";
  }
  return "?";
}

/// One step of a handle's history.
struct TraceEvent {
  std::string event;     // e.g. "allocated", "released"
  SourceSpan span;
  std::string function;  // function containing `span`

  friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
  friend auto operator<=>(const TraceEvent&, const TraceEvent&) = default;
};

struct Diagnostic {
  DiagnosticKind kind = DiagnosticKind::AnalysisGap;
  Severity severity = Severity::Note;
  std::string rule;  // Q_ALLOC ... MEASURE, or "plumbing"
  SourceSpan span;
  std::string message;
  std::vector<TraceEvent> trace;
  std::string function;  // function containing `span`
  std::string entry;     // entry point whose exploration found it

  friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

/// Position order with deterministic tie-breaks.
inline bool diagnostic_less(const Diagnostic& a, const Diagnostic& b) {
  const std::string_view ka = to_string(a.kind), kb = to_string(b.kind);
  return std::tie(a.span.line, a.span.col_start, ka, a.span.col_end, a.function, a.message,
                  a.trace, a.entry) < std::tie(b.span.line, b.span.col_start, kb, b.span.col_end,
                                               b.function, b.message, b.trace, b.entry);
}

/// Drops repeats of (kind, span, function, trace), keeping the first, then sorts.
inline std::vector<Diagnostic> dedupe_and_sort(std::vector<Diagnostic> in) {
  std::vector<Diagnostic> out;
  for (auto& d : in) {
    const bool seen = std::any_of(out.begin(), out.end(), [&](const Diagnostic& e) {
      return e.kind == d.kind && e.span == d.span && e.function == d.function &&
             e.trace == d.trace;
    });
    if (!seen) out.push_back(std::move(d));
  }
  std::stable_sort(out.begin(), out.end(), diagnostic_less);
  return out;
}

inline std::size_t error_count(const std::vector<Diagnostic>& ds) {
  return static_cast<std::size_t>(std::count_if(
      ds.begin(), ds.end(), [](const Diagnostic& d) { return d.severity == Severity::Error; }));
}

}  // namespace qir_sentinel
