#pragma once

#include <cctype>
#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>

namespace qir_sentinel {

enum class OutputFormat { Text, Json };

struct AnalysisConfig {
  std::optional<std::string> entry;  // nullopt: every defined function is an entry
  std::size_t max_inline_depth = 8;
  std::size_t max_unroll = 1;
  std::size_t max_paths = 4096;
  OutputFormat format = OutputFormat::Text;
  bool fail_fast = false;
  std::optional<std::string> extra_gates;  // path of a gate-table file
};

/// Gate names recognized as `__quantum__qis__<name>__body` (single) and
/// `__quantum__qis__<name>__ctl` (controlled).
struct GateTable {
  std::set<std::string, std::less<>> single;
  std::set<std::string, std::less<>> controlled;

  static GateTable builtin() {
    GateTable t;
    for (const char* g : {"x", "y", "z", "h", "s", "t", "rx", "ry", "rz"}) {
      t.single.insert(g);
      t.controlled.insert(g);
    }
    return t;
  }

  friend bool operator==(const GateTable&, const GateTable&) = default;
};

struct GateTableError {
  std::size_t line = 0;
  std::string message;
};

/// Extends `base` with one gate name per line; a `:ctl` suffix adds only the
/// controlled form. `#` starts a comment.
inline std::variant<GateTable, GateTableError> parse_gate_table(std::string_view text,
                                                                GateTable base = GateTable::builtin()) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.front()))) line.remove_prefix(1);
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) line.remove_suffix(1);
    if (line.empty()) continue;

    bool ctl = false;
    if (const auto colon = line.find(':'); colon != std::string_view::npos) {
      if (line.substr(colon) != ":ctl") {
        return GateTableError{line_no, "unknown suffix '" + std::string(line.substr(colon)) + "'"};
      }
      ctl = true;
      line = line.substr(0, colon);
    }
    for (char c : line) {
      if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') {
        return GateTableError{line_no, "invalid gate name '" + std::string(line) + "'"};
      }
    }
    if (line.empty()) return GateTableError{line_no, "missing gate name"};
    (ctl ? base.controlled : base.single).insert(std::string(line));
  }
  return base;
}

}  // namespace qir_sentinel
