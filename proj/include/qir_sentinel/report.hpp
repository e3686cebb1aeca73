#pragma once

// Text and JSON rendering of analysis results.

#include <openssl/evp.h>

#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "qir_sentinel/diagnostic.hpp"

namespace qir_sentinel {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kReportSchemaVersion = 1;

struct ReportSummary {
  std::size_t errors = 0;
  std::size_t notes = 0;
  std::map<std::string, std::size_t> by_kind;
  friend bool operator==(const ReportSummary&, const ReportSummary&) = default;
};

struct RenderedReport {
  std::string tool_version = kToolVersion;
  std::string file;
  std::string digest;  // "sha256:<hex>" of the analyzed source
  std::vector<Diagnostic> diagnostics;
  ReportSummary summary;
  friend bool operator==(const RenderedReport&, const RenderedReport&) = default;
};

inline std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[md[i] >> 4];
    out += kHex[md[i] & 0xF];
  }
  return out;
}

inline ReportSummary summarize(const std::vector<Diagnostic>& ds) {
  ReportSummary s;
  for (const auto& d : ds) {
    (d.severity == Severity::Error ? s.errors : s.notes) += 1;
    s.by_kind[to_string(d.kind)] += 1;
  }
  return s;
}

/// Sorts and deduplicates `diagnostics` and fills in digest and summary.
inline RenderedReport make_report(std::string file, std::string_view source,
                                  std::vector<Diagnostic> diagnostics) {
  RenderedReport r;
  r.file = std::move(file);
  r.digest = "sha256:" + sha256_hex(source);
  r.diagnostics = dedupe_and_sort(std::move(diagnostics));
  r.summary = summarize(r.diagnostics);
  return r;
}

// ---- text -----------------------------------------------------------------

namespace detail {

struct Palette {
  bool on = false;
  std::string wrap(std::string_view code, std::string_view s) const {
    if (!on) return std::string(s);
    return "\x1b[" + std::string(code) + "m" + std::string(s) + "\x1b[0m";
  }
};

inline std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    if (i == text.size() || text[i] == '\n') {
      std::string_view line = text.substr(start, i - start);
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      if (i < text.size() || !line.empty()) lines.push_back(line);
      start = i + 1;
    }
  }
  return lines;
}

inline std::string where(const TraceEvent& e) {
  std::string s = std::to_string(e.span.line) + ":" + std::to_string(e.span.col_start);
  if (!e.function.empty()) s += " in @" + e.function;
  return s;
}

inline std::string summary_line(const ReportSummary& s) {
  std::string out = std::to_string(s.errors) + (s.errors == 1 ? " error" : " errors") + ", " +
                    std::to_string(s.notes) + (s.notes == 1 ? " note" : " notes");
  return out;
}

}  // namespace detail

/// Human-readable report. Throws std::out_of_range when a span does not lie
/// within `source`.
inline std::string render_text(const RenderedReport& report, std::string_view source,
                               bool color = false) {
  const detail::Palette p{color};
  const auto lines = detail::split_lines(source);
  std::ostringstream out;
  if (report.diagnostics.empty()) {
    out << report.file << ": no issues found\n";
    out << detail::summary_line(report.summary) << '\n';
    return out.str();
  }
  for (const auto& d : report.diagnostics) {
    if (d.span.line == 0 || d.span.line > lines.size()) {
      throw std::out_of_range("diagnostic line " + std::to_string(d.span.line) +
                              " is outside " + report.file);
    }
    const std::string_view text = lines[d.span.line - 1];
    const std::string gutter_num = std::to_string(d.span.line);
    const std::string pad(gutter_num.size(), ' ');
    const bool err = d.severity == Severity::Error;

    out << p.wrap(err ? "1;31" : "1;36", to_string(d.severity)) << p.wrap("1", "[")
        << p.wrap("1", to_string(d.kind)) << p.wrap("1", "]: ") << p.wrap("1", d.message) << '\n';
    out << pad << p.wrap("1;34", "--> ") << report.file << ':' << d.span.line << ':'
        << d.span.col_start << '\n';
    out << pad << p.wrap("1;34", " |") << '\n';
    out << p.wrap("1;34", gutter_num + " | ") << text << '\n';

    std::size_t start = d.span.col_start == 0 ? 0 : d.span.col_start - 1;
    if (start > text.size()) start = text.size();
    std::size_t end = d.span.col_end == 0 ? text.size() : d.span.col_end - 1;
    if (end > text.size()) end = text.size();
    if (end <= start) end = start + 1;
    std::string marks(start, ' ');
    for (std::size_t i = start; i < start + 1 || i < end; ++i) {
      marks += i < text.size() && text[i] == '\t' ? '\t' : '^';
    }
    for (std::size_t i = 0; i < start; ++i) {
      if (text[i] == '\t') marks[i] = '\t';
    }
    out << pad << p.wrap("1;34", " | ") << p.wrap(err ? "1;31" : "1;36", marks) << '\n';

    out << pad << " = rule: " << d.rule << '\n';
    if (!d.entry.empty()) out << pad << " = entry: @" << d.entry << '\n';
    for (const auto& e : d.trace) out << pad << " = " << e.event << " at " << detail::where(e) << '\n';
    out << pad << " = used here at " << d.span.line << ':' << d.span.col_start;
    if (!d.function.empty()) out << " in @" << d.function;
    out << "\n\n";
  }
  out << report.file << ": " << detail::summary_line(report.summary) << '\n';
  return out.str();
}

// ---- JSON -----------------------------------------------------------------

namespace detail {

using ojson = nlohmann::ordered_json;

inline ojson span_json(const SourceSpan& s) {
  ojson j;
  j["line"] = s.line;
  j["col_start"] = s.col_start;
  j["col_end"] = s.col_end;
  return j;
}

inline SourceSpan span_from_json(const ojson& j) {
  return SourceSpan{j.at("line").get<std::uint32_t>(), j.at("col_start").get<std::uint32_t>(),
                    j.at("col_end").get<std::uint32_t>()};
}

}  // namespace detail

inline nlohmann::ordered_json report_to_json(const RenderedReport& r) {
  using detail::ojson;
  ojson j;
  j["version"] = kReportSchemaVersion;
  j["tool_version"] = r.tool_version;
  j["file"] = r.file;
  j["digest"] = r.digest;
  ojson summary;
  summary["errors"] = r.summary.errors;
  summary["notes"] = r.summary.notes;
  summary["by_kind"] = ojson::object();
  for (const auto& [k, n] : r.summary.by_kind) summary["by_kind"][k] = n;
  j["summary"] = summary;
  j["diagnostics"] = ojson::array();
  for (const auto& d : r.diagnostics) {
    ojson dj;
    dj["kind"] = to_string(d.kind);
    dj["severity"] = to_string(d.severity);
    dj["rule"] = d.rule;
    dj["span"] = detail::span_json(d.span);
    dj["message"] = d.message;
    dj["function"] = d.function;
    dj["entry"] = d.entry;
    dj["trace"] = ojson::array();
    for (const auto& e : d.trace) {
      ojson ej;
      ej["event"] = e.event;
      ej["span"] = detail::span_json(e.span);
      ej["function"] = e.function;
      dj["trace"].push_back(ej);
    }
    j["diagnostics"].push_back(dj);
  }
  return j;
}

/// Canonical single-line JSON; identical reports give identical bytes.
inline std::string render_json(const RenderedReport& r) { return report_to_json(r).dump(); }

/// Inverse of render_json. Returns an error message on malformed input.
inline std::variant<RenderedReport, std::string> report_from_json(std::string_view text) {
  using detail::ojson;
  try {
    const ojson j = ojson::parse(text);
    if (j.at("version").get<int>() != kReportSchemaVersion) {
      return std::string("unsupported report version");
    }
    RenderedReport r;
    r.tool_version = j.at("tool_version").get<std::string>();
    r.file = j.at("file").get<std::string>();
    r.digest = j.at("digest").get<std::string>();
    const auto& s = j.at("summary");
    r.summary.errors = s.at("errors").get<std::size_t>();
    r.summary.notes = s.at("notes").get<std::size_t>();
    for (const auto& [k, n] : s.at("by_kind").items()) r.summary.by_kind[k] = n.get<std::size_t>();
    for (const auto& dj : j.at("diagnostics")) {
      Diagnostic d;
      const auto kind = diagnostic_kind_from_string(dj.at("kind").get<std::string>());
      const auto sev = severity_from_string(dj.at("severity").get<std::string>());
      if (!kind || !sev) return std::string("unknown diagnostic kind or severity");
      d.kind = *kind;
      d.severity = *sev;
      d.rule = dj.at("rule").get<std::string>();
      d.span = detail::span_from_json(dj.at("span"));
      d.message = dj.at("message").get<std::string>();
      d.function = dj.at("function").get<std::string>();
      d.entry = dj.at("entry").get<std::string>();
      for (const auto& ej : dj.at("trace")) {
        d.trace.push_back(TraceEvent{ej.at("event").get<std::string>(),
                                     detail::span_from_json(ej.at("span")),
                                     ej.at("function").get<std::string>()});
      }
      r.diagnostics.push_back(std::move(d));
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    return std::string(e.what());
  }
}

}  // namespace qir_sentinel
