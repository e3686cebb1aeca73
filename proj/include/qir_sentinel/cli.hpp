#pragma once

// The qir-sentinel command. `cli::run` is callable in-process so tests can
// drive it with string streams.

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "qir_sentinel/config.hpp"
#include "qir_sentinel/parser.hpp"
#include "qir_sentinel/report.hpp"
#include "qir_sentinel/semantics.hpp"
#include "qir_sentinel/validate.hpp"

namespace qir_sentinel::cli {

inline constexpr int kExitClean = 0;
inline constexpr int kExitFindings = 1;
inline constexpr int kExitFailure = 2;

/// Combines per-file exit codes; failures outrank findings.
inline int combine_exit(int a, int b) {
  if (a == kExitFailure || b == kExitFailure) return kExitFailure;
  return std::max(a, b);
}

enum class ColorMode { Never, Auto, Always };

inline ColorMode color_mode_from_env() {
  const char* v = std::getenv("QIR_SENTINEL_COLOR");
  if (!v) return ColorMode::Auto;
  const std::string s = v;
  if (s == "always") return ColorMode::Always;
  if (s == "never") return ColorMode::Never;
  return ColorMode::Auto;
}

inline bool read_file(const std::string& path, std::string& out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) return false;
  out = ss.str();
  return true;
}

struct FileOutcome {
  std::string out;
  std::string err;
  int code = kExitClean;
};

/// Actual result of one file for corpus comparison: (kind, line) pairs.
struct Finding {
  std::string kind;
  std::uint32_t line = 0;
  friend bool operator==(const Finding&, const Finding&) = default;
  friend auto operator<=>(const Finding& a, const Finding& b) {
    if (auto c = a.line <=> b.line; c != 0) return c;
    return a.kind.compare(b.kind) <=> 0;
  }
};

struct FileAnalysis {
  bool io_failed = false;
  std::vector<ParseError> parse_errors;
  std::vector<ParseWarning> warnings;
  std::vector<StructuralError> structural_errors;
  std::string entry_error;
  std::string source;
  std::optional<RenderedReport> report;
};

inline FileAnalysis analyze_file(const std::string& path, const AnalysisConfig& config,
                                 const GateTable& gates) {
  FileAnalysis fa;
  if (!read_file(path, fa.source)) {
    fa.io_failed = true;
    return fa;
  }
  ParseResult parsed = parse_module(fa.source, path);
  fa.warnings = std::move(parsed.warnings);
  if (!parsed.ok()) {
    fa.parse_errors = std::move(parsed.errors);
    return fa;
  }
  fa.structural_errors = validate_module(*parsed.module);
  if (!fa.structural_errors.empty()) return fa;
  if (config.entry) {
    const Function* f = parsed.module->find_function(*config.entry);
    if (!f || f->is_declaration) {
      fa.entry_error = "entry point @" + *config.entry + " is not defined in " + path;
      return fa;
    }
  }
  fa.report = make_report(path, fa.source, analyze_module(*parsed.module, config, gates));
  return fa;
}

inline FileOutcome process_file(const std::string& path, const AnalysisConfig& config,
                                const GateTable& gates, bool color) {
  FileOutcome o;
  FileAnalysis fa = analyze_file(path, config, gates);
  std::ostringstream err;
  for (const auto& w : fa.warnings) {
    err << path << ':' << w.span.line << ':' << w.span.col_start << ": warning: " << w.message << '\n';
  }
  if (fa.io_failed) {
    err << "error: cannot read " << path << '\n';
    o.code = kExitFailure;
  } else if (!fa.parse_errors.empty()) {
    for (const auto& e : fa.parse_errors) {
      err << path << ':' << e.span.line << ':' << e.span.col_start << ": parse error: " << e.message
          << '\n';
    }
    o.code = kExitFailure;
  } else if (!fa.structural_errors.empty()) {
    for (const auto& e : fa.structural_errors) {
      err << path << ':' << e.span.line << ':' << e.span.col_start << ": invalid module ["
          << to_string(e.kind) << "]: " << e.message << '\n';
    }
    o.code = kExitFailure;
  } else if (!fa.entry_error.empty()) {
    err << "error: " << fa.entry_error << '\n';
    o.code = kExitFailure;
  } else {
    o.out = config.format == OutputFormat::Json ? render_json(*fa.report) + "\n"
                                                : render_text(*fa.report, fa.source, color);
    o.code = fa.report->summary.errors > 0 ? kExitFindings : kExitClean;
  }
  o.err = err.str();
  return o;
}

/// Analyzes files concurrently; results keep the order of `paths`.
inline std::vector<FileOutcome> process_files(const std::vector<std::string>& paths,
                                              const AnalysisConfig& config, const GateTable& gates,
                                              bool color) {
  std::vector<FileOutcome> results(paths.size());
  const std::size_t workers =
      std::min<std::size_t>(paths.size(), std::max(1u, std::thread::hardware_concurrency()));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < paths.size(); i = next++) {
      results[i] = process_file(paths[i], config, gates, color);
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t i = 1; i < workers; ++i) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  return results;
}

// ---- corpus mode ------------------------------------------------------------

inline std::vector<Finding> findings_of(const FileAnalysis& fa) {
  std::vector<Finding> out;
  if (fa.io_failed) {
    out.push_back(Finding{"IOError", 0});
  } else if (!fa.parse_errors.empty()) {
    for (const auto& e : fa.parse_errors) out.push_back(Finding{"ParseError", e.span.line});
  } else if (!fa.structural_errors.empty()) {
    for (const auto& e : fa.structural_errors) out.push_back(Finding{"StructuralError", e.span.line});
  } else if (fa.report) {
    for (const auto& d : fa.report->diagnostics) out.push_back(Finding{to_string(d.kind), d.span.line});
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline std::string format_findings(const std::vector<Finding>& fs) {
  std::string s = "[";
  for (std::size_t i = 0; i < fs.size(); ++i) {
    if (i) s += ", ";
    s += fs[i].kind + "@" + std::to_string(fs[i].line);
  }
  return s + "]";
}

using Expectations = std::map<std::string, std::vector<Finding>>;

/// Parses `{"fixtures": {"name.ll": [{"kind": K, "line": N}, ...]}}`.
inline std::optional<Expectations> parse_expectations(const std::string& text, std::string& error) {
  try {
    const auto j = nlohmann::json::parse(text);
    Expectations ex;
    for (const auto& [name, list] : j.at("fixtures").items()) {
      std::vector<Finding> fs;
      for (const auto& item : list) {
        Finding f{item.at("kind").get<std::string>(), item.at("line").get<std::uint32_t>()};
        const bool known = diagnostic_kind_from_string(f.kind) || f.kind == "ParseError" ||
                           f.kind == "StructuralError" || f.kind == "IOError";
        if (!known) {
          error = name + ": unknown kind '" + f.kind + "'";
          return std::nullopt;
        }
        fs.push_back(std::move(f));
      }
      std::sort(fs.begin(), fs.end());
      ex[name] = std::move(fs);
    }
    return ex;
  } catch (const nlohmann::json::exception& e) {
    error = e.what();
    return std::nullopt;
  }
}

inline int run_corpus(const std::string& dir, const std::string& expectations_path,
                      const AnalysisConfig& config, const GateTable& gates, std::ostream& out,
                      std::ostream& err) {
  std::string text;
  if (!read_file(expectations_path, text)) {
    err << "error: cannot read expectations file " << expectations_path << '\n';
    return kExitFailure;
  }
  std::string perr;
  const auto expected = parse_expectations(text, perr);
  if (!expected) {
    err << "error: malformed expectations file " << expectations_path << ": " << perr << '\n';
    return kExitFailure;
  }

  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) {
    err << "error: " << dir << " is not a directory\n";
    return kExitFailure;
  }
  std::vector<std::string> names;
  for (const auto& entry : std::filesystem::directory_iterator(dir, ec)) {
    if (entry.is_regular_file() && entry.path().extension() == ".ll") {
      names.push_back(entry.path().filename().string());
    }
  }
  std::sort(names.begin(), names.end());
  if (names.empty()) {
    err << "warning: no .ll fixtures in " << dir << '\n';
    return kExitClean;
  }

  std::size_t passed = 0;
  for (const auto& name : names) {
    const auto fa = analyze_file((std::filesystem::path(dir) / name).string(), config, gates);
    const auto actual = findings_of(fa);
    auto it = expected->find(name);
    if (it == expected->end()) {
      out << "FAIL " << name << ": no expectation; got " << format_findings(actual) << '\n';
      continue;
    }
    if (it->second == actual) {
      out << "PASS " << name << '\n';
      ++passed;
    } else {
      out << "FAIL " << name << ": expected " << format_findings(it->second) << " got "
          << format_findings(actual) << '\n';
    }
  }
  std::size_t missing = 0;
  for (const auto& [name, _] : *expected) {
    if (!std::binary_search(names.begin(), names.end(), name)) {
      out << "FAIL " << name << ": fixture not found\n";
      ++missing;
    }
  }
  out << passed << '/' << names.size() + missing << " fixtures match\n";
  return passed == names.size() && missing == 0 ? kExitClean : kExitFindings;
}

// ---- entry point --------------------------------------------------------------

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Static safety verifier for QIR programs", "qir-sentinel"};
  std::vector<std::string> files;
  AnalysisConfig config;
  std::string entry, format = "text", gates_path, corpus_dir, expectations_path;
  std::size_t max_inline_depth = config.max_inline_depth;
  std::size_t max_unroll = config.max_unroll;
  std::size_t max_paths = config.max_paths;
  bool show_version = false;

  app.add_option("files", files, "QIR (.ll) files to analyze");
  app.add_option("--entry", entry, "Analyze only this function (default: every definition)");
  app.add_option("--max-inline-depth", max_inline_depth, "Maximum inlining depth")
      ->check(CLI::PositiveNumber);
  app.add_option("--max-unroll", max_unroll, "Loop unrolling bound")->check(CLI::NonNegativeNumber);
  app.add_option("--max-paths", max_paths, "Path exploration limit")->check(CLI::PositiveNumber);
  app.add_option("--format", format, "Output format")->check(CLI::IsMember({"text", "json"}));
  app.add_flag("--fail-fast", config.fail_fast, "Stop each path at its first error");
  app.add_option("--gates", gates_path, "Extra gate table (one name per line, ':ctl' suffix)");
  auto* corpus_opt = app.add_option("--corpus", corpus_dir, "Run the fixtures of a directory");
  app.add_option("--expectations", expectations_path, "Expected findings for --corpus")
      ->needs(corpus_opt);
  corpus_opt->needs("--expectations");
  app.add_flag("--version", show_version, "Print the version and exit");

  std::vector<const char*> argv{"qir-sentinel"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitClean;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n' << app.help();
    return kExitFailure;
  }
  if (show_version) {
    out << "qir-sentinel " << kToolVersion << '\n';
    return kExitClean;
  }

  if (!entry.empty()) config.entry = entry;
  config.max_inline_depth = max_inline_depth;
  config.max_unroll = max_unroll;
  config.max_paths = max_paths;
  config.format = format == "json" ? OutputFormat::Json : OutputFormat::Text;

  GateTable gates = GateTable::builtin();
  if (!gates_path.empty()) {
    config.extra_gates = gates_path;
    std::string text;
    if (!read_file(gates_path, text)) {
      err << "error: cannot read gate table " << gates_path << '\n';
      return kExitFailure;
    }
    auto parsed = parse_gate_table(text);
    if (auto* e = std::get_if<GateTableError>(&parsed)) {
      err << gates_path << ':' << e->line << ": error: " << e->message << '\n';
      return kExitFailure;
    }
    gates = std::get<GateTable>(std::move(parsed));
  }

  if (!corpus_dir.empty()) {
    int code = run_corpus(corpus_dir, expectations_path, config, gates, out, err);
    if (files.empty()) return code;
    for (auto& o : process_files(files, config, gates, false)) {
      out << o.out;
      err << o.err;
      code = combine_exit(code, o.code);
    }
    return code;
  }
  if (files.empty()) {
    err << "error: no input files\n" << app.help();
    return kExitFailure;
  }

  const ColorMode mode = color_mode_from_env();
  const bool color = mode == ColorMode::Always ||
                     (mode == ColorMode::Auto && &out == &std::cout && isatty(STDOUT_FILENO));

  int code = kExitClean;
  for (auto& o : process_files(files, config, gates, color)) {
    out << o.out;
    err << o.err;
    code = combine_exit(code, o.code);
  }
  return code;
}

}  // namespace qir_sentinel::cli
