// Acceptance checks, one PASS/FAIL line each. Exit status is the number of
// failures.

#include <chrono>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "qir_sentinel/qir_sentinel.hpp"
#include "support/fixtures.hpp"
#include "support/ledger_model.hpp"
#include "support/module_gen.hpp"
#include "support/trace_gen.hpp"

namespace qs = qir_sentinel;
namespace qt = qir_sentinel::testing;

namespace {

struct Verdict {
  bool ok = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

std::vector<qs::Diagnostic> errors_only(const std::vector<qs::Diagnostic>& ds) {
  std::vector<qs::Diagnostic> out;
  for (const auto& d : ds)
    if (d.severity == qs::Severity::Error) out.push_back(d);
  return out;
}

// Parse and analyze one corpus fixture from scratch, timed.
std::vector<qs::Diagnostic> timed_analysis(const std::string& file, const std::string& entry,
                                           std::string& source, double& ms) {
  source = qt::corpus_source(file);
  const auto t0 = Clock::now();
  auto parsed = qs::parse_module(source, file);
  if (!parsed.ok()) throw std::runtime_error(file + " does not parse");
  auto ds = qs::analyze_function(*parsed.module, entry);
  ms = ms_since(t0);
  return ds;
}

std::string line_of(const std::string& source, std::uint32_t line) {
  std::istringstream in(source);
  std::string s;
  for (std::uint32_t i = 0; i < line && std::getline(in, s); ++i) {
  }
  return s;
}

Verdict dead_qubit() {
  std::string src;
  double ms = 0;
  const auto all = timed_analysis("deadqubit.ll", "Deadqubit__body", src, ms);
  const auto es = errors_only(all);
  std::ostringstream why;
  why << es.size() << " error(s), " << ms << " ms";
  if (es.size() != 1) return {false, why.str()};
  const auto& d = es.front();
  if (d.kind != qs::DiagnosticKind::UseAfterReleaseQubit) return {false, why.str() + ", wrong kind"};
  if (line_of(src, d.span.line).find("@__quantum__qis__h__body") == std::string::npos) {
    return {false, why.str() + ", not at the h__body call"};
  }
  auto parsed = qs::parse_module(src, "deadqubit.ll");
  const auto* callee = parsed.module->find_function("NewQubit__body");
  bool release_inside = false;
  for (const auto& e : d.trace) {
    if (e.event == "released" && e.function == "NewQubit__body" && e.span.line >= callee->span.line &&
        e.span.line <= callee->blocks.back().terminator.span.line + 1) {
      release_inside = true;
    }
  }
  if (!release_inside) return {false, why.str() + ", trace has no release inside NewQubit__body"};
  if (ms >= 100) return {false, why.str() + ", too slow"};
  return {true, why.str() + ", line " + std::to_string(d.span.line)};
}

Verdict cloning() {
  std::string src;
  double ms = 0;
  const auto es = errors_only(timed_analysis("cloning.ll", "Cloning__body", src, ms));
  std::ostringstream why;
  why << es.size() << " error(s), " << ms << " ms";
  if (es.size() != 2) return {false, why.str()};
  const auto& store = es[0];
  const auto& ctl = es[1];
  const bool store_ok = store.kind == qs::DiagnosticKind::CloneInArrayStore &&
                        line_of(src, store.span.line).find("store %Qubit*") != std::string::npos;
  // The second store in the file is the one that duplicates.
  int stores_before = 0;
  for (std::uint32_t l = 1; l < store.span.line; ++l) {
    if (line_of(src, l).find("store %Qubit*") != std::string::npos) ++stores_before;
  }
  const bool ctl_ok = ctl.kind == qs::DiagnosticKind::CloneControlTarget &&
                      line_of(src, ctl.span.line).find("__quantum__qis__x__ctl") != std::string::npos;
  why << ", store at line " << store.span.line << ", ctl at line " << ctl.span.line;
  if (!store_ok || stores_before != 1 || !ctl_ok) return {false, why.str()};
  if (ms >= 100) return {false, why.str() + ", too slow"};
  return {true, why.str()};
}

Verdict sample() {
  std::ostringstream out, err;
  const int code = qs::cli::run({qt::corpus_path("sample.ll")}, out, err);
  const auto es = errors_only(qs::analyze_module(qt::corpus_module("sample.ll")));
  std::ostringstream why;
  why << es.size() << " error(s), exit " << code;
  return {es.empty() && code == 0, why.str()};
}

Verdict oracle_equivalence() {
  constexpr int kTraces = 1200;
  int mismatches = 0;
  std::string first;
  for (int seed = 0; seed < kTraces; ++seed) {
    std::mt19937_64 rng(static_cast<std::uint64_t>(seed) * 7919 + 1);
    const qt::Trace t = qt::random_trace(rng, 4 + seed % 40);
    const qt::Program p = qt::emit_program(t);
    const qt::Outcome ref = qt::Replayer{}.run(t, p);
    const qt::Outcome got = qt::analyzer_outcome(p.text);
    if (!(ref == got)) {
      if (mismatches++ == 0) {
        first = "seed " + std::to_string(seed) + "\nreplayer:\n" + qt::describe(ref) + "\nanalyzer:\n" +
                qt::describe(got) + "\n" + p.text;
      }
    }
  }
  std::string why = std::to_string(kTraces) + " traces, " + std::to_string(mismatches) + " mismatches";
  if (mismatches) std::cerr << first << '\n';
  return {mismatches == 0, why};
}

Verdict ledger_properties() {
  std::size_t ops = 0, faults = 0;
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const auto rep = qt::check_ledger_properties(seed, 30000);
    ops += rep.ops;
    faults += rep.faults;
    if (rep.failure) return {false, "seed " + std::to_string(seed) + ": " + *rep.failure};
  }
  return {ops >= 100000, std::to_string(ops) + " ops, " + std::to_string(faults) + " rejected preconditions"};
}

Verdict soundness_precision() {
  constexpr int kEach = 600;
  int missed_uar = 0, missed_clone = 0, false_pos = 0;
  for (int i = 0; i < kEach; ++i) {
    qt::SafeBuilder b(static_cast<std::uint64_t>(i) + 17);
    const auto safe = qt::emit_program(b.safe(5 + i % 30));
    const auto uar = qt::emit_program(b.unsafe(qt::SafeBuilder::Violation::UseAfterRelease, i % 15, i % 7));
    const auto clone = qt::emit_program(b.unsafe(qt::SafeBuilder::Violation::Cloning, i % 13, i % 5));
    auto diags = [](const std::string& text) {
      auto parsed = qs::parse_module(text, "trace.ll");
      return qs::analyze_function(*parsed.module, "main");
    };
    for (const auto& d : diags(safe.text)) {
      if (d.severity == qs::Severity::Error) {
        if (false_pos++ == 0) std::cerr << "false positive " << to_string(d.kind) << "\n" << safe.text;
      }
    }
    auto has = [](const std::vector<qs::Diagnostic>& ds, bool (*cls)(qs::DiagnosticKind)) {
      for (const auto& d : ds)
        if (d.severity == qs::Severity::Error && cls(d.kind)) return true;
      return false;
    };
    if (!has(diags(uar.text), qt::is_use_after_release_kind)) {
      if (missed_uar++ == 0) std::cerr << "missed use-after-release\n" << uar.text;
    }
    if (!has(diags(clone.text), qt::is_cloning_kind)) {
      if (missed_clone++ == 0) std::cerr << "missed cloning\n" << clone.text;
    }
  }
  std::ostringstream why;
  why << kEach << " traces per class; missed use-after-release " << missed_uar << ", missed cloning "
      << missed_clone << ", false positives " << false_pos;
  return {missed_uar == 0 && missed_clone == 0 && false_pos == 0, why.str()};
}

Verdict round_trip_and_fuzz() {
  constexpr int kModules = 1000;
  constexpr int kFuzz = 100000;
  constexpr int kMutations = 20000;
  int rt_fail = 0;
  for (int seed = 0; seed < kModules; ++seed) {
    qt::ModuleGenerator gen(static_cast<std::uint64_t>(seed));
    const qs::QirModule m = gen.module();
    const std::string text = qs::print_module(m);
    auto back = qs::parse_module(text, "gen.ll");
    if (!back.ok() || !(qs::strip_spans(*back.module) == qs::strip_spans(m))) {
      if (rt_fail++ == 0) {
        std::cerr << "round trip failed for seed " << seed << "\n" << text;
        if (!back.ok()) std::cerr << back.errors.front().span.line << ": " << back.errors.front().message << '\n';
      }
    }
  }

  std::mt19937_64 rng(2024);
  int thrown = 0;
  auto survive = [&](const std::string& input) {
    try {
      auto r = qs::parse_module(input, "fuzz.ll");
      if (r.ok() && qs::validate_module(*r.module).empty()) (void)qs::analyze_module(*r.module);
    } catch (...) {
      ++thrown;
    }
  };
  for (int i = 0; i < kFuzz; ++i) {
    std::string input;
    const std::size_t n = rng() % 200;
    for (std::size_t k = 0; k < n; ++k) input += static_cast<char>(rng() & 0xFF);
    survive(input);
  }
  // Corrupted real modules reach deeper parser states than random bytes do.
  const std::string seed_text = qt::corpus_source("cloning.ll");
  for (int i = 0; i < kMutations; ++i) {
    std::string input = seed_text;
    for (int k = static_cast<int>(rng() % 6); k >= 0; --k) {
      input[rng() % input.size()] = static_cast<char>(rng() & 0xFF);
    }
    if (rng() % 4 == 0) input.resize(rng() % input.size());
    survive(input);
  }
  std::ostringstream why;
  why << kModules << " modules, " << rt_fail << " round-trip failures; " << kFuzz << " random-byte and "
      << kMutations << " mutated inputs, " << thrown << " exceptions";
  return {rt_fail == 0 && thrown == 0, why.str()};
}

Verdict determinism() {
  const auto files = qt::corpus_files();
  auto run = [&](bool json) {
    std::vector<std::string> args = files;
    if (json) {
      args.push_back("--format");
      args.push_back("json");
    }
    std::ostringstream out, err;
    const int code = qs::cli::run(args, out, err);
    return std::to_string(code) + "\n" + out.str() + err.str();
  };
  const std::string t1 = run(false), t2 = run(false), j1 = run(true), j2 = run(true);
  std::ostringstream why;
  why << files.size() << " files, text " << t1.size() << " bytes, json " << j1.size() << " bytes";
  return {t1 == t2 && j1 == j2 && !files.empty(), why.str()};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"dead-qubit case", dead_qubit},
      {"cloning case", cloning},
      {"sample program is clean", sample},
      {"oracle equivalence", oracle_equivalence},
      {"ledger properties", ledger_properties},
      {"soundness and precision", soundness_precision},
      {"parser round trip and fuzz", round_trip_and_fuzz},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failed += !v.ok;
    std::cout << (v.ok ? "PASS" : "FAIL") << ' ' << i + 1 << ' ' << criteria[i].first << ": " << v.detail
              << std::endl;
  }
  return failed;
}
