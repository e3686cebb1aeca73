#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include <nlohmann/json.hpp>

#include "qir_sentinel/cli.hpp"
#include "support/fixtures.hpp"
#include "support/trace_gen.hpp"

namespace qs = qir_sentinel;
namespace fs = std::filesystem;
using qs::testing::corpus_path;

namespace {

struct Invocation {
  int code = -1;
  std::string out;
  std::string err;
};

Invocation run(std::vector<std::string> args) {
  std::ostringstream out, err;
  Invocation r;
  r.code = qs::cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = fs::temp_directory_path() / ("qir-sentinel-test-" + std::to_string(rd()));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  std::string write(const std::string& name, const std::string& text) const {
    const auto p = path_ / name;
    std::ofstream(p, std::ios::binary) << text;
    return p.string();
  }
  std::string str() const { return path_.string(); }

 private:
  fs::path path_;
};

}  // namespace

TEST(Cli, CleanFileExitsZero) {
  const auto r = run({corpus_path("sample.ll")});
  EXPECT_EQ(r.code, qs::cli::kExitClean);
  EXPECT_NE(r.out.find("no issues found"), std::string::npos);
}

TEST(Cli, FindingsExitOne) {
  const auto r = run({corpus_path("deadqubit.ll")});
  EXPECT_EQ(r.code, qs::cli::kExitFindings);
  EXPECT_NE(r.out.find("error[UseAfterReleaseQubit]"), std::string::npos);
}

TEST(Cli, MissingFileExitsTwo) {
  const auto r = run({"/nonexistent/file.ll"});
  EXPECT_EQ(r.code, qs::cli::kExitFailure);
  EXPECT_NE(r.err.find("cannot read /nonexistent/file.ll"), std::string::npos);
}

TEST(Cli, UnknownFlagExitsTwo) {
  const auto r = run({"--bogus", corpus_path("sample.ll")});
  EXPECT_EQ(r.code, qs::cli::kExitFailure);
  EXPECT_FALSE(r.err.empty());
}

TEST(Cli, NoInputExitsTwo) { EXPECT_EQ(run({}).code, qs::cli::kExitFailure); }

TEST(Cli, FailureOutranksFindings) {
  EXPECT_EQ(run({corpus_path("deadqubit.ll"), "/nonexistent.ll"}).code, qs::cli::kExitFailure);
  EXPECT_EQ(qs::cli::combine_exit(1, 0), 1);
  EXPECT_EQ(qs::cli::combine_exit(2, 1), 2);
}

TEST(Cli, ParseErrorsGoToStderr) {
  TempDir dir;
  const auto bad = dir.write("bad.ll", "define void @f() {\nentry:\n  ret\n}\n");
  const auto r = run({bad});
  EXPECT_EQ(r.code, qs::cli::kExitFailure);
  EXPECT_TRUE(r.out.empty());
  EXPECT_NE(r.err.find("bad.ll:4:1: parse error"), std::string::npos);
}

TEST(Cli, StructuralErrorsExitTwo) {
  TempDir dir;
  const auto bad = dir.write("bad.ll", "define void @f() {\nentry:\n  br label %nowhere\n}\n");
  const auto r = run({bad});
  EXPECT_EQ(r.code, qs::cli::kExitFailure);
  EXPECT_NE(r.err.find("DanglingLabel"), std::string::npos);
}

TEST(Cli, JsonOutputParses) {
  const auto r = run({"--format", "json", corpus_path("cloning.ll")});
  EXPECT_EQ(r.code, qs::cli::kExitFindings);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j.at("summary").at("errors"), 2);
  EXPECT_EQ(run({"--format", "yaml", corpus_path("cloning.ll")}).code, qs::cli::kExitFailure);
}

TEST(Cli, OutputFollowsArgumentOrder) {
  const auto a = run({corpus_path("sample.ll"), corpus_path("cloning.ll")});
  const auto b = run({corpus_path("cloning.ll"), corpus_path("sample.ll")});
  EXPECT_LT(a.out.find("sample.ll"), a.out.find("cloning.ll"));
  EXPECT_LT(b.out.find("cloning.ll"), b.out.find("sample.ll"));
}

TEST(Cli, Version) {
  const auto r = run({"--version"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, std::string("qir-sentinel ") + qs::kToolVersion + "\n");
}

TEST(Cli, EntrySelection) {
  EXPECT_EQ(run({"--entry", "Microsoft__Quantum__Intrinsic__CCNOT__body", corpus_path("cloning.ll")}).code, 0);
  const auto r = run({"--entry", "missing", corpus_path("cloning.ll")});
  EXPECT_EQ(r.code, qs::cli::kExitFailure);
  EXPECT_NE(r.err.find("@missing"), std::string::npos);
}

TEST(Cli, FailFastFlag) {
  TempDir dir;
  const auto f = dir.write("two.ll",
                           "define void @main() {\nentry:\n"
                           "  %q = call %Qubit* @__quantum__rt__qubit_allocate()\n"
                           "  call void @__quantum__rt__qubit_release(%Qubit* %q)\n"
                           "  call void @__quantum__qis__h__body(%Qubit* %q)\n"
                           "  call void @__quantum__rt__qubit_release(%Qubit* %q)\n"
                           "  ret void\n}\n%Qubit = type opaque\n"
                           "declare %Qubit* @__quantum__rt__qubit_allocate()\n"
                           "declare void @__quantum__rt__qubit_release(%Qubit*)\n"
                           "declare void @__quantum__qis__h__body(%Qubit*)\n");
  auto errors = [](const Invocation& r) { return nlohmann::json::parse(r.out).at("summary").at("errors").get<int>(); };
  EXPECT_EQ(errors(run({"--format", "json", f})), 2);
  EXPECT_EQ(errors(run({"--format", "json", "--fail-fast", f})), 1);
}

TEST(Cli, GateTableFile) {
  TempDir dir;
  const auto f = dir.write("sx.ll",
                           "define void @main() {\nentry:\n"
                           "  %q = call %Qubit* @__quantum__rt__qubit_allocate()\n"
                           "  call void @__quantum__qis__sx__body(%Qubit* %q)\n"
                           "  ret void\n}\n%Qubit = type opaque\n"
                           "declare %Qubit* @__quantum__rt__qubit_allocate()\n"
                           "declare void @__quantum__qis__sx__body(%Qubit*)\n");
  const auto notes = [](const Invocation& r) { return nlohmann::json::parse(r.out).at("summary").at("notes").get<int>(); };
  EXPECT_EQ(notes(run({"--format", "json", f})), 1);
  const auto gates = dir.write("gates.txt", "# extra\nsx\nswap:ctl\n");
  EXPECT_EQ(notes(run({"--format", "json", "--gates", gates, f})), 0);
  const auto broken = dir.write("broken.txt", "sx\nbad name\n");
  const auto r = run({"--gates", broken, f});
  EXPECT_EQ(r.code, qs::cli::kExitFailure);
  EXPECT_NE(r.err.find("broken.txt:2:"), std::string::npos);
}

TEST(Cli, ExitCodePolicyOnGeneratedInputs) {
  TempDir dir;
  using V = qs::testing::SafeBuilder::Violation;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    qs::testing::SafeBuilder b(seed);
    const auto clean = dir.write("clean.ll", qs::testing::emit_program(b.safe(12)).text);
    const auto dirty = dir.write("dirty.ll", qs::testing::emit_program(b.unsafe(seed % 2 ? V::Cloning : V::UseAfterRelease, 4, 3)).text);
    std::string text = qs::testing::emit_program(b.safe(6)).text;
    text.replace(text.find("ret void"), 8, "ret");
    const auto broken = dir.write("broken.ll", text);
    ASSERT_EQ(run({clean}).code, 0) << seed;
    ASSERT_EQ(run({dirty}).code, 1) << seed;
    ASSERT_EQ(run({broken}).code, 2) << seed;
    ASSERT_EQ(run({clean, dirty}).code, 1) << seed;
    ASSERT_EQ(run({broken, dirty, clean}).code, 2) << seed;
  }
}

TEST(GateTable, Parsing) {
  const auto t = std::get<qs::GateTable>(qs::parse_gate_table("sx\n  swap:ctl  # comment\n\n"));
  EXPECT_TRUE(t.single.count("sx"));
  EXPECT_FALSE(t.controlled.count("sx"));
  EXPECT_TRUE(t.controlled.count("swap"));
  EXPECT_FALSE(t.single.count("swap"));
  EXPECT_TRUE(t.single.count("h"));
  EXPECT_EQ(std::get<qs::GateTableError>(qs::parse_gate_table("x:adj\n")).line, 1u);
}

TEST(Corpus, RepositoryFixturesMatch) {
  const auto r = run({"--corpus", QIR_SENTINEL_CORPUS_DIR, "--expectations",
                      corpus_path("expectations.json")});
  EXPECT_EQ(r.code, 0) << r.out << r.err;
  EXPECT_EQ(r.out.find("FAIL"), std::string::npos) << r.out;
}

TEST(Corpus, EmptyDirectoryWarns) {
  TempDir dir;
  const auto ex = dir.write("ex.json", R"({"fixtures": {}})");
  const auto r = run({"--corpus", dir.str(), "--expectations", ex});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.err.find("warning: no .ll fixtures"), std::string::npos);
}

TEST(Corpus, WrongExpectationExitsOne) {
  TempDir dir;
  fs::copy_file(corpus_path("deadqubit.ll"), fs::path(dir.str()) / "deadqubit.ll");
  const auto right = dir.write("right.json", R"({"fixtures": {"deadqubit.ll": [{"kind": "UseAfterReleaseQubit", "line": 4}]}})");
  EXPECT_EQ(run({"--corpus", dir.str(), "--expectations", right}).code, 0);
  const auto wrong = dir.write("wrong.json", R"({"fixtures": {"deadqubit.ll": [{"kind": "UseAfterReleaseQubit", "line": 5}]}})");
  const auto r = run({"--corpus", dir.str(), "--expectations", wrong});
  EXPECT_EQ(r.code, qs::cli::kExitFindings);
  EXPECT_NE(r.out.find("FAIL deadqubit.ll: expected [UseAfterReleaseQubit@5] got [UseAfterReleaseQubit@4]"),
            std::string::npos)
      << r.out;
  const auto missing = dir.write("missing.json", R"({"fixtures": {"deadqubit.ll": [{"kind": "UseAfterReleaseQubit", "line": 4}], "gone.ll": []}})");
  EXPECT_EQ(run({"--corpus", dir.str(), "--expectations", missing}).code, qs::cli::kExitFindings);
}

TEST(Corpus, MalformedExpectationsExitTwo) {
  TempDir dir;
  dir.write("a.ll", "");
  const auto bad = dir.write("bad.json", "{not json");
  EXPECT_EQ(run({"--corpus", dir.str(), "--expectations", bad}).code, qs::cli::kExitFailure);
  const auto unknown = dir.write("unknown.json", R"({"fixtures": {"a.ll": [{"kind": "Nope", "line": 1}]}})");
  EXPECT_EQ(run({"--corpus", dir.str(), "--expectations", unknown}).code, qs::cli::kExitFailure);
  EXPECT_EQ(run({"--corpus", dir.str()}).code, qs::cli::kExitFailure);  // needs --expectations
}

TEST(Corpus, FindingsOfBrokenFiles) {
  TempDir dir;
  const auto bad = dir.write("bad.ll", "define void @f( {\n");
  const auto fa = qs::cli::analyze_file(bad, {}, qs::GateTable::builtin());
  const auto fs = qs::cli::findings_of(fa);
  ASSERT_FALSE(fs.empty());
  EXPECT_EQ(fs[0].kind, "ParseError");
  EXPECT_EQ(qs::cli::findings_of(qs::cli::analyze_file("/nonexistent.ll", {}, qs::GateTable::builtin())),
            std::vector<qs::cli::Finding>{(qs::cli::Finding{"IOError", 0})});
}
