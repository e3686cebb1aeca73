#pragma once

#include <algorithm>
#include <filesystem>
#include <string>
#include <vector>

#include "qir_sentinel/cli.hpp"
#include "qir_sentinel/parser.hpp"

#ifndef QIR_SENTINEL_CORPUS_DIR
#error "QIR_SENTINEL_CORPUS_DIR must point at the corpus directory"
#endif

namespace qir_sentinel::testing {

inline std::string corpus_path(const std::string& name) {
  return std::string(QIR_SENTINEL_CORPUS_DIR) + "/" + name;
}

inline std::string corpus_source(const std::string& name) {
  std::string text;
  if (!cli::read_file(corpus_path(name), text)) throw std::runtime_error("cannot read " + name);
  return text;
}

inline QirModule corpus_module(const std::string& name) {
  auto r = parse_module(corpus_source(name), name);
  if (!r.ok()) throw std::runtime_error(name + " does not parse: " + r.errors.front().message);
  return std::move(*r.module);
}

/// Every .ll file of the corpus, sorted by path.
inline std::vector<std::string> corpus_files() {
  std::vector<std::string> out;
  for (const auto& e : std::filesystem::directory_iterator(QIR_SENTINEL_CORPUS_DIR)) {
    if (e.is_regular_file() && e.path().extension() == ".ll") out.push_back(e.path().string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace qir_sentinel::testing
