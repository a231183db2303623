#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fntag/corpus.hpp"
#include "fntag/text.hpp"

namespace fntag::testing {

inline std::string data_path(const std::string& name) { return std::string(FNTAG_DATA_DIR) + "/" + name; }

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// First line of a data file, without the newline.
inline std::string first_line(const std::string& name) {
  std::string s = read_text(data_path(name));
  return s.substr(0, s.find('\n'));
}

// Non-comment lines of the fixture corpus, as written.
inline std::vector<std::string> fixture_lines() {
  std::istringstream in(read_text(data_path("examples.corpus")));
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && !text::starts_with(line, "//")) out.push_back(line);
  }
  return out;
}

inline Corpus fixture_corpus() { return load_corpus(data_path("examples.corpus")); }

}  // namespace fntag::testing
