#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fntag/model.hpp"
#include "fntag/relations.hpp"
#include "fntag/tagger.hpp"

namespace fntag {

enum class Command { train, tag, parse, derive, eval, validate_grammar };

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

struct RunConfig {
  Command command = Command::tag;
  // Input files; standard input when empty.
  std::vector<std::string> inputs;
  std::string model_stem;
  // Built-in grammar when empty.
  std::string grammar_path;
  bool no_extensions = false;
  TaggerOptions tagger;
  double alpha = 0.0;
  bool begin_of_sentence = false;
  bool strict = false;
  TreeStyle tree_style = TreeStyle::bracketed;
  std::uint64_t seed = 1;
  // eval: report sentences with seen and unseen feature patterns separately.
  bool group_novel = false;
  // eval: train on this share of the corpus and test on the rest.
  std::optional<double> split;
  // eval without --split: corpus the model was trained on, for --group-novel.
  std::string train_corpus;
  // parse/derive: input lines are tag sequences rather than corpus lines.
  bool tags_input = false;
  ProbabilityFormat precision = ProbabilityFormat::full;
  bool kv = false;
  int threads = 0;
};

// Executes one command. Diagnostics go to err as "FILE:LINE: STAGE: message".
int run(const RunConfig& config, std::istream& in, std::ostream& out, std::ostream& err);

// Fills config from argv. Returns an exit status when the process should stop
// right away (help output or a usage error).
std::optional<int> parse_command_line(int argc, const char* const* argv, RunConfig& config,
                                      std::ostream& out, std::ostream& err);

}  // namespace fntag
