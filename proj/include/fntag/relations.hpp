#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fntag/corpus.hpp"
#include "fntag/grammar.hpp"
#include "fntag/model.hpp"
#include "fntag/tagger.hpp"

namespace fntag {

struct ParseTree {
  std::string label;
  bool terminal = false;
  // Words of the chunk a terminal leaf came from; empty for bare parses.
  std::string surface;
  std::vector<ParseTree> children;

  // Terminal labels, left to right.
  std::vector<std::string> leaves() const;

  friend bool operator==(const ParseTree&, const ParseTree&) = default;
};

struct Recognition {
  bool accepted = false;
  // Input symbols that are not terminals of the grammar.
  std::vector<std::string> unknown_terminals;
  // Length of the longest input prefix that is also a prefix of some sentence
  // of the language.
  std::size_t viable_prefix = 0;
};

// Earley recognizer; handles empty rules, unit cycles and left recursion.
Recognition recognize_detail(const Grammar& grammar, std::span<const std::string> terminals);
bool recognize(const Grammar& grammar, std::span<const std::string> terminals);

// Recognizes many inputs concurrently; result order matches input order.
std::vector<bool> recognize_batch(const Grammar& grammar,
                                  std::span<const std::vector<std::string>> inputs, int threads = 0);
std::vector<bool> recognize_batch_serial(const Grammar& grammar,
                                         std::span<const std::vector<std::string>> inputs);

struct ParseForest {
  // Distinct trees, preferred first: earlier productions before later ones at
  // every node, and for each production longer leftmost children first.
  std::vector<ParseTree> trees;
  // More trees exist than the cap allowed.
  bool truncated = false;
};

inline constexpr std::size_t kDefaultTreeCap = 64;

// Trees never repeat a (symbol, span) pair along a root-to-leaf path, so the
// forest is finite even for cyclic grammars.
ParseForest parse_all(const Grammar& grammar, std::span<const std::string> terminals,
                      std::size_t cap = kDefaultTreeCap);

struct DerivationStep {
  // Sentential form after this step.
  std::vector<std::string> form;
  // Production applied; empty for the initial "start" step.
  std::optional<std::size_t> production;
  // Preterminal children expanded in the same step: (rhs position, production).
  std::vector<std::pair<std::size_t, std::size_t>> folded;
  // e.g. "Sentence → I-sent CCS I-sent", or "start".
  std::string rule;
};

struct DerivationTrace {
  std::vector<DerivationStep> steps;
};

struct DeriveOptions {
  // Show a preterminal (such as CC -> CCS) already expanded inside the step
  // that introduced it instead of as a step of its own.
  bool fold_preterminals = true;
};

// Sentence not in the language.
class RejectionError : public std::runtime_error {
 public:
  RejectionError(std::vector<std::string> terminals, Recognition recognition);

  const std::vector<std::string>& terminals() const { return terminals_; }
  const Recognition& recognition() const { return recognition_; }

 private:
  std::vector<std::string> terminals_;
  Recognition recognition_;
};

std::string describe_rejection(std::span<const std::string> terminals, const Recognition& r);

// Leftmost derivation of a tree, one step per internal node in preorder.
DerivationTrace linearize(const Grammar& grammar, const ParseTree& tree,
                          const DeriveOptions& options = {});
// Leftmost derivation of the preferred tree. Throws RejectionError.
DerivationTrace derive(const Grammar& grammar, std::span<const std::string> terminals,
                       const DeriveOptions& options = {});
// Rebuilds the tree a trace describes; throws std::invalid_argument if a step
// does not rewrite the leftmost nonterminal.
ParseTree replay(const Grammar& grammar, const DerivationTrace& trace);

// "1. Sentence  [start]" then "N. >> FORM  [RULE]" per step.
std::string render_trace(const DerivationTrace& trace);

enum class TreeStyle { bracketed, indented };

// Bracketed: internal node "(A c1 c2)", terminal with surface "(T words)",
// bare terminal "T", empty-rule node "(A)". Indented: one node per line,
// two spaces per level.
std::string render_tree(const ParseTree& tree, TreeStyle style = TreeStyle::bracketed);

// Reads the bracketed form back; the grammar tells terminals from nonterminals.
ParseTree read_tree(std::string_view text, const Grammar& grammar);

struct Rejection {
  std::string stage;
  std::vector<std::string> terminals;
  std::string message;
  Recognition recognition;
};

struct PipelineResult {
  TagSequence tags;
  std::vector<std::string> terminals;
  std::optional<ParseTree> tree;
  std::optional<Rejection> rejection;
};

// Tag, map tags to terminals, parse, and attach chunk words to the leaves.
// Stage failures throw StageError; an unparseable tag sequence is returned as
// a rejection.
PipelineResult pipeline(const Model& model, const Grammar& grammar,
                        const AnnotatedSentence& sentence, const TaggerOptions& options = {});

}  // namespace fntag
