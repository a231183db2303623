#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fntag {

using SymbolId = std::size_t;

struct Production {
  SymbolId lhs = 0;
  std::vector<SymbolId> rhs;  // empty for an epsilon production
  bool extension = false;     // came from a line marked "// EXT"
};

// Context-free grammar <N, Σ, P, S>. Symbols are interned; productions keep
// their source order, which is the parse preference order.
class Grammar {
 public:
  std::size_t symbol_count() const { return names_.size(); }
  const std::string& name(SymbolId id) const { return names_[id]; }
  bool is_terminal(SymbolId id) const { return terminal_[id]; }
  std::optional<SymbolId> find(std::string_view name) const;

  SymbolId start() const { return start_; }
  const std::vector<Production>& productions() const { return productions_; }
  // Indices into productions(), in source order.
  const std::vector<std::size_t>& productions_for(SymbolId lhs) const { return by_lhs_[lhs]; }

  std::set<std::string> nonterminals() const;
  std::set<std::string> terminals() const;

  // Nonterminals all of whose productions are a single terminal (e.g. CC).
  bool is_preterminal(SymbolId id) const;

  std::string production_text(std::size_t index, std::string_view arrow = " -> ") const;

  // Same start symbol, symbol sets and production list (by name, in order).
  friend bool operator==(const Grammar& a, const Grammar& b);

 private:
  friend class GrammarBuilder;

  std::vector<std::string> names_;
  std::vector<bool> terminal_;
  std::map<std::string, SymbolId, std::less<>> ids_;
  std::vector<Production> productions_;
  std::vector<std::vector<std::size_t>> by_lhs_;
  SymbolId start_ = 0;
};

struct GrammarOptions {
  bool include_extensions = true;
};

// Epsilon marker for an empty alternative.
inline constexpr std::string_view kEpsilon = "\xCE\xB5";  // ε

// Terminal standing in for a bare X tag when the grammar contains "X -> X".
std::string bare_terminal_name(std::string_view nonterminal);

// Parses "LHS -> ALT1 | ALT2 ..." lines. "//" starts a comment; a rule line
// whose comment begins with "EXT" is an extension rule. An exact duplicate of
// an earlier production is dropped with a warning. Throws ParseError.
Grammar parse_grammar_text(std::string_view text, const GrammarOptions& options = {},
                           std::vector<std::string>* warnings = nullptr);

// One production per line; re-parses to an equal grammar.
std::string serialize_grammar(const Grammar& grammar);

// Built-in Myanmar function-tag grammar (identical to data/myanmar.grammar).
const std::string& default_grammar_text();
Grammar default_grammar(bool include_extensions = true);

struct GrammarReport {
  std::set<std::string> undefined_symbols;
  std::set<std::string> unreachable_nonterminals;
  std::set<std::string> unproductive_nonterminals;
  // Some nonterminal can reach itself in the dependency graph.
  bool recursive = false;
  // No recursion among the useful (reachable and productive) nonterminals.
  bool language_finite = true;
};

GrammarReport validate(const Grammar& grammar);
std::string render_grammar_report(const Grammar& grammar, const GrammarReport& report);

// Nonterminals reachable from the start / able to derive a terminal string.
std::vector<bool> reachable_symbols(const Grammar& grammar);
std::vector<bool> productive_symbols(const Grammar& grammar);
std::vector<bool> nullable_symbols(const Grammar& grammar);

// Maps function tags to grammar terminals: Active -> Verb, Null is dropped,
// X -> x-bare when the grammar admits a bare X, everything else unchanged.
std::vector<std::string> tags_to_terminals(const Grammar& grammar,
                                           std::span<const std::string> tags);

}  // namespace fntag
