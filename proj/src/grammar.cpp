#include "fntag/grammar.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <sstream>

#include "fntag/corpus.hpp"
#include "fntag/error.hpp"
#include "fntag/text.hpp"

namespace fntag {

namespace {

constexpr std::string_view kArrow = "->";
constexpr std::string_view kUnicodeArrow = "\xE2\x86\x92";  // →

struct RawRule {
  std::string lhs;
  std::vector<std::vector<std::string>> alternatives;
  bool extension = false;
  std::size_t line = 0;
};

}  // namespace

class GrammarBuilder {
 public:
  static Grammar build(const std::vector<RawRule>& rules, std::vector<std::string>* warnings) {
    Grammar g;
    std::set<std::string> lhs_names;
    for (const auto& r : rules) lhs_names.insert(r.lhs);

    auto intern = [&](const std::string& name, bool terminal) {
      auto it = g.ids_.find(name);
      if (it != g.ids_.end()) return it->second;
      const SymbolId id = g.names_.size();
      g.names_.push_back(name);
      g.terminal_.push_back(terminal);
      g.ids_.emplace(name, id);
      return id;
    };

    for (const auto& r : rules) intern(r.lhs, false);
    g.start_ = 0;

    for (const auto& r : rules) {
      const SymbolId lhs = g.ids_.at(r.lhs);
      for (const auto& alt : r.alternatives) {
        Production p;
        p.lhs = lhs;
        p.extension = r.extension;
        if (alt.size() == 1 && alt[0] == r.lhs) {
          // "X -> X": bare X where the phrase X is expected.
          const std::string bare = bare_terminal_name(r.lhs);
          if (lhs_names.count(bare)) {
            throw ParseError("bare terminal '" + bare + "' collides with a nonterminal",
                             ParseError::npos, r.line);
          }
          p.rhs.push_back(intern(bare, true));
        } else {
          for (const auto& sym : alt) p.rhs.push_back(intern(sym, lhs_names.count(sym) == 0));
        }
        const bool duplicate = std::any_of(g.productions_.begin(), g.productions_.end(),
                                           [&](const Production& q) {
                                             return q.lhs == p.lhs && q.rhs == p.rhs;
                                           });
        if (duplicate) {
          if (warnings) {
            warnings->push_back("line " + std::to_string(r.line) + ": duplicate rule dropped");
          }
          continue;
        }
        g.productions_.push_back(std::move(p));
      }
    }
    g.by_lhs_.assign(g.names_.size(), {});
    for (std::size_t i = 0; i < g.productions_.size(); ++i) {
      g.by_lhs_[g.productions_[i].lhs].push_back(i);
    }
    return g;
  }
};

std::optional<SymbolId> Grammar::find(std::string_view name) const {
  auto it = ids_.find(name);
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

std::set<std::string> Grammar::nonterminals() const {
  std::set<std::string> out;
  for (SymbolId i = 0; i < names_.size(); ++i) {
    if (!terminal_[i]) out.insert(names_[i]);
  }
  return out;
}

std::set<std::string> Grammar::terminals() const {
  std::set<std::string> out;
  for (SymbolId i = 0; i < names_.size(); ++i) {
    if (terminal_[i]) out.insert(names_[i]);
  }
  return out;
}

bool Grammar::is_preterminal(SymbolId id) const {
  if (terminal_[id] || by_lhs_[id].empty()) return false;
  return std::all_of(by_lhs_[id].begin(), by_lhs_[id].end(), [&](std::size_t p) {
    const auto& rhs = productions_[p].rhs;
    return rhs.size() == 1 && terminal_[rhs[0]];
  });
}

std::string Grammar::production_text(std::size_t index, std::string_view arrow) const {
  const Production& p = productions_[index];
  std::string out = names_[p.lhs];
  out += arrow;
  if (p.rhs.empty()) out += kEpsilon;
  for (std::size_t i = 0; i < p.rhs.size(); ++i) {
    if (i) out += ' ';
    out += names_[p.rhs[i]];
  }
  return out;
}

bool operator==(const Grammar& a, const Grammar& b) {
  if (a.productions_.size() != b.productions_.size()) return false;
  if (a.names_.empty() || b.names_.empty()) return a.names_.empty() && b.names_.empty();
  if (a.name(a.start_) != b.name(b.start_)) return false;
  if (a.nonterminals() != b.nonterminals() || a.terminals() != b.terminals()) return false;
  for (std::size_t i = 0; i < a.productions_.size(); ++i) {
    const auto& p = a.productions_[i];
    const auto& q = b.productions_[i];
    if (a.name(p.lhs) != b.name(q.lhs) || p.rhs.size() != q.rhs.size() ||
        p.extension != q.extension) {
      return false;
    }
    for (std::size_t k = 0; k < p.rhs.size(); ++k) {
      if (a.name(p.rhs[k]) != b.name(q.rhs[k])) return false;
    }
  }
  return true;
}

std::string bare_terminal_name(std::string_view nonterminal) {
  std::string out;
  for (char c : nonterminal) out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out + "-bare";
}

Grammar parse_grammar_text(std::string_view source, const GrammarOptions& options,
                           std::vector<std::string>* warnings) {
  std::vector<RawRule> rules;
  std::size_t line_no = 0;
  std::size_t line_start = 0;
  for (std::string_view line : text::split(source, '\n')) {
    ++line_no;
    const std::size_t this_start = line_start;
    line_start += line.size() + 1;

    bool extension = false;
    if (auto c = line.find("//"); c != std::string_view::npos) {
      extension = text::starts_with(text::trim(line.substr(c + 2)), "EXT");
      line = line.substr(0, c);
    }
    if (text::trim(line).empty()) continue;
    if (extension && !options.include_extensions) continue;

    std::size_t arrow = line.find(kArrow);
    std::size_t arrow_len = kArrow.size();
    if (arrow == std::string_view::npos) {
      arrow = line.find(kUnicodeArrow);
      arrow_len = kUnicodeArrow.size();
    }
    if (arrow == std::string_view::npos) {
      throw ParseError("missing '->'", this_start, line_no);
    }
    auto lhs = text::split_whitespace(line.substr(0, arrow));
    if (lhs.empty()) throw ParseError("empty left-hand side", this_start, line_no);
    if (lhs.size() > 1) throw ParseError("left-hand side must be one symbol", this_start, line_no);

    RawRule rule;
    rule.lhs = lhs[0];
    rule.extension = extension;
    rule.line = line_no;
    for (std::string_view alt : text::split(line.substr(arrow + arrow_len), '|')) {
      auto symbols = text::split_whitespace(alt);
      if (symbols.empty()) {
        throw ParseError("empty alternative (write " + std::string(kEpsilon) + " for epsilon)",
                         this_start + arrow, line_no);
      }
      if (symbols.size() == 1 && symbols[0] == kEpsilon) {
        symbols.clear();
      } else if (std::find(symbols.begin(), symbols.end(), std::string(kEpsilon)) != symbols.end()) {
        throw ParseError("epsilon must stand alone in an alternative", this_start + arrow, line_no);
      }
      rule.alternatives.push_back(std::move(symbols));
    }
    rules.push_back(std::move(rule));
  }
  if (rules.empty()) throw ParseError("grammar has no rules");
  return GrammarBuilder::build(rules, warnings);
}

std::string serialize_grammar(const Grammar& g) {
  std::string out;
  for (std::size_t i = 0; i < g.productions().size(); ++i) {
    const Production& p = g.productions()[i];
    out += g.name(p.lhs);
    out += " -> ";
    if (p.rhs.empty()) {
      out += kEpsilon;
    } else if (p.rhs.size() == 1 && g.name(p.rhs[0]) == bare_terminal_name(g.name(p.lhs))) {
      out += g.name(p.lhs);
    } else {
      for (std::size_t k = 0; k < p.rhs.size(); ++k) {
        if (k) out += ' ';
        out += g.name(p.rhs[k]);
      }
    }
    if (p.extension) out += "  // EXT";
    out += '\n';
  }
  return out;
}

Grammar default_grammar(bool include_extensions) {
  return parse_grammar_text(default_grammar_text(), GrammarOptions{include_extensions});
}

std::vector<bool> reachable_symbols(const Grammar& g) {
  std::vector<bool> seen(g.symbol_count(), false);
  if (g.symbol_count() == 0) return seen;
  std::vector<SymbolId> stack{g.start()};
  seen[g.start()] = true;
  while (!stack.empty()) {
    const SymbolId a = stack.back();
    stack.pop_back();
    for (std::size_t p : g.productions_for(a)) {
      for (SymbolId s : g.productions()[p].rhs) {
        if (!seen[s]) {
          seen[s] = true;
          stack.push_back(s);
        }
      }
    }
  }
  return seen;
}

std::vector<bool> productive_symbols(const Grammar& g) {
  std::vector<bool> ok(g.symbol_count(), false);
  for (SymbolId s = 0; s < g.symbol_count(); ++s) ok[s] = g.is_terminal(s);
  for (bool changed = true; changed;) {
    changed = false;
    for (const Production& p : g.productions()) {
      if (ok[p.lhs]) continue;
      if (std::all_of(p.rhs.begin(), p.rhs.end(), [&](SymbolId s) { return ok[s]; })) {
        ok[p.lhs] = true;
        changed = true;
      }
    }
  }
  return ok;
}

std::vector<bool> nullable_symbols(const Grammar& g) {
  std::vector<bool> ok(g.symbol_count(), false);
  for (bool changed = true; changed;) {
    changed = false;
    for (const Production& p : g.productions()) {
      if (ok[p.lhs]) continue;
      if (std::all_of(p.rhs.begin(), p.rhs.end(), [&](SymbolId s) { return ok[s]; })) {
        ok[p.lhs] = true;
        changed = true;
      }
    }
  }
  return ok;
}

namespace {

// Cycle search over nonterminal edges A -> B (B on a right-hand side of A),
// restricted to the symbols where `include` is set.
bool has_cycle(const Grammar& g, const std::vector<bool>& include) {
  enum Mark : char { white, grey, black };
  std::vector<Mark> mark(g.symbol_count(), white);
  std::function<bool(SymbolId)> visit = [&](SymbolId a) {
    mark[a] = grey;
    for (std::size_t p : g.productions_for(a)) {
      const auto& rhs = g.productions()[p].rhs;
      if (!std::all_of(rhs.begin(), rhs.end(), [&](SymbolId s) { return include[s] || g.is_terminal(s); })) {
        continue;
      }
      for (SymbolId b : rhs) {
        if (g.is_terminal(b) || !include[b]) continue;
        if (mark[b] == grey) return true;
        if (mark[b] == white && visit(b)) return true;
      }
    }
    mark[a] = black;
    return false;
  };
  for (SymbolId s = 0; s < g.symbol_count(); ++s) {
    if (!g.is_terminal(s) && include[s] && mark[s] == white && visit(s)) return true;
  }
  return false;
}

}  // namespace

GrammarReport validate(const Grammar& g) {
  GrammarReport report;
  const auto reach = reachable_symbols(g);
  const auto productive = productive_symbols(g);
  for (SymbolId s = 0; s < g.symbol_count(); ++s) {
    if (g.is_terminal(s)) continue;
    if (!reach[s]) report.unreachable_nonterminals.insert(g.name(s));
    if (!productive[s]) report.unproductive_nonterminals.insert(g.name(s));
  }
  for (const Production& p : g.productions()) {
    for (SymbolId s : p.rhs) {
      if (s >= g.symbol_count()) report.undefined_symbols.insert("#" + std::to_string(s));
    }
  }
  std::vector<bool> everything(g.symbol_count(), true);
  report.recursive = has_cycle(g, everything);
  std::vector<bool> useful(g.symbol_count());
  for (SymbolId s = 0; s < g.symbol_count(); ++s) useful[s] = reach[s] && productive[s];
  report.language_finite = !has_cycle(g, useful);
  return report;
}

std::string render_grammar_report(const Grammar& g, const GrammarReport& report) {
  std::ostringstream out;
  auto list = [&](const char* label, const std::set<std::string>& items) {
    out << label << ": ";
    if (items.empty()) out << "none";
    bool first = true;
    for (const auto& s : items) {
      if (!first) out << ", ";
      out << s;
      first = false;
    }
    out << '\n';
  };
  out << "start: " << (g.symbol_count() ? g.name(g.start()) : "") << '\n';
  out << "nonterminals: " << g.nonterminals().size() << '\n';
  out << "terminals: " << g.terminals().size() << '\n';
  out << "productions: " << g.productions().size() << '\n';
  list("undefined_symbols", report.undefined_symbols);
  list("unreachable_nonterminals", report.unreachable_nonterminals);
  list("unproductive_nonterminals", report.unproductive_nonterminals);
  out << "recursive=" << (report.recursive ? "true" : "false") << '\n';
  out << "language_finite=" << (report.language_finite ? "true" : "false") << '\n';
  return out.str();
}

std::vector<std::string> tags_to_terminals(const Grammar& g, std::span<const std::string> tags) {
  std::vector<std::string> out;
  for (const auto& tag : tags) {
    if (tag == kNullTag) continue;
    if (tag == "Active") {
      out.emplace_back("Verb");
      continue;
    }
    const std::string bare = bare_terminal_name(tag);
    if (auto id = g.find(bare); id && g.is_terminal(*id)) {
      out.push_back(bare);
    } else {
      out.push_back(tag);
    }
  }
  return out;
}

}  // namespace fntag
