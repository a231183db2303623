#include "fntag/relations.hpp"

#include <omp.h>

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>
#include <tuple>
#include <unordered_set>

#include "fntag/error.hpp"
#include "fntag/text.hpp"

namespace fntag {

namespace {

constexpr std::string_view kDisplayArrow = " \xE2\x86\x92 ";  // " → "

// Input symbols resolved against the grammar; unknown symbols become npos.
struct Input {
  std::vector<SymbolId> ids;
  std::vector<std::string> unknown;
};

constexpr SymbolId kUnknown = static_cast<SymbolId>(-1);

Input resolve(const Grammar& g, std::span<const std::string> terminals) {
  Input in;
  for (const auto& t : terminals) {
    auto id = g.find(t);
    if (id && g.is_terminal(*id)) {
      in.ids.push_back(*id);
    } else {
      in.ids.push_back(kUnknown);
      in.unknown.push_back(t);
    }
  }
  return in;
}

// Productions whose symbols are all productive; the others can never take
// part in a complete derivation.
std::vector<bool> usable_productions(const Grammar& g, const std::vector<bool>& productive) {
  std::vector<bool> usable(g.productions().size());
  for (std::size_t i = 0; i < usable.size(); ++i) {
    const auto& p = g.productions()[i];
    usable[i] = productive[p.lhs] &&
                std::all_of(p.rhs.begin(), p.rhs.end(), [&](SymbolId s) { return productive[s]; });
  }
  return usable;
}

// --- Earley recognizer -----------------------------------------------------

struct Item {
  std::uint32_t prod;
  std::uint32_t dot;
  std::uint32_t origin;
};

class EarleySet {
 public:
  bool add(const Item& item) {
    const std::uint64_t key = (static_cast<std::uint64_t>(item.prod) << 40) |
                              (static_cast<std::uint64_t>(item.dot) << 28) | item.origin;
    if (!seen_.insert(key).second) return false;
    items_.push_back(item);
    return true;
  }
  std::size_t size() const { return items_.size(); }
  const Item& operator[](std::size_t i) const { return items_[i]; }
  bool empty() const { return items_.empty(); }

 private:
  std::vector<Item> items_;
  std::unordered_set<std::uint64_t> seen_;
};

Recognition earley(const Grammar& g, const Input& in) {
  Recognition result;
  result.unknown_terminals = in.unknown;
  if (g.symbol_count() == 0) return result;

  const auto productive = productive_symbols(g);
  const auto usable = usable_productions(g, productive);
  const auto nullable = nullable_symbols(g);
  const auto& prods = g.productions();
  const std::size_t n = in.ids.size();

  std::vector<EarleySet> sets(n + 1);
  for (std::size_t p : g.productions_for(g.start())) {
    if (usable[p]) sets[0].add({static_cast<std::uint32_t>(p), 0, 0});
  }

  for (std::size_t k = 0; k <= n; ++k) {
    EarleySet& set = sets[k];
    for (std::size_t idx = 0; idx < set.size(); ++idx) {
      const Item item = set[idx];
      const Production& p = prods[item.prod];
      if (item.dot < p.rhs.size()) {
        const SymbolId next = p.rhs[item.dot];
        if (g.is_terminal(next)) {
          if (k < n && in.ids[k] == next) sets[k + 1].add({item.prod, item.dot + 1, item.origin});
          continue;
        }
        for (std::size_t q : g.productions_for(next)) {
          if (usable[q]) set.add({static_cast<std::uint32_t>(q), 0, static_cast<std::uint32_t>(k)});
        }
        if (nullable[next]) set.add({item.prod, item.dot + 1, item.origin});
      } else {
        const EarleySet& from = sets[item.origin];
        for (std::size_t j = 0; j < from.size(); ++j) {
          const Item parent = from[j];
          const Production& pp = prods[parent.prod];
          if (parent.dot < pp.rhs.size() && pp.rhs[parent.dot] == p.lhs) {
            set.add({parent.prod, parent.dot + 1, parent.origin});
          }
        }
      }
    }
  }

  for (std::size_t k = 0; k <= n; ++k) {
    if (!sets[k].empty()) result.viable_prefix = k;
  }
  if (sets[0].empty()) result.viable_prefix = 0;
  for (std::size_t i = 0; i < sets[n].size(); ++i) {
    const Item& item = sets[n][i];
    const Production& p = prods[item.prod];
    if (item.origin == 0 && p.lhs == g.start() && item.dot == p.rhs.size()) {
      result.accepted = in.unknown.empty();
      break;
    }
  }
  return result;
}

// --- Span chart and tree enumeration ----------------------------------------

class SpanChart {
 public:
  SpanChart(const Grammar& g, const Input& in)
      : g_(g), in_(in), n_(in.ids.size()), usable_(usable_productions(g, productive_symbols(g))) {
    table_.assign(g.symbol_count() * (n_ + 1) * (n_ + 1), 0);
    for (std::size_t len = 0; len <= n_; ++len) {
      for (std::size_t i = 0; i + len <= n_; ++i) {
        const std::size_t j = i + len;
        for (bool changed = true; changed;) {
          changed = false;
          for (std::size_t p = 0; p < g.productions().size(); ++p) {
            if (!usable_[p]) continue;
            const SymbolId lhs = g.productions()[p].lhs;
            if (at(lhs, i, j)) continue;
            if (sequence_derives(g.productions()[p].rhs, 0, i, j)) {
              at(lhs, i, j) = 1;
              changed = true;
            }
          }
        }
      }
    }
  }

  bool derives(SymbolId sym, std::size_t i, std::size_t j) const {
    if (g_.is_terminal(sym)) return j == i + 1 && i < n_ && in_.ids[i] == sym;
    return table_[index(sym, i, j)] != 0;
  }

  // rhs[from..] derives the span [i, j).
  bool sequence_derives(const std::vector<SymbolId>& rhs, std::size_t from, std::size_t i,
                        std::size_t j) const {
    std::vector<char> reach(n_ + 1, 0);
    reach[i] = 1;
    for (std::size_t m = from; m < rhs.size(); ++m) {
      std::vector<char> next(n_ + 1, 0);
      bool any = false;
      for (std::size_t s = i; s <= j; ++s) {
        if (!reach[s]) continue;
        for (std::size_t e = s; e <= j; ++e) {
          if (!next[e] && derives(rhs[m], s, e)) {
            next[e] = 1;
            any = true;
          }
        }
      }
      if (!any) return false;
      reach.swap(next);
    }
    return reach[j] != 0;
  }

  bool usable(std::size_t p) const { return usable_[p]; }
  std::size_t size() const { return n_; }

 private:
  std::size_t index(SymbolId sym, std::size_t i, std::size_t j) const {
    return (sym * (n_ + 1) + i) * (n_ + 1) + j;
  }
  char& at(SymbolId sym, std::size_t i, std::size_t j) { return table_[index(sym, i, j)]; }
  bool at(SymbolId sym, std::size_t i, std::size_t j) const { return table_[index(sym, i, j)]; }

  const Grammar& g_;
  const Input& in_;
  std::size_t n_;
  std::vector<bool> usable_;
  std::vector<char> table_;
};

class TreeEnumerator {
 public:
  TreeEnumerator(const Grammar& g, const Input& in, std::span<const std::string> names,
                 std::size_t limit)
      : g_(g), in_(in), names_(names), chart_(g, in), limit_(limit) {}

  std::vector<ParseTree> run() { return expand(g_.start(), 0, chart_.size()); }

 private:
  using Key = std::tuple<SymbolId, std::size_t, std::size_t>;

  std::vector<ParseTree> expand(SymbolId sym, std::size_t i, std::size_t j) {
    if (g_.is_terminal(sym)) {
      if (!chart_.derives(sym, i, j)) return {};
      ParseTree leaf;
      leaf.label = names_[i];
      leaf.terminal = true;
      return {leaf};
    }
    if (!chart_.derives(sym, i, j)) return {};
    const Key key{sym, i, j};
    if (std::find(guard_.begin(), guard_.end(), key) != guard_.end()) return {};

    // Results depend only on the ancestors covering the same span.
    std::vector<SymbolId> same_span;
    for (const auto& [s, a, b] : guard_) {
      if (a == i && b == j) same_span.push_back(s);
    }
    std::sort(same_span.begin(), same_span.end());
    auto memo_key = std::make_pair(key, same_span);
    if (auto it = memo_.find(memo_key); it != memo_.end()) return it->second;

    guard_.push_back(key);
    std::vector<ParseTree> out;
    for (std::size_t p : g_.productions_for(sym)) {
      if (out.size() >= limit_) break;
      if (!chart_.usable(p)) continue;
      const auto& rhs = g_.productions()[p].rhs;
      std::vector<std::vector<ParseTree>> options;
      splits(rhs, 0, i, j, options, sym, out);
    }
    guard_.pop_back();
    memo_.emplace(std::move(memo_key), out);
    return out;
  }

  void splits(const std::vector<SymbolId>& rhs, std::size_t m, std::size_t s, std::size_t j,
              std::vector<std::vector<ParseTree>>& options, SymbolId lhs,
              std::vector<ParseTree>& out) {
    if (out.size() >= limit_) return;
    if (m == rhs.size()) {
      if (s == j) combine(lhs, options, out);
      return;
    }
    // Longest span for the current child first.
    for (std::size_t e = j + 1; e-- > s;) {
      if (!chart_.derives(rhs[m], s, e)) continue;
      if (!chart_.sequence_derives(rhs, m + 1, e, j)) continue;
      auto sub = expand(rhs[m], s, e);
      if (sub.empty()) continue;
      options.push_back(std::move(sub));
      splits(rhs, m + 1, e, j, options, lhs, out);
      options.pop_back();
      if (out.size() >= limit_) return;
    }
  }

  void combine(SymbolId lhs, const std::vector<std::vector<ParseTree>>& options,
               std::vector<ParseTree>& out) {
    std::vector<std::size_t> pick(options.size(), 0);
    for (;;) {
      if (out.size() >= limit_) return;
      ParseTree node;
      node.label = g_.name(lhs);
      for (std::size_t c = 0; c < options.size(); ++c) node.children.push_back(options[c][pick[c]]);
      out.push_back(std::move(node));
      // Odometer with the last child varying fastest.
      std::size_t c = options.size();
      while (c > 0) {
        --c;
        if (++pick[c] < options[c].size()) break;
        pick[c] = 0;
        if (c == 0) return;
      }
      if (options.empty()) return;
    }
  }

  const Grammar& g_;
  const Input& in_;
  std::span<const std::string> names_;
  SpanChart chart_;
  std::size_t limit_;
  std::vector<Key> guard_;
  std::map<std::pair<Key, std::vector<SymbolId>>, std::vector<ParseTree>> memo_;
};

std::size_t find_production(const Grammar& g, const ParseTree& node) {
  auto lhs = g.find(node.label);
  if (!lhs || g.is_terminal(*lhs)) {
    throw std::invalid_argument("'" + node.label + "' is not a nonterminal");
  }
  for (std::size_t p : g.productions_for(*lhs)) {
    const auto& rhs = g.productions()[p].rhs;
    if (rhs.size() != node.children.size()) continue;
    bool match = true;
    for (std::size_t k = 0; k < rhs.size() && match; ++k) {
      match = g.name(rhs[k]) == node.children[k].label;
    }
    if (match) return p;
  }
  throw std::invalid_argument("no production matches node '" + node.label + "'");
}

bool foldable(const Grammar& g, const ParseTree& child) {
  if (child.terminal || child.children.size() != 1 || !child.children[0].terminal) return false;
  auto id = g.find(child.label);
  return id && g.is_preterminal(*id);
}

void render_bracketed(const ParseTree& t, std::string& out) {
  if (t.terminal) {
    if (t.surface.empty()) {
      out += t.label;
    } else {
      out += '(';
      out += t.label;
      out += ' ';
      out += t.surface;
      out += ')';
    }
    return;
  }
  out += '(';
  out += t.label;
  for (const auto& c : t.children) {
    out += ' ';
    render_bracketed(c, out);
  }
  out += ')';
}

void render_indented(const ParseTree& t, std::size_t depth, std::string& out) {
  out.append(depth * 2, ' ');
  out += t.label;
  if (t.terminal && !t.surface.empty()) {
    out += ' ';
    out += t.surface;
  }
  out += '\n';
  for (const auto& c : t.children) render_indented(c, depth + 1, out);
}

class TreeReader {
 public:
  TreeReader(std::string_view text, const Grammar& g) : text_(text), g_(g) {}

  ParseTree read() {
    ParseTree t = node();
    skip();
    if (pos_ != text_.size()) throw ParseError("trailing text after tree", pos_);
    return t;
  }

 private:
  void skip() {
    while (pos_ < text_.size() && text::is_space(text_[pos_])) ++pos_;
  }

  std::string atom() {
    skip();
    const std::size_t start = pos_;
    while (pos_ < text_.size() && !text::is_space(text_[pos_]) && text_[pos_] != '(' &&
           text_[pos_] != ')') {
      ++pos_;
    }
    if (pos_ == start) throw ParseError("expected a symbol", pos_);
    return std::string(text_.substr(start, pos_ - start));
  }

  bool is_nonterminal(const std::string& label) const {
    auto id = g_.find(label);
    if (!id) throw ParseError("unknown symbol '" + label + "'", pos_);
    return !g_.is_terminal(*id);
  }

  ParseTree node() {
    skip();
    if (pos_ >= text_.size()) throw ParseError("unexpected end of tree", pos_);
    if (text_[pos_] != '(') {
      ParseTree leaf;
      leaf.label = atom();
      if (is_nonterminal(leaf.label)) throw ParseError("bare nonterminal '" + leaf.label + "'", pos_);
      leaf.terminal = true;
      return leaf;
    }
    ++pos_;
    ParseTree t;
    t.label = atom();
    if (!is_nonterminal(t.label)) {
      t.terminal = true;
      skip();
      if (pos_ < text_.size() && text_[pos_] != ')') t.surface = atom();
    } else {
      for (;;) {
        skip();
        if (pos_ >= text_.size()) throw ParseError("missing ')'", pos_);
        if (text_[pos_] == ')') break;
        t.children.push_back(node());
      }
    }
    skip();
    if (pos_ >= text_.size() || text_[pos_] != ')') throw ParseError("missing ')'", pos_);
    ++pos_;
    return t;
  }

  std::string_view text_;
  const Grammar& g_;
  std::size_t pos_ = 0;
};

void collect_leaves(const ParseTree& t, std::vector<std::string>& out) {
  if (t.terminal) {
    out.push_back(t.label);
    return;
  }
  for (const auto& c : t.children) collect_leaves(c, out);
}

void attach_surfaces(ParseTree& t, const std::vector<std::string>& surfaces, std::size_t& next) {
  if (t.terminal) {
    if (next < surfaces.size()) t.surface = surfaces[next];
    ++next;
    return;
  }
  for (auto& c : t.children) attach_surfaces(c, surfaces, next);
}

}  // namespace

std::vector<std::string> ParseTree::leaves() const {
  std::vector<std::string> out;
  collect_leaves(*this, out);
  return out;
}

Recognition recognize_detail(const Grammar& grammar, std::span<const std::string> terminals) {
  return earley(grammar, resolve(grammar, terminals));
}

bool recognize(const Grammar& grammar, std::span<const std::string> terminals) {
  return recognize_detail(grammar, terminals).accepted;
}

std::vector<bool> recognize_batch(const Grammar& grammar,
                                  std::span<const std::vector<std::string>> inputs, int threads) {
  std::vector<char> flags(inputs.size(), 0);
  const auto n = static_cast<std::ptrdiff_t>(inputs.size());
  const int nthreads = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 64) num_threads(nthreads)
  for (std::ptrdiff_t i = 0; i < n; ++i) flags[i] = recognize(grammar, inputs[i]) ? 1 : 0;
  return std::vector<bool>(flags.begin(), flags.end());
}

std::vector<bool> recognize_batch_serial(const Grammar& grammar,
                                         std::span<const std::vector<std::string>> inputs) {
  std::vector<bool> out;
  out.reserve(inputs.size());
  for (const auto& in : inputs) out.push_back(recognize(grammar, in));
  return out;
}

ParseForest parse_all(const Grammar& grammar, std::span<const std::string> terminals,
                      std::size_t cap) {
  ParseForest forest;
  const Input in = resolve(grammar, terminals);
  if (!in.unknown.empty() || grammar.symbol_count() == 0 || cap == 0) return forest;
  TreeEnumerator enumerator(grammar, in, terminals, cap + 1);
  forest.trees = enumerator.run();
  if (forest.trees.size() > cap) {
    forest.trees.resize(cap);
    forest.truncated = true;
  }
  return forest;
}

RejectionError::RejectionError(std::vector<std::string> terminals, Recognition recognition)
    : std::runtime_error(describe_rejection(terminals, recognition)),
      terminals_(std::move(terminals)),
      recognition_(std::move(recognition)) {}

std::string describe_rejection(std::span<const std::string> terminals, const Recognition& r) {
  std::string msg = "not in the language: ";
  msg += terminals.empty() ? std::string("(empty)")
                           : text::join(std::vector<std::string>(terminals.begin(), terminals.end()), " ");
  if (!r.unknown_terminals.empty()) {
    msg += "; unknown terminals: " + text::join(r.unknown_terminals, " ");
  }
  msg += "; longest viable prefix: " + std::to_string(r.viable_prefix) + " of " +
         std::to_string(terminals.size());
  if (r.viable_prefix < terminals.size()) {
    msg += " (first unexpected symbol '" + terminals[r.viable_prefix] + "')";
  }
  return msg;
}

DerivationTrace linearize(const Grammar& grammar, const ParseTree& tree,
                          const DeriveOptions& options) {
  struct Slot {
    std::string label;
    const ParseTree* node;  // null once it is a terminal
  };
  DerivationTrace trace;
  std::vector<Slot> form{{tree.label, tree.terminal ? nullptr : &tree}};
  auto labels = [&] {
    std::vector<std::string> out;
    for (const auto& s : form) out.push_back(s.label);
    return out;
  };
  trace.steps.push_back({labels(), std::nullopt, {}, "start"});

  for (;;) {
    auto it = std::find_if(form.begin(), form.end(), [](const Slot& s) { return s.node != nullptr; });
    if (it == form.end()) break;
    const ParseTree& node = *it->node;
    DerivationStep step;
    step.production = find_production(grammar, node);

    std::vector<Slot> replacement;
    std::vector<std::string> shown;
    for (std::size_t k = 0; k < node.children.size(); ++k) {
      const ParseTree& child = node.children[k];
      if (options.fold_preterminals && foldable(grammar, child)) {
        step.folded.emplace_back(k, find_production(grammar, child));
        replacement.push_back({child.children[0].label, nullptr});
      } else {
        replacement.push_back({child.label, child.terminal ? nullptr : &child});
      }
      shown.push_back(replacement.back().label);
    }
    step.rule = node.label + std::string(kDisplayArrow) +
                (shown.empty() ? std::string(kEpsilon) : text::join(shown, " "));

    const auto at = it - form.begin();
    form.erase(form.begin() + at);
    form.insert(form.begin() + at, replacement.begin(), replacement.end());
    step.form = labels();
    trace.steps.push_back(std::move(step));
  }
  return trace;
}

DerivationTrace derive(const Grammar& grammar, std::span<const std::string> terminals,
                       const DeriveOptions& options) {
  auto forest = parse_all(grammar, terminals, 1);
  if (forest.trees.empty()) {
    throw RejectionError(std::vector<std::string>(terminals.begin(), terminals.end()),
                         recognize_detail(grammar, terminals));
  }
  return linearize(grammar, forest.trees.front(), options);
}

ParseTree replay(const Grammar& grammar, const DerivationTrace& trace) {
  struct Node {
    std::string label;
    bool terminal = false;
    std::vector<std::size_t> children;
  };
  if (trace.steps.empty() || trace.steps[0].form.size() != 1) {
    throw std::invalid_argument("trace must begin with a single start symbol");
  }
  std::vector<Node> nodes{{trace.steps[0].form[0], false, {}}};
  std::vector<std::size_t> frontier{0};
  auto is_nonterminal = [&](const std::string& label) {
    auto id = grammar.find(label);
    return id && !grammar.is_terminal(*id);
  };
  std::vector<bool> expanded{false};

  for (std::size_t k = 1; k < trace.steps.size(); ++k) {
    const DerivationStep& step = trace.steps[k];
    if (!step.production || *step.production >= grammar.productions().size()) {
      throw std::invalid_argument("step " + std::to_string(k + 1) + " has no production");
    }
    const Production& p = grammar.productions()[*step.production];
    auto it = std::find_if(frontier.begin(), frontier.end(), [&](std::size_t id) {
      return !nodes[id].terminal && !expanded[id] && is_nonterminal(nodes[id].label);
    });
    if (it == frontier.end() || nodes[*it].label != grammar.name(p.lhs)) {
      throw std::invalid_argument("step " + std::to_string(k + 1) +
                                  " does not rewrite the leftmost nonterminal");
    }
    const std::size_t parent = *it;
    expanded[parent] = true;
    std::vector<std::size_t> replacement;
    for (std::size_t r = 0; r < p.rhs.size(); ++r) {
      const std::size_t child = nodes.size();
      nodes.push_back({grammar.name(p.rhs[r]), grammar.is_terminal(p.rhs[r]), {}});
      expanded.push_back(false);
      nodes[parent].children.push_back(child);
      auto fold = std::find_if(step.folded.begin(), step.folded.end(),
                               [&](const auto& f) { return f.first == r; });
      if (fold != step.folded.end()) {
        const Production& q = grammar.productions()[fold->second];
        if (q.lhs != p.rhs[r] || q.rhs.size() != 1 || !grammar.is_terminal(q.rhs[0])) {
          throw std::invalid_argument("bad folded expansion in step " + std::to_string(k + 1));
        }
        const std::size_t leaf = nodes.size();
        nodes.push_back({grammar.name(q.rhs[0]), true, {}});
        expanded.push_back(false);
        nodes[child].children.push_back(leaf);
        expanded[child] = true;
        replacement.push_back(leaf);
      } else {
        replacement.push_back(child);
      }
    }
    const auto at = it - frontier.begin();
    frontier.erase(frontier.begin() + at);
    frontier.insert(frontier.begin() + at, replacement.begin(), replacement.end());

    std::vector<std::string> shown;
    for (std::size_t id : frontier) shown.push_back(nodes[id].label);
    if (shown != step.form) {
      throw std::invalid_argument("step " + std::to_string(k + 1) + " form does not match");
    }
  }

  std::function<ParseTree(std::size_t)> build = [&](std::size_t id) {
    ParseTree t;
    t.label = nodes[id].label;
    t.terminal = nodes[id].terminal;
    for (std::size_t c : nodes[id].children) t.children.push_back(build(c));
    return t;
  };
  return build(0);
}

std::string render_trace(const DerivationTrace& trace) {
  std::string out;
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    const auto& step = trace.steps[i];
    out += std::to_string(i + 1);
    out += i == 0 ? ". " : ". >> ";
    out += text::join(step.form, " ");
    out += "  [";
    out += step.rule;
    out += "]\n";
  }
  return out;
}

std::string render_tree(const ParseTree& tree, TreeStyle style) {
  std::string out;
  if (style == TreeStyle::bracketed) {
    render_bracketed(tree, out);
  } else {
    render_indented(tree, 0, out);
    if (!out.empty()) out.pop_back();
  }
  return out;
}

ParseTree read_tree(std::string_view text, const Grammar& grammar) {
  return TreeReader(text, grammar).read();
}

PipelineResult pipeline(const Model& model, const Grammar& grammar,
                        const AnnotatedSentence& sentence, const TaggerOptions& options) {
  PipelineResult result;
  try {
    result.tags = tag(model, sentence, options);
  } catch (const std::exception& e) {
    throw StageError("tagger", e.what());
  }

  std::vector<std::string> surfaces;
  for (std::size_t i = 0; i < sentence.chunks.size(); ++i) {
    std::string words;
    for (const auto& w : sentence.chunks[i].words) words += w.word;
    if (result.tags.decisions[i].tag == kNullTag) {
      if (!surfaces.empty()) surfaces.back() += words;
    } else {
      surfaces.push_back(std::move(words));
    }
  }

  const auto tags = result.tags.tags();
  result.terminals = tags_to_terminals(grammar, tags);
  ParseForest forest;
  try {
    forest = parse_all(grammar, result.terminals, 1);
  } catch (const std::exception& e) {
    throw StageError("relations", e.what());
  }
  if (forest.trees.empty()) {
    Rejection r;
    r.stage = "relations";
    r.terminals = result.terminals;
    r.recognition = recognize_detail(grammar, result.terminals);
    r.message = describe_rejection(result.terminals, r.recognition);
    result.rejection = std::move(r);
    return result;
  }
  ParseTree tree = std::move(forest.trees.front());
  std::size_t next = 0;
  attach_surfaces(tree, surfaces, next);
  result.tree = std::move(tree);
  return result;
}

}  // namespace fntag
