#include "fntag/cli.hpp"

#include <omp.h>

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include "fntag/corpus.hpp"
#include "fntag/error.hpp"
#include "fntag/eval.hpp"
#include "fntag/grammar.hpp"
#include "fntag/text.hpp"

namespace fntag {

namespace {

constexpr const char* kStdinName = "<stdin>";

// Raised for failures that end the command regardless of strictness.
struct Fatal {
  int status;
};

struct Source {
  std::string name;
  std::vector<std::string> lines;
};

struct WorkItem {
  const std::string* file;
  std::size_t line;
  const std::string* text;
};

// What one input line produced; written out in input order.
struct Outcome {
  std::string out;
  std::string err;
  bool failed = false;
};

std::string where(const std::string& file, std::size_t line) {
  return line == 0 ? file : file + ":" + std::to_string(line);
}

std::string diagnostic(const std::string& file, std::size_t line, std::string_view stage,
                       const std::string& message) {
  return where(file, line) + ": " + std::string(stage) + ": " + message + "\n";
}

std::string describe(const ParseError& e) {
  std::string msg = e.reason();
  if (e.offset() != ParseError::npos) msg += " (byte " + std::to_string(e.offset()) + ")";
  return msg;
}

std::vector<std::string> read_lines(std::istream& in) {
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

std::vector<Source> read_sources(const RunConfig& config, std::istream& in, std::ostream& err) {
  std::vector<Source> sources;
  if (config.inputs.empty()) {
    sources.push_back({kStdinName, read_lines(in)});
    return sources;
  }
  for (const auto& path : config.inputs) {
    std::ifstream file(path, std::ios::binary);
    if (!file) {
      err << diagnostic(path, 0, "input", "cannot open file");
      throw Fatal{kExitData};
    }
    sources.push_back({path, read_lines(file)});
  }
  return sources;
}

std::vector<WorkItem> work_items(const std::vector<Source>& sources) {
  std::vector<WorkItem> items;
  for (const auto& s : sources) {
    for (std::size_t i = 0; i < s.lines.size(); ++i) {
      const std::string_view t = text::trim(s.lines[i]);
      if (t.empty() || text::starts_with(t, "//")) continue;
      items.push_back({&s.name, i + 1, &s.lines[i]});
    }
  }
  return items;
}

// Runs fn over every item concurrently and writes the outcomes in input order.
// Returns true if any item failed.
template <typename Fn>
bool process_lines(const std::vector<WorkItem>& items, int threads, std::ostream& out,
                   std::ostream& err, Fn fn) {
  std::vector<Outcome> outcomes(items.size());
  const auto n = static_cast<std::ptrdiff_t>(items.size());
  const int nthreads = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 4) num_threads(nthreads)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const WorkItem& item = items[i];
    Outcome& o = outcomes[i];
    try {
      fn(item, o);
    } catch (const ParseError& e) {
      o.err += diagnostic(*item.file, item.line, "corpus", describe(e));
      o.failed = true;
    } catch (const StageError& e) {
      o.err += diagnostic(*item.file, item.line, e.stage(),
                          std::string(e.what()).substr(e.stage().size() + 2));
      o.failed = true;
    } catch (const std::exception& e) {
      o.err += diagnostic(*item.file, item.line, "input", e.what());
      o.failed = true;
    }
  }
  bool failed = false;
  for (const auto& o : outcomes) {
    out << o.out;
    err << o.err;
    failed = failed || o.failed;
  }
  return failed;
}

AnnotatedSentence parse_line(const WorkItem& item) {
  return parse_sentence_line(*item.text);
}

Grammar load_grammar(const RunConfig& config, std::ostream& err) {
  GrammarOptions opts;
  opts.include_extensions = !config.no_extensions;
  if (config.grammar_path.empty()) return default_grammar(opts.include_extensions);
  std::ifstream file(config.grammar_path, std::ios::binary);
  if (!file) {
    err << diagnostic(config.grammar_path, 0, "grammar", "cannot open file");
    throw Fatal{kExitData};
  }
  std::stringstream buffer;
  buffer << file.rdbuf();
  std::vector<std::string> warnings;
  try {
    Grammar g = parse_grammar_text(buffer.str(), opts, &warnings);
    for (const auto& w : warnings) err << diagnostic(config.grammar_path, 0, "grammar", w);
    return g;
  } catch (const ParseError& e) {
    const std::size_t line = e.line() == ParseError::npos ? 0 : e.line();
    err << diagnostic(config.grammar_path, line, "grammar", describe(e));
    throw Fatal{kExitData};
  }
}

Model load_model_files(const RunConfig& config, std::ostream& err) {
  if (config.model_stem.empty()) {
    err << "usage: --model STEM is required for this command\n";
    throw Fatal{kExitUsage};
  }
  std::vector<std::string> warnings;
  try {
    Model m = load_model(ModelPaths::from_stem(config.model_stem), {config.strict}, &warnings);
    for (const auto& w : warnings) err << diagnostic(config.model_stem, 0, "model", w);
    return m;
  } catch (const ParseError& e) {
    const std::size_t line = e.line() == ParseError::npos ? 0 : e.line();
    err << diagnostic(config.model_stem, line, "model", describe(e));
  } catch (const std::exception& e) {
    err << diagnostic(config.model_stem, 0, "model", e.what());
  }
  throw Fatal{kExitData};
}

// Corpus for train/eval. Rejected lines are reported; strict mode stops.
std::vector<AnnotatedSentence> load_sentences(const std::vector<Source>& sources,
                                              const RunConfig& config, std::ostream& err) {
  std::vector<AnnotatedSentence> out;
  bool rejected = false;
  for (const auto& s : sources) {
    LoadOptions opts;
    opts.strict = false;
    opts.threads = config.threads;
    Corpus corpus = parse_corpus_lines(s.lines, opts);
    for (const auto& d : corpus.diagnostics) {
      err << diagnostic(s.name, d.line, "corpus", d.reason + " (byte " + std::to_string(d.offset) + ")");
      rejected = true;
    }
    for (std::size_t i = 0; i < corpus.sentences.size(); ++i) {
      if (!corpus.sentences[i].annotated()) {
        err << diagnostic(s.name, corpus.line_numbers[i], "corpus", "sentence is not annotated");
        rejected = true;
        continue;
      }
      out.push_back(std::move(corpus.sentences[i]));
    }
  }
  if (rejected && config.strict) throw Fatal{kExitData};
  return out;
}

std::vector<std::string> tag_line_terminals(const Grammar& grammar, const std::string& line) {
  const auto tags = text::split_whitespace(line);
  return tags_to_terminals(grammar, tags);
}

int finish(bool failed, const RunConfig& config) {
  return failed && config.strict ? kExitData : kExitOk;
}

int cmd_train(const RunConfig& config, std::istream& in, std::ostream& out, std::ostream& err) {
  if (config.model_stem.empty()) {
    err << "usage: --model STEM is required for train\n";
    return kExitUsage;
  }
  const auto sources = read_sources(config, in, err);
  const auto corpus = load_sentences(sources, config, err);
  if (corpus.empty()) {
    err << diagnostic(sources.front().name, 0, "model", "no training sentences");
    return kExitData;
  }
  const Model model = train_parallel(corpus, {config.alpha, config.begin_of_sentence}, config.threads);
  try {
    save_model(model, ModelPaths::from_stem(config.model_stem), config.precision);
  } catch (const std::exception& e) {
    err << diagnostic(config.model_stem, 0, "model", e.what());
    return kExitData;
  }
  out << "sentences=" << corpus.size() << " features=" << model.features().size()
      << " tags=" << model.tags().size() << "\n";
  return kExitOk;
}

int cmd_tag(const RunConfig& config, std::istream& in, std::ostream& out, std::ostream& err) {
  const Model model = load_model_files(config, err);
  const auto sources = read_sources(config, in, err);
  const auto items = work_items(sources);
  const bool failed = process_lines(items, config.threads, out, err, [&](const WorkItem& item, Outcome& o) {
    const AnnotatedSentence s = strip_tags(parse_line(item));
    TagSequence seq;
    try {
      seq = tag(model, s, config.tagger);
    } catch (const std::exception& e) {
      throw StageError("tagger", e.what());
    }
    o.out = render_tagged(s, seq) + "\n";
  });
  return finish(failed, config);
}

int cmd_parse(const RunConfig& config, std::istream& in, std::ostream& out, std::ostream& err) {
  const Grammar grammar = load_grammar(config, err);
  std::optional<Model> model;
  if (!config.tags_input) model = load_model_files(config, err);
  const auto sources = read_sources(config, in, err);
  const auto items = work_items(sources);
  const std::string record_end = config.tree_style == TreeStyle::indented ? "\n\n" : "\n";
  const bool failed = process_lines(items, config.threads, out, err, [&](const WorkItem& item, Outcome& o) {
    if (config.tags_input) {
      const auto terminals = tag_line_terminals(grammar, *item.text);
      auto forest = parse_all(grammar, terminals, 1);
      if (forest.trees.empty()) {
        o.err = diagnostic(*item.file, item.line, "relations",
                           describe_rejection(terminals, recognize_detail(grammar, terminals)));
        o.failed = true;
        return;
      }
      o.out = render_tree(forest.trees.front(), config.tree_style) + record_end;
      return;
    }
    const AnnotatedSentence s = strip_tags(parse_line(item));
    const PipelineResult r = pipeline(*model, grammar, s, config.tagger);
    o.out = render_tagged(s, r.tags) + "\n";
    if (r.rejection) {
      o.err = diagnostic(*item.file, item.line, r.rejection->stage, r.rejection->message);
      o.failed = true;
      if (config.tree_style == TreeStyle::indented) o.out += "\n";
      return;
    }
    o.out += render_tree(*r.tree, config.tree_style) + record_end;
  });
  return finish(failed, config);
}

int cmd_derive(const RunConfig& config, std::istream& in, std::ostream& out, std::ostream& err) {
  const Grammar grammar = load_grammar(config, err);
  std::optional<Model> model;
  if (!config.tags_input) model = load_model_files(config, err);
  const auto sources = read_sources(config, in, err);
  const auto items = work_items(sources);
  const bool failed = process_lines(items, config.threads, out, err, [&](const WorkItem& item, Outcome& o) {
    std::vector<std::string> terminals;
    if (config.tags_input) {
      terminals = tag_line_terminals(grammar, *item.text);
    } else {
      const AnnotatedSentence s = strip_tags(parse_line(item));
      TagSequence seq;
      try {
        seq = tag(*model, s, config.tagger);
      } catch (const std::exception& e) {
        throw StageError("tagger", e.what());
      }
      const auto tags = seq.tags();
      terminals = tags_to_terminals(grammar, tags);
    }
    try {
      o.out = render_trace(derive(grammar, terminals)) + "\n";
    } catch (const RejectionError& e) {
      throw StageError("relations", e.what());
    }
  });
  return finish(failed, config);
}

int cmd_eval(const RunConfig& config, std::istream& in, std::ostream& out, std::ostream& err) {
  const Grammar grammar = load_grammar(config, err);
  const auto sources = read_sources(config, in, err);
  const auto corpus = load_sentences(sources, config, err);
  if (corpus.empty()) {
    err << diagnostic(sources.front().name, 0, "eval", "no gold sentences");
    return kExitData;
  }

  Model model;
  std::vector<AnnotatedSentence> test;
  std::set<std::vector<std::string>> known;
  if (config.split) {
    std::pair<std::vector<AnnotatedSentence>, std::vector<AnnotatedSentence>> parts;
    try {
      parts = split_corpus(corpus, *config.split, config.seed);
    } catch (const std::invalid_argument& e) {
      err << diagnostic(sources.front().name, 0, "eval", e.what());
      return kExitData;
    }
    model = train_parallel(parts.first, {config.alpha, config.begin_of_sentence}, config.threads);
    known = feature_patterns(parts.first);
    test = std::move(parts.second);
  } else {
    model = load_model_files(config, err);
    test = corpus;
    if (config.group_novel) {
      if (config.train_corpus.empty()) {
        err << "usage: eval --group-novel needs --split or --train-corpus\n";
        return kExitUsage;
      }
      RunConfig train_config = config;
      train_config.inputs = {config.train_corpus};
      std::istringstream none;
      known = feature_patterns(load_sentences(read_sources(train_config, none, err), config, err));
    }
  }

  EvalOptions opts;
  opts.tagger = config.tagger;
  opts.threads = config.threads;
  std::vector<EvalReport> reports;
  if (config.group_novel) {
    auto [seen, novel] = group_by_pattern(test, known);
    if (!seen.empty()) reports.push_back(evaluate(model, grammar, seen, "patterns in corpus", opts));
    if (!novel.empty()) {
      reports.push_back(evaluate(model, grammar, novel, "patterns not in corpus", opts));
    }
  } else {
    reports.push_back(evaluate(model, grammar, test, "all", opts));
  }
  out << (config.kv ? render_report_kv(reports) : render_report(reports));
  return kExitOk;
}

int cmd_validate(const RunConfig& config, std::ostream& out, std::ostream& err) {
  const Grammar grammar = load_grammar(config, err);
  out << render_grammar_report(grammar, validate(grammar));
  return kExitOk;
}

}  // namespace

int run(const RunConfig& config, std::istream& in, std::ostream& out, std::ostream& err) {
  if (!(config.alpha >= 0.0)) {
    err << "usage: --alpha must be >= 0\n";
    return kExitUsage;
  }
  try {
    switch (config.command) {
      case Command::train: return cmd_train(config, in, out, err);
      case Command::tag: return cmd_tag(config, in, out, err);
      case Command::parse: return cmd_parse(config, in, out, err);
      case Command::derive: return cmd_derive(config, in, out, err);
      case Command::eval: return cmd_eval(config, in, out, err);
      case Command::validate_grammar: return cmd_validate(config, out, err);
    }
  } catch (const Fatal& f) {
    return f.status;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}

std::optional<int> parse_command_line(int argc, const char* const* argv, RunConfig& config,
                                      std::ostream& out, std::ostream& err) {
  CLI::App app{"Function tagging and grammatical relations for chunked Myanmar sentences", "fntag"};
  app.require_subcommand(1);

  std::string mode = "lattice";
  std::string fallback = "uniform";
  std::string tree = "bracketed";
  std::string precision = "full";
  double split = 0.0;

  auto add_inputs = [&](CLI::App* sub) {
    sub->add_option("files", config.inputs, "Input files (standard input when omitted)");
    sub->add_option("--threads", config.threads, "Worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
    sub->add_flag("--strict", config.strict, "Exit with status 2 when any line fails");
  };
  auto add_model = [&](CLI::App* sub) {
    sub->add_option("--model", config.model_stem, "Model stem (STEM.prior.tbl, STEM.trans.tbl, STEM.counts.tbl)");
  };
  auto add_decoding = [&](CLI::App* sub) {
    sub->add_option("--mode", mode, "Decoder")->check(CLI::IsMember({"greedy", "lattice"}));
    sub->add_option("--fallback", fallback, "Unknown-feature policy")
        ->check(CLI::IsMember({"uniform", "mfreq"}));
  };
  auto add_grammar = [&](CLI::App* sub) {
    sub->add_option("--grammar", config.grammar_path, "Grammar file (built-in grammar when omitted)");
    sub->add_flag("--no-ext", config.no_extensions, "Drop rules marked // EXT");
  };
  auto add_training = [&](CLI::App* sub) {
    sub->add_option("--alpha", config.alpha, "Additive smoothing")->check(CLI::NonNegativeNumber);
    sub->add_flag("--bos", config.begin_of_sentence, "Score the first chunk with a start-of-sentence factor");
  };

  auto* train = app.add_subcommand("train", "Estimate a model from an annotated corpus");
  add_inputs(train);
  add_model(train);
  add_training(train);
  train->add_option("--precision", precision, "Probability formatting")
      ->check(CLI::IsMember({"full", "display"}));

  auto* tag = app.add_subcommand("tag", "Tag chunked sentences");
  add_inputs(tag);
  add_model(tag);
  add_decoding(tag);

  auto* parse = app.add_subcommand("parse", "Tag, parse and print a tree per sentence");
  add_inputs(parse);
  add_model(parse);
  add_decoding(parse);
  add_grammar(parse);
  parse->add_option("--tree", tree, "Tree layout")->check(CLI::IsMember({"bracketed", "indented"}));
  parse->add_flag("--tags", config.tags_input, "Input lines are tag sequences");

  auto* derive = app.add_subcommand("derive", "Print leftmost derivations");
  add_inputs(derive);
  add_model(derive);
  add_decoding(derive);
  add_grammar(derive);
  derive->add_flag("--tags", config.tags_input, "Input lines are tag sequences");

  auto* eval = app.add_subcommand("eval", "Score tagging against a gold corpus");
  add_inputs(eval);
  add_model(eval);
  add_decoding(eval);
  add_grammar(eval);
  add_training(eval);
  auto* split_opt = eval->add_option("--split", split, "Train on this share, test on the rest")
                        ->check(CLI::Range(0.0, 1.0));
  eval->add_option("--seed", config.seed, "Shuffle seed for --split");
  eval->add_flag("--group-novel", config.group_novel, "Separate seen and unseen feature patterns");
  eval->add_option("--train-corpus", config.train_corpus, "Training corpus for --group-novel");
  eval->add_flag("--kv", config.kv, "Print group.metric=value lines");

  auto* validate_cmd = app.add_subcommand("validate-grammar", "Check a grammar");
  add_grammar(validate_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (train->parsed()) config.command = Command::train;
  if (tag->parsed()) config.command = Command::tag;
  if (parse->parsed()) config.command = Command::parse;
  if (derive->parsed()) config.command = Command::derive;
  if (eval->parsed()) config.command = Command::eval;
  if (validate_cmd->parsed()) config.command = Command::validate_grammar;

  config.tagger.mode = mode == "greedy" ? DecodeMode::greedy : DecodeMode::lattice;
  config.tagger.fallback = fallback == "mfreq" ? FallbackPolicy::most_frequent : FallbackPolicy::uniform;
  config.tree_style = tree == "indented" ? TreeStyle::indented : TreeStyle::bracketed;
  config.precision = precision == "display" ? ProbabilityFormat::display : ProbabilityFormat::full;
  if (split_opt->count() > 0) {
    if (!(split > 0.0 && split < 1.0)) {
      err << "usage: --split must be strictly between 0 and 1\n";
      return kExitUsage;
    }
    config.split = split;
  }
  return std::nullopt;
}

}  // namespace fntag
