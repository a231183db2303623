#include "fntag/eval.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "fntag/relations.hpp"
#include "fntag/text.hpp"

namespace fntag {

namespace {

struct SentenceResult {
  std::size_t scored = 0;
  std::size_t correct = 0;
  bool gold_parsed = false;
  bool predicted_parsed = false;
  std::vector<std::pair<std::string, std::string>> pairs;
  std::string error;
};

SentenceResult score_sentence(const Model& model, const Grammar& grammar,
                              const AnnotatedSentence& gold, const TaggerOptions& options) {
  SentenceResult r;
  if (!gold.annotated()) throw std::invalid_argument("gold sentence is not fully annotated");
  const TagSequence predicted = tag(model, strip_tags(gold), options);
  std::vector<std::string> gold_tags;
  for (std::size_t i = 0; i < gold.chunks.size(); ++i) {
    const std::string& g = *gold.chunks[i].tag;
    gold_tags.push_back(g);
    if (g == kNullTag) continue;
    const std::string& p = predicted.decisions[i].tag;
    ++r.scored;
    if (g == p) ++r.correct;
    r.pairs.emplace_back(g, p);
  }
  r.gold_parsed = recognize(grammar, tags_to_terminals(grammar, gold_tags));
  const auto predicted_tags = predicted.tags();
  r.predicted_parsed = recognize(grammar, tags_to_terminals(grammar, predicted_tags));
  return r;
}

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

std::string kv_label(const std::string& label) {
  std::string out = label;
  std::replace(out.begin(), out.end(), ' ', '_');
  return out;
}

}  // namespace

EvalReport evaluate(const Model& model, const Grammar& grammar,
                    std::span<const AnnotatedSentence> gold, std::string group_label,
                    const EvalOptions& options) {
  if (gold.empty()) throw std::invalid_argument("empty gold set");
  std::vector<SentenceResult> results(gold.size());
  const auto n = static_cast<std::ptrdiff_t>(gold.size());
  const int nthreads = options.threads > 0 ? options.threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 4) num_threads(nthreads)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      results[i] = score_sentence(model, grammar, gold[i], options.tagger);
    } catch (const std::exception& e) {
      results[i].error = e.what();
    }
  }

  EvalReport report;
  report.group_label = std::move(group_label);
  report.sentences = gold.size();
  for (const auto& r : results) {
    if (!r.error.empty()) throw std::invalid_argument(r.error);
    report.scored_tags += r.scored;
    report.correct_tags += r.correct;
    if (r.correct == r.scored) ++report.exact_sentences;
    if (r.gold_parsed) ++report.gold_parsed;
    if (r.predicted_parsed) ++report.predicted_parsed;
    for (const auto& pair : r.pairs) ++report.confusion[pair];
  }
  report.tag_accuracy =
      report.scored_tags == 0 ? 1.0 : ratio(report.correct_tags, report.scored_tags);
  report.sentence_exact_match = ratio(report.exact_sentences, report.sentences);
  report.gold_parse_coverage = ratio(report.gold_parsed, report.sentences);
  report.predicted_parse_coverage = ratio(report.predicted_parsed, report.sentences);
  return report;
}

std::pair<std::vector<AnnotatedSentence>, std::vector<AnnotatedSentence>> split_corpus(
    std::span<const AnnotatedSentence> corpus, double ratio, std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw std::invalid_argument("split ratio must be in (0, 1)");
  const std::size_t n = corpus.size();
  const auto first = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(n) + 0.5));
  if (first == 0 || first >= n) {
    throw std::invalid_argument("corpus of " + std::to_string(n) +
                                " sentences is too small to split at " + text::format_double(ratio));
  }
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  // Fisher-Yates with an explicit draw so the split does not depend on the
  // standard library's shuffle.
  std::mt19937_64 rng(seed);
  for (std::size_t i = n - 1; i > 0; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % (i + 1));
    std::swap(order[i], order[j]);
  }
  std::pair<std::vector<AnnotatedSentence>, std::vector<AnnotatedSentence>> out;
  for (std::size_t k = 0; k < n; ++k) {
    (k < first ? out.first : out.second).push_back(corpus[order[k]]);
  }
  return out;
}

std::vector<std::string> feature_pattern(const AnnotatedSentence& sentence) {
  std::vector<std::string> out;
  out.reserve(sentence.chunks.size());
  for (const auto& c : sentence.chunks) out.push_back(feature_of(c));
  return out;
}

std::set<std::vector<std::string>> feature_patterns(std::span<const AnnotatedSentence> corpus) {
  std::set<std::vector<std::string>> out;
  for (const auto& s : corpus) out.insert(feature_pattern(s));
  return out;
}

std::pair<std::vector<AnnotatedSentence>, std::vector<AnnotatedSentence>> group_by_pattern(
    std::span<const AnnotatedSentence> sentences, const std::set<std::vector<std::string>>& known) {
  std::pair<std::vector<AnnotatedSentence>, std::vector<AnnotatedSentence>> out;
  for (const auto& s : sentences) {
    (known.count(feature_pattern(s)) ? out.first : out.second).push_back(s);
  }
  return out;
}

std::string format_percent(double r) {
  const auto tenths = static_cast<long long>(std::floor(r * 1000.0 + 0.5));
  return std::to_string(tenths / 10) + "." + std::to_string(tenths % 10) + "%";
}

std::string render_report(std::span<const EvalReport> reports) {
  const std::vector<std::string> header{"Sentence Patterns", "Accuracy", "Exact Match",
                                        "Parsed (gold)", "Parsed (predicted)", "Sentences"};
  std::vector<std::vector<std::string>> rows{header};
  for (const auto& r : reports) {
    rows.push_back({r.group_label, format_percent(r.tag_accuracy),
                    format_percent(r.sentence_exact_match), format_percent(r.gold_parse_coverage),
                    format_percent(r.predicted_parse_coverage), std::to_string(r.sentences)});
  }
  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::string out;
  auto emit = [&](const std::vector<std::string>& row) {
    std::string line;
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) line += " | ";
      // Label column left-aligned, numbers right-aligned.
      const std::string pad(width[c] - row[c].size(), ' ');
      line += c == 0 ? row[c] + pad : pad + row[c];
    }
    out += line + "\n";
  };
  emit(rows[0]);
  std::string rule;
  for (std::size_t c = 0; c < width.size(); ++c) {
    if (c) rule += "-+-";
    rule += std::string(width[c], '-');
  }
  out += rule + "\n";
  for (std::size_t i = 1; i < rows.size(); ++i) emit(rows[i]);
  return out;
}

std::string render_report_kv(std::span<const EvalReport> reports) {
  std::string out;
  for (const auto& r : reports) {
    const std::string g = kv_label(r.group_label);
    auto line = [&](const std::string& key, const std::string& value) {
      out += g + "." + key + "=" + value + "\n";
    };
    line("sentences", std::to_string(r.sentences));
    line("scored_tags", std::to_string(r.scored_tags));
    line("correct_tags", std::to_string(r.correct_tags));
    line("tag_accuracy", text::format_double(r.tag_accuracy));
    line("sentence_exact_match", text::format_double(r.sentence_exact_match));
    line("gold_parse_coverage", text::format_double(r.gold_parse_coverage));
    line("predicted_parse_coverage", text::format_double(r.predicted_parse_coverage));
    for (const auto& [pair, count] : r.confusion) {
      line("confusion." + pair.first + "." + pair.second, std::to_string(count));
    }
  }
  return out;
}

}  // namespace fntag
