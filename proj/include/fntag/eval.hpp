#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fntag/corpus.hpp"
#include "fntag/grammar.hpp"
#include "fntag/model.hpp"
#include "fntag/tagger.hpp"

namespace fntag {

struct EvalReport {
  std::string group_label;
  std::size_t sentences = 0;
  // Chunks whose gold tag is not Null.
  std::size_t scored_tags = 0;
  std::size_t correct_tags = 0;
  std::size_t exact_sentences = 0;
  std::size_t gold_parsed = 0;
  std::size_t predicted_parsed = 0;

  // A group with no scored tags counts as fully correct.
  double tag_accuracy = 1.0;
  double sentence_exact_match = 0.0;
  double gold_parse_coverage = 0.0;
  double predicted_parse_coverage = 0.0;

  // (gold, predicted) -> count over scored chunks.
  std::map<std::pair<std::string, std::string>, std::size_t> confusion;
};

struct EvalOptions {
  TaggerOptions tagger;
  int threads = 0;
};

// Strips each gold sentence, re-tags it and compares chunk by chunk. Throws
// std::invalid_argument on an empty or unannotated gold set.
EvalReport evaluate(const Model& model, const Grammar& grammar,
                    std::span<const AnnotatedSentence> gold, std::string group_label,
                    const EvalOptions& options = {});

// Shuffles with the seed and puts round(ratio * n) sentences in the first part.
// Throws std::invalid_argument unless 0 < ratio < 1 and both parts are non-empty.
std::pair<std::vector<AnnotatedSentence>, std::vector<AnnotatedSentence>> split_corpus(
    std::span<const AnnotatedSentence> corpus, double ratio, std::uint64_t seed);

// Sequence of chunk features, the key for "pattern seen in training".
std::vector<std::string> feature_pattern(const AnnotatedSentence& sentence);
std::set<std::vector<std::string>> feature_patterns(std::span<const AnnotatedSentence> corpus);

// Sentences whose pattern occurs in `known`, then the rest; order preserved.
std::pair<std::vector<AnnotatedSentence>, std::vector<AnnotatedSentence>> group_by_pattern(
    std::span<const AnnotatedSentence> sentences, const std::set<std::vector<std::string>>& known);

// Round half up to one decimal: 0.974 -> "97.4%".
std::string format_percent(double ratio);

// Aligned plain-text table, one row per report.
std::string render_report(std::span<const EvalReport> reports);

// "group.metric=value" lines; spaces in the group label become '_'.
std::string render_report_kv(std::span<const EvalReport> reports);

}  // namespace fntag
