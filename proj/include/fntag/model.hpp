#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fntag/corpus.hpp"

namespace fntag {

using Count = std::uint64_t;

// Exact training counts. Every probability the model reports is derived from
// these on demand.
struct CountTables {
  // C(pc): chunks whose head feature is pc.
  std::map<std::string, Count> feature;
  // C(t, pc), keyed (tag, feature).
  std::map<std::pair<std::string, std::string>, Count> tag_feature;
  // C(t): chunks tagged t.
  std::map<std::string, Count> tag;
  // C(next, prev), keyed (prev, next): adjacent tag pairs with Null chunks removed.
  std::map<std::pair<std::string, std::string>, Count> successor;
  // First tag of each sentence; only consulted when the begin-of-sentence option is on.
  std::map<std::string, Count> start;
  // Sentences that contributed at least one tagged chunk.
  Count sentences = 0;

  // Pointwise sum. Associative and commutative.
  CountTables& merge(const CountTables& other);

  friend bool operator==(const CountTables&, const CountTables&) = default;
};

struct ModelOptions {
  // Additive smoothing; 0 is plain relative frequency.
  double alpha = 0.0;
  // Score the first chunk with P(t | <s>) in addition to its prior.
  bool begin_of_sentence = false;

  friend bool operator==(const ModelOptions&, const ModelOptions&) = default;
};

class Model {
 public:
  Model() = default;
  explicit Model(CountTables counts, ModelOptions options = {});

  const CountTables& counts() const { return counts_; }
  const ModelOptions& options() const { return options_; }
  Model with_options(ModelOptions options) const { return Model(counts_, options); }

  // Tags and features observed in training. Null never appears.
  const std::set<std::string>& tags() const { return tags_; }
  const std::set<std::string>& features() const { return features_; }
  bool knows_feature(std::string_view pc) const;
  bool empty() const { return tags_.empty(); }

  // P(t | pc) for every tag with a nonzero estimate; empty for unknown pc.
  std::map<std::string, double> prior(std::string_view pc) const;
  double prior(std::string_view pc, std::string_view tag) const;

  // P(next | prev) = (C(next, prev) + alpha) / (C_out(prev) + alpha * |tags|), where
  // C_out(prev) counts the occurrences of prev that have a successor.
  double transition(std::string_view prev, std::string_view next) const;

  // P(t | <s>).
  double start(std::string_view tag) const;

  // Number of observed successors of prev, C_out(prev).
  Count outgoing(std::string_view prev) const;

  friend bool operator==(const Model& a, const Model& b) {
    return a.counts_ == b.counts_ && a.options_ == b.options_;
  }

 private:
  CountTables counts_;
  ModelOptions options_;
  std::set<std::string> tags_;
  std::set<std::string> features_;
  std::map<std::string, Count, std::less<>> outgoing_;
};

// Counts the (head feature, tag) observations and adjacent tag pairs of a
// fully annotated corpus. Chunks tagged Null are skipped entirely. Serial
// reference implementation.
CountTables count_corpus(std::span<const AnnotatedSentence> corpus);

// Same counts computed by per-thread partial tables merged at the end.
// threads <= 0 uses the OpenMP default.
CountTables count_corpus_parallel(std::span<const AnnotatedSentence> corpus, int threads = 0);

// Throws std::invalid_argument on an empty corpus or an unannotated sentence.
Model train(std::span<const AnnotatedSentence> corpus, ModelOptions options = {});
Model train_parallel(std::span<const AnnotatedSentence> corpus, ModelOptions options = {},
                     int threads = 0);

struct ModelPaths {
  std::filesystem::path prior;
  std::filesystem::path transition;
  std::filesystem::path counts;

  // STEM.prior.tbl, STEM.trans.tbl, STEM.counts.tbl
  static ModelPaths from_stem(const std::filesystem::path& stem);
};

enum class ProbabilityFormat {
  full,     // shortest round-trip decimal
  display,  // rounded to 4 decimals
};

std::string format_probability(double p, ProbabilityFormat format);

// "pc#tag:p,tag:p" per feature, tags in candidate order.
std::string prior_table_text(const Model& model, ProbabilityFormat format = ProbabilityFormat::full);
// "prev,next=p" per observed pair.
std::string transition_table_text(const Model& model,
                                  ProbabilityFormat format = ProbabilityFormat::full);
// "key<TAB>value" lines.
std::string counts_text(const Model& model);

void save_model(const Model& model, const ModelPaths& paths,
                ProbabilityFormat format = ProbabilityFormat::full);

struct ModelLoadOptions {
  // Lenient loading turns row-sum deviations into warnings.
  bool strict = true;
};

// Rebuilds the model from the counts file and checks both probability files
// against it. Throws ParseError on malformed lines.
Model load_model(const ModelPaths& paths, const ModelLoadOptions& options = {},
                 std::vector<std::string>* warnings = nullptr);

Model parse_counts_text(std::string_view text);

}  // namespace fntag
