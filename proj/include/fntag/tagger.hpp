#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fntag/corpus.hpp"
#include "fntag/model.hpp"

namespace fntag {

enum class DecodeMode { greedy, lattice };

// What to score with when a chunk's feature never occurred in training.
enum class FallbackPolicy {
  uniform,        // every known tag, prior 1/|tags|
  most_frequent,  // the most frequent training tag, prior 1
};

enum class DecisionSource { scored, fallback_unknown_feature, forced_null };

std::string_view to_string(DecodeMode mode);
std::string_view to_string(FallbackPolicy policy);
std::string_view to_string(DecisionSource source);

struct TagDecision {
  std::size_t chunk_index = 0;
  std::string tag;
  // Local factor prior x transition of the chosen tag (1 for forced Null).
  double score = 0.0;
  DecisionSource source = DecisionSource::scored;
};

struct TagSequence {
  std::vector<TagDecision> decisions;
  DecodeMode mode = DecodeMode::greedy;
  // Lattice decoding found no tag sequence with nonzero probability and
  // returned the greedy sequence instead.
  bool lattice_fell_back = false;

  std::vector<std::string> tags() const;
};

struct TaggerOptions {
  DecodeMode mode = DecodeMode::lattice;
  FallbackPolicy fallback = FallbackPolicy::uniform;
};

// Tags for a known feature with their priors, highest prior first, ties by tag.
std::vector<std::pair<std::string, double>> candidates(const Model& model, std::string_view pc);

// The candidate set a decoder scores for one chunk, including the fallback
// for unknown features.
struct CandidateSet {
  std::vector<std::pair<std::string, double>> tags;
  DecisionSource source = DecisionSource::scored;
};

CandidateSet candidates_for(const Model& model, std::string_view pc, FallbackPolicy fallback);

// Left to right: each chunk takes argmax of prior(t|pc) x transition(prev, t),
// where prev is the previous chosen non-Null tag. Ties go to the higher prior,
// then the lexicographically smaller tag. When every candidate has a zero
// transition the chunk is decided by its prior alone. SFC chunks become Null.
TagSequence tag_greedy(const Model& model, const AnnotatedSentence& sentence,
                       FallbackPolicy fallback = FallbackPolicy::uniform);

// Maximizes the product of all priors and transitions over whole sequences.
// Equal scores prefer, position by position from the left, the higher prior
// and then the smaller tag.
TagSequence tag_lattice(const Model& model, const AnnotatedSentence& sentence,
                        FallbackPolicy fallback = FallbackPolicy::uniform);

TagSequence tag(const Model& model, const AnnotatedSentence& sentence,
                const TaggerOptions& options = {});

// Log of the decoding objective for a full tag assignment (one tag per chunk,
// Null on SFC chunks). -inf when the assignment is impossible.
double sequence_log_score(const Model& model, const AnnotatedSentence& sentence,
                          std::span<const std::string> tags,
                          FallbackPolicy fallback = FallbackPolicy::uniform);

// "TAG[words]" joined by '#'. A Null chunk's words are appended to the
// preceding element, so "Active[သွား]" + Null "[သည်]" renders "Active[သွားသည်]".
std::string render_tagged(const AnnotatedSentence& sentence, const TagSequence& tags);

// Tags many sentences concurrently against one model; output order matches input.
std::vector<TagSequence> tag_batch(const Model& model, std::span<const AnnotatedSentence> sentences,
                                   const TaggerOptions& options = {}, int threads = 0);
std::vector<TagSequence> tag_batch_serial(const Model& model,
                                          std::span<const AnnotatedSentence> sentences,
                                          const TaggerOptions& options = {});

}  // namespace fntag
