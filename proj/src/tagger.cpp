#include "fntag/tagger.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "fntag/text.hpp"

namespace fntag {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double safe_log(double p) { return p > 0.0 ? std::log(p) : kNegInf; }

// One non-SFC chunk as the decoders see it.
struct Position {
  std::size_t chunk = 0;
  CandidateSet set;
  std::vector<double> log_prior;
};

std::vector<Position> build_positions(const Model& model, const AnnotatedSentence& sentence,
                                      FallbackPolicy fallback) {
  if (sentence.chunks.empty()) throw std::invalid_argument("cannot tag an empty sentence");
  std::vector<Position> out;
  for (std::size_t i = 0; i < sentence.chunks.size(); ++i) {
    const Chunk& chunk = sentence.chunks[i];
    if (chunk.type == ChunkType::SFC) continue;
    Position p;
    p.chunk = i;
    p.set = candidates_for(model, feature_of(chunk), fallback);
    if (p.set.tags.empty()) throw std::invalid_argument("model has no tags to assign");
    for (const auto& [tag, prior] : p.set.tags) p.log_prior.push_back(safe_log(prior));
    out.push_back(std::move(p));
  }
  return out;
}

// Log transition into `tag` from the previous choice, or from the sentence start.
double log_entry(const Model& model, const std::string* prev, const std::string& tag) {
  if (prev) return safe_log(model.transition(*prev, tag));
  if (model.options().begin_of_sentence) return safe_log(model.start(tag));
  return 0.0;
}

TagSequence assemble(const AnnotatedSentence& sentence, const std::vector<Position>& positions,
                     const std::vector<std::size_t>& choice, const std::vector<double>& local,
                     DecodeMode mode) {
  TagSequence seq;
  seq.mode = mode;
  std::size_t p = 0;
  for (std::size_t i = 0; i < sentence.chunks.size(); ++i) {
    TagDecision d;
    d.chunk_index = i;
    if (p < positions.size() && positions[p].chunk == i) {
      d.tag = positions[p].set.tags[choice[p]].first;
      d.source = positions[p].set.source;
      d.score = std::exp(local[p]);
      ++p;
    } else {
      d.tag = std::string(kNullTag);
      d.source = DecisionSource::forced_null;
      d.score = 1.0;
    }
    seq.decisions.push_back(std::move(d));
  }
  return seq;
}

TagSequence greedy_impl(const Model& model, const AnnotatedSentence& sentence,
                        const std::vector<Position>& positions) {
  std::vector<std::size_t> choice;
  std::vector<double> local;
  const std::string* prev = nullptr;
  for (const Position& pos : positions) {
    const std::size_t n = pos.set.tags.size();
    std::vector<double> score(n);
    bool any_finite = false;
    for (std::size_t k = 0; k < n; ++k) {
      score[k] = log_entry(model, prev, pos.set.tags[k].first) + pos.log_prior[k];
      any_finite = any_finite || score[k] != kNegInf;
    }
    // Nothing reachable from the previous tag: back off to the prior.
    if (!any_finite) score = pos.log_prior;
    // Candidates are already in (prior desc, tag asc) order, so the first
    // maximum wins ties.
    std::size_t best = 0;
    for (std::size_t k = 1; k < n; ++k) {
      if (score[k] > score[best]) best = k;
    }
    choice.push_back(best);
    local.push_back(score[best]);
    prev = &pos.set.tags[best].first;
  }
  return assemble(sentence, positions, choice, local, DecodeMode::greedy);
}

}  // namespace

std::string_view to_string(DecodeMode mode) {
  return mode == DecodeMode::greedy ? "greedy" : "lattice";
}

std::string_view to_string(FallbackPolicy policy) {
  return policy == FallbackPolicy::uniform ? "uniform" : "mfreq";
}

std::string_view to_string(DecisionSource source) {
  switch (source) {
    case DecisionSource::scored: return "scored";
    case DecisionSource::fallback_unknown_feature: return "fallback_unknown_feature";
    case DecisionSource::forced_null: return "forced_null";
  }
  return "";
}

std::vector<std::string> TagSequence::tags() const {
  std::vector<std::string> out;
  out.reserve(decisions.size());
  for (const auto& d : decisions) out.push_back(d.tag);
  return out;
}

std::vector<std::pair<std::string, double>> candidates(const Model& model, std::string_view pc) {
  auto row = model.prior(pc);
  std::vector<std::pair<std::string, double>> out(row.begin(), row.end());
  // map order is by tag, so a stable sort on prior leaves ties lexicographic.
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  return out;
}

CandidateSet candidates_for(const Model& model, std::string_view pc, FallbackPolicy fallback) {
  CandidateSet set;
  set.tags = candidates(model, pc);
  if (!set.tags.empty()) return set;
  set.source = DecisionSource::fallback_unknown_feature;
  const auto& tags = model.tags();
  if (tags.empty()) return set;
  if (fallback == FallbackPolicy::uniform) {
    const double p = 1.0 / static_cast<double>(tags.size());
    for (const auto& t : tags) set.tags.emplace_back(t, p);
  } else {
    const std::string* best = nullptr;
    Count best_n = 0;
    for (const auto& [t, n] : model.counts().tag) {
      if (n > best_n) {
        best = &t;
        best_n = n;
      }
    }
    set.tags.emplace_back(*best, 1.0);
  }
  return set;
}

TagSequence tag_greedy(const Model& model, const AnnotatedSentence& sentence,
                       FallbackPolicy fallback) {
  return greedy_impl(model, sentence, build_positions(model, sentence, fallback));
}

TagSequence tag_lattice(const Model& model, const AnnotatedSentence& sentence,
                        FallbackPolicy fallback) {
  const auto positions = build_positions(model, sentence, fallback);
  if (positions.empty()) {
    return assemble(sentence, positions, {}, {}, DecodeMode::lattice);
  }

  struct State {
    double score = kNegInf;
    std::vector<std::size_t> path;
  };
  // Higher score first; equal scores compare candidate indices left to right,
  // which is the (prior desc, tag asc) order.
  auto better = [](double s, const std::vector<std::size_t>& p, const State& than) {
    if (s != than.score) return s > than.score;
    return p < than.path;
  };

  std::vector<State> states(positions[0].set.tags.size());
  for (std::size_t k = 0; k < states.size(); ++k) {
    states[k].score = (0.0 + log_entry(model, nullptr, positions[0].set.tags[k].first)) +
                      positions[0].log_prior[k];
    states[k].path = {k};
  }
  for (std::size_t p = 1; p < positions.size(); ++p) {
    const Position& pos = positions[p];
    const Position& before = positions[p - 1];
    std::vector<State> next(pos.set.tags.size());
    for (std::size_t k = 0; k < next.size(); ++k) {
      for (std::size_t j = 0; j < states.size(); ++j) {
        const double s =
            (states[j].score + log_entry(model, &before.set.tags[j].first, pos.set.tags[k].first)) +
            pos.log_prior[k];
        std::vector<std::size_t> path = states[j].path;
        path.push_back(k);
        if (next[k].path.empty() || better(s, path, next[k])) {
          next[k].score = s;
          next[k].path = std::move(path);
        }
      }
    }
    states = std::move(next);
  }

  const State* best = &states[0];
  for (const State& s : states) {
    if (better(s.score, s.path, *best)) best = &s;
  }
  if (best->score == kNegInf) {
    TagSequence seq = greedy_impl(model, sentence, positions);
    seq.mode = DecodeMode::lattice;
    seq.lattice_fell_back = true;
    return seq;
  }

  std::vector<double> local;
  for (std::size_t p = 0; p < positions.size(); ++p) {
    const std::string* prev = p ? &positions[p - 1].set.tags[best->path[p - 1]].first : nullptr;
    const std::size_t k = best->path[p];
    local.push_back(log_entry(model, prev, positions[p].set.tags[k].first) +
                    positions[p].log_prior[k]);
  }
  return assemble(sentence, positions, best->path, local, DecodeMode::lattice);
}

TagSequence tag(const Model& model, const AnnotatedSentence& sentence, const TaggerOptions& options) {
  return options.mode == DecodeMode::greedy ? tag_greedy(model, sentence, options.fallback)
                                            : tag_lattice(model, sentence, options.fallback);
}

double sequence_log_score(const Model& model, const AnnotatedSentence& sentence,
                          std::span<const std::string> tags, FallbackPolicy fallback) {
  if (tags.size() != sentence.chunks.size()) {
    throw std::invalid_argument("tag count does not match chunk count");
  }
  const auto positions = build_positions(model, sentence, fallback);
  double total = 0.0;
  const std::string* prev = nullptr;
  for (const Position& pos : positions) {
    const std::string& tag = tags[pos.chunk];
    auto it = std::find_if(pos.set.tags.begin(), pos.set.tags.end(),
                           [&](const auto& c) { return c.first == tag; });
    if (it == pos.set.tags.end()) return kNegInf;
    const auto k = static_cast<std::size_t>(it - pos.set.tags.begin());
    total = (total + log_entry(model, prev, tag)) + pos.log_prior[k];
    prev = &tag;
  }
  for (std::size_t i = 0; i < sentence.chunks.size(); ++i) {
    if (sentence.chunks[i].type == ChunkType::SFC && tags[i] != kNullTag) return kNegInf;
  }
  return total;
}

std::string render_tagged(const AnnotatedSentence& sentence, const TagSequence& tags) {
  if (tags.decisions.size() != sentence.chunks.size()) {
    throw std::invalid_argument("tag sequence length does not match the sentence");
  }
  std::vector<std::pair<std::string, std::string>> elements;
  for (std::size_t i = 0; i < sentence.chunks.size(); ++i) {
    std::string words;
    for (const auto& w : sentence.chunks[i].words) words += w.word;
    const std::string& tag = tags.decisions[i].tag;
    if (tag == kNullTag && !elements.empty()) {
      elements.back().second += words;
    } else {
      elements.emplace_back(tag, std::move(words));
    }
  }
  std::string out;
  for (std::size_t i = 0; i < elements.size(); ++i) {
    if (i) out += '#';
    out += elements[i].first;
    out += '[';
    out += elements[i].second;
    out += ']';
  }
  if (sentence.terminated) out += text::kSentenceMark;
  return out;
}

std::vector<TagSequence> tag_batch(const Model& model, std::span<const AnnotatedSentence> sentences,
                                   const TaggerOptions& options, int threads) {
  std::vector<TagSequence> out(sentences.size());
  std::vector<std::string> errors(sentences.size());
  const auto n = static_cast<std::ptrdiff_t>(sentences.size());
  const int nthreads = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 8) num_threads(nthreads)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      out[i] = tag(model, sentences[i], options);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  }
  for (const auto& e : errors) {
    if (!e.empty()) throw std::invalid_argument(e);
  }
  return out;
}

std::vector<TagSequence> tag_batch_serial(const Model& model,
                                          std::span<const AnnotatedSentence> sentences,
                                          const TaggerOptions& options) {
  std::vector<TagSequence> out;
  out.reserve(sentences.size());
  for (const auto& s : sentences) out.push_back(tag(model, s, options));
  return out;
}

}  // namespace fntag
