#include <doctest.h>

#include <cmath>
#include <limits>

#include "fixtures.hpp"
#include "fntag/model.hpp"
#include "fntag/tagger.hpp"
#include "generators.hpp"
#include "oracles.hpp"

using namespace fntag;
using namespace fntag::testing;

namespace {

Model fixture_model() {
  const Corpus c = fixture_corpus();
  return train(c.sentences);
}

std::string tag_line(const Model& m, const std::string& file, DecodeMode mode) {
  const auto s = parse_sentence_line(first_line(file));
  TaggerOptions opts;
  opts.mode = mode;
  return render_tagged(s, tag(m, s, opts));
}

Model two_tag_model() {
  CountTables c;
  c.feature = {{"n.x", 10}, {"n.y", 2}};
  c.tag_feature = {{{"Ada", "n.x"}, 9}, {{"PObj", "n.x"}, 1}, {{"PSubj", "n.y"}, 1}, {{"Obj", "n.y"}, 1}};
  c.tag = {{"Ada", 9}, {"PObj", 1}, {"PSubj", 1}, {"Obj", 1}};
  c.sentences = 1;
  return Model(c);
}

}  // namespace

TEST_CASE("candidates are ordered by prior then tag") {
  const Model m = two_tag_model();
  const auto x = candidates(m, "n.x");
  REQUIRE(x.size() == 2);
  CHECK(x[0].first == "Ada");
  CHECK(x[0].second == doctest::Approx(0.9));
  CHECK(x[1].first == "PObj");
  const auto y = candidates(m, "n.y");
  REQUIRE(y.size() == 2);
  CHECK(y[0].first == "Obj");
  CHECK(y[1].first == "PSubj");
  CHECK(candidates(m, "n.none").empty());
}

TEST_CASE("fallback candidates for unseen features") {
  const Model m = two_tag_model();
  const auto u = candidates_for(m, "n.none", FallbackPolicy::uniform);
  CHECK(u.source == DecisionSource::fallback_unknown_feature);
  REQUIRE(u.tags.size() == 4);
  for (const auto& [t, p] : u.tags) CHECK(p == doctest::Approx(0.25));
  const auto f = candidates_for(m, "n.none", FallbackPolicy::most_frequent);
  REQUIRE(f.tags.size() == 1);
  CHECK(f.tags[0].first == "Ada");
  CHECK(f.tags[0].second == 1.0);
  CHECK(candidates_for(m, "n.x", FallbackPolicy::uniform).source == DecisionSource::scored);
}

TEST_CASE("single verb chunk is tagged Active") {
  const Model m = fixture_model();
  const auto s = parse_sentence_line("VC[a/v.common]");
  for (auto mode : {DecodeMode::greedy, DecodeMode::lattice}) {
    TaggerOptions o;
    o.mode = mode;
    CHECK(tag(m, s, o).tags() == std::vector<std::string>{"Active"});
  }
}

TEST_CASE("worked examples decode to their golden lines") {
  const Model m = fixture_model();
  CHECK(tag_line(m, "coordinated_subject.txt", DecodeMode::lattice) == first_line("golden/coordinated_subject.txt"));
  CHECK(tag_line(m, "object_complement.txt", DecodeMode::lattice) == first_line("golden/object_complement.txt"));
  CHECK(tag_line(m, "object_sentence.txt", DecodeMode::lattice) == first_line("golden/object_sentence.txt"));
  // Default options decode the same way.
  const auto s = parse_sentence_line(first_line("coordinated_subject.txt"));
  CHECK(render_tagged(s, tag(m, s)) == first_line("golden/coordinated_subject.txt"));
}

TEST_CASE("greedy decoding misses every golden") {
  const Model m = fixture_model();
  CHECK(tag_line(m, "coordinated_subject.txt", DecodeMode::greedy) != first_line("golden/coordinated_subject.txt"));
  CHECK(tag_line(m, "object_complement.txt", DecodeMode::greedy) != first_line("golden/object_complement.txt"));
  CHECK(tag_line(m, "object_sentence.txt", DecodeMode::greedy) != first_line("golden/object_sentence.txt"));
}

TEST_CASE("greedy matches its oracle") {
  Rng rng(21);
  for (int i = 0; i < 300; ++i) {
    const auto inst = random_decoder_instance(rng, 5);
    for (const auto& s : inst.sentences) {
      INFO(serialize_sentence(s));
      CHECK(tag_greedy(inst.model, s, inst.fallback).tags() == greedy_oracle(inst.model, s, inst.fallback));
    }
  }
}

TEST_CASE("lattice matches exhaustive search") {
  Rng rng(22);
  for (int i = 0; i < 300; ++i) {
    const auto inst = random_decoder_instance(rng, 3);
    for (const auto& s : inst.sentences) {
      INFO(serialize_sentence(s));
      const auto got = tag_lattice(inst.model, s, inst.fallback);
      const auto want = lattice_oracle(inst.model, s, inst.fallback);
      CHECK(got.tags() == want.tags);
      const double score = sequence_log_score(inst.model, s, got.tags(), inst.fallback);
      if (std::isinf(want.log_score)) {
        CHECK(got.lattice_fell_back);
      } else {
        CHECK(score == doctest::Approx(want.log_score).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("sequence score matches a direct computation") {
  Rng rng(23);
  for (int i = 0; i < 200; ++i) {
    const auto inst = random_decoder_instance(rng, 2);
    for (const auto& s : inst.sentences) {
      const auto tags = tag_greedy(inst.model, s, inst.fallback).tags();
      const double a = sequence_log_score(inst.model, s, tags, inst.fallback);
      const double b = oracle_log_score(inst.model, s, tags, inst.fallback);
      if (std::isinf(b)) {
        CHECK(std::isinf(a));
      } else {
        CHECK(a == doctest::Approx(b).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("lattice never scores below greedy") {
  Rng rng(24);
  int compared = 0;
  while (compared < 1000) {
    const auto inst = random_decoder_instance(rng, 4);
    for (const auto& s : inst.sentences) {
      const auto g = tag_greedy(inst.model, s, inst.fallback).tags();
      const auto l = tag_lattice(inst.model, s, inst.fallback).tags();
      const double gs = sequence_log_score(inst.model, s, g, inst.fallback);
      const double ls = sequence_log_score(inst.model, s, l, inst.fallback);
      CHECK(ls >= gs - 1e-12);
      ++compared;
    }
  }
}

TEST_CASE("lattice beats greedy on a trap") {
  const auto c = adversarial_case();
  const auto g = tag_greedy(c.model, c.sentence);
  const auto l = tag_lattice(c.model, c.sentence);
  CHECK(g.tags() == std::vector<std::string>{"PSubj", "PPla", "Active"});
  CHECK(l.tags() == std::vector<std::string>{"PObj", "PPla", "Active"});
  // 0.6 * 0.1 * 0.5 vs 0.4 * 1.0 * 0.5, with a final transition of 1.
  CHECK(std::exp(sequence_log_score(c.model, c.sentence, g.tags())) == doctest::Approx(0.03));
  CHECK(std::exp(sequence_log_score(c.model, c.sentence, l.tags())) == doctest::Approx(0.2));
}

TEST_CASE("decoders agree when every feature has one tag") {
  Rng rng(25);
  for (int i = 0; i < 100; ++i) {
    auto features = feature_pool(rng, 4);
    const auto tags = tag_pool(rng, 4);
    std::vector<AnnotatedSentence> corpus;
    for (int k = 0; k < 10; ++k) {
      auto s = pool_sentence(rng, features, tags, 1, 6, true);
      for (auto& ch : s.chunks) {
        if (ch.type == ChunkType::SFC) continue;
        for (std::size_t f = 0; f < features.size(); ++f) {
          if (features[f].pos == ch.words[0].pos) ch.tag = tags[f];
        }
      }
      corpus.push_back(s);
    }
    const Model m = train(corpus);
    for (const auto& s : corpus) {
      const auto input = strip_tags(s);
      const auto g = tag_greedy(m, input).tags();
      CHECK(g == tag_lattice(m, input).tags());
      // The training sentences come back with their own tags.
      std::vector<std::string> gold;
      for (const auto& ch : s.chunks) gold.push_back(*ch.tag);
      CHECK(g == gold);
    }
  }
}

TEST_CASE("decisions carry their source and score") {
  const Model m = fixture_model();
  const auto s = parse_sentence_line("NC[a/n.person]#NC[b/n.unheard]#SFC[c/sf.declarative]");
  const auto seq = tag(m, s);
  REQUIRE(seq.decisions.size() == 3);
  CHECK(seq.decisions[0].source == DecisionSource::scored);
  CHECK(seq.decisions[1].source == DecisionSource::fallback_unknown_feature);
  CHECK(seq.decisions[2].source == DecisionSource::forced_null);
  CHECK(seq.decisions[2].tag == "Null");
  CHECK(seq.decisions[2].score == 1.0);
  CHECK(seq.decisions[0].score > 0.0);
  for (std::size_t i = 0; i < 3; ++i) CHECK(seq.decisions[i].chunk_index == i);

  TaggerOptions mf;
  mf.fallback = FallbackPolicy::most_frequent;
  const auto most = tag(m, parse_sentence_line("NC[b/n.unheard]"), mf);
  CHECK(most.decisions[0].tag == "Active");
}

TEST_CASE("unusable inputs") {
  const Model m = fixture_model();
  CHECK_THROWS_AS(tag(m, AnnotatedSentence{}), std::invalid_argument);
  CHECK_THROWS_AS(tag(Model{}, parse_sentence_line("NC[a/n]")), std::invalid_argument);
  // Only SFC chunks: nothing to score, everything Null.
  CHECK(tag(Model{}, parse_sentence_line("SFC[a/sf]")).tags() == std::vector<std::string>{"Null"});
  const std::vector<std::string> wrong = {"Active"};
  CHECK_THROWS(sequence_log_score(m, parse_sentence_line("NC[a/n]#VC[b/v]"), wrong));
}

TEST_CASE("rendering tagged sentences") {
  const auto s = parse_sentence_line("NC[a/n]#VC[b/v]#SFC[c/sf]");
  TagSequence t;
  for (const char* tg : {"Subj", "Active", "Null"}) t.decisions.push_back({0, tg, 1.0, DecisionSource::scored});
  CHECK(render_tagged(s, t) == "Subj[a]#Active[bc]");

  const auto no_sfc = parse_sentence_line("NC[a/n,b/part]#VC[c/v]။");
  TagSequence u;
  for (const char* tg : {"Subj", "Active"}) u.decisions.push_back({0, tg, 1.0, DecisionSource::scored});
  CHECK(render_tagged(no_sfc, u) == "Subj[ab]#Active[c]။");

  const auto lead = parse_sentence_line("SFC[a/sf]#VC[b/v]");
  TagSequence v;
  for (const char* tg : {"Null", "Active"}) v.decisions.push_back({0, tg, 1.0, DecisionSource::scored});
  CHECK(render_tagged(lead, v) == "Null[a]#Active[b]");

  u.decisions.pop_back();
  CHECK_THROWS_AS(render_tagged(no_sfc, u), std::invalid_argument);
}

TEST_CASE("batch tagging matches serial tagging") {
  Rng rng(26);
  const auto inst = random_decoder_instance(rng, 500);
  for (auto mode : {DecodeMode::greedy, DecodeMode::lattice}) {
    TaggerOptions o;
    o.mode = mode;
    o.fallback = inst.fallback;
    const auto a = tag_batch_serial(inst.model, inst.sentences, o);
    const auto b = tag_batch(inst.model, inst.sentences, o, 4);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].tags() == b[i].tags());
  }
}

TEST_CASE("mode and policy names") {
  CHECK(to_string(DecodeMode::greedy) == "greedy");
  CHECK(to_string(DecodeMode::lattice) == "lattice");
  CHECK(to_string(FallbackPolicy::most_frequent) == "mfreq");
  CHECK(to_string(FallbackPolicy::uniform) == "uniform");
}
