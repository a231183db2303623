#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "fixtures.hpp"
#include "fntag/eval.hpp"
#include "generators.hpp"
#include "oracles.hpp"

using namespace fntag;
using namespace fntag::testing;

namespace {

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::vector<std::string> gold_tags(const AnnotatedSentence& s) {
  std::vector<std::string> out;
  for (const auto& c : s.chunks) out.push_back(*c.tag);
  return out;
}

}  // namespace

TEST_CASE("a model scores perfectly on its own unambiguous training set") {
  const auto corpus = fixture_corpus().sentences;
  const Model m = train(corpus);
  const EvalReport r = evaluate(m, default_grammar(), corpus, "all");
  CHECK(r.sentences == 4);
  CHECK(r.tag_accuracy == 1.0);
  CHECK(r.correct_tags == r.scored_tags);
  CHECK(r.sentence_exact_match == 1.0);
  CHECK(r.gold_parsed == 4);
  CHECK(r.predicted_parse_coverage == 1.0);
}

TEST_CASE("one corrupted prior costs exactly one tag in ten") {
  const auto c = corrupted_prior_case();
  const EvalReport r = evaluate(c.model, default_grammar(), c.gold, "all");
  CHECK(r.scored_tags == 10);
  CHECK(r.correct_tags == 9);
  CHECK(r.tag_accuracy == 0.9);
  CHECK(r.exact_sentences == 9);
  CHECK(r.confusion.at({"PSubj", "PObj"}) == 1);
  CHECK(r.confusion.at({"PObj", "PObj"}) == 1);
  CHECK(render_report_kv(std::vector<EvalReport>{r}).find("all.tag_accuracy=0.9\n") != std::string::npos);
}

TEST_CASE("accuracy matches a flat recount") {
  Rng rng(51);
  for (int i = 0; i < 40; ++i) {
    const auto features = feature_pool(rng, 4);
    const auto tags = tag_pool(rng, 4);
    const auto train_set = pool_corpus(rng, features, tags, 20, 6);
    const auto test_set = pool_corpus(rng, features, tags, 20, 6);
    const Model m = train(train_set);
    const EvalReport r = evaluate(m, default_grammar(), test_set, "all");
    std::vector<std::vector<std::string>> gold, predicted;
    std::size_t exact = 0;
    for (const auto& s : test_set) {
      gold.push_back(gold_tags(s));
      predicted.push_back(tag(m, strip_tags(s)).tags());
      exact += gold.back() == predicted.back() ? 1 : 0;
    }
    CHECK(r.tag_accuracy == doctest::Approx(flat_accuracy(gold, predicted)).epsilon(1e-12));
    CHECK(r.exact_sentences == exact);
    std::size_t confusion_total = 0;
    for (const auto& [k, v] : r.confusion) confusion_total += v;
    CHECK(confusion_total == r.scored_tags);
  }
}

TEST_CASE("sentences with only Null chunks") {
  const auto s = parse_sentence_line("SFC@Null[a/sf.declarative]");
  const auto corpus = fixture_corpus().sentences;
  const EvalReport r = evaluate(train(corpus), default_grammar(), std::vector<AnnotatedSentence>{s}, "x");
  CHECK(r.scored_tags == 0);
  CHECK(r.tag_accuracy == 1.0);
  CHECK(r.exact_sentences == 1);
}

TEST_CASE("evaluation preconditions") {
  const Model m = train(fixture_corpus().sentences);
  CHECK_THROWS_AS(evaluate(m, default_grammar(), std::vector<AnnotatedSentence>{}, "x"),
                  std::invalid_argument);
  const std::vector<AnnotatedSentence> raw = {parse_sentence_line("NC[a/n]")};
  CHECK_THROWS_AS(evaluate(m, default_grammar(), raw, "x"), std::invalid_argument);
}

TEST_CASE("parallel evaluation matches a single thread") {
  Rng rng(52);
  const auto features = feature_pool(rng, 4);
  const auto tags = tag_pool(rng, 5);
  std::vector<AnnotatedSentence> corpus;
  for (int i = 0; i < 300; ++i) corpus.push_back(pool_sentence(rng, features, tags, 1, 6, true));
  const Model m = train(corpus);
  EvalOptions one;
  one.threads = 1;
  EvalOptions four;
  four.threads = 4;
  const auto a = evaluate(m, default_grammar(), corpus, "all", one);
  const auto b = evaluate(m, default_grammar(), corpus, "all", four);
  CHECK(render_report_kv(std::vector<EvalReport>{a}) == render_report_kv(std::vector<EvalReport>{b}));
}

TEST_CASE("splitting a corpus") {
  Rng rng(53);
  std::vector<AnnotatedSentence> ten;
  for (int i = 0; i < 10; ++i) ten.push_back(random_sentence(rng, true, 4));
  const auto [train_part, test_part] = split_corpus(ten, 0.8, 1);
  CHECK(train_part.size() == 8);
  CHECK(test_part.size() == 2);
  const auto again = split_corpus(ten, 0.8, 1);
  CHECK(again.first == train_part);
  CHECK(again.second == test_part);
  CHECK_THROWS_AS(split_corpus(ten, 0.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(split_corpus(ten, 1.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(split_corpus(ten, 0.01, 1), std::invalid_argument);
  CHECK_THROWS_AS(split_corpus(std::vector<AnnotatedSentence>(ten.begin(), ten.begin() + 1), 0.5, 1),
                  std::invalid_argument);
}

TEST_CASE("a split is a partition of the corpus") {
  Rng rng(54);
  for (int i = 0; i < 50; ++i) {
    std::vector<AnnotatedSentence> corpus;
    const std::size_t n = uniform(rng, 2, 40);
    for (std::size_t k = 0; k < n; ++k) corpus.push_back(random_sentence(rng, true, 3));
    const double ratio = 0.1 + 0.8 * static_cast<double>(uniform(rng, 0, 100)) / 100.0;
    std::pair<std::vector<AnnotatedSentence>, std::vector<AnnotatedSentence>> parts;
    try {
      parts = split_corpus(corpus, ratio, i);
    } catch (const std::invalid_argument&) {
      continue;
    }
    CHECK(parts.first.size() + parts.second.size() == n);
    std::vector<std::string> before, after;
    for (const auto& s : corpus) before.push_back(serialize_sentence(s));
    for (const auto& s : parts.first) after.push_back(serialize_sentence(s));
    for (const auto& s : parts.second) after.push_back(serialize_sentence(s));
    std::sort(before.begin(), before.end());
    std::sort(after.begin(), after.end());
    CHECK(before == after);
  }
}

TEST_CASE("grouping by feature pattern") {
  const auto corpus = fixture_corpus().sentences;
  const auto known = feature_patterns(std::vector<AnnotatedSentence>(corpus.begin(), corpus.begin() + 2));
  const auto [seen, novel] = group_by_pattern(corpus, known);
  CHECK(seen.size() == 2);
  CHECK(novel.size() == 2);
  CHECK(seen[0] == corpus[0]);
  CHECK(novel[1] == corpus[3]);
  CHECK(feature_pattern(corpus[0]).size() == corpus[0].chunks.size());
}

TEST_CASE("percent formatting") {
  CHECK(format_percent(0.974) == "97.4%");
  CHECK(format_percent(1.0 / 3.0) == "33.3%");
  CHECK(format_percent(1.0) == "100.0%");
  CHECK(format_percent(0.0) == "0.0%");
  CHECK(format_percent(0.9995) == "100.0%");
  CHECK(format_percent(0.0004) == "0.0%");
}

TEST_CASE("report table") {
  const auto header_only = lines_of(render_report(std::vector<EvalReport>{}));
  REQUIRE(header_only.size() == 2);
  CHECK(header_only[0] == "Sentence Patterns | Accuracy | Exact Match | Parsed (gold) | Parsed (predicted) | Sentences");
  CHECK(header_only[1].find_first_not_of("-+ ") == std::string::npos);

  EvalReport a;
  a.group_label = "patterns in corpus";
  a.tag_accuracy = 0.974;
  a.sentences = 12;
  EvalReport b;
  b.group_label = "patterns not in corpus";
  b.tag_accuracy = 1.0 / 3.0;
  b.sentences = 3;
  const auto rows = lines_of(render_report(std::vector<EvalReport>{a, b}));
  REQUIRE(rows.size() == 4);
  CHECK(rows[2].rfind("patterns in corpus ", 0) == 0);
  CHECK(rows[2].find("97.4%") != std::string::npos);
  CHECK(rows[3].find("33.3%") != std::string::npos);
  for (const auto& r : rows) CHECK(r.size() == rows[0].size());

  const std::string kv = render_report_kv(std::vector<EvalReport>{a});
  CHECK(kv.find("patterns_in_corpus.sentences=12\n") != std::string::npos);
  CHECK(kv.find("patterns_in_corpus.tag_accuracy=0.974\n") != std::string::npos);
}
