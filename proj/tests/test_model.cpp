#include <doctest.h>

#include <algorithm>
#include <unistd.h>
#include <atomic>
#include <filesystem>
#include <numeric>

#include "fixtures.hpp"
#include "fntag/error.hpp"
#include "fntag/model.hpp"
#include "generators.hpp"
#include "oracles.hpp"

using namespace fntag;
using namespace fntag::testing;

namespace {

std::vector<AnnotatedSentence> sentences(const std::vector<std::string>& lines) {
  std::vector<AnnotatedSentence> out;
  for (const auto& l : lines) out.push_back(parse_sentence_line(l));
  return out;
}

// One scratch directory per process, removed at exit.
struct ScratchRoot {
  std::filesystem::path path = std::filesystem::temp_directory_path() /
                               ("fntag_model_test_" + std::to_string(::getpid()));
  ~ScratchRoot() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
};

std::filesystem::path scratch_stem(const std::string& name) {
  static ScratchRoot root;
  static std::atomic<int> counter{0};
  auto dir = root.path / std::to_string(counter++);
  std::filesystem::create_directories(dir);
  return dir / name;
}

double prior_row_sum(const Model& m, const std::string& pc) {
  double sum = 0;
  for (const auto& [t, p] : m.prior(pc)) sum += p;
  return sum;
}

double transition_row_sum(const Model& m, const std::string& prev) {
  double sum = 0;
  for (const auto& t : m.tags()) sum += m.transition(prev, t);
  return sum;
}

}  // namespace

TEST_CASE("hand-counted prior") {
  const auto corpus = sentences({
      "NC@PSubj[a/n.person]#VC@Active[b/v.common]",
      "NC@PSubj[c/n.person]#VC@Active[b/v.common]",
      "NC@PSubj[d/n.person]",
      "NC@PObj[e/n.person]#VC@Active[b/v.common]",
  });
  const Model m = train(corpus);
  const auto row = m.prior("n.person");
  REQUIRE(row.size() == 2);
  CHECK(row.at("PSubj") == 0.75);
  CHECK(row.at("PObj") == 0.25);
  CHECK(m.prior("x.y").empty());
  CHECK(m.prior("x.y", "PSubj") == 0.0);
}

TEST_CASE("deterministic features give probability one") {
  const auto corpus = sentences({
      "NC@PUse[a/n.objects]#PPC@UseP[ဖြင့်/ppm.use]#VC@Active[b/v.common]#SFC@Null[သည်/sf]",
      "NC@PSubj[a/n.person]#CC@CCC[နှင့်/cc.chunk]#NC@PSubj[c/n.person]",
      "NC@PCau[a/n.reason]#PPC@CauP[ကြောင့်/ppm.cause]#VC@Active[b/v.common]",
  });
  const Model m = train(corpus);
  CHECK(m.prior("ppm.use").at("UseP") == 1.0);
  CHECK(m.prior("cc.chunk").at("CCC") == 1.0);
  CHECK(m.transition("PCau", "CauP") == 1.0);
  const std::string prior_text = prior_table_text(m);
  CHECK(prior_text.find("ppm.use#UseP:1.0\n") != std::string::npos);
  CHECK(prior_text.find("cc.chunk#CCC:1.0\n") != std::string::npos);
  CHECK(transition_table_text(m).find("PCau,CauP=1.0\n") != std::string::npos);
}

TEST_CASE("single-chunk sentence has no transitions") {
  const Model m = train(sentences({"VC@Active[စား/v.common]"}));
  CHECK(m.counts().successor.empty());
  CHECK(m.counts().tag.at("Active") == 1);
  CHECK(m.transition("Active", "Active") == 0.0);
  CHECK(m.transition("Nope", "Active") == 0.0);
}

TEST_CASE("eleven of eighteen successors") {
  std::vector<std::string> lines;
  for (int i = 0; i < 18; ++i) {
    lines.push_back(i < 11 ? "NC@PPla[a/n.location]#PPC@PlaP[b/ppm.place]#VC@Active[c/v.common]"
                           : "NC@PPla[a/n.location]#PPC@PlaP[b/ppm.place]#NC@PObj[d/n.objects]");
  }
  const Model m = train(sentences(lines));
  CHECK(m.outgoing("PlaP") == 18);
  CHECK(m.transition("PlaP", "Active") == 11.0 / 18.0);
  CHECK(format_probability(m.transition("PlaP", "Active"), ProbabilityFormat::display) == "0.6111");
  CHECK(transition_table_text(m, ProbabilityFormat::display).find("PlaP,Active=0.6111\n") !=
        std::string::npos);
}

TEST_CASE("Null chunks are skipped and bridged") {
  const Model m = train(sentences({
      "VC@Active[a/v.common]#SFC@Null[b/sf]#CC@CCS[c/cc.sent]#VC@Active[d/v.common]#SFC@Null[e/sf]",
  }));
  CHECK(m.counts().tag.count("Null") == 0);
  CHECK(m.counts().feature.count("sf.declarative") == 0);
  CHECK(m.counts().successor.at({"Active", "CCS"}) == 1);
  CHECK(m.tags() == std::set<std::string>{"Active", "CCS"});
}

TEST_CASE("training preconditions") {
  CHECK_THROWS_AS(train({}), std::invalid_argument);
  CHECK_THROWS_AS(train(sentences({"VC[a/v.common]"})), std::invalid_argument);
  CHECK_THROWS_AS(Model(CountTables{}, ModelOptions{-0.5, false}), std::invalid_argument);
}

TEST_CASE("counts agree with the brute-force recount") {
  Rng rng(101);
  for (int trial = 0; trial < 100; ++trial) {
    const auto features = feature_pool(rng, uniform(rng, 1, 6));
    const auto tags = tag_pool(rng, uniform(rng, 1, 6));
    const auto corpus = pool_corpus(rng, features, tags, 50, 10);
    const Model m = train(corpus);
    CHECK(m.counts() == brute_force_counts(corpus));

    for (const auto& [pc, n] : m.counts().feature) {
      Count sum = 0;
      for (const auto& [key, c] : m.counts().tag_feature) {
        if (key.second == pc) sum += c;
      }
      CHECK(sum == n);
      CHECK(std::abs(prior_row_sum(m, pc) - 1.0) <= 1e-9);
    }
    for (const auto& t : m.tags()) {
      Count out = 0;
      for (const auto& [key, c] : m.counts().successor) {
        if (key.first == t) out += c;
      }
      CHECK(out <= m.counts().tag.at(t));
      if (m.outgoing(t) > 0) CHECK(std::abs(transition_row_sum(m, t) - 1.0) <= 1e-9);
    }
  }
}

TEST_CASE("smoothing keeps rows normalized and covers every tag") {
  Rng rng(5);
  const auto features = feature_pool(rng, 4);
  const auto tags = tag_pool(rng, 5);
  const auto corpus = pool_corpus(rng, features, tags, 30, 8);
  const Model m = train(corpus, {0.5, false});
  for (const auto& pc : m.features()) {
    CHECK(m.prior(pc).size() == m.tags().size());
    CHECK(std::abs(prior_row_sum(m, pc) - 1.0) <= 1e-9);
  }
  for (const auto& t : m.tags()) {
    CHECK(std::abs(transition_row_sum(m, t) - 1.0) <= 1e-9);
    for (const auto& u : m.tags()) CHECK(m.transition(t, u) > 0.0);
  }
}

TEST_CASE("begin-of-sentence factor") {
  const auto corpus = sentences({
      "NC@PSubj[a/n.person]#VC@Active[b/v.common]",
      "NC@PSubj[a/n.person]#VC@Active[b/v.common]",
      "VC@Active[b/v.common]",
  });
  const Model m = train(corpus, {0.0, true});
  CHECK(m.counts().sentences == 3);
  CHECK(m.start("PSubj") == 2.0 / 3.0);
  CHECK(m.start("Active") == 1.0 / 3.0);
  const Model s = train(corpus, {1.0, true});
  CHECK(s.start("PSubj") == 3.0 / 5.0);
}

TEST_CASE("adding a sentence never lowers a count") {
  Rng rng(17);
  const auto features = feature_pool(rng, 5);
  const auto tags = tag_pool(rng, 5);
  auto corpus = pool_corpus(rng, features, tags, 20, 6);
  for (int i = 0; i < 20; ++i) {
    const CountTables before = count_corpus(corpus);
    corpus.push_back(pool_sentence(rng, features, tags, 1, 6, true));
    const CountTables after = count_corpus(corpus);
    for (const auto& [k, v] : before.feature) CHECK(after.feature.at(k) >= v);
    for (const auto& [k, v] : before.tag_feature) CHECK(after.tag_feature.at(k) >= v);
    for (const auto& [k, v] : before.tag) CHECK(after.tag.at(k) >= v);
    for (const auto& [k, v] : before.successor) CHECK(after.successor.at(k) >= v);
    CHECK(after.sentences >= before.sentences);
  }
}

TEST_CASE("training ignores corpus order") {
  Rng rng(23);
  for (int i = 0; i < 20; ++i) {
    auto corpus = pool_corpus(rng, feature_pool(rng, 4), tag_pool(rng, 4), 30, 6);
    const Model a = train(corpus);
    std::shuffle(corpus.begin(), corpus.end(), rng);
    CHECK(train(corpus) == a);
  }
}

TEST_CASE("partial tables merge to the serial counts") {
  Rng rng(29);
  for (int i = 0; i < 20; ++i) {
    const auto corpus = pool_corpus(rng, feature_pool(rng, 5), tag_pool(rng, 5), 50, 8);
    const CountTables serial = count_corpus(corpus);
    for (int threads : {1, 2, 3, 8}) CHECK(count_corpus_parallel(corpus, threads) == serial);
    CHECK(train_parallel(corpus, {}, 4) == train(corpus));

    const std::size_t cut1 = corpus.size() / 3, cut2 = 2 * corpus.size() / 3;
    const std::span<const AnnotatedSentence> all(corpus);
    const CountTables a = count_corpus(all.subspan(0, cut1));
    const CountTables b = count_corpus(all.subspan(cut1, cut2 - cut1));
    const CountTables c = count_corpus(all.subspan(cut2));
    CountTables left = a;
    left.merge(b).merge(c);
    CountTables right = c;
    CountTables bc = b;
    right.merge(bc.merge(a));
    CHECK(left == serial);
    CHECK(right == serial);
  }
}

TEST_CASE("save, load, save is byte-identical") {
  Rng rng(31);
  for (int i = 0; i < 20; ++i) {
    const auto corpus = pool_corpus(rng, feature_pool(rng, 5), tag_pool(rng, 5), 40, 8);
    const Model m = train(corpus, {i % 3 == 0 ? 0.25 : 0.0, i % 2 == 0});
    const auto paths = ModelPaths::from_stem(scratch_stem("m"));
    save_model(m, paths);
    const Model loaded = load_model(paths);
    CHECK(loaded == m);
    const auto again = ModelPaths::from_stem(scratch_stem("m2"));
    save_model(loaded, again);
    CHECK(read_text(paths.prior.string()) == read_text(again.prior.string()));
    CHECK(read_text(paths.transition.string()) == read_text(again.transition.string()));
    CHECK(read_text(paths.counts.string()) == read_text(again.counts.string()));
  }
}

TEST_CASE("empty model persists as empty tables") {
  const auto paths = ModelPaths::from_stem(scratch_stem("empty"));
  save_model(Model{}, paths);
  CHECK(read_text(paths.prior.string()).empty());
  CHECK(read_text(paths.transition.string()).empty());
  const Model loaded = load_model(paths);
  CHECK(loaded.empty());
  CHECK(loaded == Model{});
}

TEST_CASE("model file names") {
  const auto p = ModelPaths::from_stem("/tmp/x/model");
  CHECK(p.prior == "/tmp/x/model.prior.tbl");
  CHECK(p.transition == "/tmp/x/model.trans.tbl");
  CHECK(p.counts == "/tmp/x/model.counts.tbl");
}

TEST_CASE("probability formatting") {
  CHECK(format_probability(1.0, ProbabilityFormat::full) == "1.0");
  CHECK(format_probability(0.25, ProbabilityFormat::full) == "0.25");
  CHECK(format_probability(1.0 / 3.0, ProbabilityFormat::full) == "0.3333333333333333");
  CHECK(format_probability(1.0 / 3.0, ProbabilityFormat::display) == "0.3333");
  CHECK(format_probability(0.2, ProbabilityFormat::display) == "0.2");
  CHECK(format_probability(0.0, ProbabilityFormat::display) == "0.0");
  CHECK(format_probability(0.91494, ProbabilityFormat::display) == "0.9149");
}

TEST_CASE("loading rejects bad tables") {
  const auto corpus = sentences({
      "NC@PSubj[a/n.person]#VC@Active[b/v.common]",
      "NC@PObj[a/n.person]#VC@Active[b/v.common]",
      "NC@PObj[a/n.person]#NC@PSubj[a/n.person]#VC@Active[b/v.common]",
  });
  const Model m = train(corpus);
  const auto stem = scratch_stem("bad");
  const auto paths = ModelPaths::from_stem(stem);

  auto write = [](const std::filesystem::path& p, const std::string& s) {
    std::ofstream(p, std::ios::binary) << s;
  };

  save_model(m, paths);
  write(paths.prior, "n.person#PSubj:1.5\n");
  CHECK_THROWS_AS(load_model(paths), ParseError);

  save_model(m, paths);
  write(paths.prior, "n.person PSubj:0.5\n");
  CHECK_THROWS_AS(load_model(paths), ParseError);

  save_model(m, paths);
  write(paths.transition, "PSubj-Active=1.0\n");
  CHECK_THROWS_AS(load_model(paths), ParseError);

  save_model(m, paths);
  write(paths.counts, "tag\tPSubj\n");
  CHECK_THROWS_AS(load_model(paths), ParseError);

  // Display precision: 1/3 + 2/3 rounds to 0.3333 + 0.6667 = 1.0, but 3 x 1/3 does not.
  save_model(m, paths, ProbabilityFormat::display);
  std::vector<std::string> warnings;
  CHECK(load_model(paths, {false}, &warnings) == m);

  CHECK_THROWS_AS(load_model(ModelPaths::from_stem(stem.string() + "-missing")), std::runtime_error);
}

TEST_CASE("row sums off by more than the tolerance") {
  const auto corpus = sentences({
      "NC@PSubj[a/n.person]#VC@Active[b/v.common]",
      "NC@PObj[a/n.person]#VC@Active[b/v.common]",
      "NC@Tim[a/n.person]#VC@Active[b/v.common]",
  });
  const Model m = train(corpus);
  const auto paths = ModelPaths::from_stem(scratch_stem("rows"));
  save_model(m, paths, ProbabilityFormat::display);
  CHECK(read_text(paths.prior.string()).find("0.3333") != std::string::npos);
  CHECK_THROWS_AS(load_model(paths), ParseError);
  std::vector<std::string> warnings;
  CHECK(load_model(paths, {false}, &warnings) == m);
  CHECK_FALSE(warnings.empty());
}
