// Serial reference vs OpenMP kernels on a replicated fixture corpus.
// usage: bench_kernels [copies] [threads]

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "fntag/corpus.hpp"
#include "fntag/grammar.hpp"
#include "fntag/model.hpp"
#include "fntag/relations.hpp"
#include "fntag/tagger.hpp"
#include "fntag/text.hpp"

namespace {

template <typename Fn>
double seconds(Fn&& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  fn();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void report(const char* name, double serial, double parallel, bool same) {
  std::printf("%-12s serial %8.4fs  parallel %8.4fs  speedup %5.2fx  %s\n", name, serial, parallel,
              parallel > 0 ? serial / parallel : 0.0, same ? "equal" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
  const int copies = argc > 1 ? std::atoi(argv[1]) : 5000;
  const int threads = argc > 2 ? std::atoi(argv[2]) : omp_get_max_threads();

  const auto fixture = fntag::load_corpus(FNTAG_DATA_DIR "/examples.corpus");
  std::vector<std::string> lines;
  for (int c = 0; c < copies; ++c) {
    for (const auto& s : fixture.sentences) lines.push_back(fntag::serialize_sentence(s));
  }
  std::printf("sentences %zu, threads %d\n", lines.size(), threads);

  fntag::LoadOptions serial_load;
  serial_load.threads = 1;
  fntag::LoadOptions parallel_load;
  parallel_load.threads = threads;
  fntag::Corpus a, b;
  const double parse_s = seconds([&] { a = fntag::parse_corpus_lines(lines, serial_load); });
  const double parse_p = seconds([&] { b = fntag::parse_corpus_lines(lines, parallel_load); });
  report("parse", parse_s, parse_p, a.sentences == b.sentences);

  fntag::CountTables ca, cb;
  const double count_s = seconds([&] { ca = fntag::count_corpus(a.sentences); });
  const double count_p = seconds([&] { cb = fntag::count_corpus_parallel(a.sentences, threads); });
  report("count", count_s, count_p, ca == cb);

  const fntag::Model model(ca);
  std::vector<fntag::AnnotatedSentence> inputs;
  for (const auto& s : a.sentences) inputs.push_back(fntag::strip_tags(s));
  std::vector<fntag::TagSequence> ta, tb;
  const double tag_s = seconds([&] { ta = fntag::tag_batch_serial(model, inputs); });
  const double tag_p = seconds([&] { tb = fntag::tag_batch(model, inputs, {}, threads); });
  bool same_tags = ta.size() == tb.size();
  for (std::size_t i = 0; same_tags && i < ta.size(); ++i) same_tags = ta[i].tags() == tb[i].tags();
  report("tag", tag_s, tag_p, same_tags);

  const fntag::Grammar grammar = fntag::default_grammar();
  std::vector<std::vector<std::string>> terminals;
  for (const auto& t : ta) {
    const auto tags = t.tags();
    terminals.push_back(fntag::tags_to_terminals(grammar, tags));
  }
  std::vector<bool> ra, rb;
  const double rec_s = seconds([&] { ra = fntag::recognize_batch_serial(grammar, terminals); });
  const double rec_p = seconds([&] { rb = fntag::recognize_batch(grammar, terminals, threads); });
  report("recognize", rec_s, rec_p, ra == rb);
  return 0;
}
