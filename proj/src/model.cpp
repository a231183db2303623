#include "fntag/model.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "fntag/error.hpp"
#include "fntag/text.hpp"

namespace fntag {

namespace {

constexpr double kRowSumTolerance = 1e-6;
// Display files are rounded to 4 decimals.
constexpr double kFileAgreementTolerance = 5.1e-5;

void count_sentence(const AnnotatedSentence& sentence, CountTables& t) {
  if (!sentence.annotated()) {
    throw std::invalid_argument("training sentence is not fully annotated: " +
                                serialize_sentence(sentence));
  }
  const std::string* prev = nullptr;
  for (const Chunk& chunk : sentence.chunks) {
    const std::string& tag = *chunk.tag;
    if (tag == kNullTag) continue;
    std::string pc = feature_of(chunk);
    ++t.tag_feature[{tag, pc}];
    ++t.feature[std::move(pc)];
    ++t.tag[tag];
    if (prev) {
      ++t.successor[{*prev, tag}];
    } else {
      ++t.start[tag];
    }
    prev = &tag;
  }
  if (prev) ++t.sentences;
}

template <typename Map>
void add_into(Map& into, const Map& from) {
  for (const auto& [k, v] : from) into[k] += v;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

double parse_probability(std::string_view s, std::size_t line, std::size_t offset) {
  double p;
  if (!text::parse_double(s, p)) throw ParseError("malformed probability", offset, line);
  if (!(p >= 0.0 && p <= 1.0)) throw ParseError("probability outside [0,1]", offset, line);
  return p;
}

void check_row_sum(double sum, const std::string& what, std::size_t line, bool strict,
                   std::vector<std::string>* warnings) {
  if (std::fabs(sum - 1.0) <= kRowSumTolerance) return;
  std::string msg = what + " sums to " + text::format_double(sum);
  if (strict) throw ParseError(msg, ParseError::npos, line);
  if (warnings) warnings->push_back("line " + std::to_string(line) + ": " + msg);
}

void check_agreement(double in_file, double from_counts, const std::string& what,
                     std::size_t line) {
  if (std::fabs(in_file - from_counts) > kFileAgreementTolerance) {
    throw ParseError(what + " disagrees with counts (" + text::format_double(in_file) + " vs " +
                         text::format_double(from_counts) + ")",
                     ParseError::npos, line);
  }
}

}  // namespace

CountTables& CountTables::merge(const CountTables& other) {
  add_into(feature, other.feature);
  add_into(tag_feature, other.tag_feature);
  add_into(tag, other.tag);
  add_into(successor, other.successor);
  add_into(start, other.start);
  sentences += other.sentences;
  return *this;
}

Model::Model(CountTables counts, ModelOptions options)
    : counts_(std::move(counts)), options_(options) {
  if (!(options_.alpha >= 0.0)) throw std::invalid_argument("smoothing alpha must be >= 0");
  for (const auto& [tag, n] : counts_.tag) {
    if (n > 0) tags_.insert(tag);
  }
  for (const auto& [pc, n] : counts_.feature) {
    if (n > 0) features_.insert(pc);
  }
  for (const auto& [key, n] : counts_.successor) outgoing_[key.first] += n;
}

bool Model::knows_feature(std::string_view pc) const {
  return features_.find(std::string(pc)) != features_.end();
}

std::map<std::string, double> Model::prior(std::string_view pc) const {
  std::map<std::string, double> out;
  auto it = counts_.feature.find(std::string(pc));
  if (it == counts_.feature.end() || it->second == 0) return out;
  const double alpha = options_.alpha;
  const double denom = static_cast<double>(it->second) + alpha * static_cast<double>(tags_.size());
  if (alpha > 0.0) {
    for (const auto& tag : tags_) out[tag] = alpha / denom;
  }
  const std::string key(pc);
  for (auto tf = counts_.tag_feature.begin(); tf != counts_.tag_feature.end(); ++tf) {
    if (tf->first.second != key || tf->second == 0) continue;
    out[tf->first.first] = (static_cast<double>(tf->second) + alpha) / denom;
  }
  return out;
}

double Model::prior(std::string_view pc, std::string_view tag) const {
  auto it = counts_.feature.find(std::string(pc));
  if (it == counts_.feature.end() || it->second == 0) return 0.0;
  const double alpha = options_.alpha;
  double num = alpha;
  if (auto tf = counts_.tag_feature.find({std::string(tag), std::string(pc)});
      tf != counts_.tag_feature.end()) {
    num += static_cast<double>(tf->second);
  }
  if (alpha > 0.0 && tags_.find(std::string(tag)) == tags_.end()) return 0.0;
  return num / (static_cast<double>(it->second) + alpha * static_cast<double>(tags_.size()));
}

Count Model::outgoing(std::string_view prev) const {
  auto it = outgoing_.find(prev);
  return it == outgoing_.end() ? 0 : it->second;
}

double Model::transition(std::string_view prev, std::string_view next) const {
  const double alpha = options_.alpha;
  double num = alpha;
  if (auto it = counts_.successor.find({std::string(prev), std::string(next)});
      it != counts_.successor.end()) {
    num += static_cast<double>(it->second);
  }
  if (alpha > 0.0 && tags_.find(std::string(next)) == tags_.end()) return 0.0;
  const double denom =
      static_cast<double>(outgoing(prev)) + alpha * static_cast<double>(tags_.size());
  return denom > 0.0 ? num / denom : 0.0;
}

double Model::start(std::string_view tag) const {
  const double alpha = options_.alpha;
  double num = alpha;
  if (auto it = counts_.start.find(std::string(tag)); it != counts_.start.end()) {
    num += static_cast<double>(it->second);
  }
  if (alpha > 0.0 && tags_.find(std::string(tag)) == tags_.end()) return 0.0;
  const double denom =
      static_cast<double>(counts_.sentences) + alpha * static_cast<double>(tags_.size());
  return denom > 0.0 ? num / denom : 0.0;
}

CountTables count_corpus(std::span<const AnnotatedSentence> corpus) {
  CountTables tables;
  for (const auto& sentence : corpus) count_sentence(sentence, tables);
  return tables;
}

CountTables count_corpus_parallel(std::span<const AnnotatedSentence> corpus, int threads) {
  const int nthreads = threads > 0 ? threads : omp_get_max_threads();
  std::vector<CountTables> partial(static_cast<std::size_t>(nthreads));
  std::vector<std::string> errors(static_cast<std::size_t>(nthreads));
  const auto n = static_cast<std::ptrdiff_t>(corpus.size());

#pragma omp parallel num_threads(nthreads)
  {
    const auto tid = static_cast<std::size_t>(omp_get_thread_num());
#pragma omp for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      if (!errors[tid].empty()) continue;
      try {
        count_sentence(corpus[i], partial[tid]);
      } catch (const std::exception& e) {
        errors[tid] = e.what();
      }
    }
  }
  for (const auto& e : errors) {
    if (!e.empty()) throw std::invalid_argument(e);
  }
  CountTables total;
  for (const auto& p : partial) total.merge(p);
  return total;
}

Model train(std::span<const AnnotatedSentence> corpus, ModelOptions options) {
  if (corpus.empty()) throw std::invalid_argument("cannot train on an empty corpus");
  return Model(count_corpus(corpus), options);
}

Model train_parallel(std::span<const AnnotatedSentence> corpus, ModelOptions options, int threads) {
  if (corpus.empty()) throw std::invalid_argument("cannot train on an empty corpus");
  return Model(count_corpus_parallel(corpus, threads), options);
}

ModelPaths ModelPaths::from_stem(const std::filesystem::path& stem) {
  auto with = [&](const char* suffix) {
    auto p = stem;
    p += suffix;
    return p;
  };
  return {with(".prior.tbl"), with(".trans.tbl"), with(".counts.tbl")};
}

std::string format_probability(double p, ProbabilityFormat format) {
  return format == ProbabilityFormat::full ? text::format_double(p) : text::format_rounded(p, 4);
}

std::string prior_table_text(const Model& model, ProbabilityFormat format) {
  std::string out;
  for (const auto& pc : model.features()) {
    auto row = model.prior(pc);
    std::vector<std::pair<std::string, double>> sorted(row.begin(), row.end());
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    out += pc;
    out += '#';
    for (std::size_t i = 0; i < sorted.size(); ++i) {
      if (i) out += ',';
      out += sorted[i].first;
      out += ':';
      out += format_probability(sorted[i].second, format);
    }
    out += '\n';
  }
  return out;
}

std::string transition_table_text(const Model& model, ProbabilityFormat format) {
  std::string out;
  for (const auto& [key, n] : model.counts().successor) {
    if (n == 0) continue;
    out += key.first;
    out += ',';
    out += key.second;
    out += '=';
    out += format_probability(model.transition(key.first, key.second), format);
    out += '\n';
  }
  return out;
}

std::string counts_text(const Model& model) {
  const auto& c = model.counts();
  std::ostringstream out;
  out << "option alpha\t" << text::format_double(model.options().alpha) << '\n';
  out << "option bos\t" << (model.options().begin_of_sentence ? 1 : 0) << '\n';
  out << "sentences\t" << c.sentences << '\n';
  for (const auto& [pc, n] : c.feature) out << "pc " << pc << '\t' << n << '\n';
  for (const auto& [k, n] : c.tag_feature) out << "tag_pc " << k.first << ' ' << k.second << '\t' << n << '\n';
  for (const auto& [t, n] : c.tag) out << "tag " << t << '\t' << n << '\n';
  for (const auto& [k, n] : c.successor) out << "next " << k.first << ' ' << k.second << '\t' << n << '\n';
  for (const auto& [t, n] : c.start) out << "start " << t << '\t' << n << '\n';
  return out.str();
}

void save_model(const Model& model, const ModelPaths& paths, ProbabilityFormat format) {
  write_file(paths.prior, prior_table_text(model, format));
  write_file(paths.transition, transition_table_text(model, format));
  write_file(paths.counts, counts_text(model));
}

Model parse_counts_text(std::string_view content) {
  CountTables tables;
  ModelOptions options;
  std::size_t line_no = 0;
  for (std::string_view line : text::split(content, '\n')) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (text::trim(line).empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string_view::npos) throw ParseError("missing TAB", 0, line_no);
    auto key = text::split_whitespace(line.substr(0, tab));
    std::string_view value = line.substr(tab + 1);
    if (key.empty()) throw ParseError("empty key", 0, line_no);
    const std::string& kind = key[0];

    if (kind == "option" && key.size() == 2) {
      if (key[1] == "alpha") {
        if (!text::parse_double(value, options.alpha) || !(options.alpha >= 0.0)) {
          throw ParseError("malformed alpha", tab + 1, line_no);
        }
      } else if (key[1] == "bos") {
        unsigned long long b;
        if (!text::parse_uint(value, b) || b > 1) throw ParseError("malformed bos flag", tab + 1, line_no);
        options.begin_of_sentence = b == 1;
      } else {
        throw ParseError("unknown option '" + key[1] + "'", 0, line_no);
      }
      continue;
    }

    unsigned long long n;
    if (!text::parse_uint(value, n)) throw ParseError("malformed count", tab + 1, line_no);
    if (kind == "sentences" && key.size() == 1) {
      tables.sentences = n;
    } else if (kind == "pc" && key.size() == 2) {
      tables.feature[key[1]] = n;
    } else if (kind == "tag_pc" && key.size() == 3) {
      tables.tag_feature[{key[1], key[2]}] = n;
    } else if (kind == "tag" && key.size() == 2) {
      tables.tag[key[1]] = n;
    } else if (kind == "next" && key.size() == 3) {
      tables.successor[{key[1], key[2]}] = n;
    } else if (kind == "start" && key.size() == 2) {
      tables.start[key[1]] = n;
    } else {
      throw ParseError("unknown count key", 0, line_no);
    }
  }
  return Model(std::move(tables), options);
}

Model load_model(const ModelPaths& paths, const ModelLoadOptions& options,
                 std::vector<std::string>* warnings) {
  Model model = parse_counts_text(read_file(paths.counts));

  const std::string prior = read_file(paths.prior);
  std::size_t line_no = 0;
  std::set<std::string> seen_features;
  for (std::string_view line : text::split(prior, '\n')) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (text::trim(line).empty()) continue;
    const auto hash = line.find('#');
    if (hash == std::string_view::npos) throw ParseError("missing '#'", 0, line_no);
    const std::string pc(text::trim(line.substr(0, hash)));
    if (pc.empty()) throw ParseError("empty feature", 0, line_no);
    if (!model.knows_feature(pc)) throw ParseError("feature '" + pc + "' not in counts", 0, line_no);
    seen_features.insert(pc);
    double sum = 0.0;
    std::size_t offset = hash + 1;
    for (std::string_view item : text::split(line.substr(hash + 1), ',')) {
      const auto colon = item.rfind(':');
      if (colon == std::string_view::npos) throw ParseError("missing ':'", offset, line_no);
      const std::string tag(text::trim(item.substr(0, colon)));
      if (tag.empty()) throw ParseError("empty tag", offset, line_no);
      const double p = parse_probability(item.substr(colon + 1), line_no, offset + colon + 1);
      check_agreement(p, model.prior(pc, tag), "P(" + tag + "|" + pc + ")", line_no);
      sum += p;
      offset += item.size() + 1;
    }
    check_row_sum(sum, "prior row for " + pc, line_no, options.strict, warnings);
  }
  if (seen_features.size() != model.features().size()) {
    throw ParseError("prior file does not cover every feature in counts");
  }

  const std::string trans = read_file(paths.transition);
  line_no = 0;
  std::map<std::string, std::pair<double, std::size_t>> row_sums;
  for (std::string_view line : text::split(trans, '\n')) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (text::trim(line).empty()) continue;
    const auto comma = line.find(',');
    const auto eq = line.find('=');
    if (comma == std::string_view::npos || eq == std::string_view::npos || eq < comma) {
      throw ParseError("expected prev,next=probability", 0, line_no);
    }
    const std::string prev(text::trim(line.substr(0, comma)));
    const std::string next(text::trim(line.substr(comma + 1, eq - comma - 1)));
    if (prev.empty() || next.empty()) throw ParseError("empty tag", 0, line_no);
    const double p = parse_probability(line.substr(eq + 1), line_no, eq + 1);
    check_agreement(p, model.transition(prev, next), "P(" + next + "|" + prev + ")", line_no);
    auto& row = row_sums[prev];
    row.first += p;
    row.second = line_no;
  }
  if (model.options().alpha == 0.0) {
    for (const auto& [prev, row] : row_sums) {
      check_row_sum(row.first, "transition row for " + prev, row.second, options.strict, warnings);
    }
  }
  return model;
}

}  // namespace fntag
