#include "fntag/corpus.hpp"

#include <omp.h>

#include <algorithm>
#include <array>
#include <fstream>
#include <istream>
#include <sstream>

#include "fntag/error.hpp"
#include "fntag/text.hpp"

namespace fntag {

namespace {

constexpr std::array<std::string_view, 7> kChunkNames = {"NC", "PPC", "AC", "RC",
                                                         "CC", "SFC", "VC"};

bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }

class LineParser {
 public:
  LineParser(std::string_view line, const LineOptions& options)
      : line_(line),
        options_(options),
        tagset_(options.tagset ? *options.tagset : Tagset::standard()) {}

  AnnotatedSentence parse() {
    if (auto bad = text::find_invalid_utf8(line_); bad != std::string_view::npos) {
      throw ParseError("invalid UTF-8", bad);
    }
    AnnotatedSentence sentence;
    std::vector<std::size_t> chunk_offsets;
    skip_space();
    if (at_end()) throw ParseError("empty sentence", 0);
    if (at_mark()) throw ParseError("sentence has no chunks", pos_);
    for (;;) {
      chunk_offsets.push_back(pos_);
      sentence.chunks.push_back(parse_chunk());
      skip_space();
      if (at_end()) break;
      if (at_mark()) {
        finish_with_mark(sentence);
        break;
      }
      if (line_[pos_] == ']') fail("unbalanced ']'");
      if (line_[pos_] != '#') fail("expected '#' between chunks");
      ++pos_;
      skip_space();
      if (at_mark()) {
        finish_with_mark(sentence);
        break;
      }
      if (at_end()) fail("dangling '#' at end of sentence");
    }

    const bool first_tagged = sentence.chunks.front().tag.has_value();
    for (std::size_t i = 1; i < sentence.chunks.size(); ++i) {
      if (sentence.chunks[i].tag.has_value() != first_tagged) {
        throw ParseError("mixed annotated and unannotated chunks", chunk_offsets[i]);
      }
    }
    return sentence;
  }

 private:
  bool at_end() const { return pos_ >= line_.size(); }
  bool at_mark() const { return line_.substr(pos_, text::kSentenceMark.size()) == text::kSentenceMark; }

  void skip_space() {
    while (!at_end() && text::is_space(line_[pos_])) ++pos_;
  }

  [[noreturn]] void fail(const std::string& reason) const { throw ParseError(reason, pos_); }
  [[noreturn]] void fail_at(const std::string& reason, std::size_t at) const {
    throw ParseError(reason, at);
  }

  void finish_with_mark(AnnotatedSentence& sentence) {
    pos_ += text::kSentenceMark.size();
    skip_space();
    if (!at_end()) fail("unexpected text after sentence mark");
    sentence.terminated = true;
  }

  Chunk parse_chunk() {
    Chunk chunk;
    const std::size_t type_start = pos_;
    while (!at_end() && is_upper(line_[pos_])) ++pos_;
    std::string_view type_name = line_.substr(type_start, pos_ - type_start);
    if (type_name.empty()) {
      if (!at_end() && line_[pos_] == ']') fail("unbalanced ']'");
      fail("expected chunk type");
    }
    auto type = chunk_type_from_string(type_name);
    if (!type) fail_at("unknown chunk type '" + std::string(type_name) + "'", type_start);
    chunk.type = *type;

    skip_space();
    if (!at_end() && line_[pos_] == '@') {
      ++pos_;
      skip_space();
      const std::size_t tag_start = pos_;
      while (!at_end() && line_[pos_] != '[' && !text::is_space(line_[pos_]) &&
             line_[pos_] != '#') {
        ++pos_;
      }
      std::string tag(line_.substr(tag_start, pos_ - tag_start));
      if (tag.empty()) fail("empty function tag");
      if (!tagset_.contains(tag)) fail_at("unknown function tag '" + tag + "'", tag_start);
      chunk.tag = std::move(tag);
      skip_space();
    }

    if (at_end() || line_[pos_] != '[') fail("expected '['");
    const std::size_t body_start = ++pos_;
    while (!at_end() && line_[pos_] != ']') {
      if (line_[pos_] == '[') fail("nested '['");
      if (line_[pos_] == '#') fail("missing ']' before '#'");
      ++pos_;
    }
    if (at_end()) fail_at("missing ']'", body_start - 1);
    const std::size_t body_end = pos_++;
    parse_body(chunk, body_start, body_end);
    return chunk;
  }

  void parse_body(Chunk& chunk, std::size_t begin, std::size_t end) {
    std::string_view body = line_.substr(begin, end - begin);
    if (text::trim(body).empty()) fail_at("empty chunk body", begin);
    std::size_t entry_start = begin;
    for (std::string_view raw : text::split(body, ',')) {
      chunk.words.push_back(parse_entry(raw, entry_start));
      entry_start += raw.size() + 1;
    }
  }

  WordEntry parse_entry(std::string_view raw, std::size_t at) {
    if (text::trim(raw).empty()) fail_at("empty word entry", at);
    const auto slash = raw.find('/');
    if (slash == std::string_view::npos) fail_at("word entry without '/'", at);
    std::string_view word = text::trim(raw.substr(0, slash));
    std::string_view pos = text::trim(raw.substr(slash + 1));
    if (word.empty()) fail_at("empty word", at);
    if (word.find_first_of("@#") != std::string_view::npos) fail_at("reserved character in word", at);
    const std::size_t pos_at = at + slash + 1;
    if (pos.empty()) fail_at("empty POS", pos_at);
    if (pos.find('/') != std::string_view::npos) fail_at("more than one '/' in word entry", pos_at);
    if (std::any_of(pos.begin(), pos.end(), text::is_space) ||
        pos.find_first_of("@#") != std::string_view::npos) {
      fail_at("malformed POS '" + std::string(pos) + "'", pos_at);
    }
    const auto dot = pos.find('.');
    if (dot != std::string_view::npos &&
        (dot == 0 || dot + 1 == pos.size() || pos.find('.', dot + 1) != std::string_view::npos)) {
      fail_at("malformed POS '" + std::string(pos) + "'", pos_at);
    }
    return WordEntry{std::string(word), normalize(pos)};
  }

  std::string normalize(std::string_view pos) const {
    if (!options_.normalize_pos) return std::string(pos);
    if (pos == "sf") return "sf.declarative";
    if (pos == "verb") return "v";
    if (text::starts_with(pos, "verb.")) return "v" + std::string(pos.substr(4));
    return std::string(pos);
  }

  std::string_view line_;
  const LineOptions& options_;
  const Tagset& tagset_;
  std::size_t pos_ = 0;
};

bool compatible(ChunkType type, std::string_view base) {
  switch (type) {
    case ChunkType::NC: return base == "n" || base == "pron";
    case ChunkType::PPC: return base == "ppm";
    case ChunkType::AC: return base == "adj";
    case ChunkType::RC: return base == "adv";
    case ChunkType::CC: return base == "cc";
    case ChunkType::SFC: return base == "sf";
    case ChunkType::VC: return base == "v" || base == "verb";
  }
  return false;
}

bool skip_line(std::string_view line) {
  auto t = text::trim(line);
  return t.empty() || text::starts_with(t, "//");
}

}  // namespace

std::string_view to_string(ChunkType type) { return kChunkNames[static_cast<std::size_t>(type)]; }

std::optional<ChunkType> chunk_type_from_string(std::string_view s) {
  for (std::size_t i = 0; i < kChunkNames.size(); ++i) {
    if (kChunkNames[i] == s) return static_cast<ChunkType>(i);
  }
  return std::nullopt;
}

Tagset::Tagset(std::vector<Entry> entries) : entries_(std::move(entries)) {}

const Tagset& Tagset::standard() {
  static const Tagset tags({
      {"Active", "Verb"},
      {"Subj", "Subject"},
      {"PSubj", "Subject"},
      {"SubjP", "Postposition of Subject"},
      {"Obj", "Object"},
      {"PObj", "Object"},
      {"ObjP", "Postposition of Object"},
      {"PIobj", "Indirect Object"},
      {"IobjP", "Postposition of Indirect Object"},
      {"Pla", "Place"},
      {"PPla", "Place"},
      {"PlaP", "Postposition of Place"},
      {"Tim", "Time"},
      {"PTim", "Time"},
      {"TimP", "Postposition of Time"},
      {"PExt", "Extract"},
      {"ExtP", "Postposition of Extract"},
      {"PSim", "Simile"},
      {"SimP", "Postposition of Simile"},
      {"PCom", "Compare"},
      {"ComP", "Postposition of Compare"},
      {"POwn", "Own"},
      {"OwnP", "Postposition of Own"},
      {"Ada", "Adjective"},
      {"PcomplS", "Subject Complement"},
      {"PcomplP", "Object Complement"},
      {"PPcomplO", "Object Complement"},
      {"PcomplOP", "Postposition of Object Complement"},
      {"PUse", "Use"},
      {"UseP", "Postposition of Use"},
      {"PCau", "Cause"},
      {"CauP", "Postposition of Cause"},
      {"PAim", "Aim"},
      {"AimP", "Postposition of Aim"},
      {"CCS", "Join the sentences"},
      {"CCM", "Join the meanings"},
      {"CCC", "Join the words"},
      {"CCP", "Join with particles"},
      {"CCA", "Join as an adjective"},
      {std::string(kNullTag), "Sentence-final chunk"},
  });
  return tags;
}

bool Tagset::contains(std::string_view tag) const { return description(tag) != nullptr; }

const std::string* Tagset::description(std::string_view tag) const {
  for (const auto& e : entries_) {
    if (e.tag == tag) return &e.description;
  }
  return nullptr;
}

std::string_view WordEntry::pos_base() const {
  std::string_view p = pos;
  return p.substr(0, p.find('.'));
}

std::string_view WordEntry::pos_category() const {
  std::string_view p = pos;
  auto dot = p.find('.');
  return dot == std::string_view::npos ? std::string_view{} : p.substr(dot + 1);
}

bool AnnotatedSentence::annotated() const {
  return !chunks.empty() &&
         std::all_of(chunks.begin(), chunks.end(), [](const Chunk& c) { return c.tag.has_value(); });
}

AnnotatedSentence parse_sentence_line(std::string_view line, const LineOptions& options) {
  return LineParser(line, options).parse();
}

std::string serialize_sentence(const AnnotatedSentence& sentence) {
  std::string out;
  for (std::size_t i = 0; i < sentence.chunks.size(); ++i) {
    const Chunk& c = sentence.chunks[i];
    if (i) out += '#';
    out += to_string(c.type);
    if (c.tag) {
      out += '@';
      out += *c.tag;
    }
    out += '[';
    for (std::size_t k = 0; k < c.words.size(); ++k) {
      if (k) out += ',';
      out += c.words[k].word;
      out += '/';
      out += c.words[k].pos;
    }
    out += ']';
  }
  if (sentence.terminated) out += text::kSentenceMark;
  return out;
}

AnnotatedSentence strip_tags(AnnotatedSentence sentence) {
  for (auto& c : sentence.chunks) c.tag.reset();
  return sentence;
}

Head head_of_chunk(const Chunk& chunk) {
  for (auto it = chunk.words.rbegin(); it != chunk.words.rend(); ++it) {
    if (compatible(chunk.type, it->pos_base())) return Head{*it, false};
  }
  if (chunk.words.empty()) return Head{WordEntry{}, true};
  return Head{chunk.words.back(), true};
}

std::string feature_of(const Chunk& chunk) { return head_of_chunk(chunk).entry.pos; }

Corpus parse_corpus_lines(std::span<const std::string> lines, const LoadOptions& options) {
  const auto n = static_cast<std::ptrdiff_t>(lines.size());
  std::vector<std::optional<AnnotatedSentence>> parsed(lines.size());
  std::vector<std::optional<LineDiagnostic>> errors(lines.size());

  const int threads = options.threads > 0 ? options.threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 16) num_threads(threads)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const std::string& line = lines[i];
    if (skip_line(line)) continue;
    try {
      parsed[i] = parse_sentence_line(line, options.line);
    } catch (const ParseError& e) {
      errors[i] = LineDiagnostic{static_cast<std::size_t>(i) + 1,
                                 e.offset() == ParseError::npos ? 0 : e.offset(), e.reason()};
    }
  }

  Corpus corpus;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (parsed[i]) {
      corpus.sentences.push_back(std::move(*parsed[i]));
      corpus.line_numbers.push_back(i + 1);
    }
    if (errors[i]) corpus.diagnostics.push_back(std::move(*errors[i]));
  }
  if (options.strict && !corpus.diagnostics.empty()) {
    std::ostringstream msg;
    msg << corpus.diagnostics.size() << " corpus line(s) rejected";
    const auto& first = corpus.diagnostics.front();
    msg << "; first at line " << first.line << ", byte " << first.offset << ": " << first.reason;
    throw ParseError(msg.str(), first.offset, first.line);
  }
  return corpus;
}

Corpus read_corpus(std::istream& in, const LoadOptions& options) {
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(std::move(line));
  return parse_corpus_lines(lines, options);
}

Corpus load_corpus(const std::filesystem::path& path, const LoadOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open corpus file " + path.string());
  return read_corpus(in, options);
}

}  // namespace fntag
