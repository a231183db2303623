#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace fntag {

enum class ChunkType { NC, PPC, AC, RC, CC, SFC, VC };

inline constexpr ChunkType kAllChunkTypes[] = {ChunkType::NC,  ChunkType::PPC, ChunkType::AC,
                                               ChunkType::RC,  ChunkType::CC,  ChunkType::SFC,
                                               ChunkType::VC};

std::string_view to_string(ChunkType type);
std::optional<ChunkType> chunk_type_from_string(std::string_view s);

// Tag carried by sentence-final chunks.
inline constexpr std::string_view kNullTag = "Null";

// The function-tag inventory a corpus is validated against.
class Tagset {
 public:
  struct Entry {
    std::string tag;
    std::string description;
  };

  Tagset() = default;
  explicit Tagset(std::vector<Entry> entries);

  // The function tagset plus Null.
  static const Tagset& standard();

  bool contains(std::string_view tag) const;
  const std::string* description(std::string_view tag) const;
  const std::vector<Entry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

 private:
  std::vector<Entry> entries_;
};

// One word with its POS and semantic category, "word/base.category".
struct WordEntry {
  std::string word;
  std::string pos;

  std::string_view pos_base() const;
  std::string_view pos_category() const;

  friend bool operator==(const WordEntry&, const WordEntry&) = default;
};

struct Chunk {
  ChunkType type = ChunkType::NC;
  std::optional<std::string> tag;
  std::vector<WordEntry> words;

  friend bool operator==(const Chunk&, const Chunk&) = default;
};

struct AnnotatedSentence {
  std::vector<Chunk> chunks;
  bool terminated = false;

  // True when every chunk carries a function tag (training form).
  bool annotated() const;

  friend bool operator==(const AnnotatedSentence&, const AnnotatedSentence&) = default;
};

struct LineOptions {
  // Rewrites the POS base "verb" to "v" and a bare "sf" to "sf.declarative".
  bool normalize_pos = true;
  // Defaults to Tagset::standard().
  const Tagset* tagset = nullptr;
};

// Parses one corpus line:
//   sentence := chunk ("#" chunk)* ["#"] ["။"]
//   chunk    := TYPE ["@" TAG] "[" WORD "/" POS ("," WORD "/" POS)* "]"
// Whitespace around separators is ignored. Throws ParseError with the byte
// offset of the problem.
AnnotatedSentence parse_sentence_line(std::string_view line, const LineOptions& options = {});

// Canonical form: no whitespace, the sentence mark directly after the last chunk.
std::string serialize_sentence(const AnnotatedSentence& sentence);

// Returns the sentence with every function tag removed (input form).
AnnotatedSentence strip_tags(AnnotatedSentence sentence);

// Head word of a chunk: the last entry whose POS base is compatible with the
// chunk type (NC: n/pron, PPC: ppm, AC: adj, RC: adv, CC: cc, SFC: sf,
// VC: v/verb). When nothing is compatible the last entry is used and
// `fallback` is set.
struct Head {
  WordEntry entry;
  bool fallback = false;
};

Head head_of_chunk(const Chunk& chunk);

// The emission feature of a chunk: its head's "base.category" string.
std::string feature_of(const Chunk& chunk);

struct LineDiagnostic {
  std::size_t line = 0;  // 1-based
  std::size_t offset = 0;
  std::string reason;
};

struct Corpus {
  std::vector<AnnotatedSentence> sentences;
  // Source line number of each sentence, parallel to `sentences`.
  std::vector<std::size_t> line_numbers;
  std::vector<LineDiagnostic> diagnostics;
};

struct LoadOptions {
  // Strict loading throws if any line is rejected.
  bool strict = true;
  LineOptions line;
  // 0 uses the OpenMP default.
  int threads = 0;
};

// One sentence per line; blank lines and lines starting with "//" are skipped.
Corpus read_corpus(std::istream& in, const LoadOptions& options = {});
Corpus load_corpus(const std::filesystem::path& path, const LoadOptions& options = {});

// Parses already-split lines in parallel; the result keeps input order.
Corpus parse_corpus_lines(std::span<const std::string> lines, const LoadOptions& options = {});

}  // namespace fntag
