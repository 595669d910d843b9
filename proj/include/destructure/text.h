#pragma once

// Document model, sentence segmentation, tokenization, corpus ingestion and
// seeded shuffling.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace destructure {

using SentenceId = std::size_t;
using TokenList = std::vector<std::string>;

struct Sentence {
  SentenceId id = 0;
  std::string text;
  TokenList tokens;

  Sentence() = default;
  Sentence(SentenceId id, std::string text);

  bool operator==(const Sentence&) const = default;
};

struct Section {
  std::string title;
  std::vector<SentenceId> sentence_ids;

  bool operator==(const Section&) const = default;
};

// Sections partition the sentence ids; sentences[i].id == i.
struct Document {
  std::string doc_id;
  std::vector<Section> sections;
  std::vector<Sentence> sentences;
};

// An unlabeled reading order over a document's sentences. `sentences` is
// indexed by id; `order` is the permutation in which they are presented.
struct FlatDocument {
  std::string doc_id;
  std::vector<SentenceId> order;
  std::vector<Sentence> sentences;

  std::size_t size() const { return order.size(); }
};

// SplitMix64. The output sequence depends only on the seed.
class SplitMix64 {
 public:
  explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  constexpr std::uint64_t next() noexcept {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  constexpr std::uint64_t state() const noexcept { return state_; }

 private:
  std::uint64_t state_;
};

/// Lowercased maximal runs of Unicode letters/digits (UTF-8 input).
TokenList tokenize(std::string_view text);

/// Splits after '.', '!' or '?' followed by whitespace or end of text.
std::vector<Sentence> segment_sentences(std::string_view text);

/// Parses wiki-style text where each "== Title ==" line opens a section.
/// Throws Error{kNoSections} without a heading and Error{kEmptySection} when a
/// heading has no body sentences. Text before the first heading becomes a
/// section with an empty title.
Document parse_sectioned_document(std::string_view text, std::string doc_id);

bool has_section_heading(std::string_view text);

/// One JSON object per line:
///   {"doc_id": str, "sections": [{"title": str, "sentences": [str]}]}
/// Blank lines are skipped. Throws Error{kParse} on malformed lines.
std::vector<Document> parse_jsonl_corpus(std::string_view text);

std::string document_to_jsonl(const Document& doc);

/// Fisher-Yates over ids 0..n-1, i from n-1 down to 1, j = next() % (i+1).
std::vector<SentenceId> shuffled_order(std::size_t n, std::uint64_t seed);

FlatDocument shuffle_document(const Document& doc, std::uint64_t seed);

/// Presents the document in its original reading order.
FlatDocument flatten_document(const Document& doc);

/// Treats plain text as one unlabeled sentence sequence.
FlatDocument flat_from_text(std::string_view text, std::string doc_id);

/// Concatenation of sentence tokens in presentation order.
TokenList flat_tokens(const FlatDocument& flat);

/// Loads a corpus from a .jsonl file, a wiki-style .txt file, or a directory of
/// such files (sorted by file name). Throws Error{kIo} / parse errors.
std::vector<Document> load_corpus(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);

/// The bundled English stopword list.
const std::unordered_set<std::string>& english_stopwords();

bool is_ascii_digit_run(std::string_view token);

}  // namespace destructure
