#include "destructure/text.h"

#include <algorithm>
#include <clocale>
#include <cwctype>
#include <fstream>
#include <locale.h>
#include <numeric>
#include <sstream>
#include <wctype.h>

#include <nlohmann/json.hpp>

#include "destructure/error.h"

namespace destructure {
namespace {

// C.UTF-8 gives Unicode-aware classification independent of the process
// locale. Null when the locale is not installed; non-ASCII code points are
// then treated as letters and left unfolded.
locale_t utf8_locale() {
  static const locale_t loc = newlocale(LC_CTYPE_MASK, "C.UTF-8", static_cast<locale_t>(0));
  return loc;
}

constexpr char32_t kInvalid = 0xFFFD;

// Decodes one code point starting at text[pos] and advances pos.
char32_t decode_utf8(std::string_view text, std::size_t& pos) {
  const auto lead = static_cast<unsigned char>(text[pos]);
  std::size_t len = 0;
  char32_t cp = 0;
  if (lead < 0x80) {
    ++pos;
    return lead;
  } else if ((lead & 0xE0) == 0xC0) {
    len = 2;
    cp = lead & 0x1F;
  } else if ((lead & 0xF0) == 0xE0) {
    len = 3;
    cp = lead & 0x0F;
  } else if ((lead & 0xF8) == 0xF0) {
    len = 4;
    cp = lead & 0x07;
  } else {
    ++pos;
    return kInvalid;
  }
  if (pos + len > text.size()) {
    ++pos;
    return kInvalid;
  }
  for (std::size_t i = 1; i < len; ++i) {
    const auto cont = static_cast<unsigned char>(text[pos + i]);
    if ((cont & 0xC0) != 0x80) {
      ++pos;
      return kInvalid;
    }
    cp = (cp << 6) | (cont & 0x3F);
  }
  pos += len;
  return cp;
}

void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

bool is_word_char(char32_t cp) {
  if (cp < 0x80) {
    return (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z') || (cp >= '0' && cp <= '9');
  }
  if (cp == kInvalid) return false;
  if (locale_t loc = utf8_locale()) {
    return iswalnum_l(static_cast<wint_t>(cp), loc) != 0;
  }
  return true;
}

char32_t fold_case(char32_t cp) {
  if (cp < 0x80) {
    return (cp >= 'A' && cp <= 'Z') ? cp + ('a' - 'A') : cp;
  }
  if (locale_t loc = utf8_locale()) {
    return static_cast<char32_t>(towlower_l(static_cast<wint_t>(cp), loc));
  }
  return cp;
}

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

// Returns the title when `line` is a "== Title ==" heading.
bool parse_heading(std::string_view line, std::string& title) {
  line = trim(line);
  if (line.size() < 4 || !line.starts_with("==") || !line.ends_with("==")) return false;
  std::string_view inner = line.substr(2, line.size() - 4);
  // Deeper headings ("=== Sub ===") keep their inner '=' markers trimmed too.
  while (!inner.empty() && inner.front() == '=') inner.remove_prefix(1);
  while (!inner.empty() && inner.back() == '=') inner.remove_suffix(1);
  title = std::string(trim(inner));
  return true;
}

void append_section(Document& doc, std::string title, const std::string& body) {
  Section section{std::move(title), {}};
  for (auto& sentence : segment_sentences(body)) {
    const SentenceId id = doc.sentences.size();
    section.sentence_ids.push_back(id);
    doc.sentences.emplace_back(id, std::move(sentence.text));
  }
  if (section.sentence_ids.empty()) {
    throw Error(ErrorCode::kEmptySection, "section '" + section.title + "' in document '" +
                                              doc.doc_id + "' has no sentences");
  }
  doc.sections.push_back(std::move(section));
}

std::unordered_set<std::string> load_stopwords() {
  static constexpr std::string_view kList =
#include "stopwords_en.inc"
      ;
  std::unordered_set<std::string> words;
  std::istringstream in{std::string(kList)};
  std::string line;
  while (std::getline(in, line)) {
    const auto word = trim(line);
    if (word.empty() || word.front() == '#') continue;
    words.emplace(word);
  }
  return words;
}

}  // namespace

Sentence::Sentence(SentenceId id, std::string text)
    : id(id), text(std::move(text)), tokens(tokenize(this->text)) {}

TokenList tokenize(std::string_view text) {
  TokenList tokens;
  std::string current;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const char32_t cp = decode_utf8(text, pos);
    if (is_word_char(cp)) {
      append_utf8(current, fold_case(cp));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::vector<Sentence> segment_sentences(std::string_view text) {
  std::vector<Sentence> sentences;
  std::size_t start = 0;
  auto flush = [&](std::size_t end) {
    const auto fragment = trim(text.substr(start, end - start));
    if (!fragment.empty()) sentences.emplace_back(sentences.size(), std::string(fragment));
    start = end;
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if ((c == '.' || c == '!' || c == '?') && (i + 1 == text.size() || is_space(text[i + 1]))) {
      flush(i + 1);
    }
  }
  flush(text.size());
  return sentences;
}

bool has_section_heading(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line, title;
  while (std::getline(in, line)) {
    if (parse_heading(line, title)) return true;
  }
  return false;
}

Document parse_sectioned_document(std::string_view text, std::string doc_id) {
  Document doc;
  doc.doc_id = std::move(doc_id);
  std::istringstream in{std::string(text)};
  std::string line, title, body;
  bool in_section = false;
  while (std::getline(in, line)) {
    std::string heading;
    if (parse_heading(line, heading)) {
      if (in_section) {
        append_section(doc, std::move(title), body);
      } else if (!trim(body).empty()) {
        append_section(doc, "", body);
      }
      in_section = true;
      title = std::move(heading);
      body.clear();
      continue;
    }
    const auto content = trim(line);
    if (content.empty()) continue;
    if (!body.empty()) body.push_back(' ');
    body.append(content);
  }
  if (!in_section) {
    throw Error(ErrorCode::kNoSections, "document '" + doc.doc_id + "' has no '== Title ==' heading");
  }
  append_section(doc, std::move(title), body);
  return doc;
}

std::vector<Document> parse_jsonl_corpus(std::string_view text) {
  std::vector<Document> corpus;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::string where = "line " + std::to_string(line_no);
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorCode::kParse, where + ": " + e.what());
    }
    if (!obj.is_object() || !obj.contains("doc_id") || !obj["doc_id"].is_string() ||
        !obj.contains("sections") || !obj["sections"].is_array()) {
      throw Error(ErrorCode::kParse, where + ": expected {\"doc_id\": str, \"sections\": [...]}");
    }
    Document doc;
    doc.doc_id = obj["doc_id"].get<std::string>();
    for (const auto& sec : obj["sections"]) {
      if (!sec.is_object() || !sec.contains("title") || !sec["title"].is_string() ||
          !sec.contains("sentences") || !sec["sentences"].is_array()) {
        throw Error(ErrorCode::kParse, where + ": malformed section");
      }
      Section section{sec["title"].get<std::string>(), {}};
      for (const auto& s : sec["sentences"]) {
        if (!s.is_string()) throw Error(ErrorCode::kParse, where + ": sentence is not a string");
        const auto body = trim(s.get_ref<const std::string&>());
        if (body.empty()) continue;
        const SentenceId id = doc.sentences.size();
        section.sentence_ids.push_back(id);
        doc.sentences.emplace_back(id, std::string(body));
      }
      if (section.sentence_ids.empty()) {
        throw Error(ErrorCode::kEmptySection,
                    where + ": section '" + section.title + "' has no sentences");
      }
      doc.sections.push_back(std::move(section));
    }
    if (doc.sections.empty()) {
      throw Error(ErrorCode::kNoSections, where + ": document '" + doc.doc_id + "' has no sections");
    }
    corpus.push_back(std::move(doc));
  }
  return corpus;
}

std::string document_to_jsonl(const Document& doc) {
  nlohmann::json sections = nlohmann::json::array();
  for (const auto& section : doc.sections) {
    nlohmann::json sentences = nlohmann::json::array();
    for (SentenceId id : section.sentence_ids) sentences.push_back(doc.sentences[id].text);
    sections.push_back({{"title", section.title}, {"sentences", std::move(sentences)}});
  }
  return nlohmann::json{{"doc_id", doc.doc_id}, {"sections", std::move(sections)}}.dump();
}

std::vector<SentenceId> shuffled_order(std::size_t n, std::uint64_t seed) {
  std::vector<SentenceId> order(n);
  std::iota(order.begin(), order.end(), SentenceId{0});
  SplitMix64 rng(seed);
  for (std::size_t i = n; i-- > 1;) {
    const auto j = static_cast<std::size_t>(rng.next() % (static_cast<std::uint64_t>(i) + 1));
    std::swap(order[i], order[j]);
  }
  return order;
}

FlatDocument shuffle_document(const Document& doc, std::uint64_t seed) {
  return FlatDocument{doc.doc_id, shuffled_order(doc.sentences.size(), seed), doc.sentences};
}

FlatDocument flatten_document(const Document& doc) {
  std::vector<SentenceId> order;
  order.reserve(doc.sentences.size());
  for (const auto& section : doc.sections) {
    order.insert(order.end(), section.sentence_ids.begin(), section.sentence_ids.end());
  }
  return FlatDocument{doc.doc_id, std::move(order), doc.sentences};
}

FlatDocument flat_from_text(std::string_view text, std::string doc_id) {
  FlatDocument flat;
  flat.doc_id = std::move(doc_id);
  flat.sentences = segment_sentences(text);
  flat.order.resize(flat.sentences.size());
  std::iota(flat.order.begin(), flat.order.end(), SentenceId{0});
  return flat;
}

TokenList flat_tokens(const FlatDocument& flat) {
  TokenList tokens;
  for (SentenceId id : flat.order) {
    const auto& t = flat.sentences[id].tokens;
    tokens.insert(tokens.end(), t.begin(), t.end());
  }
  return tokens;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<Document> load_corpus(const std::filesystem::path& path) {
  namespace fs = std::filesystem;
  auto load_file = [](const fs::path& file, std::vector<Document>& out) {
    const std::string text = read_file(file);
    if (file.extension() == ".jsonl") {
      for (auto& doc : parse_jsonl_corpus(text)) out.push_back(std::move(doc));
    } else {
      out.push_back(parse_sectioned_document(text, file.stem().string()));
    }
  };
  std::vector<Document> corpus;
  std::error_code ec;
  if (fs::is_directory(path, ec)) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(path)) {
      const auto ext = entry.path().extension();
      if (entry.is_regular_file() && (ext == ".jsonl" || ext == ".txt")) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& file : files) load_file(file, corpus);
  } else {
    load_file(path, corpus);
  }
  return corpus;
}

const std::unordered_set<std::string>& english_stopwords() {
  static const std::unordered_set<std::string> words = load_stopwords();
  return words;
}

bool is_ascii_digit_run(std::string_view token) {
  return !token.empty() &&
         std::all_of(token.begin(), token.end(), [](char c) { return c >= '0' && c <= '9'; });
}

}  // namespace destructure
