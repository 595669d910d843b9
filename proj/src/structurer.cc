#include "destructure/structurer.h"

#include <algorithm>
#include <deque>
#include <map>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "destructure/error.h"

namespace destructure {

void StructureParams::validate() const {
  if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("t must be in [0,1]");
  if (keyword_count && *keyword_count == 0) throw std::invalid_argument("keyword count must be positive");
  provider.validate();
  rank.validate();
}

double combined_similarity(double s1, double s2, double t) { return t * s1 + (1.0 - t) * s2; }

CosineSimilarityModel::CosineSimilarityModel(const std::vector<Keyword>& keywords,
                                             std::vector<EmbeddingVector> keyword_vectors,
                                             std::vector<EmbeddingVector> sentence_vectors)
    : keywords_(std::move(keyword_vectors)), sentences_(std::move(sentence_vectors)) {
  if (keywords.size() != keywords_.size()) {
    throw std::invalid_argument("one embedding per keyword required");
  }
  for (std::size_t i = 0; i < keywords.size(); ++i) keyword_index_.emplace(keywords[i].text, i);
}

double CosineSimilarityModel::keyword_sentence(const std::string& keyword, SentenceId id) const {
  return cosine_similarity(keywords_.at(keyword_index_.at(keyword)), sentences_.at(id));
}

double CosineSimilarityModel::sentence_sentence(SentenceId a, SentenceId b) const {
  return cosine_similarity(sentences_.at(a), sentences_.at(b));
}

std::vector<Cluster> seed_clusters(const std::vector<Keyword>& keywords,
                                   const std::vector<SentenceId>& sentence_ids,
                                   const SimilarityModel& similarity) {
  if (keywords.empty() || sentence_ids.size() < keywords.size()) {
    throw Error(ErrorCode::kTooFewSentences, std::to_string(keywords.size()) + " keywords, " +
                                                 std::to_string(sentence_ids.size()) + " sentences");
  }
  std::vector<SentenceId> candidates = sentence_ids;
  std::sort(candidates.begin(), candidates.end());
  std::vector<bool> taken(candidates.size(), false);

  std::vector<Cluster> clusters;
  clusters.reserve(keywords.size());
  for (std::size_t k = 0; k < keywords.size(); ++k) {
    std::optional<std::size_t> best;
    double best_sim = 0.0;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      if (taken[c]) continue;
      const double sim = similarity.keyword_sentence(keywords[k].text, candidates[c]);
      if (!best || sim > best_sim) {
        best = c;
        best_sim = sim;
      }
    }
    taken[*best] = true;
    clusters.push_back(Cluster{keywords[k], candidates[*best], {candidates[*best]}});
  }
  return clusters;
}

double s2_similarity(SentenceId x, const Cluster& cluster, const SimilarityModel& similarity) {
  if (cluster.member_ids.empty()) throw std::invalid_argument("cluster has no members");
  double best = similarity.sentence_sentence(x, cluster.member_ids.front());
  for (std::size_t i = 1; i < cluster.member_ids.size(); ++i) {
    best = std::max(best, similarity.sentence_sentence(x, cluster.member_ids[i]));
  }
  return best;
}

StructuredDocument assign_remaining(std::vector<Cluster> clusters, const FlatDocument& flat,
                                    double t, const SimilarityModel& similarity) {
  if (clusters.empty()) throw Error(ErrorCode::kTooFewSentences, "no clusters to assign to");
  std::vector<bool> assigned(flat.sentences.size(), false);
  for (const auto& cluster : clusters) {
    for (SentenceId id : cluster.member_ids) assigned.at(id) = true;
  }

  for (SentenceId x : flat.order) {
    if (assigned[x]) continue;
    std::size_t best = 0;
    double best_score = 0.0;
    for (std::size_t c = 0; c < clusters.size(); ++c) {
      const double s1 = similarity.keyword_sentence(clusters[c].keyword.text, x);
      const double s2 = s2_similarity(x, clusters[c], similarity);
      const double score = combined_similarity(s1, s2, t);
      if (c == 0 || score > best_score) {
        best = c;
        best_score = score;
      }
    }
    clusters[best].member_ids.push_back(x);
    assigned[x] = true;
  }
  return StructuredDocument{flat.doc_id, std::move(clusters)};
}

namespace {

std::vector<Keyword> override_keywords(const std::vector<std::string>& words, const TokenList& tokens) {
  std::vector<Keyword> keywords;
  for (const auto& word : words) {
    const auto parts = tokenize(word);
    if (parts.empty()) continue;
    if (parts.size() > 1) throw std::invalid_argument("keyword must be a single word: " + word);
    const auto& text = parts.front();
    if (std::any_of(keywords.begin(), keywords.end(), [&](const Keyword& k) { return k.text == text; })) {
      continue;
    }
    const auto pos = std::find(tokens.begin(), tokens.end(), text);
    keywords.push_back(Keyword{text, 0.0, static_cast<std::size_t>(pos - tokens.begin())});
  }
  // Listed order is priority order; scores n, n-1, ..., 1.
  for (std::size_t i = 0; i < keywords.size(); ++i) {
    keywords[i].score = static_cast<double>(keywords.size() - i);
  }
  return keywords;
}

}  // namespace

PreparedDocument prepare_document(const FlatDocument& flat, const StructureParams& params) {
  params.validate();
  const std::size_t n = flat.size();
  if (n == 0) throw Error(ErrorCode::kTooFewSentences, "document '" + flat.doc_id + "' is empty");
  if (flat.sentences.size() != n) {
    throw std::invalid_argument("flat document order does not cover its sentences");
  }

  const TokenList tokens = flat_tokens(flat);
  const auto& stopwords = english_stopwords();

  PreparedDocument prepared;
  if (!params.keyword_override.empty()) {
    prepared.keywords = override_keywords(params.keyword_override, tokens);
    if (prepared.keywords.size() > n) prepared.keywords.resize(n);
    if (prepared.keywords.empty()) {
      throw Error(ErrorCode::kTooFewSentences, "keyword override yields no keywords");
    }
  } else {
    const std::size_t k = std::min(params.keyword_count.value_or(default_keyword_count(tokens, stopwords)), n);
    prepared.keywords = extract_keywords(tokens, k, params.rank, stopwords);
  }

  std::vector<TokenList> fit_corpus;
  std::vector<std::string> texts;
  fit_corpus.reserve(n + prepared.keywords.size());
  texts.reserve(n + prepared.keywords.size());
  for (const auto& keyword : prepared.keywords) texts.push_back(keyword.text);
  for (const auto& sentence : flat.sentences) {
    fit_corpus.push_back(sentence.tokens);
    texts.push_back(sentence.text);
  }
  for (const auto& keyword : prepared.keywords) fit_corpus.push_back(TokenList{keyword.text});

  auto provider = make_provider(params.provider, fit_corpus);
  auto vectors = provider->embed_batch(texts);
  const auto split = vectors.begin() + static_cast<std::ptrdiff_t>(prepared.keywords.size());
  std::vector<EmbeddingVector> keyword_vectors(std::make_move_iterator(vectors.begin()),
                                               std::make_move_iterator(split));
  std::vector<EmbeddingVector> sentence_vectors(std::make_move_iterator(split),
                                                std::make_move_iterator(vectors.end()));
  prepared.similarity = std::make_shared<CosineSimilarityModel>(prepared.keywords, std::move(keyword_vectors),
                                                                std::move(sentence_vectors));
  return prepared;
}

StructuredDocument cluster_prepared(const PreparedDocument& prepared, const FlatDocument& flat,
                                    double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("t must be in [0,1]");
  std::vector<SentenceId> ids(flat.sentences.size());
  std::iota(ids.begin(), ids.end(), SentenceId{0});
  auto clusters = seed_clusters(prepared.keywords, ids, *prepared.similarity);
  return assign_remaining(std::move(clusters), flat, t, *prepared.similarity);
}

StructuredDocument structure_document(const FlatDocument& flat, const StructureParams& params) {
  return cluster_prepared(prepare_document(flat, params), flat, params.t);
}

std::string structured_to_json(const StructuredDocument& doc, const FlatDocument& flat) {
  nlohmann::json clusters = nlohmann::json::array();
  for (const auto& cluster : doc.clusters) {
    nlohmann::json sentences = nlohmann::json::array();
    for (SentenceId id : cluster.member_ids) sentences.push_back(flat.sentences.at(id).text);
    clusters.push_back({{"keyword", cluster.keyword.text},
                        {"score", cluster.keyword.score},
                        {"sentences", std::move(sentences)}});
  }
  return nlohmann::json{{"doc_id", doc.doc_id}, {"clusters", std::move(clusters)}}.dump(2) + "\n";
}

std::string structured_to_text(const StructuredDocument& doc, const FlatDocument& flat) {
  std::string out;
  for (const auto& cluster : doc.clusters) {
    out += "== " + cluster.keyword.text + " ==\n";
    for (SentenceId id : cluster.member_ids) out += flat.sentences.at(id).text + "\n";
    out += "\n";
  }
  return out;
}

StructuredDocument structured_from_json(const std::string& json, const Document& original) {
  std::unordered_map<std::string, std::deque<SentenceId>> by_text;
  for (const auto& sentence : original.sentences) by_text[sentence.text].push_back(sentence.id);

  StructuredDocument doc;
  try {
    const auto root = nlohmann::json::parse(json);
    doc.doc_id = root.at("doc_id").get<std::string>();
    for (const auto& c : root.at("clusters")) {
      Cluster cluster;
      cluster.keyword.text = c.at("keyword").get<std::string>();
      cluster.keyword.score = c.value("score", 0.0);
      for (const auto& s : c.at("sentences")) {
        auto it = by_text.find(s.get<std::string>());
        if (it == by_text.end() || it->second.empty()) {
          throw Error(ErrorCode::kIdSetMismatch, "sentence not in original document: " + s.get<std::string>());
        }
        cluster.member_ids.push_back(it->second.front());
        it->second.pop_front();
      }
      if (cluster.member_ids.empty()) throw Error(ErrorCode::kParse, "cluster without sentences");
      cluster.seed_id = cluster.member_ids.front();
      doc.clusters.push_back(std::move(cluster));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("structured document: ") + e.what());
  }
  return doc;
}

}  // namespace destructure
