#pragma once

// Keyword-seeded sentence clustering. Each keyword seeds one cluster with its
// most similar sentence; every other sentence then joins the cluster that
// maximizes  t * S1 + (1 - t) * S2, where S1 is the similarity to the keyword
// and S2 the best similarity to a sentence already in the cluster.

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "destructure/embeddings.h"
#include "destructure/text.h"
#include "destructure/textrank.h"

namespace destructure {

struct Cluster {
  Keyword keyword;
  SentenceId seed_id = 0;
  std::vector<SentenceId> member_ids;  // seed first, then assignment order

  bool operator==(const Cluster&) const = default;
};

// Clusters are ordered by descending keyword score.
struct StructuredDocument {
  std::string doc_id;
  std::vector<Cluster> clusters;

  bool operator==(const StructuredDocument&) const = default;
};

struct StructureParams {
  double t = 0.25;
  std::optional<std::size_t> keyword_count;  // nullopt: default_keyword_count
  std::vector<std::string> keyword_override;  // non-empty: skip TextRank
  ProviderConfig provider;
  RankParams rank;

  void validate() const;
};

double combined_similarity(double s1, double s2, double t);

// Pairwise similarities consumed by seeding and assignment.
class SimilarityModel {
 public:
  virtual ~SimilarityModel() = default;
  virtual double keyword_sentence(const std::string& keyword, SentenceId id) const = 0;
  virtual double sentence_sentence(SentenceId a, SentenceId b) const = 0;
};

// Cosine similarity over per-keyword and per-sentence embeddings.
class CosineSimilarityModel final : public SimilarityModel {
 public:
  CosineSimilarityModel(const std::vector<Keyword>& keywords,
                        std::vector<EmbeddingVector> keyword_vectors,
                        std::vector<EmbeddingVector> sentence_vectors);

  double keyword_sentence(const std::string& keyword, SentenceId id) const override;
  double sentence_sentence(SentenceId a, SentenceId b) const override;

  const std::vector<EmbeddingVector>& keyword_vectors() const { return keywords_; }
  const std::vector<EmbeddingVector>& sentence_vectors() const { return sentences_; }

 private:
  std::vector<EmbeddingVector> keywords_;
  std::vector<EmbeddingVector> sentences_;
  std::unordered_map<std::string, std::size_t> keyword_index_;
};

/// `keywords` are in priority (descending score) order. Each in turn claims
/// the unassigned sentence most similar to it (ties: lowest id).
/// Throws Error{kTooFewSentences}.
std::vector<Cluster> seed_clusters(const std::vector<Keyword>& keywords,
                                   const std::vector<SentenceId>& sentence_ids,
                                   const SimilarityModel& similarity);

/// Max similarity between sentence `x` and the cluster's current members.
double s2_similarity(SentenceId x, const Cluster& cluster, const SimilarityModel& similarity);

/// Single pass over unassigned sentences in flat order; each joins the argmax
/// cluster (ties: earlier cluster, i.e. higher keyword score, as clusters come
/// in priority order). Clusters grow during the pass.
StructuredDocument assign_remaining(std::vector<Cluster> clusters, const FlatDocument& flat,
                                    double t, const SimilarityModel& similarity);

// Everything assignment needs that does not depend on t: keywords, their
// embeddings and the sentence embeddings.
struct PreparedDocument {
  std::vector<Keyword> keywords;
  std::shared_ptr<const CosineSimilarityModel> similarity;
};

/// Keywords (TextRank or override, clamped to #sentences) and embeddings.
PreparedDocument prepare_document(const FlatDocument& flat, const StructureParams& params);

/// Seeds and assigns using a prepared document.
StructuredDocument cluster_prepared(const PreparedDocument& prepared, const FlatDocument& flat,
                                    double t);

/// tokenize -> keywords -> embed -> seed -> assign.
StructuredDocument structure_document(const FlatDocument& flat, const StructureParams& params);

/// {"doc_id": str, "clusters": [{"keyword": str, "score": float, "sentences": [str]}]}
std::string structured_to_json(const StructuredDocument& doc, const FlatDocument& flat);
/// "== keyword ==" headings followed by one sentence per line.
std::string structured_to_text(const StructuredDocument& doc, const FlatDocument& flat);

/// Reads the JSON form back, mapping sentence texts onto ids of `original`
/// (repeated texts are matched in id order). Throws Error{kParse} or
/// Error{kIdSetMismatch}.
StructuredDocument structured_from_json(const std::string& json, const Document& original);

}  // namespace destructure
