#pragma once

// Sentence embedding providers: an in-process TF-IDF backend and a client for
// the remote embedding service, both behind EmbeddingProvider.

#include <chrono>
#include <cstddef>
#include <list>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "destructure/text.h"

namespace destructure {

// Unit L2 norm, or all zeros when the text had no known terms.
struct EmbeddingVector {
  std::vector<double> values;

  std::size_t dim() const { return values.size(); }
  bool is_zero() const;
  double norm() const;

  bool operator==(const EmbeddingVector&) const = default;
};

/// dot(u,v) / (|u| |v|), clamped to [-1, 1]; 0.0 if either vector is zero.
/// Throws Error{kDimensionMismatch}.
double cosine_similarity(const EmbeddingVector& u, const EmbeddingVector& v);

/// Scales to unit norm in place; zero vectors are left as is.
void normalize(EmbeddingVector& v);

struct TfidfModel {
  std::vector<std::string> terms;  // dimension -> term, first-appearance order
  std::unordered_map<std::string, std::size_t> vocabulary;
  std::vector<std::size_t> doc_freq;  // per dimension
  std::size_t n_docs = 0;

  std::size_t dim() const { return terms.size(); }
  std::optional<std::size_t> index_of(const std::string& term) const;
  // ln((1 + n_docs) / (1 + df)) + 1
  double idf(std::size_t dimension) const;
};

TfidfModel tfidf_fit(std::span<const TokenList> sentences);

EmbeddingVector tfidf_embed(const TfidfModel& model, const TokenList& tokens);

enum class ProviderKind { kTfidf, kRemote };

struct ProviderConfig {
  ProviderKind kind = ProviderKind::kTfidf;
  std::string endpoint;            // remote only
  std::size_t cache_capacity = 4096;

  // Throws std::invalid_argument unless endpoint is set iff kind is remote.
  void validate() const;
};

// Thread-safe LRU map from exact text to its embedding. Capacity 0 disables
// caching.
class EmbeddingCache {
 public:
  explicit EmbeddingCache(std::size_t capacity) : capacity_(capacity) {}

  std::optional<EmbeddingVector> get(const std::string& text);
  // Keeps an existing entry for `text` and returns it; otherwise stores
  // `value` and returns it.
  EmbeddingVector get_or_insert(const std::string& text, EmbeddingVector value);

  std::size_t size() const;
  std::size_t capacity() const { return capacity_; }

 private:
  using Entry = std::pair<std::string, EmbeddingVector>;
  void touch(std::list<Entry>::iterator it);

  std::size_t capacity_;
  mutable std::mutex mutex_;
  std::list<Entry> entries_;  // most recent first
  std::unordered_map<std::string, std::list<Entry>::iterator> index_;
};

class EmbeddingProvider {
 public:
  explicit EmbeddingProvider(std::size_t cache_capacity) : cache_(cache_capacity) {}
  virtual ~EmbeddingProvider() = default;

  EmbeddingProvider(const EmbeddingProvider&) = delete;
  EmbeddingProvider& operator=(const EmbeddingProvider&) = delete;

  /// One vector per text, same order. Identical texts map to identical
  /// vectors for the lifetime of the provider.
  std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts);

  const EmbeddingCache& cache() const { return cache_; }

 protected:
  virtual std::vector<EmbeddingVector> embed_uncached(std::span<const std::string> texts) = 0;

 private:
  EmbeddingCache cache_;
};

class TfidfProvider final : public EmbeddingProvider {
 public:
  explicit TfidfProvider(TfidfModel model, std::size_t cache_capacity = 0);

  const TfidfModel& model() const { return model_; }

 protected:
  std::vector<EmbeddingVector> embed_uncached(std::span<const std::string> texts) override;

 private:
  TfidfModel model_;
};

struct RemoteTimeouts {
  std::chrono::milliseconds connect{5000};
  std::chrono::milliseconds request{60000};
};

struct Endpoint {
  std::string scheme_host_port;  // e.g. "http://localhost:8080"
  std::string base_path;         // "" or "/prefix" without trailing slash
};

/// Splits "http://host:port/prefix". Throws std::invalid_argument.
Endpoint parse_endpoint(const std::string& url);

// Client for POST {endpoint}/embed and GET {endpoint}/health.
class RemoteProvider final : public EmbeddingProvider {
 public:
  static constexpr std::size_t kMaxBatch = 256;

  explicit RemoteProvider(std::string endpoint, std::size_t cache_capacity = 4096,
                          RemoteTimeouts timeouts = {});

  struct Health {
    std::string status;
    std::string model;
  };
  /// Throws Error{kRemoteUnavailable} or Error{kContractViolation}.
  Health health() const;

  /// Validated but not re-normalized vectors for one request of at most
  /// kMaxBatch texts.
  std::vector<EmbeddingVector> fetch_raw(std::span<const std::string> texts) const;

  const std::string& endpoint() const { return endpoint_; }

 protected:
  std::vector<EmbeddingVector> embed_uncached(std::span<const std::string> texts) override;

 private:
  std::string endpoint_;
  Endpoint parsed_;
  RemoteTimeouts timeouts_;
};

/// Parses and validates an /embed response body for `expected_count` texts.
/// Throws Error{kContractViolation}.
std::vector<EmbeddingVector> decode_embed_response(const std::string& body,
                                                   std::size_t expected_count);

/// TF-IDF providers are fitted on `fit_corpus`; remote providers ignore it.
std::unique_ptr<EmbeddingProvider> make_provider(const ProviderConfig& config,
                                                 std::span<const TokenList> fit_corpus);

// Result of probing an endpoint against the embedding contract.
struct ConformanceCheck {
  std::string name;
  bool passed = false;
  bool skipped = false;
  std::string detail;
};

/// Exercises health, order preservation, unit norms (1e-6), determinism on
/// repeated text, and the 400/413 error paths. 503 can only be observed while
/// the service is loading and is reported as skipped when health is ok.
std::vector<ConformanceCheck> run_conformance(const std::string& endpoint,
                                              RemoteTimeouts timeouts = {});

}  // namespace destructure
