#include "destructure/embeddings.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "destructure/error.h"

namespace destructure {

bool EmbeddingVector::is_zero() const {
  return std::all_of(values.begin(), values.end(), [](double x) { return x == 0.0; });
}

double EmbeddingVector::norm() const {
  double sum = 0.0;
  for (double x : values) sum += x * x;
  return std::sqrt(sum);
}

double cosine_similarity(const EmbeddingVector& u, const EmbeddingVector& v) {
  if (u.dim() != v.dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                std::to_string(u.dim()) + " vs " + std::to_string(v.dim()));
  }
  double dot = 0.0;
  double uu = 0.0;
  double vv = 0.0;
  for (std::size_t i = 0; i < u.dim(); ++i) {
    dot += u.values[i] * v.values[i];
    uu += u.values[i] * u.values[i];
    vv += v.values[i] * v.values[i];
  }
  if (uu == 0.0 || vv == 0.0) return 0.0;
  return std::clamp(dot / (std::sqrt(uu) * std::sqrt(vv)), -1.0, 1.0);
}

void normalize(EmbeddingVector& v) {
  const double n = v.norm();
  if (n == 0.0) return;
  for (double& x : v.values) x /= n;
}

std::optional<std::size_t> TfidfModel::index_of(const std::string& term) const {
  auto it = vocabulary.find(term);
  if (it == vocabulary.end()) return std::nullopt;
  return it->second;
}

double TfidfModel::idf(std::size_t dimension) const {
  return std::log((1.0 + static_cast<double>(n_docs)) /
                  (1.0 + static_cast<double>(doc_freq[dimension]))) +
         1.0;
}

TfidfModel tfidf_fit(std::span<const TokenList> sentences) {
  if (sentences.empty()) throw std::invalid_argument("tfidf_fit needs at least one sentence");
  TfidfModel model;
  model.n_docs = sentences.size();
  std::vector<std::size_t> last_seen;  // per dimension: last sentence index + 1
  for (std::size_t s = 0; s < sentences.size(); ++s) {
    for (const auto& token : sentences[s]) {
      auto [it, inserted] = model.vocabulary.try_emplace(token, model.terms.size());
      if (inserted) {
        model.terms.push_back(token);
        model.doc_freq.push_back(0);
        last_seen.push_back(0);
      }
      if (last_seen[it->second] != s + 1) {
        last_seen[it->second] = s + 1;
        ++model.doc_freq[it->second];
      }
    }
  }
  return model;
}

EmbeddingVector tfidf_embed(const TfidfModel& model, const TokenList& tokens) {
  EmbeddingVector v;
  v.values.assign(model.dim(), 0.0);
  for (const auto& token : tokens) {
    if (auto idx = model.index_of(token)) v.values[*idx] += 1.0;
  }
  for (std::size_t i = 0; i < v.dim(); ++i) {
    if (v.values[i] != 0.0) v.values[i] *= model.idf(i);
  }
  normalize(v);
  return v;
}

void ProviderConfig::validate() const {
  if (kind == ProviderKind::kRemote && endpoint.empty()) {
    throw std::invalid_argument("remote provider requires an endpoint");
  }
  if (kind == ProviderKind::kTfidf && !endpoint.empty()) {
    throw std::invalid_argument("endpoint is only valid for the remote provider");
  }
}

// --- cache -----------------------------------------------------------------------------

void EmbeddingCache::touch(std::list<Entry>::iterator it) {
  entries_.splice(entries_.begin(), entries_, it);
}

std::optional<EmbeddingVector> EmbeddingCache::get(const std::string& text) {
  std::lock_guard lock(mutex_);
  auto it = index_.find(text);
  if (it == index_.end()) return std::nullopt;
  touch(it->second);
  return it->second->second;
}

EmbeddingVector EmbeddingCache::get_or_insert(const std::string& text, EmbeddingVector value) {
  if (capacity_ == 0) return value;
  std::lock_guard lock(mutex_);
  if (auto it = index_.find(text); it != index_.end()) {
    touch(it->second);
    return it->second->second;
  }
  entries_.emplace_front(text, std::move(value));
  index_.emplace(text, entries_.begin());
  if (entries_.size() > capacity_) {
    index_.erase(entries_.back().first);
    entries_.pop_back();
  }
  return entries_.front().second;
}

std::size_t EmbeddingCache::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

std::vector<EmbeddingVector> EmbeddingProvider::embed_batch(std::span<const std::string> texts) {
  std::vector<std::optional<EmbeddingVector>> found(texts.size());
  // Unique missing texts, in first-appearance order.
  std::vector<std::string> missing;
  std::unordered_map<std::string, std::size_t> missing_index;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    if (cache_.capacity() > 0) found[i] = cache_.get(texts[i]);
    if (!found[i] && missing_index.try_emplace(texts[i], missing.size()).second) {
      missing.push_back(texts[i]);
    }
  }
  std::vector<EmbeddingVector> fresh;
  if (!missing.empty()) {
    fresh = embed_uncached(missing);
    if (fresh.size() != missing.size()) {
      throw Error(ErrorCode::kContractViolation, "provider returned " + std::to_string(fresh.size()) +
                                                     " vectors for " +
                                                     std::to_string(missing.size()) + " texts");
    }
    for (std::size_t m = 0; m < missing.size(); ++m) {
      fresh[m] = cache_.get_or_insert(missing[m], std::move(fresh[m]));
    }
  }
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (std::size_t i = 0; i < texts.size(); ++i) {
    out.push_back(found[i] ? std::move(*found[i]) : fresh[missing_index.at(texts[i])]);
  }
  return out;
}

// --- TF-IDF provider -------------------------------------------------------------------

TfidfProvider::TfidfProvider(TfidfModel model, std::size_t cache_capacity)
    : EmbeddingProvider(cache_capacity), model_(std::move(model)) {}

std::vector<EmbeddingVector> TfidfProvider::embed_uncached(std::span<const std::string> texts) {
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (const auto& text : texts) out.push_back(tfidf_embed(model_, tokenize(text)));
  return out;
}

// --- remote provider -------------------------------------------------------------------

namespace {

void configure(httplib::Client& client, const RemoteTimeouts& timeouts) {
  client.set_connection_timeout(timeouts.connect);
  client.set_read_timeout(timeouts.request);
  client.set_write_timeout(timeouts.request);
}

std::string describe(const httplib::Result& res) {
  return httplib::to_string(res.error());
}

}  // namespace

Endpoint parse_endpoint(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos || url.compare(0, scheme_end, "http") != 0) {
    throw std::invalid_argument("endpoint must be an http:// URL: " + url);
  }
  const auto path_start = url.find('/', scheme_end + 3);
  Endpoint endpoint;
  endpoint.scheme_host_port = url.substr(0, path_start);
  if (endpoint.scheme_host_port.size() == scheme_end + 3) {
    throw std::invalid_argument("endpoint has no host: " + url);
  }
  if (path_start != std::string::npos) {
    endpoint.base_path = url.substr(path_start);
    while (!endpoint.base_path.empty() && endpoint.base_path.back() == '/') endpoint.base_path.pop_back();
  }
  return endpoint;
}

std::vector<EmbeddingVector> decode_embed_response(const std::string& body,
                                                   std::size_t expected_count) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(body);
  } catch (const nlohmann::json::exception& e) {
    // Includes numbers that overflow a double.
    throw Error(ErrorCode::kContractViolation, std::string("response is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("vectors") || !doc["vectors"].is_array() ||
      !doc.contains("dim") || !doc["dim"].is_number_integer()) {
    throw Error(ErrorCode::kContractViolation, "response lacks \"vectors\" or \"dim\"");
  }
  const auto& vectors = doc["vectors"];
  if (vectors.size() != expected_count) {
    throw Error(ErrorCode::kContractViolation, "expected " + std::to_string(expected_count) +
                                                   " vectors, got " + std::to_string(vectors.size()));
  }
  const auto dim = doc["dim"].get<std::int64_t>();
  if (dim <= 0) throw Error(ErrorCode::kContractViolation, "non-positive dim");
  std::vector<EmbeddingVector> out;
  out.reserve(vectors.size());
  for (const auto& vec : vectors) {
    if (!vec.is_array() || static_cast<std::int64_t>(vec.size()) != dim) {
      throw Error(ErrorCode::kContractViolation, "vector length differs from dim " + std::to_string(dim));
    }
    EmbeddingVector v;
    v.values.reserve(vec.size());
    for (const auto& x : vec) {
      if (!x.is_number()) throw Error(ErrorCode::kContractViolation, "non-numeric vector entry");
      const double value = x.get<double>();
      if (!std::isfinite(value)) throw Error(ErrorCode::kContractViolation, "non-finite vector entry");
      v.values.push_back(value);
    }
    out.push_back(std::move(v));
  }
  return out;
}

RemoteProvider::RemoteProvider(std::string endpoint, std::size_t cache_capacity,
                               RemoteTimeouts timeouts)
    : EmbeddingProvider(cache_capacity),
      endpoint_(std::move(endpoint)),
      parsed_(parse_endpoint(endpoint_)),
      timeouts_(timeouts) {}

RemoteProvider::Health RemoteProvider::health() const {
  httplib::Client client(parsed_.scheme_host_port);
  configure(client, timeouts_);
  auto res = client.Get(parsed_.base_path + "/health");
  if (!res) throw Error(ErrorCode::kRemoteUnavailable, endpoint_ + ": " + describe(res));
  if (res->status == 503) throw Error(ErrorCode::kRemoteUnavailable, endpoint_ + ": service loading");
  if (res->status != 200) {
    throw Error(ErrorCode::kContractViolation, "/health returned HTTP " + std::to_string(res->status));
  }
  try {
    const auto doc = nlohmann::json::parse(res->body);
    return Health{doc.at("status").get<std::string>(), doc.value("model", std::string{})};
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kContractViolation, std::string("malformed /health body: ") + e.what());
  }
}

std::vector<EmbeddingVector> RemoteProvider::fetch_raw(std::span<const std::string> texts) const {
  httplib::Client client(parsed_.scheme_host_port);
  configure(client, timeouts_);
  const nlohmann::json request{{"texts", std::vector<std::string>(texts.begin(), texts.end())}};
  auto res = client.Post(parsed_.base_path + "/embed", request.dump(), "application/json");
  if (!res) throw Error(ErrorCode::kRemoteUnavailable, endpoint_ + ": " + describe(res));
  if (res->status >= 500) {
    throw Error(ErrorCode::kRemoteUnavailable, "/embed returned HTTP " + std::to_string(res->status));
  }
  if (res->status != 200) {
    throw Error(ErrorCode::kContractViolation, "/embed returned HTTP " + std::to_string(res->status));
  }
  return decode_embed_response(res->body, texts.size());
}

std::vector<EmbeddingVector> RemoteProvider::embed_uncached(std::span<const std::string> texts) {
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  std::optional<std::size_t> dim;
  for (std::size_t start = 0; start < texts.size(); start += kMaxBatch) {
    const auto count = std::min(kMaxBatch, texts.size() - start);
    for (auto& v : fetch_raw(texts.subspan(start, count))) {
      if (dim && v.dim() != *dim) {
        throw Error(ErrorCode::kContractViolation, "dimension changed between batches");
      }
      dim = v.dim();
      normalize(v);
      out.push_back(std::move(v));
    }
  }
  return out;
}

std::unique_ptr<EmbeddingProvider> make_provider(const ProviderConfig& config,
                                                 std::span<const TokenList> fit_corpus) {
  config.validate();
  if (config.kind == ProviderKind::kRemote) {
    return std::make_unique<RemoteProvider>(config.endpoint, config.cache_capacity);
  }
  return std::make_unique<TfidfProvider>(tfidf_fit(fit_corpus), config.cache_capacity);
}

// --- conformance -----------------------------------------------------------------------

std::vector<ConformanceCheck> run_conformance(const std::string& endpoint, RemoteTimeouts timeouts) {
  std::vector<ConformanceCheck> checks;
  RemoteProvider provider(endpoint, 0, timeouts);
  const Endpoint parsed = parse_endpoint(endpoint);

  auto record = [&](std::string name, auto&& body) {
    ConformanceCheck check{std::move(name), false, false, {}};
    try {
      body(check);
    } catch (const std::exception& e) {
      check.passed = false;
      check.detail = e.what();
    }
    checks.push_back(std::move(check));
  };
  auto post_status = [&](const std::string& body) {
    httplib::Client client(parsed.scheme_host_port);
    configure(client, timeouts);
    auto res = client.Post(parsed.base_path + "/embed", body, "application/json");
    if (!res) throw Error(ErrorCode::kRemoteUnavailable, describe(res));
    return res->status;
  };

  bool ready = false;
  record("health", [&](ConformanceCheck& c) {
    const auto h = provider.health();
    ready = h.status == "ok";
    c.passed = ready;
    c.detail = "status=" + h.status + " model=" + h.model;
  });

  const std::vector<std::string> texts{"The river floods every spring.",
                                       "Markets reopened after the holiday.",
                                       "The river floods every spring.",
                                       "A short sentence."};
  record("order_preservation", [&](ConformanceCheck& c) {
    const auto forward = provider.fetch_raw(texts);
    const std::vector<std::string> reversed(texts.rbegin(), texts.rend());
    const auto backward = provider.fetch_raw(reversed);
    c.passed = true;
    for (std::size_t i = 0; i < texts.size(); ++i) {
      c.passed = c.passed && forward[i] == backward[texts.size() - 1 - i];
    }
    c.detail = c.passed ? "reversed request returns reversed vectors" : "vectors do not follow request order";
  });
  record("unit_norm", [&](ConformanceCheck& c) {
    double worst = 0.0;
    for (const auto& v : provider.fetch_raw(texts)) worst = std::max(worst, std::abs(v.norm() - 1.0));
    c.passed = worst <= 1e-6;
    c.detail = "max |norm - 1| = " + std::to_string(worst);
  });
  record("determinism", [&](ConformanceCheck& c) {
    const auto first = provider.fetch_raw(texts);
    const auto second = provider.fetch_raw(texts);
    c.passed = first[0] == first[2] && first == second;
    c.detail = c.passed ? "repeated text yields identical vectors" : "repeated text yields different vectors";
  });
  record("error_400_empty_texts", [&](ConformanceCheck& c) {
    const int status = post_status(R"({"texts": []})");
    c.passed = status == 400;
    c.detail = "HTTP " + std::to_string(status);
  });
  record("error_400_malformed_json", [&](ConformanceCheck& c) {
    const int status = post_status("{not json");
    c.passed = status == 400;
    c.detail = "HTTP " + std::to_string(status);
  });
  record("error_413_batch_too_large", [&](ConformanceCheck& c) {
    const nlohmann::json body{{"texts", std::vector<std::string>(RemoteProvider::kMaxBatch + 1, "x")}};
    const int status = post_status(body.dump());
    c.passed = status == 413;
    c.detail = "HTTP " + std::to_string(status);
  });
  record("error_503_not_ready", [&](ConformanceCheck& c) {
    if (ready) {
      c.skipped = true;
      c.passed = true;
      c.detail = "service already ready";
      return;
    }
    const int status = post_status(R"({"texts": ["x"]})");
    c.passed = status == 503;
    c.detail = "HTTP " + std::to_string(status);
  });
  return checks;
}

}  // namespace destructure
