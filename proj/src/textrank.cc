#include "destructure/textrank.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "destructure/error.h"

namespace destructure {
namespace {

bool is_candidate(const std::string& token, const std::unordered_set<std::string>& stopwords) {
  return !is_ascii_digit_run(token) && !stopwords.contains(token);
}

}  // namespace

void RankParams::validate() const {
  if (!(damping > 0.0 && damping < 1.0)) throw std::invalid_argument("damping must be in (0,1)");
  if (!(tolerance > 0.0)) throw std::invalid_argument("tolerance must be positive");
  if (max_iterations == 0) throw std::invalid_argument("max_iterations must be positive");
  if (window < 2) throw std::invalid_argument("window must be at least 2");
}

CooccurrenceGraph::NodeIndex CooccurrenceGraph::add_node(const std::string& word) {
  auto [it, inserted] = index_.try_emplace(word, nodes_.size());
  if (inserted) {
    nodes_.push_back(word);
    adjacency_.emplace_back();
    strength_.push_back(0);
  }
  return it->second;
}

void CooccurrenceGraph::add_edge(NodeIndex a, NodeIndex b, Weight weight) {
  if (a == b || weight == 0) return;
  adjacency_[a][b] += weight;
  adjacency_[b][a] += weight;
  strength_[a] += weight;
  strength_[b] += weight;
}

std::size_t CooccurrenceGraph::edge_count() const {
  std::size_t twice = 0;
  for (const auto& adj : adjacency_) twice += adj.size();
  return twice / 2;
}

std::optional<CooccurrenceGraph::NodeIndex> CooccurrenceGraph::find(std::string_view word) const {
  auto it = index_.find(std::string(word));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

CooccurrenceGraph::Weight CooccurrenceGraph::weight(NodeIndex a, NodeIndex b) const {
  const auto& adj = adjacency_[a];
  auto it = adj.find(b);
  return it == adj.end() ? 0 : it->second;
}

CooccurrenceGraph::Weight CooccurrenceGraph::weight(std::string_view a, std::string_view b) const {
  auto ia = find(a);
  auto ib = find(b);
  return (ia && ib) ? weight(*ia, *ib) : 0;
}

CooccurrenceGraph build_cooccurrence_graph(const TokenList& tokens,
                                           const std::unordered_set<std::string>& stopwords,
                                           std::size_t window) {
  if (window < 2) throw std::invalid_argument("window must be at least 2");
  CooccurrenceGraph graph;
  // Node index per position, or npos for stopwords/digits.
  constexpr auto kSkip = static_cast<CooccurrenceGraph::NodeIndex>(-1);
  std::vector<CooccurrenceGraph::NodeIndex> at(tokens.size(), kSkip);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (is_candidate(tokens[i], stopwords)) at[i] = graph.add_node(tokens[i]);
  }
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (at[i] == kSkip) continue;
    for (std::size_t j = i + 1; j < tokens.size() && j - i < window; ++j) {
      if (at[j] != kSkip && at[j] != at[i]) graph.add_edge(at[i], at[j]);
    }
  }
  return graph;
}

RankResult pagerank(const CooccurrenceGraph& graph, const RankParams& params) {
  params.validate();
  const std::size_t n = graph.node_count();
  if (n == 0) throw std::invalid_argument("pagerank needs at least one node");
  const double d = params.damping;

  RankResult result;
  result.scores.assign(n, 1.0);
  std::vector<double> next(n);
  while (result.iterations < params.max_iterations) {
    double max_change = 0.0;
    for (std::size_t v = 0; v < n; ++v) {
      double incoming = 0.0;
      for (const auto& [u, w] : graph.neighbors(v)) {
        incoming += static_cast<double>(w) / static_cast<double>(graph.strength(u)) * result.scores[u];
      }
      next[v] = (1.0 - d) + d * incoming;
      max_change = std::max(max_change, std::abs(next[v] - result.scores[v]));
    }
    result.scores.swap(next);
    ++result.iterations;
    if (max_change < params.tolerance) {
      result.converged = true;
      break;
    }
  }
  return result;
}

std::unordered_map<std::string, double> pagerank_scores(const CooccurrenceGraph& graph,
                                                        const RankParams& params) {
  const auto ranked = pagerank(graph, params);
  std::unordered_map<std::string, double> scores;
  for (std::size_t v = 0; v < graph.node_count(); ++v) scores.emplace(graph.nodes()[v], ranked.scores[v]);
  return scores;
}

double pagerank_residual(const CooccurrenceGraph& graph, const std::vector<double>& scores,
                         double damping) {
  double worst = 0.0;
  for (std::size_t v = 0; v < graph.node_count(); ++v) {
    double incoming = 0.0;
    for (const auto& [u, w] : graph.neighbors(v)) {
      incoming += static_cast<double>(w) / static_cast<double>(graph.strength(u)) * scores[u];
    }
    worst = std::max(worst, std::abs((1.0 - damping) + damping * incoming - scores[v]));
  }
  return worst;
}

std::vector<Keyword> extract_keywords(const TokenList& doc_tokens, std::size_t k,
                                      const RankParams& params,
                                      const std::unordered_set<std::string>& stopwords) {
  if (k == 0) throw std::invalid_argument("k must be at least 1");
  const auto graph = build_cooccurrence_graph(doc_tokens, stopwords, params.window);
  if (graph.node_count() == 0) {
    throw Error(ErrorCode::kNoCandidates, "every token is a stopword or a number");
  }
  const auto ranked = pagerank(graph, params);

  std::vector<Keyword> all;
  all.reserve(graph.node_count());
  for (std::size_t v = 0; v < graph.node_count(); ++v) {
    all.push_back(Keyword{graph.nodes()[v], ranked.scores[v], 0});
  }
  // Nodes are numbered by first appearance, so a forward scan fills first_pos.
  std::size_t next_node = 0;
  for (std::size_t pos = 0; pos < doc_tokens.size() && next_node < all.size(); ++pos) {
    if (doc_tokens[pos] == all[next_node].text) all[next_node++].first_pos = pos;
  }

  // Scores are compared at 1e-9 resolution so that structurally tied words
  // stay tied regardless of summation order.
  auto rank_key = [](double score) { return std::llround(score * 1e9); };
  std::sort(all.begin(), all.end(), [&](const Keyword& a, const Keyword& b) {
    if (rank_key(a.score) != rank_key(b.score)) return rank_key(a.score) > rank_key(b.score);
    if (a.first_pos != b.first_pos) return a.first_pos < b.first_pos;
    return a.text < b.text;
  });
  all.resize(std::min(k, all.size()));
  return all;
}

std::size_t default_keyword_count(const TokenList& doc_tokens,
                                  const std::unordered_set<std::string>& stopwords) {
  std::unordered_set<std::string> unique;
  for (const auto& token : doc_tokens) {
    if (is_candidate(token, stopwords)) unique.insert(token);
  }
  return std::max<std::size_t>(2, (unique.size() + 2) / 3);
}

}  // namespace destructure
