#pragma once

// Keyword extraction: a word co-occurrence graph ranked with weighted PageRank.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "destructure/text.h"

namespace destructure {

struct RankParams {
  double damping = 0.85;
  double tolerance = 1e-6;
  std::size_t max_iterations = 100;
  std::size_t window = 2;

  // Throws std::invalid_argument when a field is out of range.
  void validate() const;
};

// Undirected weighted graph over candidate words. Nodes are numbered in order
// of first appearance; adjacency is symmetric and has no self-loops.
class CooccurrenceGraph {
 public:
  using NodeIndex = std::size_t;
  using Weight = std::uint64_t;

  NodeIndex add_node(const std::string& word);
  // Adds `weight` to the undirected edge a-b. Self-loops are ignored.
  void add_edge(NodeIndex a, NodeIndex b, Weight weight = 1);

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const;
  const std::vector<std::string>& nodes() const { return nodes_; }
  std::optional<NodeIndex> find(std::string_view word) const;

  Weight weight(NodeIndex a, NodeIndex b) const;
  Weight weight(std::string_view a, std::string_view b) const;
  // Sum of incident edge weights.
  Weight strength(NodeIndex v) const { return strength_[v]; }
  const std::map<NodeIndex, Weight>& neighbors(NodeIndex v) const { return adjacency_[v]; }

 private:
  std::vector<std::string> nodes_;
  std::unordered_map<std::string, NodeIndex> index_;
  std::vector<std::map<NodeIndex, Weight>> adjacency_;
  std::vector<Weight> strength_;
};

/// Candidates are tokens that are neither stopwords nor ASCII digit runs.
/// Every pair of distinct candidates whose positions in `tokens` differ by
/// less than `window` adds 1 to their edge. Stopwords keep their positions.
CooccurrenceGraph build_cooccurrence_graph(const TokenList& tokens,
                                           const std::unordered_set<std::string>& stopwords,
                                           std::size_t window);

struct RankResult {
  std::vector<double> scores;  // indexed by node
  std::size_t iterations = 0;
  bool converged = false;      // false: max_iterations hit (NotConverged)
};

/// Synchronous weighted PageRank:
///   WS(v) = (1-d) + d * sum_{u in adj(v)} w(u,v) / strength(u) * WS(u)
/// starting from 1.0 until the largest per-node change drops below tolerance.
RankResult pagerank(const CooccurrenceGraph& graph, const RankParams& params);

std::unordered_map<std::string, double> pagerank_scores(const CooccurrenceGraph& graph,
                                                        const RankParams& params);

/// Largest |WS(v) - update(WS)(v)| over all nodes.
double pagerank_residual(const CooccurrenceGraph& graph, const std::vector<double>& scores,
                         double damping);

struct Keyword {
  std::string text;
  double score = 0.0;
  std::size_t first_pos = 0;

  bool operator==(const Keyword&) const = default;
};

/// Top min(k, #candidates) words by descending score (compared at 1e-9
/// resolution); ties by earlier first occurrence, then lexicographically.
/// Throws Error{kNoCandidates}.
std::vector<Keyword> extract_keywords(const TokenList& doc_tokens, std::size_t k,
                                      const RankParams& params,
                                      const std::unordered_set<std::string>& stopwords);

/// max(2, ceil(#unique candidates / 3)).
std::size_t default_keyword_count(const TokenList& doc_tokens,
                                  const std::unordered_set<std::string>& stopwords);

}  // namespace destructure
