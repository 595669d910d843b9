#include "destructure/evaluation.h"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "destructure/error.h"

namespace destructure {
namespace {

std::vector<SentenceId> sorted_unique(std::vector<SentenceId> ids) {
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

std::size_t overlap_count(const std::vector<SentenceId>& a, const std::vector<SentenceId>& b) {
  std::size_t count = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++count;
      ++ia;
      ++ib;
    }
  }
  return count;
}

void check_partition(const Document& original, const StructuredDocument& output) {
  std::vector<SentenceId> all;
  for (const auto& cluster : output.clusters) {
    all.insert(all.end(), cluster.member_ids.begin(), cluster.member_ids.end());
  }
  std::sort(all.begin(), all.end());
  bool ok = all.size() == original.sentences.size();
  for (std::size_t i = 0; ok && i < all.size(); ++i) ok = all[i] == i;
  if (!ok) {
    throw Error(ErrorCode::kIdSetMismatch,
                "clusters of '" + output.doc_id + "' do not partition the sentences of '" +
                    original.doc_id + "'");
  }
}

}  // namespace

double sim1(const std::vector<SentenceId>& input_ids, const std::vector<SentenceId>& output_ids) {
  const auto in = sorted_unique(input_ids);
  if (in.empty()) throw std::invalid_argument("sim1: input section is empty");
  return static_cast<double>(overlap_count(in, sorted_unique(output_ids))) / static_cast<double>(in.size());
}

double sim2(const std::vector<SentenceId>& input_ids, const std::vector<SentenceId>& output_ids) {
  const auto in = sorted_unique(input_ids);
  const auto out = sorted_unique(output_ids);
  if (in.empty() || out.empty()) throw std::invalid_argument("sim2: sections must be non-empty");
  return static_cast<double>(overlap_count(in, out)) / static_cast<double>(in.size() + out.size());
}

MetricEvaluation evaluate(const Document& original, const StructuredDocument& output, Metric metric) {
  check_partition(original, output);
  std::vector<std::vector<SentenceId>> clusters;
  clusters.reserve(output.clusters.size());
  for (const auto& cluster : output.clusters) clusters.push_back(sorted_unique(cluster.member_ids));

  MetricEvaluation result;
  result.metric = metric;
  double weighted = 0.0;
  std::size_t total = 0;
  for (const auto& section : original.sections) {
    const auto in = sorted_unique(section.sentence_ids);
    std::optional<SectionScore> best;
    for (std::size_t c = 0; c < clusters.size(); ++c) {
      SectionScore score;
      score.input_title = section.title;
      score.matched_cluster_keyword = output.clusters[c].keyword.text;
      score.overlap = overlap_count(in, clusters[c]);
      score.input_size = in.size();
      score.output_size = clusters[c].size();
      score.sim1 = static_cast<double>(score.overlap) / static_cast<double>(score.input_size);
      score.sim2 = static_cast<double>(score.overlap) /
                   static_cast<double>(score.input_size + score.output_size);
      const double value = metric == Metric::kSim1 ? score.sim1 : score.sim2;
      // Clusters are in descending keyword score, so strict '>' keeps the
      // higher-scored cluster on ties.
      if (!best || value > (metric == Metric::kSim1 ? best->sim1 : best->sim2)) best = score;
    }
    weighted += static_cast<double>(in.size()) * (metric == Metric::kSim1 ? best->sim1 : best->sim2);
    total += in.size();
    result.per_section.push_back(std::move(*best));
  }
  result.value = weighted / static_cast<double>(total);
  return result;
}

EvaluationReport evaluate_report(const Document& original, const StructuredDocument& output,
                                 std::uint64_t seed, double t) {
  return EvaluationReport{original.doc_id, seed, t, evaluate(original, output, Metric::kSim1),
                          evaluate(original, output, Metric::kSim2)};
}

ExperimentSummary summarize(const std::string& set_id, const std::vector<DocumentRow>& rows) {
  ExperimentSummary summary;
  summary.set_id = set_id;
  summary.n_docs = rows.size();
  if (rows.empty()) return summary;
  for (const auto& row : rows) {
    summary.mean_sim1 += row.sim1;
    summary.mean_sim2 += row.sim2;
    summary.mean_base_sim1 += row.base_sim1;
    summary.mean_base_sim2 += row.base_sim2;
  }
  const auto n = static_cast<double>(rows.size());
  summary.mean_sim1 /= n;
  summary.mean_sim2 /= n;
  summary.mean_base_sim1 /= n;
  summary.mean_base_sim2 /= n;
  return summary;
}

ExperimentSummary average_of(const std::vector<ExperimentSummary>& sets) {
  ExperimentSummary avg;
  avg.set_id = "Average";
  if (sets.empty()) return avg;
  for (const auto& s : sets) {
    avg.n_docs += s.n_docs;
    avg.mean_sim1 += s.mean_sim1;
    avg.mean_sim2 += s.mean_sim2;
    avg.mean_base_sim1 += s.mean_base_sim1;
    avg.mean_base_sim2 += s.mean_base_sim2;
  }
  const auto n = static_cast<double>(sets.size());
  avg.mean_sim1 /= n;
  avg.mean_sim2 /= n;
  avg.mean_base_sim1 /= n;
  avg.mean_base_sim2 /= n;
  return avg;
}

ExperimentResult run_experiment(const std::vector<Document>& corpus, std::uint64_t base_seed,
                                const StructureParams& params, const ExperimentOptions& options) {
  params.validate();
  if (corpus.empty()) throw std::invalid_argument("run_experiment: corpus is empty");

  struct Outcome {
    std::optional<DocumentRow> row;
    std::optional<DocumentFailure> failure;
    std::optional<DocumentStructures> structures;
  };
  std::vector<Outcome> outcomes(corpus.size());

  auto process = [&](std::size_t i) {
    const Document& doc = corpus[i];
    const std::uint64_t seed = base_seed + i;
    try {
      auto flat = shuffle_document(doc, seed);
      const auto prepared = prepare_document(flat, params);
      auto main = cluster_prepared(prepared, flat, params.t);
      auto baseline = cluster_prepared(prepared, flat, 1.0);
      const auto main_report = evaluate_report(doc, main, seed, params.t);
      const auto base_report = evaluate_report(doc, baseline, seed, 1.0);
      outcomes[i].row = DocumentRow{options.set_id,     doc.doc_id,          seed,
                                    main_report.sim1(), main_report.sim2(),  base_report.sim1(),
                                    base_report.sim2()};
      if (options.keep_structures) {
        outcomes[i].structures = DocumentStructures{std::move(flat), std::move(main), std::move(baseline)};
      }
    } catch (const std::exception& e) {
      outcomes[i].failure = DocumentFailure{doc.doc_id, i, e.what()};
    }
  };

  const std::size_t workers = std::clamp<std::size_t>(options.threads, 1, corpus.size());
  if (workers == 1) {
    for (std::size_t i = 0; i < corpus.size(); ++i) process(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < corpus.size(); i = next++) process(i);
      });
    }
  }

  ExperimentResult result;
  result.structures.resize(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (outcomes[i].row) result.rows.push_back(std::move(*outcomes[i].row));
    if (outcomes[i].failure) result.failures.push_back(std::move(*outcomes[i].failure));
    result.structures[i] = std::move(outcomes[i].structures);
  }
  if (result.rows.empty()) {
    throw Error(ErrorCode::kExperimentFailed,
                "all " + std::to_string(corpus.size()) + " documents failed; first: " +
                    result.failures.front().message);
  }
  result.summary = summarize(options.set_id, result.rows);
  return result;
}

std::string format_score(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.8f", value);
  return buf;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string quoted = "\"";
  for (char c : s) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  return quoted + "\"";
}

// Emits an 8-decimal fixed-point number as a raw JSON number.
nlohmann::json fixed(double value) {
  return nlohmann::json::parse(format_score(value));
}

nlohmann::json summary_json(const ExperimentSummary& s) {
  return {{"set_id", s.set_id},
          {"n_docs", s.n_docs},
          {"mean_sim1", fixed(s.mean_sim1)},
          {"mean_sim2", fixed(s.mean_sim2)},
          {"mean_base_sim1", fixed(s.mean_base_sim1)},
          {"mean_base_sim2", fixed(s.mean_base_sim2)}};
}

}  // namespace

std::string render_rows(const std::vector<DocumentRow>& rows, const ExperimentSummary& summary,
                        ReportFormat format) {
  if (format == ReportFormat::kJson) {
    nlohmann::json out_rows = nlohmann::json::array();
    for (const auto& r : rows) {
      out_rows.push_back({{"set", r.set_id},
                          {"doc_id", r.doc_id},
                          {"seed", r.seed},
                          {"sim1", fixed(r.sim1)},
                          {"sim2", fixed(r.sim2)},
                          {"base_sim1", fixed(r.base_sim1)},
                          {"base_sim2", fixed(r.base_sim2)}});
    }
    return nlohmann::json{{"rows", std::move(out_rows)}, {"summary", summary_json(summary)}}.dump(2) + "\n";
  }
  std::string out = "set,doc_id,seed,sim1,sim2,base_sim1,base_sim2\n";
  for (const auto& r : rows) {
    out += csv_field(r.set_id) + ',' + csv_field(r.doc_id) + ',' + std::to_string(r.seed) + ',' +
           format_score(r.sim1) + ',' + format_score(r.sim2) + ',' + format_score(r.base_sim1) + ',' +
           format_score(r.base_sim2) + '\n';
  }
  return out;
}

std::string render_summary_table(const std::vector<ExperimentSummary>& sets) {
  std::string out = "Set No.,Sim1,Sim2,BaseSim1,BaseSim2\n";
  auto line = [&](const ExperimentSummary& s) {
    out += csv_field(s.set_id) + ',' + format_score(s.mean_sim1) + ',' + format_score(s.mean_sim2) + ',' +
           format_score(s.mean_base_sim1) + ',' + format_score(s.mean_base_sim2) + '\n';
  };
  for (const auto& s : sets) line(s);
  line(average_of(sets));
  return out;
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << content;
  out.flush();
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

void emit_report(const std::vector<DocumentRow>& rows, const ExperimentSummary& summary,
                 ReportFormat format, const std::filesystem::path& path) {
  write_text_file(path, render_rows(rows, summary, format));
}

}  // namespace destructure
