#pragma once

// Section-recovery metrics and the shuffle/reconstruct experiment.
//
// Each input section is scored against every output cluster and keeps its best
// match (a cluster may be the best match of several sections):
//   sim1 = |in ∩ out| / |in|           (1.0 for a perfect match)
//   sim2 = |in ∩ out| / (|in| + |out|)  (0.5 for a perfect match)
// Document values are input-size weighted means over sections.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "destructure/structurer.h"
#include "destructure/text.h"

namespace destructure {

enum class Metric { kSim1, kSim2 };

double sim1(const std::vector<SentenceId>& input_ids, const std::vector<SentenceId>& output_ids);
double sim2(const std::vector<SentenceId>& input_ids, const std::vector<SentenceId>& output_ids);

struct SectionScore {
  std::string input_title;
  std::string matched_cluster_keyword;
  std::size_t overlap = 0;
  std::size_t input_size = 0;
  std::size_t output_size = 0;
  double sim1 = 0.0;
  double sim2 = 0.0;
};

struct MetricEvaluation {
  Metric metric = Metric::kSim1;
  std::vector<SectionScore> per_section;  // matched by `metric`
  double value = 0.0;                     // weighted mean of the metric
};

/// Throws Error{kIdSetMismatch} unless the clusters partition the document ids.
MetricEvaluation evaluate(const Document& original, const StructuredDocument& output, Metric metric);

struct EvaluationReport {
  std::string doc_id;
  std::uint64_t seed = 0;
  double t = 0.0;
  MetricEvaluation by_sim1;
  MetricEvaluation by_sim2;

  double sim1() const { return by_sim1.value; }
  double sim2() const { return by_sim2.value; }
};

EvaluationReport evaluate_report(const Document& original, const StructuredDocument& output,
                                 std::uint64_t seed, double t);

// One document of an experiment: main run at params.t and the t = 1 baseline.
struct DocumentRow {
  std::string set_id;
  std::string doc_id;
  std::uint64_t seed = 0;
  double sim1 = 0.0;
  double sim2 = 0.0;
  double base_sim1 = 0.0;
  double base_sim2 = 0.0;
};

struct DocumentFailure {
  std::string doc_id;
  std::size_t index = 0;
  std::string message;
};

struct ExperimentSummary {
  std::string set_id;
  std::size_t n_docs = 0;
  double mean_sim1 = 0.0;
  double mean_sim2 = 0.0;
  double mean_base_sim1 = 0.0;
  double mean_base_sim2 = 0.0;
};

struct ExperimentOptions {
  std::string set_id = "1";
  std::size_t threads = 1;
  bool keep_structures = false;  // fill ExperimentResult::structures
};

struct DocumentStructures {
  FlatDocument flat;
  StructuredDocument main;
  StructuredDocument baseline;
};

struct ExperimentResult {
  std::vector<DocumentRow> rows;  // corpus order, failures omitted
  std::vector<DocumentFailure> failures;
  std::vector<std::optional<DocumentStructures>> structures;  // per corpus index
  ExperimentSummary summary;
};

/// Document i is shuffled with seed base_seed + i, structured at params.t and
/// at t = 1 from the same keywords, embeddings and seeds, and evaluated.
/// Failing documents are recorded and skipped; throws
/// Error{kExperimentFailed} when every document fails.
ExperimentResult run_experiment(const std::vector<Document>& corpus, std::uint64_t base_seed,
                                const StructureParams& params, const ExperimentOptions& options = {});

/// Unweighted means of the rows.
ExperimentSummary summarize(const std::string& set_id, const std::vector<DocumentRow>& rows);

/// Unweighted mean of the set summaries (the "Average" row).
ExperimentSummary average_of(const std::vector<ExperimentSummary>& sets);

enum class ReportFormat { kCsv, kJson };

/// Fixed-point with 8 decimals.
std::string format_score(double value);

/// CSV: header set,doc_id,seed,sim1,sim2,base_sim1,base_sim2 then one line
/// per row. JSON: {"rows": [...], "summary": {...}}.
std::string render_rows(const std::vector<DocumentRow>& rows, const ExperimentSummary& summary,
                        ReportFormat format);

/// Table layout: Set No.,Sim1,Sim2,BaseSim1,BaseSim2 then one row per set and
/// an Average row.
std::string render_summary_table(const std::vector<ExperimentSummary>& sets);

/// Throws Error{kIo}.
void emit_report(const std::vector<DocumentRow>& rows, const ExperimentSummary& summary,
                 ReportFormat format, const std::filesystem::path& path);

void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace destructure
