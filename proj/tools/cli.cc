#include "cli.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "destructure/error.h"
#include "destructure/evaluation.h"
#include "destructure/structurer.h"
#include "destructure/text.h"
#include "destructure/textrank.h"

namespace destructure::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr const char* kEndpointEnv = "DESTRUCTURE_EMBED_ENDPOINT";

struct Options {
  std::string input;
  std::string structured;
  std::string output;
  std::string format;
  std::string k = "auto";
  std::string keywords;
  std::string provider = "tfidf";
  std::string endpoint;
  double t = 0.25;
  std::uint64_t seed = 42;
  std::optional<std::uint64_t> shuffle_seed;
  std::size_t sets = 1;
  std::size_t threads = 0;
  std::size_t cache_capacity = 4096;
  RankParams rank;
};

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNoCandidates:
    case ErrorCode::kTooFewSentences:
      return kNoCandidates;
    case ErrorCode::kRemoteUnavailable:
    case ErrorCode::kContractViolation:
      return kRemoteError;
    case ErrorCode::kExperimentFailed:
      return kAllFailed;
    case ErrorCode::kDimensionMismatch:
      return kInternal;
    default:
      return kParseError;
  }
}

void add_rank_flags(CLI::App& cmd, Options& o) {
  cmd.add_option("--window", o.rank.window, "Co-occurrence window (>= 2)")->capture_default_str();
  cmd.add_option("--damping", o.rank.damping, "PageRank damping factor")->capture_default_str();
  cmd.add_option("--tolerance", o.rank.tolerance, "PageRank convergence tolerance")->capture_default_str();
  cmd.add_option("--max-iterations", o.rank.max_iterations, "PageRank iteration cap")->capture_default_str();
  cmd.add_option("--k", o.k, "Number of keywords, or 'auto'")->capture_default_str();
}

void add_structure_flags(CLI::App& cmd, Options& o) {
  add_rank_flags(cmd, o);
  cmd.add_option("--t", o.t, "Weight of keyword similarity against cluster similarity")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  cmd.add_option("--keywords", o.keywords, "Comma-separated keywords; bypasses TextRank");
  cmd.add_option("--provider", o.provider, "Embedding provider")
      ->check(CLI::IsMember({"tfidf", "remote"}))
      ->capture_default_str();
  cmd.add_option("--endpoint", o.endpoint, std::string("Remote embedding service URL (fallback: $") +
                                               kEndpointEnv + ")");
  cmd.add_option("--cache-capacity", o.cache_capacity, "Embedding cache entries")->capture_default_str();
}

std::vector<std::string> split_keywords(const std::string& list) {
  std::vector<std::string> words;
  std::string current;
  for (char c : list) {
    if (c == ',') {
      words.push_back(current);
      current.clear();
    } else {
      current += c;
    }
  }
  words.push_back(current);
  return words;
}

StructureParams structure_params(const Options& o) {
  StructureParams params;
  params.t = o.t;
  params.rank = o.rank;
  if (o.k != "auto") {
    std::size_t consumed = 0;
    long long k = 0;
    try {
      k = std::stoll(o.k, &consumed);
    } catch (const std::exception&) {
      consumed = 0;
    }
    if (consumed != o.k.size() || k < 1) throw std::invalid_argument("--k must be a positive integer or 'auto'");
    params.keyword_count = static_cast<std::size_t>(k);
  }
  if (!o.keywords.empty()) params.keyword_override = split_keywords(o.keywords);
  params.provider.cache_capacity = o.cache_capacity;
  if (o.provider == "remote") {
    params.provider.kind = ProviderKind::kRemote;
    params.provider.endpoint = o.endpoint;
    if (params.provider.endpoint.empty()) {
      if (const char* env = std::getenv(kEndpointEnv)) params.provider.endpoint = env;
    }
    if (params.provider.endpoint.empty()) {
      throw std::invalid_argument(std::string("remote provider requires --endpoint or $") + kEndpointEnv);
    }
  }
  params.validate();
  return params;
}

json config_json(const std::string& subcommand, const Options& o, const StructureParams* params) {
  json config{{"subcommand", subcommand}, {"input", o.input}, {"seed", o.seed}};
  json rank{{"window", o.rank.window},
            {"damping", o.rank.damping},
            {"tolerance", o.rank.tolerance},
            {"max_iterations", o.rank.max_iterations}};
  config["rank"] = std::move(rank);
  config["k"] = o.k;
  if (params) {
    config["t"] = params->t;
    config["keywords"] = params->keyword_override;
    config["provider"] = o.provider;
    config["endpoint"] = params->provider.endpoint;
    config["cache_capacity"] = params->provider.cache_capacity;
  }
  if (o.shuffle_seed) config["shuffle_seed"] = *o.shuffle_seed;
  if (subcommand == "experiment") config["sets"] = o.sets;
  return config;
}

// A sectioned text, a JSONL corpus (first document) or plain text.
struct LoadedInput {
  std::optional<Document> document;  // when sections are known
  FlatDocument flat;
};

LoadedInput load_input(const std::string& path, std::optional<std::uint64_t> shuffle_seed) {
  const fs::path file(path);
  const std::string text = read_file(file);
  LoadedInput loaded;
  if (file.extension() == ".jsonl") {
    auto corpus = parse_jsonl_corpus(text);
    if (corpus.empty()) throw Error(ErrorCode::kParse, path + " contains no documents");
    loaded.document = std::move(corpus.front());
  } else if (has_section_heading(text)) {
    loaded.document = parse_sectioned_document(text, file.stem().string());
  }
  if (loaded.document) {
    loaded.flat = shuffle_seed ? shuffle_document(*loaded.document, *shuffle_seed)
                               : flatten_document(*loaded.document);
  } else {
    loaded.flat = flat_from_text(text, file.stem().string());
    if (shuffle_seed) loaded.flat.order = shuffled_order(loaded.flat.size(), *shuffle_seed);
  }
  if (loaded.flat.size() == 0) throw Error(ErrorCode::kParse, path + " contains no sentences");
  return loaded;
}

void write_output(const std::string& path, const std::string& content, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << content;
  } else {
    write_text_file(path, content);
  }
}

int cmd_keywords(const Options& o, std::ostream& out, std::ostream& err) {
  err << "config: " << config_json("keywords", o, nullptr).dump() << "\n";
  o.rank.validate();
  const auto input = load_input(o.input, std::nullopt);
  const TokenList tokens = flat_tokens(input.flat);
  const auto& stopwords = english_stopwords();
  std::size_t k = default_keyword_count(tokens, stopwords);
  if (o.k != "auto") k = structure_params(o).keyword_count.value();
  const auto keywords = extract_keywords(tokens, k, o.rank, stopwords);

  std::string rendered;
  if (o.format == "json") {
    json list = json::array();
    for (const auto& kw : keywords) {
      list.push_back({{"keyword", kw.text}, {"score", kw.score}, {"first_pos", kw.first_pos}});
    }
    rendered = json{{"doc_id", input.flat.doc_id}, {"keywords", std::move(list)}}.dump(2) + "\n";
  } else {
    for (const auto& kw : keywords) rendered += kw.text + "\t" + format_score(kw.score) + "\n";
  }
  write_output(o.output, rendered, out);
  return kOk;
}

int cmd_structure(const Options& o, std::ostream& out, std::ostream& err) {
  const auto params = structure_params(o);
  err << "config: " << config_json("structure", o, &params).dump() << "\n";
  const auto input = load_input(o.input, o.shuffle_seed);
  const auto structured = structure_document(input.flat, params);
  write_output(o.output,
               o.format == "text" ? structured_to_text(structured, input.flat)
                                  : structured_to_json(structured, input.flat),
               out);
  return kOk;
}

json metric_json(const MetricEvaluation& evaluation) {
  json sections = json::array();
  for (const auto& s : evaluation.per_section) {
    sections.push_back({{"input_title", s.input_title},
                        {"matched_cluster_keyword", s.matched_cluster_keyword},
                        {"overlap", s.overlap},
                        {"input_size", s.input_size},
                        {"output_size", s.output_size},
                        {"sim1", s.sim1},
                        {"sim2", s.sim2}});
  }
  return {{"value", evaluation.value}, {"sections", std::move(sections)}};
}

json report_json(const EvaluationReport& report) {
  return {{"doc_id", report.doc_id},  {"seed", report.seed},
          {"t", report.t},            {"sim1", report.sim1()},
          {"sim2", report.sim2()},    {"by_sim1", metric_json(report.by_sim1)},
          {"by_sim2", metric_json(report.by_sim2)}};
}

std::string report_text(const EvaluationReport& report, const std::string& label) {
  std::string text = label + " (t=" + format_score(report.t) + "): sim1=" + format_score(report.sim1()) +
                     " sim2=" + format_score(report.sim2()) + "\n";
  for (std::size_t i = 0; i < report.by_sim1.per_section.size(); ++i) {
    const auto& s1 = report.by_sim1.per_section[i];
    const auto& s2 = report.by_sim2.per_section[i];
    text += "  " + s1.input_title + ": sim1=" + format_score(s1.sim1) + " [" + s1.matched_cluster_keyword +
            "] sim2=" + format_score(s2.sim2) + " [" + s2.matched_cluster_keyword + "]\n";
  }
  return text;
}

int cmd_evaluate(const Options& o, std::ostream& out, std::ostream& err) {
  const auto params = structure_params(o);
  const json config = config_json("evaluate", o, &params);
  err << "config: " << config.dump() << "\n";
  const auto input = load_input(o.input, std::nullopt);
  if (!input.document) throw Error(ErrorCode::kNoSections, o.input + " has no sections to evaluate against");
  const Document& original = *input.document;

  json result{{"config", config}};
  std::string text;
  if (!o.structured.empty()) {
    const auto output = structured_from_json(read_file(o.structured), original);
    const auto report = evaluate_report(original, output, o.seed, params.t);
    result["report"] = report_json(report);
    text = report_text(report, "structured");
  } else {
    const auto flat = shuffle_document(original, o.seed);
    const auto prepared = prepare_document(flat, params);
    const auto main = evaluate_report(original, cluster_prepared(prepared, flat, params.t), o.seed, params.t);
    const auto base = evaluate_report(original, cluster_prepared(prepared, flat, 1.0), o.seed, 1.0);
    result["report"] = report_json(main);
    result["baseline"] = report_json(base);
    text = report_text(main, "main") + report_text(base, "baseline");
  }
  write_output(o.output, o.format == "text" ? text : result.dump(2) + "\n", out);
  return kOk;
}

int cmd_experiment(const Options& o, std::ostream& out, std::ostream& err) {
  const auto params = structure_params(o);
  const json config = config_json("experiment", o, &params);
  err << "config: " << config.dump() << "\n";
  const auto corpus = load_corpus(o.input);
  if (corpus.empty()) throw Error(ErrorCode::kParse, o.input + " contains no documents");
  if (o.sets == 0 || o.sets > corpus.size()) {
    throw std::invalid_argument("--sets must be between 1 and the corpus size (" +
                                std::to_string(corpus.size()) + ")");
  }

  const fs::path dir = o.output.empty() ? fs::path(".") : fs::path(o.output);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + dir.string() + ": " + ec.message());

  ExperimentOptions options;
  options.threads = o.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : o.threads;

  std::vector<DocumentRow> rows;
  std::vector<ExperimentSummary> sets;
  json failures = json::array();
  const std::size_t base = corpus.size() / o.sets;
  const std::size_t extra = corpus.size() % o.sets;
  std::size_t start = 0;
  for (std::size_t s = 0; s < o.sets; ++s) {
    const std::size_t count = base + (s < extra ? 1 : 0);
    const std::vector<Document> chunk(corpus.begin() + static_cast<std::ptrdiff_t>(start),
                                      corpus.begin() + static_cast<std::ptrdiff_t>(start + count));
    options.set_id = std::to_string(s + 1);
    try {
      auto result = run_experiment(chunk, o.seed + start, params, options);
      for (const auto& f : result.failures) {
        failures.push_back({{"set", options.set_id}, {"doc_id", f.doc_id}, {"error", f.message}});
        err << "warning: document " << f.doc_id << " skipped: " << f.message << "\n";
      }
      rows.insert(rows.end(), result.rows.begin(), result.rows.end());
      sets.push_back(result.summary);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kExperimentFailed) throw;
      failures.push_back({{"set", options.set_id}, {"error", e.what()}});
      err << "warning: set " << options.set_id << " failed: " << e.what() << "\n";
    }
    start += count;
  }
  if (rows.empty()) {
    throw Error(ErrorCode::kExperimentFailed, "every document failed");
  }

  const auto overall = average_of(sets);
  const auto format = o.format == "json" ? ReportFormat::kJson : ReportFormat::kCsv;
  const fs::path rows_path = dir / (format == ReportFormat::kJson ? "rows.json" : "rows.csv");
  emit_report(rows, overall, format, rows_path);
  const std::string table = render_summary_table(sets);
  write_text_file(dir / "summary.csv", table);

  json set_list = json::array();
  for (const auto& s : sets) {
    set_list.push_back({{"set_id", s.set_id},
                        {"n_docs", s.n_docs},
                        {"mean_sim1", s.mean_sim1},
                        {"mean_sim2", s.mean_sim2},
                        {"mean_base_sim1", s.mean_base_sim1},
                        {"mean_base_sim2", s.mean_base_sim2}});
  }
  const json summary{{"config", config},
                     {"sets", std::move(set_list)},
                     {"average",
                      {{"n_docs", overall.n_docs},
                       {"mean_sim1", overall.mean_sim1},
                       {"mean_sim2", overall.mean_sim2},
                       {"mean_base_sim1", overall.mean_base_sim1},
                       {"mean_base_sim2", overall.mean_base_sim2}}},
                     {"failures", std::move(failures)}};
  write_text_file(dir / "summary.json", summary.dump(2) + "\n");
  out << table;
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Rebuilds the section structure of documents whose sentences are unordered."};
  app.require_subcommand(1);

  auto* keywords = app.add_subcommand("keywords", "Extract ranked keywords");
  keywords->add_option("--input,-i", o.input, "Input document")->required();
  keywords->add_option("--format", o.format, "text or json")
      ->check(CLI::IsMember({"text", "json"}))
      ->default_val("text");
  keywords->add_option("--output,-o", o.output, "Output file (default stdout)");
  add_rank_flags(*keywords, o);

  auto* structure = app.add_subcommand("structure", "Cluster a document's sentences under keywords");
  structure->add_option("--input,-i", o.input, "Input document")->required();
  structure->add_option("--format", o.format, "json or text")
      ->check(CLI::IsMember({"json", "text"}))
      ->default_val("json");
  structure->add_option("--output,-o", o.output, "Output file (default stdout)");
  structure->add_option("--shuffle-seed", o.shuffle_seed, "Shuffle sentences with this seed first");
  add_structure_flags(*structure, o);

  auto* evaluate = app.add_subcommand("evaluate", "Score a structuring against the original sections");
  evaluate->add_option("--input,-i", o.input, "Original sectioned document")->required();
  evaluate->add_option("--structured", o.structured,
                       "Structured JSON to score; otherwise shuffle with --seed and structure");
  evaluate->add_option("--seed", o.seed, "Shuffle seed")->capture_default_str();
  evaluate->add_option("--format", o.format, "json or text")
      ->check(CLI::IsMember({"json", "text"}))
      ->default_val("json");
  evaluate->add_option("--output,-o", o.output, "Output file (default stdout)");
  add_structure_flags(*evaluate, o);

  auto* experiment = app.add_subcommand("experiment", "Shuffle/reconstruct experiment over a corpus");
  experiment->add_option("--input,-i", o.input, "Corpus: .jsonl, sectioned .txt, or a directory")->required();
  experiment->add_option("--sets", o.sets, "Split the corpus into this many sets")->capture_default_str();
  experiment->add_option("--seed", o.seed, "Base shuffle seed")->capture_default_str();
  experiment->add_option("--threads", o.threads, "Worker threads (0 = hardware)")->capture_default_str();
  experiment->add_option("--format", o.format, "Row file format: csv or json")
      ->check(CLI::IsMember({"csv", "json"}))
      ->default_val("csv");
  experiment->add_option("--output-dir,-o", o.output, "Directory for rows and summary files");
  add_structure_flags(*experiment, o);

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    // Subcommand help requests surface as CallForHelp from the subcommand.
    err << e.what() << "\n";
    return kParseError;
  }

  try {
    if (*keywords) return cmd_keywords(o, out, err);
    if (*structure) return cmd_structure(o, out, err);
    if (*evaluate) return cmd_evaluate(o, out, err);
    return cmd_experiment(o, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kParseError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kInternal;
  }
}

}  // namespace destructure::cli
