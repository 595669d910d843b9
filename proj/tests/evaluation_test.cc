#include "destructure/evaluation.h"

#include <filesystem>
#include <random>

#include <gtest/gtest.h>

#include "destructure/error.h"
#include "test_support.h"

namespace destructure {
namespace {

using Ids = std::vector<SentenceId>;

Document sections_of(const std::vector<Ids>& sections) {
  Document doc;
  doc.doc_id = "d";
  std::size_t n = 0;
  for (const auto& s : sections) n += s.size();
  for (SentenceId i = 0; i < n; ++i) doc.sentences.emplace_back(i, "s" + std::to_string(i) + ".");
  for (std::size_t s = 0; s < sections.size(); ++s) doc.sections.push_back({"S" + std::to_string(s), sections[s]});
  return doc;
}

StructuredDocument clusters_of(const std::vector<Ids>& clusters) {
  StructuredDocument out{"d", {}};
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    out.clusters.push_back(Cluster{Keyword{"k" + std::to_string(c), double(clusters.size() - c), 0},
                                   clusters[c].front(), clusters[c]});
  }
  return out;
}

TEST(SimMetrics, Examples) {
  EXPECT_DOUBLE_EQ(sim1({0, 1}, {0, 1, 2}), 1.0);
  EXPECT_DOUBLE_EQ(sim2({0, 1}, {0, 1, 2}), 0.4);
  EXPECT_DOUBLE_EQ(sim1({0, 1, 2, 3}, {3, 9}), 0.25);
  EXPECT_DOUBLE_EQ(sim2({0, 1}, {2}), 0.0);
  EXPECT_DOUBLE_EQ(sim2({4, 5}, {5, 4}), 0.5);
  EXPECT_THROW(sim1({}, {1}), std::invalid_argument);
}

TEST(SimMetrics, Bounds) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 2000; ++trial) {
    Ids in, out;
    const std::size_t universe = 1 + rng() % 30;
    for (SentenceId i = 0; i < universe; ++i) {
      if (rng() % 2) in.push_back(i);
      if (rng() % 2) out.push_back(i);
    }
    if (in.empty()) in.push_back(0);
    if (out.empty()) out.push_back(universe);
    const double s1 = sim1(in, out), s2 = sim2(in, out);
    EXPECT_GE(s1, 0.0);
    EXPECT_LE(s1, 1.0);
    EXPECT_GE(s2, 0.0);
    EXPECT_LE(s2, 0.5);
    EXPECT_LE(s2, s1);
    EXPECT_EQ(s1 == 1.0 && in.size() == out.size(), s2 == 0.5);
  }
}

TEST(Evaluate, HandEnumeratedExample) {
  const auto doc = sections_of({{0, 1}, {2, 3}});
  const auto out = clusters_of({{0, 1, 2}, {3}});
  const auto r1 = evaluate(doc, out, Metric::kSim1);
  const auto r2 = evaluate(doc, out, Metric::kSim2);
  // A: {0,1,2} gives 2/2 and 2/5. B: {0,1,2} gives 1/2, {3} gives 1/3.
  EXPECT_NEAR(r1.value, 0.75, 1e-9);
  EXPECT_NEAR(r2.value, (0.4 * 2 + (1.0 / 3.0) * 2) / 4, 1e-9);
  EXPECT_NEAR(r2.value, 0.366666666667, 1e-9);
  EXPECT_EQ(r1.per_section[1].matched_cluster_keyword, "k0");
  EXPECT_EQ(r2.per_section[1].matched_cluster_keyword, "k1");
  EXPECT_EQ(r1.per_section[0].overlap, 2u);
  EXPECT_EQ(r1.per_section[0].output_size, 3u);
}

TEST(Evaluate, PerfectReconstruction) {
  const auto doc = sections_of({{0, 1, 2}, {3}, {4, 5}});
  const auto out = clusters_of({{2, 0, 1}, {5, 4}, {3}});
  EXPECT_EQ(evaluate(doc, out, Metric::kSim1).value, 1.0);
  EXPECT_EQ(evaluate(doc, out, Metric::kSim2).value, 0.5);
}

TEST(Evaluate, ClustersMayBeReusedAcrossSections) {
  const auto doc = sections_of({{0, 1}, {2, 3}});
  const auto out = clusters_of({{0, 1, 2, 3}});
  const auto r = evaluate(doc, out, Metric::kSim1);
  EXPECT_DOUBLE_EQ(r.value, 1.0);
  EXPECT_NEAR(evaluate(doc, out, Metric::kSim2).value, 2.0 / 6.0, 1e-15);
}

TEST(Evaluate, TiesKeepTheHigherScoredCluster) {
  const auto doc = sections_of({{0, 1}});
  const auto out = clusters_of({{1}, {0}});
  EXPECT_EQ(evaluate(doc, out, Metric::kSim1).per_section[0].matched_cluster_keyword, "k0");
}

TEST(Evaluate, WeightedMeanLiesBetweenSectionScores) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    const auto doc = testing::random_document(rng, "r");
    const auto out = structure_document(shuffle_document(doc, rng()), {});
    for (Metric m : {Metric::kSim1, Metric::kSim2}) {
      const auto r = evaluate(doc, out, m);
      double lo = 1.0, hi = 0.0;
      for (const auto& s : r.per_section) {
        const double v = m == Metric::kSim1 ? s.sim1 : s.sim2;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      EXPECT_GE(r.value, lo - 1e-12);
      EXPECT_LE(r.value, hi + 1e-12);
    }
  }
}

TEST(Evaluate, RejectsNonPartitions) {
  const auto doc = sections_of({{0, 1}, {2}});
  for (const auto& bad : {std::vector<Ids>{{0, 1}}, std::vector<Ids>{{0, 1}, {1, 2}},
                          std::vector<Ids>{{0, 1, 2, 3}}}) {
    try {
      evaluate(doc, clusters_of(bad), Metric::kSim1);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kIdSetMismatch);
    }
  }
}

// Golden values from tests/oracles/reference.py.
TEST(EvaluateReport, FixtureGoldenValues) {
  const auto doc =
      parse_sectioned_document(read_file(DESTRUCTURE_TEST_DATA "/fixtures/wiki_sample.txt"), "wiki_sample");
  const auto flat = flatten_document(doc);
  StructureParams params;
  params.keyword_count = 3;
  const auto prepared = prepare_document(flat, params);
  const auto main = evaluate_report(doc, cluster_prepared(prepared, flat, 0.25), 0, 0.25);
  const auto base = evaluate_report(doc, cluster_prepared(prepared, flat, 1.0), 0, 1.0);
  EXPECT_NEAR(main.sim1(), 0.8571428571428571, 1e-12);
  EXPECT_NEAR(main.sim2(), 0.35551948051948046, 1e-12);
  EXPECT_NEAR(base.sim1(), 0.7857142857142857, 1e-12);
  EXPECT_NEAR(base.sim2(), 0.3125327053898483, 1e-12);

  const auto shuffled = evaluate_report(doc, structure_document(shuffle_document(doc, 7), {}), 7, 0.25);
  EXPECT_NEAR(shuffled.sim1(), 0.21428571428571427, 1e-12);
  EXPECT_NEAR(shuffled.sim2(), 0.1761904761904762, 1e-12);
}

TEST(RenderRows, HeaderOnlyAndSingleRow) {
  EXPECT_EQ(render_rows({}, {}, ReportFormat::kCsv), "set,doc_id,seed,sim1,sim2,base_sim1,base_sim2\n");
  const DocumentRow row{"1", "doc,a", 42, 0.5, 0.25, 1.0 / 3.0, 0.0};
  EXPECT_EQ(render_rows({row}, summarize("1", {row}), ReportFormat::kCsv),
            "set,doc_id,seed,sim1,sim2,base_sim1,base_sim2\n"
            "1,\"doc,a\",42,0.50000000,0.25000000,0.33333333,0.00000000\n");
  const auto json = render_rows({row}, summarize("1", {row}), ReportFormat::kJson);
  EXPECT_NE(json.find("\"base_sim1\": 0.33333333"), std::string::npos);
  EXPECT_NE(json.find("\"n_docs\": 1"), std::string::npos);
}

TEST(Summaries, MeansMatchRecomputation) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<DocumentRow> rows;
  for (int i = 0; i < 37; ++i) rows.push_back({"2", "d" + std::to_string(i), 0, u(rng), u(rng) / 2, u(rng), u(rng) / 2});
  const auto s = summarize("2", rows);
  double m1 = 0, m2 = 0, b1 = 0, b2 = 0;
  for (const auto& r : rows) {
    m1 += r.sim1;
    m2 += r.sim2;
    b1 += r.base_sim1;
    b2 += r.base_sim2;
  }
  EXPECT_NEAR(s.mean_sim1, m1 / 37, 1e-12);
  EXPECT_NEAR(s.mean_sim2, m2 / 37, 1e-12);
  EXPECT_NEAR(s.mean_base_sim1, b1 / 37, 1e-12);
  EXPECT_NEAR(s.mean_base_sim2, b2 / 37, 1e-12);
  EXPECT_EQ(s.n_docs, 37u);

  ExperimentSummary a{"1", 2, 0.2, 0.1, 0.4, 0.2};
  ExperimentSummary b{"2", 6, 0.6, 0.3, 0.8, 0.4};
  const auto avg = average_of({a, b});
  EXPECT_EQ(avg.set_id, "Average");
  EXPECT_NEAR(avg.mean_sim1, 0.4, 1e-15);
  EXPECT_NEAR(avg.mean_base_sim2, 0.3, 1e-15);
  EXPECT_EQ(render_summary_table({a, b}),
            "Set No.,Sim1,Sim2,BaseSim1,BaseSim2\n"
            "1,0.20000000,0.10000000,0.40000000,0.20000000\n"
            "2,0.60000000,0.30000000,0.80000000,0.40000000\n"
            "Average,0.40000000,0.20000000,0.60000000,0.30000000\n");
}

TEST(RunExperiment, SeedsFollowCorpusIndexAndThreadsAgree) {
  std::mt19937_64 rng(19);
  std::vector<Document> corpus;
  for (int i = 0; i < 12; ++i) corpus.push_back(testing::random_document(rng, "r" + std::to_string(i)));
  const auto serial = run_experiment(corpus, 100, {});
  ExperimentOptions opts;
  opts.threads = 4;
  const auto parallel = run_experiment(corpus, 100, {}, opts);
  ASSERT_EQ(serial.rows.size(), 12u);
  for (std::size_t i = 0; i < 12; ++i) {
    EXPECT_EQ(serial.rows[i].seed, 100 + i);
    EXPECT_EQ(render_rows({serial.rows[i]}, {}, ReportFormat::kCsv),
              render_rows({parallel.rows[i]}, {}, ReportFormat::kCsv));
  }
}

TEST(RunExperiment, RecordsFailures) {
  std::vector<Document> corpus{testing::make_document("bad", {{"A", {"The of and."}}}),
                               testing::make_document("good", {{"A", {"Rivers flow."}}, {"B", {"Markets trade."}}})};
  const auto result = run_experiment(corpus, 0, {});
  ASSERT_EQ(result.rows.size(), 1u);
  ASSERT_EQ(result.failures.size(), 1u);
  EXPECT_EQ(result.failures[0].doc_id, "bad");
  EXPECT_NE(result.failures[0].message.find("NoCandidates"), std::string::npos);

  try {
    run_experiment({corpus[0]}, 0, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kExperimentFailed);
  }
}

TEST(EmitReport, WritesFileAndReportsIoErrors) {
  const auto path = std::filesystem::temp_directory_path() / "destructure_emit_report.csv";
  emit_report({}, {}, ReportFormat::kCsv, path);
  EXPECT_EQ(read_file(path), "set,doc_id,seed,sim1,sim2,base_sim1,base_sim2\n");
  std::filesystem::remove(path);
  try {
    emit_report({}, {}, ReportFormat::kCsv, "/nonexistent-dir/x/report.csv");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIo);
  }
}

}  // namespace
}  // namespace destructure
