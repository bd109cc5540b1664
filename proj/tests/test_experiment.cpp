#include <set>

#include <gtest/gtest.h>

#include "test_support.hpp"
#include "topicshift/error.hpp"
#include "topicshift/experiment.hpp"

namespace ts = topicshift;
using ts::testing::TempDir;

namespace {

ts::ExperimentConfig tiny_config() {
  ts::ExperimentConfig c;
  c.planted.genres = 2;
  c.planted.topics = 4;
  c.planted.vocab_size = 600;
  c.planted.docs_per_genre = 150;
  c.planted.doc_length = 100;
  c.lda.topics = 4;
  c.lda.sweeps = 100;
  c.fold_in_sweeps = 20;
  c.n_values = {10};
  c.n_val = 10;
  c.n_test = 10;
  c.n_on_val = 10;
  c.synthetic_length = 40;
  c.classifier.epochs = 10;
  c.classifier.window = 400;
  c.seeds = 1;
  return c;
}

const ts::Pipeline& tiny_pipeline() {
  static const ts::Pipeline p = ts::prepare_pipeline(tiny_config());
  return p;
}

ts::Pipeline with_config(const ts::ExperimentConfig& c) {
  const auto& base = tiny_pipeline();
  return ts::prepare_pipeline(c, base.corpus, base.model);
}

}  // namespace

TEST(ExperimentConfig, JsonRoundTrip) {
  auto c = tiny_config();
  c.keyword_sweep = {1, 10, ts::kAllKeywords};
  c.mix_grid = {{0, 20}, {10, 0}, {10, 10}};
  c.conditions = {ts::Condition::on_topic, ts::Condition::shuffled};
  c.topic_candidates = {2, 4};
  c.adapt_pool = ts::PoolSource::on_val;
  c.classifier_backend = "external";
  c.keywords = ts::kAllKeywords;
  const auto j = c.to_json();
  EXPECT_EQ(ts::ExperimentConfig::from_json(j).to_json(), j);
  EXPECT_EQ(j["augment"]["keywords"], "all");
}

TEST(ExperimentConfig, MissingKeysKeepDefaults) {
  const auto c = ts::ExperimentConfig::from_json(nlohmann::json::object());
  EXPECT_EQ(c.to_json(), ts::ExperimentConfig{}.to_json());
  const auto d = ts::ExperimentConfig::from_json({{"seeds", 2}, {"split", {{"n_values", {20, 40}}}}});
  EXPECT_EQ(d.seeds, 2);
  EXPECT_EQ(d.n_values, (std::vector<int>{20, 40}));
  EXPECT_EQ(d.n_test, ts::ExperimentConfig{}.n_test);
}

TEST(ExperimentConfig, RejectsBadValues) {
  using J = nlohmann::json;
  for (const J& bad : {J{{"seeds", 0}}, J{{"split", {{"n_values", J::array()}}}}, J{{"conditions", {"bogus"}}},
                       J{{"augment", {{"keywords", "many"}}}}, J{{"augment", {{"backend", "gpu"}}}},
                       J{{"classifier", {{"backend", "svm"}}}}, J{{"seeds", "five"}},
                       J{{"conditions", J::array()}}}) {
    EXPECT_THROW(ts::ExperimentConfig::from_json(bad), ts::ConfigError) << bad.dump();
  }
}

TEST(ExperimentConfig, TasksExpandSweepsAndMixGrid) {
  ts::ExperimentConfig c;
  c.keyword_sweep = {1, ts::kAllKeywords};
  c.mix_grid = {{0, 20}, {20, 0}, {20, 10}};
  const auto tasks = c.tasks();
  ASSERT_EQ(tasks.size(), 4u + 2u + 3u);
  EXPECT_EQ(tasks[4].variant, "m=1");
  EXPECT_EQ(tasks[5].variant, "m=all");
  EXPECT_EQ(tasks[5].keywords, ts::kAllKeywords);
  EXPECT_EQ(tasks[6].condition, ts::Condition::synthetic_only);
  EXPECT_EQ(tasks[7].condition, ts::Condition::off_topic);
  EXPECT_EQ(tasks[8].condition, ts::Condition::aug_adapt);
  EXPECT_EQ(tasks[8].variant, "mix=20:10");
  EXPECT_EQ(tasks[8].n_original, 20);
  EXPECT_EQ(tasks[8].n_synthetic, 10);
}

TEST(Experiment, CellCountMatchesGrid) {
  const auto& p = tiny_pipeline();
  const auto out = ts::run_experiment(p);
  EXPECT_TRUE(out.failures.empty());
  const int K = p.model->topics();
  EXPECT_EQ(out.report.cells().size(), static_cast<std::size_t>(4 * K));
  std::set<std::pair<ts::Condition, int>> seen;
  for (const auto& cell : out.report.cells()) {
    EXPECT_TRUE(seen.insert({cell.condition, cell.topic}).second);
    EXPECT_GE(cell.macro_f1, 0.0);
    EXPECT_LE(cell.macro_f1, 1.0);
  }
  EXPECT_EQ(out.report.metadata["topics"], K);
}

TEST(Experiment, ReportIndependentOfThreadsAndRepeatable) {
  auto c = tiny_config();
  c.seeds = 2;
  c.topics = {0, 1, 2};
  c.conditions = {ts::Condition::off_topic, ts::Condition::aug_adapt, ts::Condition::shuffled};
  const auto serial = ts::run_experiment(with_config(c));
  c.jobs = 3;
  const auto threaded = ts::run_experiment(with_config(c));
  EXPECT_EQ(serial.report.cells().size(), 3u * 2u * 3u);
  EXPECT_EQ(serial.report.to_csv(), threaded.report.to_csv());
  EXPECT_EQ(serial.report.to_csv(), ts::run_experiment(with_config(c)).report.to_csv());
}

TEST(Experiment, FailuresAreCollectedOrStopEarly) {
  auto c = tiny_config();
  c.n_test = 1000;
  const auto out = ts::run_experiment(with_config(c));
  EXPECT_TRUE(out.report.cells().empty());
  EXPECT_EQ(out.failures.size(), static_cast<std::size_t>(tiny_pipeline().model->topics()));
  for (const auto& f : out.failures) EXPECT_NE(f.find("topic "), std::string::npos);
  c.fail_fast = true;
  EXPECT_EQ(ts::run_experiment(with_config(c)).failures.size(), 1u);
}

TEST(Experiment, WritesReportFiles) {
  TempDir dir;
  ts::ExperimentReport r;
  for (int topic = 0; topic < 2; ++topic) {
    for (const std::string v : {"m=1", "m=10", "mix=0:20"}) {
      ts::ConditionResult cell;
      cell.condition = v == "mix=0:20" ? ts::Condition::synthetic_only : ts::Condition::aug_adapt;
      cell.variant = v;
      cell.topic = topic;
      cell.macro_f1 = 0.5 + 0.1 * topic;
      r.add(cell);
    }
  }
  ts::write_report(r, ts::standard_comparisons(r), dir.path());
  EXPECT_EQ(ts::read_file(dir / "report.csv"), r.to_csv());
  const auto plot = nlohmann::json::parse(ts::read_file(dir / "plot_data.json"));
  EXPECT_EQ(plot["keyword_sweep"].size(), 2u);
  EXPECT_EQ(plot["mix_sweep"].size(), 1u);
  const auto report = nlohmann::json::parse(ts::read_file(dir / "report.json"));
  EXPECT_EQ(report["cells"].size(), 6u);
}
