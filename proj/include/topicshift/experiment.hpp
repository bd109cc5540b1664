#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "topicshift/augment.hpp"
#include "topicshift/classify.hpp"
#include "topicshift/evaluate.hpp"
#include "topicshift/splits.hpp"
#include "topicshift/synthkit.hpp"
#include "topicshift/topics.hpp"

namespace topicshift {

enum class PoolSource { on_train, on_test, on_val, off_train, off_val };
std::string_view to_string(PoolSource p);
PoolSource pool_source_from_string(std::string_view s);

/// One requested training condition of a topic cell.
struct ConditionTask {
  Condition condition = Condition::off_topic;
  std::string variant;
  /// Keywords per document (kAllKeywords for every distinct word).
  int keywords = 10;
  /// Per genre; negative means "use the cell's N".
  int n_original = -1;
  int n_synthetic = -1;
};

struct ExperimentConfig {
  /// Corpus file; when empty a planted corpus is generated from `planted`.
  std::string corpus_path;
  PlantedSpec planted;

  int min_count = 2;
  int stop_top_n = 30;
  LdaConfig lda = [] {
    LdaConfig c;
    c.topics = 6;
    return c;
  }();
  /// When non-empty, K is chosen from these by coherence x diversity.
  std::vector<int> topic_candidates;
  int fold_in_sweeps = 50;

  /// Topic indices to evaluate; empty means all K.
  std::vector<int> topics;
  /// Values of N (training documents per genre).
  std::vector<int> n_values = {50};
  int n_val = 100;
  int n_test = 100;
  int n_on_val = 100;

  /// Synthetic documents per genre; negative means equal to N.
  int n_synthetic = -1;
  int synthetic_length = 150;
  int keywords = 10;
  GeneratorOptions generator;
  PoolSource adapt_pool = PoolSource::on_train;
  PoolSource baseline_pool = PoolSource::off_val;
  /// On-topic keyword sources must give the target topic at least this
  /// proportion; off-topic pools are not filtered.
  double pool_min_share = 0.5;
  GeneratorBackend generator_backend = GeneratorBackend::builtin;

  /// The library-wide classifier defaults barely move away from uniform on
  /// a few hundred short windows, so experiments train harder.
  ClassifierConfig classifier = [] {
    ClassifierConfig c;
    c.learning_rate = 0.9;
    c.batch_size = 8;
    return c;
  }();
  int classifier_min_count = 1;
  /// Drops the most frequent words from the classifier's features too.
  int classifier_stop_top_n = 30;
  std::string classifier_backend = "builtin";

  std::vector<Condition> conditions = {Condition::on_topic, Condition::off_topic, Condition::aug_baseline,
                                       Condition::aug_adapt};
  /// Extra aug_adapt runs, one per keyword count.
  std::vector<int> keyword_sweep;
  /// Extra (n_original, n_synthetic) runs; n_original = 0 is synthetic-only.
  std::vector<std::pair<int, int>> mix_grid;

  std::uint64_t seed = 1;
  int seeds = 5;
  int jobs = 1;
  bool fail_fast = false;
  std::string output = "out";

  nlohmann::json to_json() const;
  /// Missing keys keep their defaults.
  static ExperimentConfig from_json(const nlohmann::json& j);
  std::vector<ConditionTask> tasks() const;
};

/// State shared by every cell of an experiment: corpus, topic model and
/// document scores, and the classifier vocabulary.
struct Pipeline {
  ExperimentConfig config;
  std::shared_ptr<const Corpus> corpus;
  std::shared_ptr<const Vocabulary> topic_vocabulary;
  std::shared_ptr<const TopicModel> model;
  std::optional<TopicCountSelection> selection;
  CorpusScores scores;
  std::shared_ptr<const Vocabulary> classifier_vocabulary;
  std::shared_ptr<SharedAdapter> adapter;
};

Pipeline prepare_pipeline(const ExperimentConfig& config);
/// Same as above with a corpus and/or topic model supplied by the caller.
Pipeline prepare_pipeline(const ExperimentConfig& config, std::shared_ptr<const Corpus> corpus,
                          std::shared_ptr<const TopicModel> model = nullptr);

/// Split, generators and keyword pools of one (topic, N) cell. Generators and
/// pools are built on first use for each keyword count.
class TopicCell {
 public:
  TopicCell(const Pipeline& pipeline, int topic, int n_train);

  int topic() const { return topic_; }
  int n_train() const { return n_train_; }
  const TransferSplit& split() const { return split_; }

  std::vector<const Document*> documents(Partition p) const;
  std::vector<const Document*> documents(Partition p, const std::string& genre) const;
  std::vector<LabeledText> labeled(Partition p) const;

  const std::map<std::string, GeneratorHandle>& generators(int keywords);
  const std::vector<KeywordSequence>& pool(PoolSource source, int keywords);

 private:
  const Pipeline* pipeline_;
  int topic_;
  int n_train_;
  TransferSplit split_;
  std::map<int, std::map<std::string, GeneratorHandle>> generators_;
  std::map<std::pair<PoolSource, int>, std::vector<KeywordSequence>> pools_;
};

/// Trains the configured classifier for one condition and scores it on the
/// cell's on-topic test set. `seed_index` selects the replicate; all
/// conditions of one replicate share classifier and test-window seeds.
ConditionResult run_condition(const Pipeline& pipeline, TopicCell& cell, const ConditionTask& task, int seed_index);

struct RunOutcome {
  ExperimentReport report;
  std::vector<std::string> failures;
};

/// Runs every (topic, N) cell x seed x task. Cells run on `config.jobs`
/// threads; the report is independent of the thread count.
RunOutcome run_experiment(const Pipeline& pipeline,
                          const std::function<void(const std::string&)>& progress = nullptr);

/// Standard paired comparisons for a report (those whose series exist).
std::vector<Comparison> standard_comparisons(const ExperimentReport& report);

/// Writes report.csv, report.json and plot_data.json into `dir`.
void write_report(const ExperimentReport& report, const std::vector<Comparison>& comparisons,
                  const std::filesystem::path& dir);

}  // namespace topicshift
