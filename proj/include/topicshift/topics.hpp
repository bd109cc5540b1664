#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "topicshift/corpus.hpp"

namespace topicshift {

/// Per-topic word distributions L(w,t) = P(w|t) over a shared vocabulary.
class TopicModel {
 public:
  TopicModel(std::shared_ptr<const Vocabulary> vocabulary, int topics, std::vector<double> word_topic,
             double hyper_alpha, double hyper_beta);

  int topics() const { return topics_; }
  int vocab_size() const { return vocab_->size(); }
  const Vocabulary& vocabulary() const { return *vocab_; }
  const std::shared_ptr<const Vocabulary>& vocabulary_ptr() const { return vocab_; }

  double prob(int word, int topic) const { return word_topic_[static_cast<std::size_t>(topic) * vocab_size() + word]; }
  std::span<const double> row(int topic) const;
  const std::vector<double>& word_topic() const { return word_topic_; }

  double hyper_alpha() const { return alpha_; }
  double hyper_beta() const { return beta_; }

  /// Content hash over K, vocabulary and the exact matrix bytes.
  std::string hash() const;

 private:
  std::shared_ptr<const Vocabulary> vocab_;
  int topics_;
  std::vector<double> word_topic_;
  double alpha_;
  double beta_;
};

/// Topic proportions L(D,t) of one document.
struct DocTopicScores {
  std::vector<double> theta;

  int dominant() const;
};

struct LdaConfig {
  int topics = 10;
  /// Document-topic prior; non-positive selects 50/K.
  double hyper_alpha = 0.0;
  double hyper_beta = 0.01;
  int sweeps = 500;
  std::uint64_t seed = 1;
  /// Reconcile count tables against assignments after every sweep.
  bool check_counts = false;

  double effective_alpha() const { return hyper_alpha > 0 ? hyper_alpha : 50.0 / topics; }
};

/// Collapsed-Gibbs sampler state: per-token assignments and the count tables
/// derived from them.
class GibbsState {
 public:
  GibbsState(std::vector<std::vector<int>> docs, int topics, int vocab_size, std::uint64_t seed);

  /// One full pass resampling every token. `alpha`/`beta` are the priors.
  void sweep(double alpha, double beta);

  /// Throws IntegrityError if any count table disagrees with assignments.
  void check_consistency() const;

  int topics() const { return topics_; }
  int vocab_size() const { return vocab_size_; }
  const std::vector<std::vector<int>>& docs() const { return docs_; }
  const std::vector<std::vector<int>>& assignments() const { return z_; }
  const std::vector<int>& doc_topic() const { return doc_topic_; }
  const std::vector<int>& topic_word() const { return topic_word_; }
  const std::vector<int>& topic_totals() const { return topic_totals_; }

 private:
  std::vector<std::vector<int>> docs_;
  std::vector<std::vector<int>> z_;
  int topics_;
  int vocab_size_;
  std::vector<int> doc_topic_;    // D x K
  std::vector<int> topic_word_;   // K x V
  std::vector<int> topic_totals_; // K
  Rng rng_;
  std::vector<double> weights_;
};

struct LdaResult {
  TopicModel model;
  std::vector<std::string> excluded_ids;  // documents with no in-vocabulary tokens
};

LdaResult train_lda(const Corpus& corpus, std::shared_ptr<const Vocabulary> vocabulary, const LdaConfig& config);

/// Fold-in inference: resamples the document's assignments with the model's
/// word distributions held fixed.
DocTopicScores infer_doc_topics(const TopicModel& model, const Document& doc, int fold_in_sweeps,
                                std::uint64_t seed);
DocTopicScores infer_doc_topics(const TopicModel& model, std::span<const int> word_ids, int fold_in_sweeps,
                                std::uint64_t seed);

/// Word and topic embeddings of an embedded topic model: rho is V x E,
/// alpha is K x E, both row-major.
struct EtmParameters {
  int vocab_size = 0;
  int topics = 0;
  int embedding_dim = 0;
  std::vector<double> rho;
  std::vector<double> alpha;

  nlohmann::json to_json() const;
  static EtmParameters from_json(const nlohmann::json& j);
};

/// Row t = softmax over the vocabulary of rho * alpha_t. Returns K x V
/// row-major.
std::vector<double> etm_word_topic(const EtmParameters& params);

/// In-place numerically stable softmax.
void softmax(std::span<double> logits);

TopicModel topic_model_from_etm(const EtmParameters& params, std::shared_ptr<const Vocabulary> vocabulary);

/// k highest-probability words of topic t, descending; ties by vocabulary index.
std::vector<int> top_words(const TopicModel& model, int topic, int k);

struct CoherenceResult {
  double mean = 0.0;
  std::vector<double> per_topic;
};

/// Mean NPMI over all pairs of each topic's top_k words using
/// document-level co-occurrence in `corpus`; averaged over topics. Pairs that
/// never co-occur score -1.
CoherenceResult topic_coherence(const TopicModel& model, const Corpus& corpus, int top_k = 10);

/// Distinct words among all topics' top_k lists divided by K * top_k (top_k
/// capped at the vocabulary size).
double topic_diversity(const TopicModel& model, int top_k = 25);

struct TopicCountScore {
  int topics;
  double coherence;
  double diversity;
  double product;
};

struct TopicCountSelection {
  int chosen;
  std::vector<TopicCountScore> scores;
};

/// Trains one model per candidate and picks the argmax of
/// coherence * diversity (ties toward smaller K).
TopicCountSelection select_topic_count(const Corpus& corpus, std::shared_ptr<const Vocabulary> vocabulary,
                                       std::span<const int> candidates, const LdaConfig& base,
                                       int coherence_top_k = 10, int diversity_top_k = 25);

nlohmann::json topic_model_to_json(const TopicModel& model);
TopicModel topic_model_from_json(const nlohmann::json& j);
void save_topic_model(const TopicModel& model, const std::filesystem::path& path);
TopicModel load_topic_model(const std::filesystem::path& path);

EtmParameters load_etm_parameters(const std::filesystem::path& path);

}  // namespace topicshift
