#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "topicshift/corpus.hpp"

namespace topicshift {

/// A normalized text with its genre label. `source` records provenance (a
/// document id or a synthetic-document tag).
struct LabeledText {
  std::string text;
  std::string genre;
  std::string source;
};

/// Sparse in-vocabulary token counts, sorted by index.
using FeatureVector = std::vector<std::pair<int, int>>;

FeatureVector featurize(std::string_view normalized, const Vocabulary& vocab);

/// Input to the linear model: counts scaled to unit Euclidean norm.
struct SparseInput {
  std::vector<int> index;
  std::vector<double> value;
};
SparseInput to_input(const FeatureVector& f);

struct ClassifierConfig {
  double learning_rate = 0.1;
  double l2 = 1e-4;
  int epochs = 100;
  int batch_size = 32;
  std::size_t window = 1000;
  /// Draw a new random window per document every epoch; otherwise windows are
  /// drawn once before the first epoch.
  bool fresh_windows = true;
  std::uint64_t seed = 1;

  nlohmann::json to_json() const;
  static ClassifierConfig from_json(const nlohmann::json& j);
};

/// Largest learning rate for which full-batch gradient descent on the
/// objective is guaranteed to decrease it: features are unit-norm and the
/// bias adds one more unit, so the curvature is at most 1 + l2.
double stability_threshold(double l2);

struct EpochRecord {
  int epoch = 0;
  /// Regularized objective on a fixed set of training windows.
  double train_loss = 0.0;
  double val_macro_f1 = 0.0;
  /// Unregularized cross-entropy on the validation windows; breaks F1 ties.
  double val_loss = 0.0;
};

struct Prediction {
  int genre = 0;
  std::vector<double> scores;
};

class ClassifierModel {
 public:
  ClassifierModel(std::vector<std::string> genres, std::shared_ptr<const Vocabulary> vocabulary);

  int genre_count() const { return static_cast<int>(genres_.size()); }
  int vocab_size() const { return vocab_->size(); }
  const std::vector<std::string>& genres() const { return genres_; }
  const Vocabulary& vocabulary() const { return *vocab_; }
  const std::shared_ptr<const Vocabulary>& vocabulary_ptr() const { return vocab_; }

  /// G x V row-major.
  std::vector<double>& weights() { return weights_; }
  const std::vector<double>& weights() const { return weights_; }
  std::vector<double>& bias() { return bias_; }
  const std::vector<double>& bias() const { return bias_; }

  std::vector<double> logits(const SparseInput& x) const;
  /// Softmax scores; ties in the argmax go to the earliest genre.
  Prediction predict_input(const SparseInput& x) const;
  Prediction predict(std::string_view normalized) const;
  const std::string& label(const Prediction& p) const { return genres_.at(static_cast<std::size_t>(p.genre)); }

  int genre_index(std::string_view genre) const;

  ClassifierConfig config;
  int best_epoch = 0;
  std::vector<EpochRecord> history;

 private:
  std::vector<std::string> genres_;
  std::shared_ptr<const Vocabulary> vocab_;
  std::vector<double> weights_;
  std::vector<double> bias_;
};

struct Example {
  SparseInput x;
  int label;
};

/// Mean cross-entropy over `batch` plus (l2/2)*||W||^2 (biases are not
/// penalized). Gradients are written into `grad_w` (G x V) and `grad_b` (G).
double loss_and_gradient(const ClassifierModel& model, std::span<const Example> batch, double l2,
                         std::vector<double>& grad_w, std::vector<double>& grad_b);
double loss(const ClassifierModel& model, std::span<const Example> batch, double l2);

/// Genres are the sorted distinct labels of `train`. After every epoch the
/// model is scored on one fixed window per validation text; the returned
/// parameters are those of the epoch with the best validation macro-F1
/// (earliest on ties).
ClassifierModel train_classifier(std::span<const LabeledText> train, std::span<const LabeledText> val,
                                 std::shared_ptr<const Vocabulary> vocabulary, const ClassifierConfig& config);

/// Predicted labels for one seeded random window of each text.
std::vector<std::string> predict_windows(const ClassifierModel& model, std::span<const LabeledText> texts,
                                         std::size_t window, std::uint64_t seed);

nlohmann::json classifier_to_json(const ClassifierModel& model);
ClassifierModel classifier_from_json(const nlohmann::json& j);
void save_classifier(const ClassifierModel& model, const std::filesystem::path& path);
ClassifierModel load_classifier(const std::filesystem::path& path);

}  // namespace topicshift
