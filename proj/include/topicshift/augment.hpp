#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "topicshift/adapter.hpp"
#include "topicshift/classify.hpp"
#include "topicshift/keywords.hpp"
#include "topicshift/topics.hpp"

namespace topicshift {

struct GeneratorOptions {
  int order = 2;
  /// Multiplier applied to keyword emission probabilities before
  /// renormalizing.
  double boost = 10.0;
  /// Keywords masked per training document; should match the m used to
  /// extract conditioning keywords.
  int keywords = 10;
  /// Add-delta smoothing of the unigram level.
  double delta = 0.1;
  int fold_in_sweeps = 50;
  std::uint64_t seed = 1;

  nlohmann::json to_json() const;
};

/// Word chain of fixed order with interpolated Witten-Bell smoothing down to
/// an add-delta unigram. During training each document's keywords (as
/// selected by the topic model) are replaced by a slot token; when sampling,
/// a slot emits the next supplied keyword, so the chain learns where topical
/// words go and the caller decides which ones.
class BuiltinGenerator {
 public:
  static constexpr int kBegin = 0;
  static constexpr int kSlot = 1;
  static constexpr const char* kSlotToken = "<kw>";

  BuiltinGenerator(const std::vector<std::vector<std::string>>& documents, int order, double delta);

  int order() const { return order_; }
  /// Token types excluding the begin marker (the slot token included).
  int vocab_size() const { return static_cast<int>(words_.size()) - 1; }
  int token_id(std::string_view word) const;
  const std::string& token(int id) const { return words_.at(static_cast<std::size_t>(id)); }

  /// Unbiased probability of token `id` after `history` (most recent last;
  /// shorter histories are padded with the begin marker).
  double probability(std::span<const int> history, int id) const;

  /// Step distribution after keyword biasing. Tokens in `keyword_ids` and the
  /// slot are multiplied by `boost`; with no keywords the slot is removed.
  std::vector<double> step_distribution(std::span<const int> history, std::span<const int> keyword_ids,
                                        bool have_keywords, double boost) const;

  /// `length` words; keyword slots cycle through `keywords` in order.
  std::vector<std::string> sample(std::span<const std::string> keywords, int length, double boost, Rng& rng) const;

 private:
  struct Successors {
    std::vector<int> tokens;  // one entry per observed occurrence
    int types = 0;
  };
  using Context = std::uint64_t;

  Context context_key(std::span<const int> history, int n) const;
  const Successors* successors(std::span<const int> history, int n) const;
  int sample_level(std::span<const int> history, int n, Rng& rng) const;
  double probability_level(std::span<const int> history, int n, int id) const;

  int order_;
  double delta_;
  std::vector<std::string> words_;
  std::unordered_map<std::string, int> index_;
  std::vector<int> unigram_;  // occurrence list
  std::vector<std::unordered_map<Context, Successors>> levels_;  // levels_[n-1] for order n
};

enum class GeneratorBackend { builtin, external };

/// Serializes access to one adapter process shared by several handles.
struct SharedAdapter {
  explicit SharedAdapter(std::unique_ptr<AdapterProcess> p) : process(std::move(p)) {}
  std::unique_ptr<AdapterProcess> process;
  std::mutex mutex;
};

struct GeneratorHandle {
  std::string genre;
  GeneratorBackend backend = GeneratorBackend::builtin;
  std::vector<std::string> training_ids;
  GeneratorOptions options;
  std::string id;
  std::shared_ptr<const BuiltinGenerator> builtin;
  std::shared_ptr<SharedAdapter> adapter;
};

/// Builds the generator of one genre from its off-topic training documents.
GeneratorHandle train_builtin_generator(std::span<const Document* const> docs, const TopicModel& model,
                                        const GeneratorOptions& options);

GeneratorHandle external_generator(std::string genre, std::shared_ptr<SharedAdapter> adapter,
                                   std::vector<std::string> training_ids);

struct SyntheticDocument {
  std::string genre;
  KeywordSequence keywords;
  std::string text;
  std::string generator_id;
  std::uint64_t seed = 0;

  nlohmann::json to_json() const;
};

SyntheticDocument generate(const GeneratorHandle& handle, const KeywordSequence& keywords, int length,
                           std::uint64_t seed);

/// Keywords of each pool document, using its topic scores under `model`.
std::vector<KeywordSequence> build_keyword_pool(std::span<const Document* const> docs, const TopicModel& model,
                                                int m, int fold_in_sweeps, std::uint64_t seed);

/// per_genre documents for every genre. The i-th document of each genre is
/// conditioned on the same keyword sequence, drawn with replacement from the
/// pool, so keyword content carries no information about the label.
std::vector<SyntheticDocument> build_synthetic_set(const std::map<std::string, GeneratorHandle>& generators,
                                                   std::span<const KeywordSequence> pool, int per_genre, int length,
                                                   std::uint64_t seed);

enum class AugmentMode { adapt, baseline, shuffled, synthetic_only };
std::string_view to_string(AugmentMode m);

struct AugmentationPlan {
  int n_original = 0;   // per genre
  int n_synthetic = 0;  // per genre
  AugmentMode mode = AugmentMode::adapt;
  std::vector<std::string> keyword_pool;

  nlohmann::json to_json() const;
};

std::vector<LabeledText> to_labeled(std::span<const SyntheticDocument> synthetic);

/// First n_original originals and first n_synthetic synthetic documents of
/// each genre, concatenated and shuffled.
std::vector<LabeledText> mix(std::span<const LabeledText> original, std::span<const LabeledText> synthetic,
                             const AugmentationPlan& plan, const std::vector<std::string>& genres,
                             std::uint64_t seed);

/// Uniformly permutes genre labels among the documents; texts are untouched.
std::vector<SyntheticDocument> shuffle_labels(std::vector<SyntheticDocument> synthetic, std::uint64_t seed);

}  // namespace topicshift
