#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "topicshift/topics.hpp"

namespace topicshift {

/// Topic scores of every scorable document in a corpus, keyed by id.
struct CorpusScores {
  std::map<std::string, DocTopicScores, std::less<>> scores;
  std::vector<std::string> unscorable;
  std::string model_hash;
};

/// Seed used for one document's fold-in inference.
std::uint64_t document_seed(std::uint64_t seed, std::string_view doc_id);

CorpusScores score_corpus(const Corpus& corpus, const TopicModel& model, int fold_in_sweeps, std::uint64_t seed);

struct SplitSpec {
  int topic = 0;
  int n_train = 100;  // per genre
  int n_val = 300;    // per genre, off-topic validation
  int n_test = 300;   // per genre, on-topic test
  /// Per-genre on-topic validation carved after on_train; used only for the
  /// on-topic ceiling. Negative means "same as n_val".
  int n_on_val = -1;
  std::uint64_t seed = 0;

  int on_val_count() const { return n_on_val < 0 ? n_val : n_on_val; }
  int required_per_genre() const { return 2 * n_train + n_val + n_test + on_val_count(); }
  nlohmann::json to_json() const;
  static SplitSpec from_json(const nlohmann::json& j);
};

enum class Partition { on_train, off_train, off_val, on_test, on_val };
inline constexpr std::array<Partition, 5> kAllPartitions = {Partition::on_train, Partition::off_train,
                                                            Partition::off_val, Partition::on_test,
                                                            Partition::on_val};
std::string_view to_string(Partition p);

using GenreLists = std::map<std::string, std::vector<std::string>>;

struct TransferSplit {
  SplitSpec spec;
  std::string model_hash;
  std::map<Partition, GenreLists> parts;

  const GenreLists& operator[](Partition p) const { return parts.at(p); }
  /// All ids of a partition, genres in sorted order.
  std::vector<std::string> ids(Partition p) const;
  std::string hash() const;
};

/// Per genre, ranks scorable documents by L(D,topic): on_test takes the top
/// n_test, on_train the next n_train, on_val the next n_on_val; off_train
/// takes the n_train lowest of the rest and off_val the next n_val. Ties are
/// broken by ascending document id.
TransferSplit build_transfer_split(const Corpus& corpus, const CorpusScores& scores, const SplitSpec& spec);

/// Writes one corpus-format file per partition plus manifest.json.
void emit_split(const TransferSplit& split, const Corpus& corpus, const std::filesystem::path& dir);
TransferSplit load_split(const std::filesystem::path& dir);

}  // namespace topicshift
