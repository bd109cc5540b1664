#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "topicshift/corpus.hpp"

namespace topicshift {

/// Recipe for a planted corpus. Every token of a document is one of: a
/// function word shared by all genres, a style marker of some genre, or a
/// content word of a topic.
struct PlantedSpec {
  int genres = 4;
  int topics = 6;
  int vocab_size = 2000;
  int docs_per_genre = 400;
  int doc_length = 300;
  /// Probability that a document's topic comes from its genre's preferred
  /// subset; otherwise it is uniform over all topics.
  double bias = 0.9;
  int preferred_per_genre = 2;

  int function_words = 30;
  int style_words_per_genre = 40;
  double function_share = 0.35;
  double style_share = 0.10;
  /// Probability that a style token is one of the document genre's own markers.
  double style_purity = 1.0;
  /// Fraction of content tokens drawn from the secondary topic.
  double secondary_weight = 0.0;
  /// Zipf exponent of word frequencies within a topic.
  double topic_zipf = 0.7;
  /// Fraction of rank positions at which topic t and its partner t + K/2
  /// use the same word.
  double topic_overlap = 0.15;
  std::uint64_t seed = 7;

  void validate() const;
  int topic_words_per_topic() const;
  nlohmann::json to_json() const;
  static PlantedSpec from_json(const nlohmann::json& j);
};

struct PlantedDocument {
  std::string id;
  std::string genre;
  int topic = 0;
  int secondary_topic = 0;
};

struct PlantedTruth {
  std::vector<std::string> genre_names;
  std::vector<std::string> function_words;
  std::vector<std::vector<std::string>> style_words;  // per genre
  std::vector<std::vector<std::string>> topic_words;  // per topic
  std::vector<std::vector<int>> preferred_topics;     // per genre
  std::vector<PlantedDocument> documents;

  nlohmann::json to_json() const;
};

struct PlantedCorpus {
  Corpus corpus;
  PlantedTruth truth;
};

/// Topic that shares words with `topic`, or -1 when K is odd and `topic`
/// is the last one.
int partner_topic(int topic, int topics);

/// Topics a genre prefers: genre g takes g, g+G, g+2G, ... modulo K.
std::vector<int> preferred_topics(int genre, int genres, int topics, int count);

PlantedCorpus make_biased_corpus(const PlantedSpec& spec);

/// Corpus file plus `<stem>.truth.json` next to it.
void write_planted(const PlantedCorpus& planted, const PlantedSpec& spec, const std::filesystem::path& corpus_path);

}  // namespace topicshift
