#pragma once

#include <climits>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "topicshift/topics.hpp"

namespace topicshift {

/// Keeps every distinct word; used for the "all words" end of keyword sweeps.
inline constexpr int kAllKeywords = INT_MAX;

struct KeywordSequence {
  std::vector<std::string> tokens;
  std::string source_doc;
  int distinct_count = 0;

  nlohmann::json to_json() const;
  static KeywordSequence from_json(const nlohmann::json& j);
};

/// count(w in doc) * sum_t theta_t * L(w,t). Returns 0 for words outside the
/// model vocabulary.
double score_word(std::string_view word, const Document& doc, const DocTopicScores& theta, const TopicModel& model);

/// Vocabulary ids of the m highest-scoring distinct words among `word_ids`,
/// ordered by descending score (ties by vocabulary index).
std::vector<int> select_keywords(std::span<const int> word_ids, const TopicModel& model, const DocTopicScores& theta,
                                 int m);

KeywordSequence extract_keywords(const Document& doc, const TopicModel& model, const DocTopicScores& theta,
                                 int m = 10);

void write_keywords(const std::filesystem::path& path, std::span<const KeywordSequence> sequences);
std::vector<KeywordSequence> read_keywords(const std::filesystem::path& path);

}  // namespace topicshift
