#pragma once

// Small planted corpora shared by the unit tests and the acceptance binary.

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "topicshift/corpus.hpp"
#include "topicshift/topics.hpp"
#include "topicshift/util.hpp"

namespace topicshift::fixtures {

struct TwoTopicCorpus {
  Corpus corpus;
  std::vector<std::set<std::string>> topic_words;  // planted word sets
  std::vector<int> doc_topic;
};

/// 200 single-topic documents over a 20-word vocabulary split into two
/// disjoint 10-word topics; words are drawn uniformly within the topic.
inline TwoTopicCorpus two_topic_corpus(std::uint64_t seed = 5, int docs = 200, int length = 40) {
  TwoTopicCorpus out{Corpus({Document::make("x", "g", "x")}), {}, {}};
  std::vector<std::vector<std::string>> words(2);
  for (int t = 0; t < 2; ++t) {
    for (int i = 0; i < 10; ++i) words[t].push_back(std::string(t == 0 ? "wa" : "wo") + static_cast<char>('a' + i));
    out.topic_words.emplace_back(words[t].begin(), words[t].end());
  }
  Rng rng(seed);
  std::vector<Document> list;
  for (int d = 0; d < docs; ++d) {
    const int t = d % 2;
    std::string text;
    for (int n = 0; n < length; ++n) text += words[t][uniform_index(rng, 10)] + " ";
    list.push_back(Document::make("doc" + std::to_string(1000 + d), d % 4 < 2 ? "left" : "right", text));
    out.doc_topic.push_back(t);
  }
  out.corpus = Corpus(std::move(list));
  return out;
}

inline double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
  std::vector<std::string> inter, uni;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(inter));
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(uni));
  return uni.empty() ? 1.0 : static_cast<double>(inter.size()) / static_cast<double>(uni.size());
}

/// Majority matching: each planted set is paired with the learned topic whose
/// top-k list overlaps it most. Returns the per-planted-topic Jaccard, or an
/// empty vector if two planted sets claim the same learned topic.
inline std::vector<double> matched_jaccard(const TopicModel& model, const std::vector<std::set<std::string>>& planted,
                                           int k) {
  std::vector<std::set<std::string>> learned;
  for (int t = 0; t < model.topics(); ++t) {
    std::set<std::string> s;
    for (int w : top_words(model, t, k)) s.insert(model.vocabulary().word(w));
    learned.push_back(std::move(s));
  }
  std::vector<double> out;
  std::set<int> used;
  for (const auto& p : planted) {
    int best = -1;
    double best_j = -1;
    for (int t = 0; t < model.topics(); ++t) {
      const double j = jaccard(learned[static_cast<std::size_t>(t)], p);
      if (j > best_j) {
        best_j = j;
        best = t;
      }
    }
    if (!used.insert(best).second) return {};
    out.push_back(best_j);
  }
  return out;
}

}  // namespace topicshift::fixtures
