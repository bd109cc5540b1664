#pragma once

// Brute-force reference implementations and random instance generators,
// shared by the unit tests and the acceptance binary. Each oracle is written
// the slow, obvious way and depends only on public accessors.

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "topicshift/corpus.hpp"
#include "topicshift/splits.hpp"
#include "topicshift/topics.hpp"
#include "topicshift/util.hpp"

namespace topicshift::oracles {

/// Model over the given words; row t gets weights rows[t] (normalized here).
/// Rows are given in `words` order; the vocabulary indexes lexicographically.
inline TopicModel model_over(const std::vector<std::string>& words, std::vector<std::vector<double>> rows) {
  auto sorted = words;
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> flat;
  for (auto& r : rows) {
    double sum = 0;
    for (double x : r) sum += x;
    std::vector<double> by_index(sorted.size());
    for (std::size_t i = 0; i < words.size(); ++i) {
      const auto pos = static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), words[i]) - sorted.begin());
      by_index[pos] = r[i] / sum;
    }
    flat.insert(flat.end(), by_index.begin(), by_index.end());
  }
  auto v = std::make_shared<const Vocabulary>(sorted, std::vector<std::uint64_t>(sorted.size(), 1));
  return TopicModel(v, static_cast<int>(rows.size()), flat, 0.1, 0.01);
}

inline std::vector<std::string> letters_words(int n) {
  std::vector<std::string> w;
  for (int i = 0; i < n; ++i) w.push_back(std::string("k") + static_cast<char>('a' + i / 26) + static_cast<char>('a' + i % 26));
  return w;
}

/// Coarse integer weights so that ties actually occur.
inline TopicModel random_model(Rng& rng, int K, int V) {
  std::vector<std::vector<double>> rows(static_cast<std::size_t>(K));
  for (auto& r : rows) {
    for (int i = 0; i < V; ++i) r.push_back(1.0 + static_cast<double>(uniform_index(rng, 5)));
  }
  return model_over(letters_words(V), rows);
}

inline DocTopicScores random_theta(Rng& rng, int K) {
  DocTopicScores th;
  double sum = 0;
  for (int k = 0; k < K; ++k) sum += th.theta.emplace_back(1.0 + static_cast<double>(uniform_index(rng, 3)));
  for (auto& x : th.theta) x /= sum;
  return th;
}

/// `len` tokens from the model vocabulary; with_oov mixes in an unknown word.
inline Document random_doc(Rng& rng, const TopicModel& m, int len, bool with_oov) {
  std::string text;
  for (int i = 0; i < len; ++i) {
    if (with_oov && uniform_index(rng, 5) == 0) {
      text += "zzz ";
    } else {
      text += m.vocabulary().word(static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(m.vocab_size())))) + " ";
    }
  }
  return Document::make("r", "g", text);
}

/// Sum over occurrences of the word of sum over topics of theta * phi.
inline double score_word(const std::string& word, const Document& doc, const DocTopicScores& theta, const TopicModel& m) {
  const int w = m.vocabulary().index(word);
  double total = 0;
  if (w < 0) return total;
  for (auto tok : tokenize(doc.norm_text)) {
    if (tok != word) continue;
    for (int t = 0; t < m.topics(); ++t) total += theta.theta[static_cast<std::size_t>(t)] * m.prob(w, t);
  }
  return total;
}

struct KeywordOracle {
  std::vector<std::string> tokens;
  int distinct = 0;
};

/// Ranks distinct in-vocabulary words by count * sum_t theta_t phi_t(w), ties
/// to the lower vocabulary index, keeps the top `top`, then filters the
/// document's tokens by membership.
inline KeywordOracle extract_keywords(const Document& doc, const TopicModel& m, const DocTopicScores& theta, int top) {
  std::map<int, int> counts;
  for (auto tok : tokenize(doc.norm_text)) {
    const int w = m.vocabulary().index(tok);
    if (w >= 0) ++counts[w];
  }
  std::vector<std::tuple<double, int>> ranked;
  for (auto [w, c] : counts) {
    double s = 0;
    for (int t = 0; t < m.topics(); ++t) s += theta.theta[static_cast<std::size_t>(t)] * m.prob(w, t);
    ranked.emplace_back(-c * s, w);
  }
  std::sort(ranked.begin(), ranked.end());
  std::set<std::string> chosen;
  for (std::size_t i = 0; i < ranked.size() && static_cast<int>(i) < top; ++i) {
    chosen.insert(m.vocabulary().word(std::get<1>(ranked[i])));
  }
  KeywordOracle out;
  out.distinct = static_cast<int>(chosen.size());
  for (auto tok : tokenize(doc.norm_text)) {
    if (chosen.count(std::string(tok))) out.tokens.emplace_back(tok);
  }
  return out;
}

/// Per-class counts in one pass per class; absent classes score 0.
inline double macro_f1(const std::vector<int>& pred, const std::vector<int>& gold, int G) {
  double sum = 0;
  for (int g = 0; g < G; ++g) {
    int tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
      if (pred[i] == g && gold[i] == g) {
        ++tp;
      } else if (pred[i] == g) {
        ++fp;
      } else if (gold[i] == g) {
        ++fn;
      }
    }
    sum += tp == 0 ? 0.0 : 2.0 * tp / (2.0 * tp + fp + fn);
  }
  return sum / G;
}

/// Full sort of the row, ties by index, then the first k.
inline std::vector<int> top_words(const TopicModel& m, int t, int k) {
  std::vector<std::pair<double, int>> all;
  for (int w = 0; w < m.vocab_size(); ++w) all.push_back({-m.prob(w, t), w});
  std::sort(all.begin(), all.end());
  std::vector<int> out;
  for (int i = 0; i < k && i < static_cast<int>(all.size()); ++i) out.push_back(all[static_cast<std::size_t>(i)].second);
  return out;
}

struct SplitInstance {
  Corpus corpus;
  CorpusScores scores;
};

/// Documents spread over `genres` genres with coarse (tie-prone) topic scores
/// and ids that do not follow corpus order.
inline SplitInstance random_split_instance(Rng& rng, int docs, int genres, int K, int levels) {
  std::vector<Document> list;
  CorpusScores scores;
  scores.model_hash = "m";
  std::vector<int> order(static_cast<std::size_t>(docs));
  for (int i = 0; i < docs; ++i) order[static_cast<std::size_t>(i)] = i;
  shuffle(order, rng);
  for (int i = 0; i < docs; ++i) {
    const std::string id = "doc" + std::to_string(10000 + order[static_cast<std::size_t>(i)]);
    list.push_back(Document::make(id, "g" + std::to_string(uniform_index(rng, static_cast<std::uint64_t>(genres))), "x"));
    std::vector<double> theta(static_cast<std::size_t>(K));
    double sum = 0;
    for (auto& t : theta) sum += (t = 1.0 + static_cast<double>(uniform_index(rng, static_cast<std::uint64_t>(levels))));
    for (auto& t : theta) t /= sum;
    scores.scores.emplace(id, DocTopicScores{theta});
  }
  return {Corpus(std::move(list)), std::move(scores)};
}

/// Independent sort-and-slice: full sort per genre, then cut the ranked lists.
inline std::map<Partition, GenreLists> transfer_split(const SplitInstance& in, const SplitSpec& spec) {
  std::map<std::string, std::vector<std::pair<double, std::string>>> by_genre;
  for (const auto& d : in.corpus) by_genre[d.genre].push_back({in.scores.scores.at(d.id).theta[static_cast<std::size_t>(spec.topic)], d.id});
  std::map<Partition, GenreLists> out;
  for (auto& [g, v] : by_genre) {
    for (Partition p : kAllPartitions) out[p][g];
    auto desc = v;
    std::sort(desc.begin(), desc.end(), [](const auto& a, const auto& b) {
      return std::make_pair(-a.first, a.second) < std::make_pair(-b.first, b.second);
    });
    std::size_t i = 0;
    for (int k = 0; k < spec.n_test; ++k, ++i) out[Partition::on_test][g].push_back(desc[i].second);
    for (int k = 0; k < spec.n_train; ++k, ++i) out[Partition::on_train][g].push_back(desc[i].second);
    for (int k = 0; k < spec.on_val_count(); ++k, ++i) out[Partition::on_val][g].push_back(desc[i].second);
    std::set<std::string> used;
    for (std::size_t k = 0; k < i; ++k) used.insert(desc[k].second);
    std::vector<std::pair<double, std::string>> rest;
    for (const auto& e : v) {
      if (!used.count(e.second)) rest.push_back(e);
    }
    std::sort(rest.begin(), rest.end());
    std::size_t j = 0;
    for (int k = 0; k < spec.n_train; ++k, ++j) out[Partition::off_train][g].push_back(rest[j].second);
    for (int k = 0; k < spec.n_val; ++k, ++j) out[Partition::off_val][g].push_back(rest[j].second);
  }
  return out;
}

/// A random oracle-equivalence instance for build_transfer_split.
inline SplitSpec random_split_spec(Rng& rng, int K) {
  SplitSpec spec;
  spec.topic = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(K)));
  spec.n_train = 1 + static_cast<int>(uniform_index(rng, 30));
  spec.n_val = 1 + static_cast<int>(uniform_index(rng, 30));
  spec.n_test = 1 + static_cast<int>(uniform_index(rng, 30));
  spec.n_on_val = static_cast<int>(uniform_index(rng, 20));
  return spec;
}

}  // namespace topicshift::oracles
