#include "topicshift/topics.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>
#include <set>

#include "topicshift/error.hpp"

namespace topicshift {

TopicModel::TopicModel(std::shared_ptr<const Vocabulary> vocabulary, int topics, std::vector<double> word_topic,
                       double hyper_alpha, double hyper_beta)
    : vocab_(std::move(vocabulary)),
      topics_(topics),
      word_topic_(std::move(word_topic)),
      alpha_(hyper_alpha),
      beta_(hyper_beta) {
  if (!vocab_) throw ConfigError("topic model requires a vocabulary");
  if (topics_ < 1) throw ConfigError("topic count must be at least 1");
  const auto v = static_cast<std::size_t>(vocab_->size());
  if (word_topic_.size() != static_cast<std::size_t>(topics_) * v) {
    throw ShapeError("word_topic has " + std::to_string(word_topic_.size()) + " entries, expected " +
                     std::to_string(static_cast<std::size_t>(topics_) * v));
  }
  for (int t = 0; t < topics_; ++t) {
    double sum = 0;
    for (double p : row(t)) {
      if (!(p >= 0.0 && p <= 1.0)) throw IntegrityError("word_topic entry outside [0,1]");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      throw IntegrityError("word_topic row " + std::to_string(t) + " sums to " + std::to_string(sum));
    }
  }
}

std::span<const double> TopicModel::row(int topic) const {
  if (topic < 0 || topic >= topics_) throw std::out_of_range("topic index " + std::to_string(topic));
  return std::span<const double>(word_topic_).subspan(static_cast<std::size_t>(topic) * vocab_size(),
                                                      static_cast<std::size_t>(vocab_size()));
}

std::string TopicModel::hash() const {
  std::uint64_t h = fnv1a64(vocab_->hash());
  h = fnv1a64(std::to_string(topics_), h);
  h = fnv1a64(std::string_view(reinterpret_cast<const char*>(word_topic_.data()),
                               word_topic_.size() * sizeof(double)),
              h);
  return hex64(h);
}

int DocTopicScores::dominant() const {
  return static_cast<int>(std::max_element(theta.begin(), theta.end()) - theta.begin());
}

GibbsState::GibbsState(std::vector<std::vector<int>> docs, int topics, int vocab_size, std::uint64_t seed)
    : docs_(std::move(docs)),
      topics_(topics),
      vocab_size_(vocab_size),
      doc_topic_(docs_.size() * static_cast<std::size_t>(topics), 0),
      topic_word_(static_cast<std::size_t>(topics) * vocab_size, 0),
      topic_totals_(static_cast<std::size_t>(topics), 0),
      rng_(seed),
      weights_(static_cast<std::size_t>(topics)) {
  z_.resize(docs_.size());
  for (std::size_t d = 0; d < docs_.size(); ++d) {
    z_[d].resize(docs_[d].size());
    for (std::size_t i = 0; i < docs_[d].size(); ++i) {
      int t = static_cast<int>(uniform_index(rng_, static_cast<std::uint64_t>(topics_)));
      z_[d][i] = t;
      ++doc_topic_[d * topics_ + t];
      ++topic_word_[static_cast<std::size_t>(t) * vocab_size_ + docs_[d][i]];
      ++topic_totals_[t];
    }
  }
}

void GibbsState::sweep(double alpha, double beta) {
  const double vbeta = vocab_size_ * beta;
  for (std::size_t d = 0; d < docs_.size(); ++d) {
    int* dt = &doc_topic_[d * topics_];
    const auto& words = docs_[d];
    auto& zd = z_[d];
    for (std::size_t i = 0; i < words.size(); ++i) {
      const int w = words[i];
      int t = zd[i];
      --dt[t];
      --topic_word_[static_cast<std::size_t>(t) * vocab_size_ + w];
      --topic_totals_[t];
      double total = 0;
      for (int k = 0; k < topics_; ++k) {
        double p = (dt[k] + alpha) * (topic_word_[static_cast<std::size_t>(k) * vocab_size_ + w] + beta) /
                   (topic_totals_[k] + vbeta);
        weights_[k] = p;
        total += p;
      }
      t = static_cast<int>(sample_discrete(weights_, total, rng_));
      zd[i] = t;
      ++dt[t];
      ++topic_word_[static_cast<std::size_t>(t) * vocab_size_ + w];
      ++topic_totals_[t];
    }
  }
}

void GibbsState::check_consistency() const {
  std::vector<int> dt(doc_topic_.size(), 0), tw(topic_word_.size(), 0), tt(topic_totals_.size(), 0);
  for (std::size_t d = 0; d < docs_.size(); ++d) {
    if (z_[d].size() != docs_[d].size()) throw IntegrityError("assignment length mismatch");
    for (std::size_t i = 0; i < docs_[d].size(); ++i) {
      int t = z_[d][i];
      if (t < 0 || t >= topics_) throw IntegrityError("assignment out of range");
      ++dt[d * topics_ + t];
      ++tw[static_cast<std::size_t>(t) * vocab_size_ + docs_[d][i]];
      ++tt[t];
    }
  }
  if (dt != doc_topic_) throw IntegrityError("doc-topic counts disagree with assignments");
  if (tw != topic_word_) throw IntegrityError("topic-word counts disagree with assignments");
  if (tt != topic_totals_) throw IntegrityError("topic totals disagree with assignments");
}

LdaResult train_lda(const Corpus& corpus, std::shared_ptr<const Vocabulary> vocabulary, const LdaConfig& config) {
  if (config.topics < 1) throw ConfigError("topic count must be at least 1");
  if (config.sweeps < 1) throw ConfigError("sweeps must be at least 1");
  if (!(config.hyper_beta > 0)) throw ConfigError("hyper_beta must be positive");
  const double alpha = config.effective_alpha();
  std::vector<std::vector<int>> docs;
  std::vector<std::string> excluded;
  for (const auto& d : corpus) {
    auto ids = vocabulary->encode(d.norm_text);
    if (ids.empty()) {
      log_warning("document '" + d.id + "' has no in-vocabulary tokens; excluded from topic training");
      excluded.push_back(d.id);
      continue;
    }
    docs.push_back(std::move(ids));
  }
  if (docs.empty()) throw ConfigError("no document has in-vocabulary tokens");

  const int K = config.topics;
  const int V = vocabulary->size();
  GibbsState state(std::move(docs), K, V, config.seed);
  if (config.check_counts) state.check_consistency();
  for (int s = 0; s < config.sweeps; ++s) {
    state.sweep(alpha, config.hyper_beta);
    if (config.check_counts) state.check_consistency();
  }

  std::vector<double> phi(static_cast<std::size_t>(K) * V);
  const auto& tw = state.topic_word();
  const auto& tt = state.topic_totals();
  for (int t = 0; t < K; ++t) {
    const double denom = tt[t] + V * config.hyper_beta;
    for (int w = 0; w < V; ++w) {
      const auto i = static_cast<std::size_t>(t) * V + w;
      phi[i] = (tw[i] + config.hyper_beta) / denom;
    }
  }
  return {TopicModel(std::move(vocabulary), K, std::move(phi), alpha, config.hyper_beta), std::move(excluded)};
}

DocTopicScores infer_doc_topics(const TopicModel& model, std::span<const int> word_ids, int fold_in_sweeps,
                                std::uint64_t seed) {
  if (word_ids.empty()) throw EmptyDocumentError("", "document has no in-vocabulary tokens");
  if (fold_in_sweeps < 1) throw ConfigError("fold_in_sweeps must be at least 1");
  const int K = model.topics();
  const double alpha = model.hyper_alpha();
  Rng rng(seed);
  std::vector<int> z(word_ids.size());
  std::vector<int> counts(static_cast<std::size_t>(K), 0);
  for (std::size_t i = 0; i < word_ids.size(); ++i) {
    z[i] = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(K)));
    ++counts[z[i]];
  }
  std::vector<double> weights(static_cast<std::size_t>(K));
  for (int s = 0; s < fold_in_sweeps; ++s) {
    for (std::size_t i = 0; i < word_ids.size(); ++i) {
      --counts[z[i]];
      double total = 0;
      for (int k = 0; k < K; ++k) {
        weights[k] = (counts[k] + alpha) * model.prob(word_ids[i], k);
        total += weights[k];
      }
      z[i] = static_cast<int>(sample_discrete(weights, total, rng));
      ++counts[z[i]];
    }
  }
  DocTopicScores out;
  out.theta.resize(static_cast<std::size_t>(K));
  const double denom = static_cast<double>(word_ids.size()) + K * alpha;
  for (int k = 0; k < K; ++k) out.theta[k] = (counts[k] + alpha) / denom;
  return out;
}

DocTopicScores infer_doc_topics(const TopicModel& model, const Document& doc, int fold_in_sweeps,
                                std::uint64_t seed) {
  auto ids = model.vocabulary().encode(doc.norm_text);
  if (ids.empty()) throw EmptyDocumentError(doc.id, "document '" + doc.id + "' has no in-vocabulary tokens");
  return infer_doc_topics(model, ids, fold_in_sweeps, seed);
}

void softmax(std::span<double> logits) {
  if (logits.empty()) return;
  const double mx = *std::max_element(logits.begin(), logits.end());
  double sum = 0;
  for (double& x : logits) {
    x = std::exp(x - mx);
    sum += x;
  }
  for (double& x : logits) x /= sum;
}

std::vector<double> etm_word_topic(const EtmParameters& p) {
  const auto V = static_cast<std::size_t>(p.vocab_size);
  const auto K = static_cast<std::size_t>(p.topics);
  const auto E = static_cast<std::size_t>(p.embedding_dim);
  if (p.embedding_dim < 1) throw ShapeError("embedding dimension must be at least 1");
  if (p.vocab_size < 1 || p.topics < 1) throw ShapeError("ETM parameters need V >= 1 and K >= 1");
  if (p.rho.size() != V * E) throw ShapeError("rho is not V x E");
  if (p.alpha.size() != K * E) throw ShapeError("alpha is not K x E");
  auto finite = [](double x) { return std::isfinite(x); };
  if (!std::all_of(p.rho.begin(), p.rho.end(), finite) || !std::all_of(p.alpha.begin(), p.alpha.end(), finite)) {
    throw ConfigError("ETM parameters contain non-finite values");
  }
  std::vector<double> out(K * V);
  for (std::size_t t = 0; t < K; ++t) {
    std::span<double> row(out.data() + t * V, V);
    for (std::size_t w = 0; w < V; ++w) {
      double dot = 0;
      for (std::size_t e = 0; e < E; ++e) dot += p.rho[w * E + e] * p.alpha[t * E + e];
      row[w] = dot;
    }
    softmax(row);
  }
  return out;
}

TopicModel topic_model_from_etm(const EtmParameters& params, std::shared_ptr<const Vocabulary> vocabulary) {
  if (!vocabulary || vocabulary->size() != params.vocab_size) {
    throw ShapeError("ETM vocabulary size does not match the supplied vocabulary");
  }
  // Fold-in inference still needs a document prior; use the LDA default.
  return TopicModel(std::move(vocabulary), params.topics, etm_word_topic(params), 50.0 / params.topics, 0.0);
}

nlohmann::json EtmParameters::to_json() const {
  nlohmann::json r = nlohmann::json::array(), a = nlohmann::json::array();
  const auto E = static_cast<std::size_t>(embedding_dim);
  for (int w = 0; w < vocab_size; ++w) {
    r.push_back(std::vector<double>(rho.begin() + w * E, rho.begin() + (w + 1) * E));
  }
  for (int t = 0; t < topics; ++t) {
    a.push_back(std::vector<double>(alpha.begin() + t * E, alpha.begin() + (t + 1) * E));
  }
  return {{"rho", r}, {"alpha", a}};
}

EtmParameters EtmParameters::from_json(const nlohmann::json& j) {
  auto read_matrix = [](const nlohmann::json& m, const char* name, int& rows, int& cols) {
    if (!m.is_array() || m.empty()) throw ShapeError(std::string(name) + " must be a non-empty matrix");
    rows = static_cast<int>(m.size());
    cols = -1;
    std::vector<double> flat;
    for (const auto& r : m) {
      if (!r.is_array()) throw ShapeError(std::string(name) + " rows must be arrays");
      if (cols < 0) cols = static_cast<int>(r.size());
      if (static_cast<int>(r.size()) != cols) throw ShapeError(std::string(name) + " is ragged");
      for (const auto& x : r) flat.push_back(x.get<double>());
    }
    return flat;
  };
  EtmParameters p;
  int rho_cols = 0, alpha_cols = 0;
  p.rho = read_matrix(j.at("rho"), "rho", p.vocab_size, rho_cols);
  p.alpha = read_matrix(j.at("alpha"), "alpha", p.topics, alpha_cols);
  if (rho_cols != alpha_cols) {
    throw ShapeError("rho has embedding dimension " + std::to_string(rho_cols) + " but alpha has " +
                     std::to_string(alpha_cols));
  }
  p.embedding_dim = rho_cols;
  return p;
}

EtmParameters load_etm_parameters(const std::filesystem::path& path) {
  return EtmParameters::from_json(nlohmann::json::parse(read_file(path)));
}

std::vector<int> top_words(const TopicModel& model, int topic, int k) {
  auto row = model.row(topic);
  std::vector<int> idx(row.size());
  std::iota(idx.begin(), idx.end(), 0);
  const auto n = static_cast<std::size_t>(std::clamp(k, 0, model.vocab_size()));
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n), idx.end(), [&](int a, int b) {
    if (row[a] != row[b]) return row[a] > row[b];
    return a < b;
  });
  idx.resize(n);
  return idx;
}

CoherenceResult topic_coherence(const TopicModel& model, const Corpus& corpus, int top_k) {
  if (top_k < 2) throw ConfigError("coherence needs top_k >= 2");
  const int K = model.topics();
  std::vector<std::vector<int>> tops(static_cast<std::size_t>(K));
  std::vector<int> slot(static_cast<std::size_t>(model.vocab_size()), -1);
  std::vector<int> tracked;
  for (int t = 0; t < K; ++t) {
    tops[t] = top_words(model, t, top_k);
    for (int w : tops[t]) {
      if (slot[w] < 0) {
        slot[w] = static_cast<int>(tracked.size());
        tracked.push_back(w);
      }
    }
  }
  const std::size_t n = tracked.size();
  std::vector<std::uint64_t> df(n, 0), co(n * n, 0);
  std::vector<char> present(n, 0);
  std::vector<int> here;
  for (const auto& d : corpus) {
    here.clear();
    for (int w : model.vocabulary().encode(d.norm_text)) {
      int s = slot[w];
      if (s >= 0 && !present[s]) {
        present[s] = 1;
        here.push_back(s);
      }
    }
    for (int a : here) {
      ++df[a];
      for (int b : here) ++co[static_cast<std::size_t>(a) * n + b];
    }
    for (int a : here) present[a] = 0;
  }
  const double D = static_cast<double>(corpus.size());
  CoherenceResult out;
  out.per_topic.resize(static_cast<std::size_t>(K));
  for (int t = 0; t < K; ++t) {
    const auto& words = tops[t];
    double sum = 0;
    int pairs = 0;
    for (std::size_t i = 0; i < words.size(); ++i) {
      for (std::size_t j = i + 1; j < words.size(); ++j) {
        const int a = slot[words[i]], b = slot[words[j]];
        const auto joint = co[static_cast<std::size_t>(a) * n + b];
        double npmi;
        if (joint == 0) {
          npmi = -1.0;
        } else {
          const double pij = joint / D;
          if (pij >= 1.0) {
            npmi = 1.0;
          } else {
            const double pi = df[a] / D, pj = df[b] / D;
            npmi = std::log(pij / (pi * pj)) / -std::log(pij);
          }
        }
        sum += npmi;
        ++pairs;
      }
    }
    out.per_topic[t] = pairs ? sum / pairs : 0.0;
  }
  out.mean = std::accumulate(out.per_topic.begin(), out.per_topic.end(), 0.0) / K;
  return out;
}

double topic_diversity(const TopicModel& model, int top_k) {
  if (top_k < 1) throw ConfigError("diversity needs top_k >= 1");
  std::set<int> distinct;
  for (int t = 0; t < model.topics(); ++t) {
    for (int w : top_words(model, t, top_k)) distinct.insert(w);
  }
  const int listed = std::min(top_k, model.vocab_size());
  return static_cast<double>(distinct.size()) / (static_cast<double>(model.topics()) * listed);
}

TopicCountSelection select_topic_count(const Corpus& corpus, std::shared_ptr<const Vocabulary> vocabulary,
                                       std::span<const int> candidates, const LdaConfig& base,
                                       int coherence_top_k, int diversity_top_k) {
  if (candidates.empty()) throw ConfigError("no topic-count candidates");
  std::vector<int> ks(candidates.begin(), candidates.end());
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
  TopicCountSelection sel{ks.front(), {}};
  double best = -std::numeric_limits<double>::infinity();
  for (int k : ks) {
    LdaConfig cfg = base;
    cfg.topics = k;
    auto result = train_lda(corpus, vocabulary, cfg);
    TopicCountScore s{k, topic_coherence(result.model, corpus, coherence_top_k).mean,
                      topic_diversity(result.model, diversity_top_k), 0.0};
    s.product = s.coherence * s.diversity;
    if (s.product > best) {
      best = s.product;
      sel.chosen = k;
    }
    sel.scores.push_back(s);
  }
  return sel;
}

nlohmann::json topic_model_to_json(const TopicModel& model) {
  nlohmann::json rows = nlohmann::json::array();
  for (int t = 0; t < model.topics(); ++t) {
    auto r = model.row(t);
    rows.push_back(std::vector<double>(r.begin(), r.end()));
  }
  return {{"format", "topicshift.topic_model"},
          {"version", 1},
          {"K", model.topics()},
          {"V", model.vocab_size()},
          {"hyper_alpha", model.hyper_alpha()},
          {"hyper_beta", model.hyper_beta()},
          {"vocabulary_hash", model.vocabulary().hash()},
          {"vocabulary", model.vocabulary().to_json()},
          {"word_topic", rows}};
}

TopicModel topic_model_from_json(const nlohmann::json& j) {
  auto vocab = std::make_shared<const Vocabulary>(Vocabulary::from_json(j.at("vocabulary")));
  if (j.contains("vocabulary_hash") && j.at("vocabulary_hash").get<std::string>() != vocab->hash()) {
    throw IntegrityError("topic model vocabulary hash mismatch");
  }
  const int K = j.at("K").get<int>();
  const int V = j.at("V").get<int>();
  if (V != vocab->size()) throw ShapeError("topic model V does not match its vocabulary");
  const auto& rows = j.at("word_topic");
  if (static_cast<int>(rows.size()) != K) throw ShapeError("word_topic row count differs from K");
  std::vector<double> phi;
  phi.reserve(static_cast<std::size_t>(K) * V);
  for (const auto& r : rows) {
    if (static_cast<int>(r.size()) != V) throw ShapeError("word_topic row length differs from V");
    for (const auto& x : r) phi.push_back(x.get<double>());
  }
  return TopicModel(std::move(vocab), K, std::move(phi), j.at("hyper_alpha").get<double>(),
                    j.at("hyper_beta").get<double>());
}

void save_topic_model(const TopicModel& model, const std::filesystem::path& path) {
  write_file_atomic(path, topic_model_to_json(model).dump());
}

TopicModel load_topic_model(const std::filesystem::path& path) {
  return topic_model_from_json(nlohmann::json::parse(read_file(path)));
}

}  // namespace topicshift
