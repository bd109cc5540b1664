#include "topicshift/synthkit.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

#include "topicshift/error.hpp"

namespace topicshift {

void PlantedSpec::validate() const {
  if (genres < 2) throw ConfigError("planted corpus needs at least 2 genres");
  if (topics < 2) throw ConfigError("planted corpus needs at least 2 topics");
  if (!(bias >= 0.0 && bias <= 1.0)) throw ConfigError("bias must lie in [0,1]");
  if (!(style_purity >= 0.0 && style_purity <= 1.0)) throw ConfigError("style_purity must lie in [0,1]");
  if (!(secondary_weight >= 0.0 && secondary_weight <= 1.0)) throw ConfigError("secondary_weight must lie in [0,1]");
  if (!(topic_overlap >= 0.0 && topic_overlap <= 1.0)) throw ConfigError("topic_overlap must lie in [0,1]");
  if (function_share < 0 || style_share < 0 || function_share + style_share >= 1.0) {
    throw ConfigError("function_share + style_share must be below 1");
  }
  if (docs_per_genre < 1 || doc_length < 1) throw ConfigError("docs_per_genre and doc_length must be positive");
  if (preferred_per_genre < 1 || preferred_per_genre > topics) {
    throw ConfigError("preferred_per_genre must lie in [1, topics]");
  }
  if (function_words < 1 || style_words_per_genre < 1) throw ConfigError("word pools must be non-empty");
  if (topic_words_per_topic() < 2) throw ConfigError("vocab_size leaves fewer than 2 content words per topic");
}

int PlantedSpec::topic_words_per_topic() const {
  return (vocab_size - function_words - genres * style_words_per_genre) / topics;
}

nlohmann::json PlantedSpec::to_json() const {
  return {{"genres", genres},
          {"topics", topics},
          {"vocab_size", vocab_size},
          {"docs_per_genre", docs_per_genre},
          {"doc_length", doc_length},
          {"bias", bias},
          {"preferred_per_genre", preferred_per_genre},
          {"function_words", function_words},
          {"style_words_per_genre", style_words_per_genre},
          {"function_share", function_share},
          {"style_share", style_share},
          {"style_purity", style_purity},
          {"secondary_weight", secondary_weight},
          {"topic_zipf", topic_zipf},
          {"topic_overlap", topic_overlap},
          {"seed", seed}};
}

PlantedSpec PlantedSpec::from_json(const nlohmann::json& j) {
  PlantedSpec s;
  s.genres = j.value("genres", s.genres);
  s.topics = j.value("topics", s.topics);
  s.vocab_size = j.value("vocab_size", s.vocab_size);
  s.docs_per_genre = j.value("docs_per_genre", s.docs_per_genre);
  s.doc_length = j.value("doc_length", s.doc_length);
  s.bias = j.value("bias", s.bias);
  s.preferred_per_genre = j.value("preferred_per_genre", s.preferred_per_genre);
  s.function_words = j.value("function_words", s.function_words);
  s.style_words_per_genre = j.value("style_words_per_genre", s.style_words_per_genre);
  s.function_share = j.value("function_share", s.function_share);
  s.style_share = j.value("style_share", s.style_share);
  s.style_purity = j.value("style_purity", s.style_purity);
  s.secondary_weight = j.value("secondary_weight", s.secondary_weight);
  s.topic_zipf = j.value("topic_zipf", s.topic_zipf);
  s.topic_overlap = j.value("topic_overlap", s.topic_overlap);
  s.seed = j.value("seed", s.seed);
  s.validate();
  return s;
}

nlohmann::json PlantedTruth::to_json() const {
  nlohmann::json docs = nlohmann::json::array();
  for (const auto& d : documents) {
    docs.push_back({{"id", d.id}, {"genre", d.genre}, {"topic", d.topic}, {"secondary_topic", d.secondary_topic}});
  }
  return {{"genres", genre_names},
          {"function_words", function_words},
          {"style_words", style_words},
          {"topic_words", topic_words},
          {"preferred_topics", preferred_topics},
          {"documents", docs}};
}

int partner_topic(int topic, int topics) {
  const int half = topics / 2;
  if (topic < half) return topic + half;
  if (topic < 2 * half) return topic - half;
  return -1;
}

std::vector<int> preferred_topics(int genre, int genres, int topics, int count) {
  std::vector<int> out;
  for (int j = 0; static_cast<int>(out.size()) < count && j < topics; ++j) {
    int t = (genre + j * genres) % topics;
    if (std::find(out.begin(), out.end(), t) == out.end()) out.push_back(t);
  }
  // Strides that cycle early fall back to consecutive topics.
  for (int t = genre % topics; static_cast<int>(out.size()) < count; t = (t + 1) % topics) {
    if (std::find(out.begin(), out.end(), t) == out.end()) out.push_back(t);
  }
  return out;
}

namespace {

const char* const kGenreNames[] = {"news", "review", "howto", "forum", "legal", "fiction", "faq", "academic"};

std::vector<std::string> make_words(std::size_t n, Rng& rng) {
  static const char kConsonants[] = "bcdfghjklmnprstvwz";
  static const char kVowels[] = "aeiou";
  std::set<std::string> seen;
  std::vector<std::string> out;
  while (out.size() < n) {
    const int syllables = 2 + static_cast<int>(uniform_index(rng, 3));
    std::string w;
    for (int s = 0; s < syllables; ++s) {
      w.push_back(kConsonants[uniform_index(rng, sizeof kConsonants - 1)]);
      w.push_back(kVowels[uniform_index(rng, sizeof kVowels - 1)]);
    }
    if (seen.insert(w).second) out.push_back(std::move(w));
  }
  return out;
}

// Cumulative Zipf weights; a draw is an upper_bound on u * total.
std::vector<double> zipf_cdf(std::size_t n, double exponent) {
  std::vector<double> cdf(n);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) cdf[i] = (acc += 1.0 / std::pow(static_cast<double>(i + 1), exponent));
  return cdf;
}

std::size_t draw(const std::vector<double>& cdf, Rng& rng) {
  const double u = uniform01(rng) * cdf.back();
  return static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
}

int draw_topic(const std::vector<int>& preferred, int K, double bias, int exclude, Rng& rng) {
  for (;;) {
    int t;
    if (uniform01(rng) < bias) {
      t = preferred[uniform_index(rng, preferred.size())];
    } else {
      t = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(K)));
    }
    if (t != exclude) return t;
    // With a single preferred topic and full bias there is nothing else to
    // draw; fall back to the next topic.
    if (preferred.size() == 1 && bias >= 1.0) return (t + 1) % K;
  }
}

// Sentence case, commas, full stops and the odd number, so that the raw text
// differs from its normalized form.
std::string render(const std::vector<std::string>& tokens, Rng& rng) {
  std::string out;
  std::size_t sentence_left = 0;
  bool start = true;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (sentence_left == 0) sentence_left = 6 + uniform_index(rng, 10);
    if (!out.empty()) out.push_back(' ');
    std::string w = tokens[i];
    if (start) w[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(w[0])));
    start = false;
    out += w;
    if (uniform01(rng) < 0.02) out += " " + std::to_string(1 + uniform_index(rng, 1999));
    if (--sentence_left == 0 || i + 1 == tokens.size()) {
      out.push_back(uniform01(rng) < 0.1 ? '?' : '.');
      start = true;
    } else if (uniform01(rng) < 0.06) {
      out.push_back(',');
    }
  }
  return out;
}

}  // namespace

PlantedCorpus make_biased_corpus(const PlantedSpec& spec) {
  spec.validate();
  const int G = spec.genres;
  const int K = spec.topics;
  const int per_topic = spec.topic_words_per_topic();

  PlantedTruth truth;
  Rng word_rng(derive_seed(spec.seed, "words"));
  const auto pool = make_words(static_cast<std::size_t>(spec.function_words + G * spec.style_words_per_genre +
                                                        K * per_topic),
                               word_rng);
  auto cursor = pool.begin();
  auto take = [&](int n) {
    std::vector<std::string> v(cursor, cursor + n);
    cursor += n;
    return v;
  };
  truth.function_words = take(spec.function_words);
  for (int g = 0; g < G; ++g) truth.style_words.push_back(take(spec.style_words_per_genre));
  for (int t = 0; t < K; ++t) truth.topic_words.push_back(take(per_topic));
  // Shared ranks are spread evenly; the lower topic of each pair donates.
  for (int t = 0; t < K; ++t) {
    const int partner = partner_topic(t, K);
    if (partner < t) continue;
    for (int i = 0; i < per_topic; ++i) {
      const auto lo = static_cast<long>(std::floor(i * spec.topic_overlap));
      const auto hi = static_cast<long>(std::floor((i + 1) * spec.topic_overlap));
      if (hi > lo) {
        truth.topic_words[static_cast<std::size_t>(partner)][static_cast<std::size_t>(i)] =
            truth.topic_words[static_cast<std::size_t>(t)][static_cast<std::size_t>(i)];
      }
    }
  }
  for (int g = 0; g < G; ++g) {
    truth.genre_names.push_back(g < 8 ? kGenreNames[g] : "genre" + std::to_string(g));
    truth.preferred_topics.push_back(preferred_topics(g, G, K, spec.preferred_per_genre));
  }

  const auto function_cdf = zipf_cdf(truth.function_words.size(), 0.3);
  const auto style_cdf = zipf_cdf(static_cast<std::size_t>(spec.style_words_per_genre), 0.5);
  const auto topic_cdf = zipf_cdf(static_cast<std::size_t>(per_topic), spec.topic_zipf);

  std::vector<Document> docs;
  docs.reserve(static_cast<std::size_t>(G * spec.docs_per_genre));
  for (int g = 0; g < G; ++g) {
    for (int i = 0; i < spec.docs_per_genre; ++i) {
      Rng rng(derive_seed(spec.seed, "doc", static_cast<std::uint64_t>(g), static_cast<std::uint64_t>(i)));
      PlantedDocument pd;
      pd.genre = truth.genre_names[static_cast<std::size_t>(g)];
      pd.id = pd.genre + "-" + std::to_string(10000 + i).substr(1);
      pd.topic = draw_topic(truth.preferred_topics[static_cast<std::size_t>(g)], K, spec.bias, -1, rng);
      pd.secondary_topic = draw_topic(truth.preferred_topics[static_cast<std::size_t>(g)], K, spec.bias, pd.topic, rng);

      std::vector<std::string> tokens;
      tokens.reserve(static_cast<std::size_t>(spec.doc_length));
      for (int n = 0; n < spec.doc_length; ++n) {
        const double u = uniform01(rng);
        if (u < spec.function_share) {
          tokens.push_back(truth.function_words[draw(function_cdf, rng)]);
        } else if (u < spec.function_share + spec.style_share) {
          int sg = g;
          if (uniform01(rng) >= spec.style_purity) {
            sg = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(G - 1)));
            if (sg >= g) ++sg;
          }
          tokens.push_back(truth.style_words[static_cast<std::size_t>(sg)][draw(style_cdf, rng)]);
        } else {
          const int t = uniform01(rng) < spec.secondary_weight ? pd.secondary_topic : pd.topic;
          tokens.push_back(truth.topic_words[static_cast<std::size_t>(t)][draw(topic_cdf, rng)]);
        }
      }
      docs.push_back(Document::make(pd.id, pd.genre, render(tokens, rng)));
      truth.documents.push_back(std::move(pd));
    }
  }
  return {Corpus(std::move(docs), truth.genre_names), std::move(truth)};
}

void write_planted(const PlantedCorpus& planted, const PlantedSpec& spec, const std::filesystem::path& corpus_path) {
  write_corpus(corpus_path, planted.corpus.documents());
  auto sidecar = corpus_path;
  sidecar.replace_extension(".truth.json");
  nlohmann::json j = planted.truth.to_json();
  j["spec"] = spec.to_json();
  write_file_atomic(sidecar, j.dump() + "\n");
}

}  // namespace topicshift
