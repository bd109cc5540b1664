#include "topicshift/augment.hpp"

#include <algorithm>
#include <set>

#include "topicshift/error.hpp"
#include "topicshift/splits.hpp"

namespace topicshift {

nlohmann::json GeneratorOptions::to_json() const {
  return {{"order", order},   {"boost", boost},  {"keywords", keywords == kAllKeywords ? -1 : keywords},
          {"delta", delta},   {"fold_in_sweeps", fold_in_sweeps}, {"seed", seed}};
}

BuiltinGenerator::BuiltinGenerator(const std::vector<std::vector<std::string>>& documents, int order, double delta)
    : order_(order), delta_(delta) {
  if (order < 0 || order > 3) throw ConfigError("generator order must lie in [0,3]");
  if (!(delta > 0)) throw ConfigError("generator smoothing delta must be positive");
  words_ = {"<s>", kSlotToken};
  index_ = {{"<s>", kBegin}, {kSlotToken, kSlot}};
  levels_.resize(static_cast<std::size_t>(order));
  std::vector<int> seq;
  for (const auto& doc : documents) {
    seq.assign(static_cast<std::size_t>(order), kBegin);
    for (const auto& w : doc) {
      auto [it, added] = index_.emplace(w, static_cast<int>(words_.size()));
      if (added) words_.push_back(w);
      seq.push_back(it->second);
    }
    for (std::size_t i = static_cast<std::size_t>(order); i < seq.size(); ++i) {
      const int id = seq[i];
      unigram_.push_back(id);
      std::span<const int> history(seq.data(), i);
      for (int n = 1; n <= order; ++n) {
        levels_[static_cast<std::size_t>(n - 1)][context_key(history, n)].tokens.push_back(id);
      }
    }
  }
  if (unigram_.empty()) throw ConfigError("generator training documents contain no tokens");
  std::vector<int> distinct;
  for (auto& level : levels_) {
    for (auto& [key, s] : level) {
      distinct = s.tokens;
      std::sort(distinct.begin(), distinct.end());
      s.types = static_cast<int>(std::unique(distinct.begin(), distinct.end()) - distinct.begin());
    }
  }
}

int BuiltinGenerator::token_id(std::string_view word) const {
  auto it = index_.find(std::string(word));
  return it == index_.end() ? -1 : it->second;
}

BuiltinGenerator::Context BuiltinGenerator::context_key(std::span<const int> history, int n) const {
  Context key = 0;
  for (int k = n; k >= 1; --k) {
    const int id = static_cast<int>(history.size()) >= k ? history[history.size() - static_cast<std::size_t>(k)] : kBegin;
    key = (key << 21) | static_cast<Context>(id);
  }
  return key;
}

const BuiltinGenerator::Successors* BuiltinGenerator::successors(std::span<const int> history, int n) const {
  const auto& level = levels_[static_cast<std::size_t>(n - 1)];
  auto it = level.find(context_key(history, n));
  return it == level.end() ? nullptr : &it->second;
}

double BuiltinGenerator::probability_level(std::span<const int> history, int n, int id) const {
  if (n == 0) {
    const double total = static_cast<double>(unigram_.size());
    const double count = static_cast<double>(std::count(unigram_.begin(), unigram_.end(), id));
    return (count + delta_) / (total + delta_ * vocab_size());
  }
  const auto* s = successors(history, n);
  if (!s) return probability_level(history, n - 1, id);
  const double c = static_cast<double>(s->tokens.size());
  const double lambda = c / (c + s->types);
  const double ml = static_cast<double>(std::count(s->tokens.begin(), s->tokens.end(), id)) / c;
  return lambda * ml + (1.0 - lambda) * probability_level(history, n - 1, id);
}

double BuiltinGenerator::probability(std::span<const int> history, int id) const {
  if (id <= kBegin || id >= static_cast<int>(words_.size())) return 0.0;
  return probability_level(history, order_, id);
}

int BuiltinGenerator::sample_level(std::span<const int> history, int n, Rng& rng) const {
  if (n == 0) {
    const double total = static_cast<double>(unigram_.size());
    if (uniform01(rng) * (total + delta_ * vocab_size()) < total) return unigram_[uniform_index(rng, unigram_.size())];
    return 1 + static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(vocab_size())));
  }
  const auto* s = successors(history, n);
  if (!s) return sample_level(history, n - 1, rng);
  const double c = static_cast<double>(s->tokens.size());
  if (uniform01(rng) * (c + s->types) < c) return s->tokens[uniform_index(rng, s->tokens.size())];
  return sample_level(history, n - 1, rng);
}

std::vector<double> BuiltinGenerator::step_distribution(std::span<const int> history, std::span<const int> keyword_ids,
                                                        bool have_keywords, double boost) const {
  std::vector<double> p(words_.size(), 0.0);
  double total = 0.0;
  for (int id = 1; id < static_cast<int>(words_.size()); ++id) {
    double f = 1.0;
    if (id == kSlot) {
      f = have_keywords ? boost : 0.0;
    } else if (std::find(keyword_ids.begin(), keyword_ids.end(), id) != keyword_ids.end()) {
      f = boost;
    }
    total += (p[static_cast<std::size_t>(id)] = f * probability(history, id));
  }
  if (total <= 0) throw Error("generator step distribution is empty");
  for (double& v : p) v /= total;
  return p;
}

std::vector<std::string> BuiltinGenerator::sample(std::span<const std::string> keywords, int length, double boost,
                                                  Rng& rng) const {
  if (length < 1) throw ConfigError("generation length must be at least 1");
  if (!(boost > 0)) throw ConfigError("keyword boost must be positive");
  std::vector<int> keyword_ids;
  for (const auto& k : keywords) {
    int id = token_id(k);
    if (id > kSlot) keyword_ids.push_back(id);
  }
  std::sort(keyword_ids.begin(), keyword_ids.end());
  keyword_ids.erase(std::unique(keyword_ids.begin(), keyword_ids.end()), keyword_ids.end());
  const bool have_keywords = !keywords.empty();
  const double fmax = std::max(1.0, boost);

  std::vector<int> history(static_cast<std::size_t>(order_), kBegin);
  std::vector<std::string> out;
  out.reserve(static_cast<std::size_t>(length));
  std::size_t next_keyword = 0;
  while (static_cast<int>(out.size()) < length) {
    // Rejection sampling from the boosted distribution: propose from the
    // unbiased chain and accept with probability f(w) / max f. Either branch
    // yields an exact draw, so a chain whose mass sits almost entirely on
    // rejected tokens falls back to the explicit distribution.
    int id = -1;
    for (int attempt = 0; attempt < 64 && id < 0; ++attempt) {
      const int w = sample_level(history, order_, rng);
      double f = 1.0;
      if (w == kSlot) {
        f = have_keywords ? boost : 0.0;
      } else if (std::binary_search(keyword_ids.begin(), keyword_ids.end(), w)) {
        f = boost;
      }
      if (f > 0 && uniform01(rng) * fmax < f) id = w;
    }
    if (id < 0) {
      const auto p = step_distribution(history, keyword_ids, have_keywords, boost);
      double u = uniform01(rng);
      for (int w = 1; w < static_cast<int>(p.size()); ++w) {
        if (p[static_cast<std::size_t>(w)] <= 0) continue;
        id = w;
        if ((u -= p[static_cast<std::size_t>(w)]) < 0) break;
      }
    }
    if (id == kSlot) {
      out.push_back(keywords[next_keyword++ % keywords.size()]);
    } else {
      out.push_back(words_[static_cast<std::size_t>(id)]);
    }
    history.push_back(id);
  }
  return out;
}

namespace {

std::string generator_id(const std::string& genre, const std::vector<std::string>& ids, const nlohmann::json& opts) {
  std::uint64_t h = fnv1a64(genre);
  for (const auto& id : ids) h = fnv1a64(id + '\n', h);
  h = fnv1a64(opts.dump(), h);
  return genre + ":" + hex64(h);
}

}  // namespace

GeneratorHandle train_builtin_generator(std::span<const Document* const> docs, const TopicModel& model,
                                        const GeneratorOptions& options) {
  if (docs.empty()) throw ConfigError("generator needs at least one training document");
  GeneratorHandle h;
  h.genre = docs.front()->genre;
  h.options = options;
  h.backend = GeneratorBackend::builtin;
  const auto& vocab = model.vocabulary();
  std::vector<std::vector<std::string>> sequences;
  sequences.reserve(docs.size());
  for (const Document* d : docs) {
    if (d->genre != h.genre) throw ConfigError("generator documents span several genres");
    h.training_ids.push_back(d->id);
    std::vector<std::string> tokens;
    for (auto t : tokenize(d->norm_text)) tokens.emplace_back(t);
    const auto ids = vocab.encode(d->norm_text);
    if (!ids.empty()) {
      const auto theta = infer_doc_topics(model, ids, options.fold_in_sweeps, document_seed(options.seed, d->id));
      const auto chosen = select_keywords(ids, model, theta, options.keywords);
      std::set<std::string_view> masked;
      for (int w : chosen) masked.insert(vocab.word(w));
      for (auto& t : tokens) {
        if (masked.count(t)) t = BuiltinGenerator::kSlotToken;
      }
    }
    sequences.push_back(std::move(tokens));
  }
  h.builtin = std::make_shared<const BuiltinGenerator>(sequences, options.order, options.delta);
  h.id = generator_id(h.genre, h.training_ids, options.to_json());
  return h;
}

GeneratorHandle external_generator(std::string genre, std::shared_ptr<SharedAdapter> adapter,
                                   std::vector<std::string> training_ids) {
  GeneratorHandle h;
  h.genre = std::move(genre);
  h.backend = GeneratorBackend::external;
  h.training_ids = std::move(training_ids);
  h.adapter = std::move(adapter);
  h.id = generator_id(h.genre, h.training_ids, {{"backend", "external"}});
  return h;
}

nlohmann::json SyntheticDocument::to_json() const {
  return {{"genre", genre},
          {"text", text},
          {"keywords", keywords.to_json()},
          {"generator", generator_id},
          {"seed", seed}};
}

SyntheticDocument generate(const GeneratorHandle& handle, const KeywordSequence& keywords, int length,
                           std::uint64_t seed) {
  if (length < 1) throw ConfigError("generation length must be at least 1");
  SyntheticDocument doc;
  doc.genre = handle.genre;
  doc.keywords = keywords;
  doc.generator_id = handle.id;
  doc.seed = seed;
  if (handle.backend == GeneratorBackend::builtin) {
    if (!handle.builtin) throw ConfigError("generator handle for '" + handle.genre + "' is not trained");
    Rng rng(seed);
    const auto tokens = handle.builtin->sample(keywords.tokens, length, handle.options.boost, rng);
    for (const auto& t : tokens) {
      if (!doc.text.empty()) doc.text.push_back(' ');
      doc.text += t;
    }
  } else {
    if (!handle.adapter) throw ConfigError("external generator for '" + handle.genre + "' has no adapter");
    nlohmann::json response;
    {
      std::lock_guard lock(handle.adapter->mutex);
      response = handle.adapter->process->request({{"op", "generate"},
                                                   {"genre", handle.genre},
                                                   {"keywords", keywords.tokens},
                                                   {"max_tokens", length},
                                                   {"seed", seed}});
    }
    if (!response.contains("text") || !response.at("text").is_string()) {
      throw AdapterError("generate response lacks a text field", response.dump());
    }
    // Generators see raw text; classifiers only ever see normalized text.
    doc.text = normalize(response.at("text").get<std::string>());
  }
  if (doc.text.empty()) throw AdapterError("generator returned an empty document", handle.id);
  return doc;
}

std::vector<KeywordSequence> build_keyword_pool(std::span<const Document* const> docs, const TopicModel& model,
                                                int m, int fold_in_sweeps, std::uint64_t seed) {
  std::vector<KeywordSequence> pool;
  pool.reserve(docs.size());
  for (const Document* d : docs) {
    const auto ids = model.vocabulary().encode(d->norm_text);
    if (ids.empty()) continue;
    pool.push_back(extract_keywords(*d, model, infer_doc_topics(model, ids, fold_in_sweeps, document_seed(seed, d->id)), m));
  }
  return pool;
}

std::vector<SyntheticDocument> build_synthetic_set(const std::map<std::string, GeneratorHandle>& generators,
                                                   std::span<const KeywordSequence> pool, int per_genre, int length,
                                                   std::uint64_t seed) {
  if (per_genre < 0) throw ConfigError("per_genre must be non-negative");
  std::vector<SyntheticDocument> out;
  if (per_genre == 0) return out;
  if (pool.empty()) throw ConfigError("keyword pool is empty");
  if (generators.empty()) throw ConfigError("no generators supplied");
  Rng rng(derive_seed(seed, "keyword-draws"));
  std::vector<std::size_t> draws(static_cast<std::size_t>(per_genre));
  for (auto& d : draws) d = uniform_index(rng, pool.size());
  out.reserve(generators.size() * draws.size());
  for (const auto& [genre, handle] : generators) {
    if (handle.genre != genre) throw ConfigError("generator for '" + genre + "' is labelled '" + handle.genre + "'");
    for (std::size_t i = 0; i < draws.size(); ++i) {
      out.push_back(generate(handle, pool[draws[i]], length, derive_seed(seed, "generate", genre, i)));
    }
  }
  return out;
}

std::string_view to_string(AugmentMode m) {
  switch (m) {
    case AugmentMode::adapt: return "adapt";
    case AugmentMode::baseline: return "baseline";
    case AugmentMode::shuffled: return "shuffled";
    case AugmentMode::synthetic_only: return "synthetic_only";
  }
  return "?";
}

nlohmann::json AugmentationPlan::to_json() const {
  return {{"n_original", n_original},
          {"n_synthetic", n_synthetic},
          {"mode", to_string(mode)},
          {"keyword_pool", keyword_pool}};
}

std::vector<LabeledText> to_labeled(std::span<const SyntheticDocument> synthetic) {
  std::vector<LabeledText> out;
  out.reserve(synthetic.size());
  for (const auto& s : synthetic) {
    out.push_back({s.text, s.genre, "synthetic:" + s.keywords.source_doc + ":" + hex64(s.seed)});
  }
  return out;
}

std::vector<LabeledText> mix(std::span<const LabeledText> original, std::span<const LabeledText> synthetic,
                             const AugmentationPlan& plan, const std::vector<std::string>& genres,
                             std::uint64_t seed) {
  if (plan.n_original < 0 || plan.n_synthetic < 0) throw ConfigError("mix counts must be non-negative");
  std::vector<LabeledText> out;
  auto take = [&](std::span<const LabeledText> items, int n, const char* what) {
    for (const auto& g : genres) {
      int got = 0;
      for (const auto& t : items) {
        if (got == n) break;
        if (t.genre == g) {
          out.push_back(t);
          ++got;
        }
      }
      if (got < n) {
        throw CapacityError(std::string(what) + " documents of genre '" + g + "': need " + std::to_string(n) +
                            ", have " + std::to_string(got));
      }
    }
  };
  take(original, plan.n_original, "original");
  take(synthetic, plan.n_synthetic, "synthetic");
  Rng rng(derive_seed(seed, "mix"));
  shuffle(out, rng);
  return out;
}

std::vector<SyntheticDocument> shuffle_labels(std::vector<SyntheticDocument> synthetic, std::uint64_t seed) {
  std::vector<std::string> labels;
  labels.reserve(synthetic.size());
  for (const auto& s : synthetic) labels.push_back(s.genre);
  Rng rng(derive_seed(seed, "shuffle-labels"));
  shuffle(labels, rng);
  for (std::size_t i = 0; i < synthetic.size(); ++i) synthetic[i].genre = labels[i];
  return synthetic;
}

}  // namespace topicshift
