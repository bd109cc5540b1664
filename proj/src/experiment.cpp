#include "topicshift/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <sstream>
#include <thread>

#include "topicshift/error.hpp"

namespace topicshift {

std::string_view to_string(PoolSource p) {
  switch (p) {
    case PoolSource::on_train: return "on_train";
    case PoolSource::on_test: return "on_test";
    case PoolSource::on_val: return "on_val";
    case PoolSource::off_train: return "off_train";
    case PoolSource::off_val: return "off_val";
  }
  return "?";
}

PoolSource pool_source_from_string(std::string_view s) {
  for (auto p : {PoolSource::on_train, PoolSource::on_test, PoolSource::on_val, PoolSource::off_train,
                 PoolSource::off_val}) {
    if (to_string(p) == s) return p;
  }
  throw ConfigError("unknown keyword pool '" + std::string(s) + "'");
}

namespace {

Partition partition_of(PoolSource p) {
  switch (p) {
    case PoolSource::on_train: return Partition::on_train;
    case PoolSource::on_test: return Partition::on_test;
    case PoolSource::on_val: return Partition::on_val;
    case PoolSource::off_train: return Partition::off_train;
    case PoolSource::off_val: return Partition::off_val;
  }
  return Partition::off_train;
}

nlohmann::json keywords_json(int m) { return m == kAllKeywords ? nlohmann::json("all") : nlohmann::json(m); }

int keywords_from_json(const nlohmann::json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() == "all") return kAllKeywords;
    throw ConfigError("keyword count must be an integer or \"all\"");
  }
  return j.get<int>();
}

std::string keywords_label(int m) { return m == kAllKeywords ? "all" : std::to_string(m); }

}  // namespace

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json conds = nlohmann::json::array();
  for (auto c : conditions) conds.push_back(to_string(c));
  nlohmann::json sweep = nlohmann::json::array();
  for (int m : keyword_sweep) sweep.push_back(keywords_json(m));
  nlohmann::json grid = nlohmann::json::array();
  for (auto [a, b] : mix_grid) grid.push_back({a, b});
  return {
      {"corpus", corpus_path},
      {"planted", planted.to_json()},
      {"vocabulary", {{"min_count", min_count}, {"stop_top_n", stop_top_n}}},
      {"topic_model",
       {{"K", lda.topics},
        {"candidates", topic_candidates},
        {"hyper_alpha", lda.hyper_alpha},
        {"hyper_beta", lda.hyper_beta},
        {"sweeps", lda.sweeps},
        {"fold_in_sweeps", fold_in_sweeps}}},
      {"split",
       {{"topics", topics}, {"n_values", n_values}, {"n_val", n_val}, {"n_test", n_test}, {"n_on_val", n_on_val}}},
      {"augment",
       {{"n_synthetic", n_synthetic},
        {"length", synthetic_length},
        {"keywords", keywords_json(keywords)},
        {"order", generator.order},
        {"boost", generator.boost},
        {"delta", generator.delta},
        {"adapt_pool", to_string(adapt_pool)},
        {"baseline_pool", to_string(baseline_pool)},
        {"pool_min_share", pool_min_share},
        {"backend", generator_backend == GeneratorBackend::builtin ? "builtin" : "external"}}},
      {"classifier",
       {{"backend", classifier_backend},
        {"min_count", classifier_min_count},
        {"stop_top_n", classifier_stop_top_n},
        {"learning_rate", classifier.learning_rate},
        {"l2", classifier.l2},
        {"epochs", classifier.epochs},
        {"batch_size", classifier.batch_size},
        {"window", classifier.window},
        {"fresh_windows", classifier.fresh_windows}}},
      {"conditions", conds},
      {"keyword_sweep", sweep},
      {"mix_grid", grid},
      {"seed", seed},
      {"seeds", seeds},
      {"jobs", jobs},
      {"fail_fast", fail_fast},
      {"output", output},
  };
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  try {
    c.corpus_path = j.value("corpus", c.corpus_path);
    if (j.contains("planted")) c.planted = PlantedSpec::from_json(j.at("planted"));
    if (j.contains("vocabulary")) {
      const auto& v = j.at("vocabulary");
      c.min_count = v.value("min_count", c.min_count);
      c.stop_top_n = v.value("stop_top_n", c.stop_top_n);
    }
    if (j.contains("topic_model")) {
      const auto& t = j.at("topic_model");
      c.lda.topics = t.value("K", c.lda.topics);
      c.topic_candidates = t.value("candidates", c.topic_candidates);
      c.lda.hyper_alpha = t.value("hyper_alpha", c.lda.hyper_alpha);
      c.lda.hyper_beta = t.value("hyper_beta", c.lda.hyper_beta);
      c.lda.sweeps = t.value("sweeps", c.lda.sweeps);
      c.fold_in_sweeps = t.value("fold_in_sweeps", c.fold_in_sweeps);
    }
    if (j.contains("split")) {
      const auto& s = j.at("split");
      c.topics = s.value("topics", c.topics);
      c.n_values = s.value("n_values", c.n_values);
      c.n_val = s.value("n_val", c.n_val);
      c.n_test = s.value("n_test", c.n_test);
      c.n_on_val = s.value("n_on_val", c.n_on_val);
    }
    if (j.contains("augment")) {
      const auto& a = j.at("augment");
      c.n_synthetic = a.value("n_synthetic", c.n_synthetic);
      c.synthetic_length = a.value("length", c.synthetic_length);
      if (a.contains("keywords")) c.keywords = keywords_from_json(a.at("keywords"));
      c.generator.order = a.value("order", c.generator.order);
      c.generator.boost = a.value("boost", c.generator.boost);
      c.generator.delta = a.value("delta", c.generator.delta);
      if (a.contains("adapt_pool")) c.adapt_pool = pool_source_from_string(a.at("adapt_pool").get<std::string>());
      if (a.contains("baseline_pool")) {
        c.baseline_pool = pool_source_from_string(a.at("baseline_pool").get<std::string>());
      }
      c.pool_min_share = a.value("pool_min_share", c.pool_min_share);
      const std::string backend = a.value("backend", std::string("builtin"));
      if (backend != "builtin" && backend != "external") throw ConfigError("unknown generator backend " + backend);
      c.generator_backend = backend == "builtin" ? GeneratorBackend::builtin : GeneratorBackend::external;
    }
    if (j.contains("classifier")) {
      const auto& k = j.at("classifier");
      c.classifier_backend = k.value("backend", c.classifier_backend);
      if (c.classifier_backend != "builtin" && c.classifier_backend != "external") {
        throw ConfigError("unknown classifier backend " + c.classifier_backend);
      }
      c.classifier_min_count = k.value("min_count", c.classifier_min_count);
      c.classifier_stop_top_n = k.value("stop_top_n", c.classifier_stop_top_n);
      c.classifier.learning_rate = k.value("learning_rate", c.classifier.learning_rate);
      c.classifier.l2 = k.value("l2", c.classifier.l2);
      c.classifier.epochs = k.value("epochs", c.classifier.epochs);
      c.classifier.batch_size = k.value("batch_size", c.classifier.batch_size);
      c.classifier.window = k.value("window", c.classifier.window);
      c.classifier.fresh_windows = k.value("fresh_windows", c.classifier.fresh_windows);
    }
    if (j.contains("conditions")) {
      c.conditions.clear();
      for (const auto& s : j.at("conditions")) c.conditions.push_back(condition_from_string(s.get<std::string>()));
    }
    if (j.contains("keyword_sweep")) {
      c.keyword_sweep.clear();
      for (const auto& m : j.at("keyword_sweep")) c.keyword_sweep.push_back(keywords_from_json(m));
    }
    if (j.contains("mix_grid")) {
      c.mix_grid.clear();
      for (const auto& p : j.at("mix_grid")) c.mix_grid.emplace_back(p.at(0).get<int>(), p.at(1).get<int>());
    }
    c.seed = j.value("seed", c.seed);
    c.seeds = j.value("seeds", c.seeds);
    c.jobs = j.value("jobs", c.jobs);
    c.fail_fast = j.value("fail_fast", c.fail_fast);
    c.output = j.value("output", c.output);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid experiment configuration: ") + e.what());
  }
  if (c.n_values.empty()) throw ConfigError("n_values must not be empty");
  if (c.seeds < 1) throw ConfigError("seeds must be at least 1");
  if (c.conditions.empty() && c.keyword_sweep.empty() && c.mix_grid.empty()) {
    throw ConfigError("no conditions requested");
  }
  return c;
}

std::vector<ConditionTask> ExperimentConfig::tasks() const {
  std::vector<ConditionTask> out;
  for (auto c : conditions) out.push_back({c, "", keywords, -1, -1});
  for (int m : keyword_sweep) out.push_back({Condition::aug_adapt, "m=" + keywords_label(m), m, -1, -1});
  for (auto [a, b] : mix_grid) {
    const auto variant = "mix=" + std::to_string(a) + ":" + std::to_string(b);
    if (b == 0) {
      out.push_back({Condition::off_topic, variant, keywords, a, 0});
    } else {
      out.push_back({a == 0 ? Condition::synthetic_only : Condition::aug_adapt, variant, keywords, a, b});
    }
  }
  return out;
}

Pipeline prepare_pipeline(const ExperimentConfig& config) { return prepare_pipeline(config, nullptr, nullptr); }

Pipeline prepare_pipeline(const ExperimentConfig& config, std::shared_ptr<const Corpus> corpus,
                          std::shared_ptr<const TopicModel> model) {
  Pipeline p;
  p.config = config;
  if (!corpus) {
    if (config.corpus_path.empty()) {
      corpus = std::make_shared<const Corpus>(make_biased_corpus(config.planted).corpus);
    } else {
      corpus = std::make_shared<const Corpus>(ingest(config.corpus_path));
    }
  }
  p.corpus = corpus;
  if (model) {
    p.topic_vocabulary = model->vocabulary_ptr();
  } else {
    p.topic_vocabulary =
        std::make_shared<const Vocabulary>(build_vocabulary(*corpus, config.min_count, config.stop_top_n));
    LdaConfig lda = config.lda;
    lda.seed = derive_seed(config.seed, "lda");
    if (!config.topic_candidates.empty()) {
      p.selection = select_topic_count(*corpus, p.topic_vocabulary, config.topic_candidates, lda);
      lda.topics = p.selection->chosen;
    }
    model = std::make_shared<const TopicModel>(train_lda(*corpus, p.topic_vocabulary, lda).model);
  }
  p.model = model;
  p.scores = score_corpus(*corpus, *model, config.fold_in_sweeps, derive_seed(config.seed, "doc-topics"));
  p.classifier_vocabulary =
      std::make_shared<const Vocabulary>(build_vocabulary(*corpus, config.classifier_min_count, config.classifier_stop_top_n));

  const bool external = config.classifier_backend == "external" || config.generator_backend == GeneratorBackend::external;
  if (external) {
    auto path = adapter_from_environment();
    if (!path) throw ConfigError(std::string("external backend requested but ") + kAdapterEnv + " is not set");
    p.adapter = std::make_shared<SharedAdapter>(std::make_unique<AdapterProcess>(*path));
    const auto& caps = p.adapter->process->handshake();
    for (const auto& g : corpus->genres()) {
      if (config.generator_backend == GeneratorBackend::external &&
          std::find(caps.genres.begin(), caps.genres.end(), g) == caps.genres.end()) {
        throw AdapterError("adapter does not support genre '" + g + "'", caps.raw.dump());
      }
    }
  }
  return p;
}

TopicCell::TopicCell(const Pipeline& pipeline, int topic, int n_train)
    : pipeline_(&pipeline), topic_(topic), n_train_(n_train) {
  const auto& c = pipeline.config;
  SplitSpec spec;
  spec.topic = topic;
  spec.n_train = n_train;
  spec.n_val = c.n_val;
  spec.n_test = c.n_test;
  spec.n_on_val = c.n_on_val;
  spec.seed = c.seed;
  split_ = build_transfer_split(*pipeline.corpus, pipeline.scores, spec);
}

std::vector<const Document*> TopicCell::documents(Partition p) const {
  std::vector<const Document*> out;
  for (const auto& id : split_.ids(p)) out.push_back(&pipeline_->corpus->at(id));
  return out;
}

std::vector<const Document*> TopicCell::documents(Partition p, const std::string& genre) const {
  std::vector<const Document*> out;
  for (const auto& id : split_[p].at(genre)) out.push_back(&pipeline_->corpus->at(id));
  return out;
}

std::vector<LabeledText> TopicCell::labeled(Partition p) const {
  std::vector<LabeledText> out;
  for (const Document* d : documents(p)) out.push_back({d->norm_text, d->genre, d->id});
  return out;
}

const std::map<std::string, GeneratorHandle>& TopicCell::generators(int keywords) {
  auto it = generators_.find(keywords);
  if (it != generators_.end()) return it->second;
  const auto& c = pipeline_->config;
  std::map<std::string, GeneratorHandle> gens;
  for (const auto& genre : pipeline_->corpus->genres()) {
    const auto docs = documents(Partition::off_train, genre);
    if (c.generator_backend == GeneratorBackend::external) {
      std::vector<std::string> ids;
      for (const Document* d : docs) ids.push_back(d->id);
      gens.emplace(genre, external_generator(genre, pipeline_->adapter, ids));
    } else {
      GeneratorOptions opts = c.generator;
      opts.keywords = keywords;
      opts.fold_in_sweeps = c.fold_in_sweeps;
      opts.seed = derive_seed(c.seed, "generator", static_cast<std::uint64_t>(topic_),
                              static_cast<std::uint64_t>(n_train_));
      gens.emplace(genre, train_builtin_generator(docs, *pipeline_->model, opts));
    }
  }
  return generators_.emplace(keywords, std::move(gens)).first->second;
}

const std::vector<KeywordSequence>& TopicCell::pool(PoolSource source, int keywords) {
  const auto key = std::make_pair(source, keywords);
  auto it = pools_.find(key);
  if (it != pools_.end()) return it->second;
  auto docs = documents(partition_of(source));
  const bool on_topic = source == PoolSource::on_train || source == PoolSource::on_test || source == PoolSource::on_val;
  const double min_share = pipeline_->config.pool_min_share;
  if (on_topic && min_share > 0.0) {
    const auto& scores = pipeline_->scores.scores;
    std::erase_if(docs, [&](const Document* d) {
      auto s = scores.find(d->id);
      return s == scores.end() || s->second.theta[static_cast<std::size_t>(topic_)] < min_share;
    });
    if (docs.empty()) {
      throw CapacityError("no " + std::string(to_string(source)) + " document gives topic " + std::to_string(topic_) +
                          " a proportion of at least " + std::to_string(min_share));
    }
  }
  auto pool = build_keyword_pool(docs, *pipeline_->model, keywords, pipeline_->config.fold_in_sweeps,
                                 derive_seed(pipeline_->config.seed, "doc-topics"));
  return pools_.emplace(key, std::move(pool)).first->second;
}

namespace {

std::vector<std::string> external_train_predict(const Pipeline& pipeline, const std::vector<LabeledText>& train,
                                                const std::vector<LabeledText>& val,
                                                const std::vector<LabeledText>& test, const std::string& key,
                                                std::uint64_t seed, std::uint64_t test_seed) {
  const auto dir = std::filesystem::path(pipeline.config.output) / "adapter" / key;
  std::filesystem::create_directories(dir);
  auto dump = [&](const std::vector<LabeledText>& items, const char* name) {
    std::ostringstream ss;
    for (const auto& t : items) ss << nlohmann::json{{"id", t.source}, {"genre", t.genre}, {"text", t.text}}.dump() << '\n';
    write_file_atomic(dir / name, ss.str());
    return (dir / name).string();
  };
  const auto train_path = dump(train, "train.jsonl");
  const auto val_path = dump(val, "val.jsonl");
  Rng rng(test_seed);
  std::vector<std::string> windows;
  for (const auto& t : test) windows.push_back(sample_window(t.text, pipeline.config.classifier.window, rng));
  std::lock_guard lock(pipeline.adapter->mutex);
  auto& proc = *pipeline.adapter->process;
  proc.request({{"op", "train"},
                {"train", train_path},
                {"val", val_path},
                {"genres", pipeline.corpus->genres()},
                {"seed", seed}});
  auto r = proc.request({{"op", "predict"}, {"texts", windows}});
  auto labels = r.at("labels").get<std::vector<std::string>>();
  if (labels.size() != windows.size()) throw AdapterError("predict returned the wrong number of labels", r.dump());
  return labels;
}

}  // namespace

ConditionResult run_condition(const Pipeline& pipeline, TopicCell& cell, const ConditionTask& task, int seed_index) {
  const auto& c = pipeline.config;
  const int N = cell.n_train();
  const std::uint64_t replicate = derive_seed(c.seed, "replicate", static_cast<std::uint64_t>(cell.topic()),
                                              static_cast<std::uint64_t>(N), static_cast<std::uint64_t>(seed_index));
  const std::uint64_t classifier_seed = derive_seed(replicate, "classifier");
  const std::uint64_t test_seed = derive_seed(replicate, "test");
  const std::uint64_t synthetic_seed = derive_seed(replicate, "synthetic", static_cast<std::uint64_t>(task.keywords));

  ConditionResult result;
  result.topic = cell.topic();
  result.n_train = N;
  result.condition = task.condition;
  result.variant = task.variant;
  result.seed = static_cast<std::uint64_t>(seed_index);
  auto& prov = result.provenance;
  prov["topic_model"] = pipeline.model->hash();
  prov["split"] = cell.split().hash();
  prov["classifier_seed"] = classifier_seed;
  prov["test_seed"] = test_seed;

  const int n_original = task.n_original < 0 ? N : task.n_original;
  const int n_synthetic = task.n_synthetic < 0 ? (c.n_synthetic < 0 ? N : c.n_synthetic) : task.n_synthetic;

  std::vector<LabeledText> train;
  std::vector<LabeledText> val;
  if (task.condition == Condition::on_topic) {
    train = cell.labeled(Partition::on_train);
    val = cell.labeled(Partition::on_val);
    prov["validation"] = "on_val";
  } else {
    val = cell.labeled(Partition::off_val);
    prov["validation"] = "off_val";
    const auto original = cell.labeled(Partition::off_train);
    AugmentationPlan plan;
    plan.n_original = task.condition == Condition::synthetic_only ? 0 : n_original;
    plan.n_synthetic = task.condition == Condition::off_topic ? 0 : n_synthetic;
    std::vector<SyntheticDocument> synthetic;
    if (plan.n_synthetic > 0) {
      const bool baseline = task.condition == Condition::aug_baseline;
      const PoolSource source = baseline ? c.baseline_pool : c.adapt_pool;
      plan.mode = baseline ? AugmentMode::baseline
                  : task.condition == Condition::shuffled       ? AugmentMode::shuffled
                  : task.condition == Condition::synthetic_only ? AugmentMode::synthetic_only
                                                                : AugmentMode::adapt;
      const auto& pool = cell.pool(source, task.keywords);
      synthetic = build_synthetic_set(cell.generators(task.keywords), pool, plan.n_synthetic, c.synthetic_length,
                                      synthetic_seed);
      if (task.condition == Condition::shuffled) synthetic = shuffle_labels(std::move(synthetic), derive_seed(replicate, "shuffle"));
      std::vector<std::string> generator_ids;
      for (const auto& [g, h] : cell.generators(task.keywords)) generator_ids.push_back(h.id);
      prov["generators"] = generator_ids;
      prov["keyword_pool"] = to_string(source);
      prov["keyword_pool_size"] = pool.size();
      prov["keywords"] = keywords_json(task.keywords);
      prov["synthetic_seed"] = synthetic_seed;
      for (const auto& s : synthetic) plan.keyword_pool.push_back(s.keywords.source_doc);
      std::sort(plan.keyword_pool.begin(), plan.keyword_pool.end());
      plan.keyword_pool.erase(std::unique(plan.keyword_pool.begin(), plan.keyword_pool.end()), plan.keyword_pool.end());
      // Keyword sources must never be test documents unless the on_test
      // pool was chosen explicitly.
      if (source != PoolSource::on_test) {
        const auto& test_lists = cell.split()[Partition::on_test];
        for (const auto& id : plan.keyword_pool) {
          for (const auto& [g, ids] : test_lists) {
            if (std::find(ids.begin(), ids.end(), id) != ids.end()) {
              throw IntegrityError("keyword source '" + id + "' is an evaluation document");
            }
          }
        }
      }
    }
    prov["n_original"] = plan.n_original;
    prov["n_synthetic"] = plan.n_synthetic;
    train = mix(original, to_labeled(synthetic), plan, pipeline.corpus->genres(), derive_seed(replicate, "mix"));
  }
  const auto test = cell.labeled(Partition::on_test);

  std::vector<std::string> predictions;
  if (c.classifier_backend == "external") {
    std::ostringstream key;
    key << "t" << cell.topic() << "-n" << N << "-" << to_string(task.condition) << (task.variant.empty() ? "" : "-")
        << task.variant << "-s" << seed_index;
    std::string k = key.str();
    std::replace(k.begin(), k.end(), ':', '_');
    std::replace(k.begin(), k.end(), '=', '_');
    predictions = external_train_predict(pipeline, train, val, test, k, classifier_seed, test_seed);
    prov["classifier"] = "external";
  } else {
    ClassifierConfig cc = c.classifier;
    cc.seed = classifier_seed;
    const auto model = train_classifier(train, val, pipeline.classifier_vocabulary, cc);
    predictions = predict_windows(model, test, cc.window, test_seed);
    prov["classifier"] = "builtin";
    prov["best_epoch"] = model.best_epoch;
  }
  std::vector<std::string> gold;
  for (const auto& t : test) gold.push_back(t.genre);
  result.macro_f1 = macro_f1(predictions, gold, pipeline.corpus->genres());
  return result;
}

RunOutcome run_experiment(const Pipeline& pipeline, const std::function<void(const std::string&)>& progress) {
  const auto& c = pipeline.config;
  std::vector<int> topics = c.topics;
  if (topics.empty()) {
    for (int t = 0; t < pipeline.model->topics(); ++t) topics.push_back(t);
  }
  std::vector<std::pair<int, int>> cells;
  for (int t : topics) {
    for (int n : c.n_values) cells.emplace_back(t, n);
  }
  const auto tasks = c.tasks();

  std::mutex mu;
  RunOutcome outcome;
  std::vector<ConditionResult> results;
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};

  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cells.size() || stop.load()) return;
      const auto [topic, n] = cells[i];
      const std::string where = "topic " + std::to_string(topic) + " N=" + std::to_string(n);
      std::unique_ptr<TopicCell> cell;
      try {
        cell = std::make_unique<TopicCell>(pipeline, topic, n);
      } catch (const std::exception& e) {
        std::lock_guard lock(mu);
        outcome.failures.push_back(where + ": " + e.what());
        if (c.fail_fast) stop = true;
        continue;
      }
      for (int s = 0; s < c.seeds && !stop.load(); ++s) {
        for (const auto& task : tasks) {
          if (stop.load()) break;
          const std::string label = where + " seed " + std::to_string(s) + " " + std::string(to_string(task.condition)) +
                                    (task.variant.empty() ? "" : " " + task.variant);
          try {
            auto r = run_condition(pipeline, *cell, task, s);
            std::lock_guard lock(mu);
            results.push_back(std::move(r));
            if (progress) progress(label);
          } catch (const std::exception& e) {
            std::lock_guard lock(mu);
            outcome.failures.push_back(label + ": " + e.what());
            if (c.fail_fast) stop = true;
          }
        }
      }
    }
  };
  const int jobs = std::max(1, std::min<int>(c.jobs, static_cast<int>(cells.size())));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (int j = 0; j < jobs; ++j) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }
  for (auto& r : results) outcome.report.add(std::move(r));
  std::sort(outcome.failures.begin(), outcome.failures.end());
  outcome.report.metadata = {{"config", c.to_json()},
                             {"topic_model", pipeline.model->hash()},
                             {"topics", pipeline.model->topics()},
                             {"failures", outcome.failures}};
  if (pipeline.selection) {
    nlohmann::json sel = nlohmann::json::array();
    for (const auto& s : pipeline.selection->scores) {
      sel.push_back({{"K", s.topics}, {"coherence", s.coherence}, {"diversity", s.diversity}, {"product", s.product}});
    }
    outcome.report.metadata["topic_count_selection"] = {{"chosen", pipeline.selection->chosen}, {"scores", sel}};
  }
  return outcome;
}

std::vector<Comparison> standard_comparisons(const ExperimentReport& report) {
  std::vector<Comparison> out;
  auto has = [&](Condition c, const std::string& v) { return report.per_topic_mean(c, v).size() >= 2; };
  auto add = [&](Condition a, Condition b, const std::string& va = {}, const std::string& vb = {}) {
    if (has(a, va) && has(b, vb)) out.push_back(report.compare(a, b, va, vb));
  };
  add(Condition::on_topic, Condition::off_topic);
  add(Condition::aug_adapt, Condition::off_topic);
  add(Condition::aug_adapt, Condition::aug_baseline);
  add(Condition::aug_baseline, Condition::off_topic);
  add(Condition::shuffled, Condition::off_topic);
  add(Condition::synthetic_only, Condition::off_topic);
  add(Condition::aug_adapt, Condition::aug_adapt, "m=10", "m=1");
  add(Condition::aug_adapt, Condition::aug_adapt, "m=10", "m=all");
  return out;
}

void write_report(const ExperimentReport& report, const std::vector<Comparison>& comparisons,
                  const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_file_atomic(dir / "report.csv", report.to_csv());
  write_file_atomic(dir / "report.json", report.to_json(comparisons).dump(2) + "\n");
  nlohmann::json keyword_series = nlohmann::json::array();
  nlohmann::json mix_series = nlohmann::json::array();
  for (const auto& s : report.summaries()) {
    if (s.variant.rfind("m=", 0) == 0) {
      keyword_series.push_back({{"m", s.variant.substr(2)}, {"mean_f1", s.mean}, {"stddev", s.stddev}});
    } else if (s.variant.rfind("mix=", 0) == 0) {
      const auto body = s.variant.substr(4);
      const auto colon = body.find(':');
      mix_series.push_back({{"n_original", std::stoi(body.substr(0, colon))},
                            {"n_synthetic", std::stoi(body.substr(colon + 1))},
                            {"condition", to_string(s.condition)},
                            {"mean_f1", s.mean},
                            {"stddev", s.stddev}});
    }
  }
  write_file_atomic(dir / "plot_data.json",
                    nlohmann::json{{"keyword_sweep", keyword_series}, {"mix_sweep", mix_series}}.dump(2) + "\n");
}

}  // namespace topicshift
