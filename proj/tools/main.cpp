// topicshift command-line driver.
//
// Every subcommand reads the experiment configuration (JSON, flags override
// file values), writes its artifacts under --out, and drops a
// "<artifact>.manifest.json" beside each one recording the command line, the
// effective configuration and content hashes of inputs and outputs.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "topicshift/augment.hpp"
#include "topicshift/classify.hpp"
#include "topicshift/corpus.hpp"
#include "topicshift/error.hpp"
#include "topicshift/evaluate.hpp"
#include "topicshift/experiment.hpp"
#include "topicshift/keywords.hpp"
#include "topicshift/splits.hpp"
#include "topicshift/synthkit.hpp"
#include "topicshift/topics.hpp"
#include "topicshift/util.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace topicshift;

namespace {

struct GlobalOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  bool fail_fast = false;
  std::string out;
  bool quiet = false;
  std::vector<std::string> argv;
};

/// Raised when a run finished but some cells failed; maps to exit status 1
/// after artifacts are written.
struct IncompleteRun {
  std::size_t failures;
};

ExperimentConfig load_config(const GlobalOptions& g) {
  ExperimentConfig c;
  if (!g.config_path.empty()) {
    json j;
    try {
      j = json::parse(read_file(g.config_path));
    } catch (const json::parse_error& e) {
      throw ConfigError("cannot parse " + g.config_path + ": " + e.what());
    }
    c = ExperimentConfig::from_json(j);
  }
  if (g.seed) c.seed = *g.seed;
  if (g.jobs) c.jobs = *g.jobs;
  if (g.fail_fast) c.fail_fast = true;
  if (!g.out.empty()) c.output = g.out;
  return c;
}

std::string content_hash(const fs::path& p) {
  if (fs::is_directory(p)) {
    std::uint64_t h = fnv1a64("dir");
    std::vector<fs::path> files;
    for (const auto& e : fs::recursive_directory_iterator(p)) {
      if (e.is_regular_file()) files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) h = fnv1a64(fs::relative(f, p).string() + '\0' + read_file(f), h);
    return hex64(h);
  }
  return hex64(fnv1a64(read_file(p)));
}

class Manifests {
 public:
  Manifests(const GlobalOptions& g, const ExperimentConfig& config, std::string command)
      : g_(g), config_(config), command_(std::move(command)) {}

  void input(const std::string& name, const fs::path& p) {
    inputs_[name] = {{"path", p.string()}, {"hash", content_hash(p)}};
  }

  void output(const fs::path& artifact, json extra = json::object()) {
    json m = {{"artifact", artifact.filename().string()},
              {"hash", content_hash(artifact)},
              {"command", command_},
              {"argv", g_.argv},
              {"config", config_.to_json()},
              {"inputs", inputs_}};
    for (auto& [k, v] : extra.items()) m[k] = v;
    write_file_atomic(artifact.string() + ".manifest.json", m.dump(2) + "\n");
  }

 private:
  const GlobalOptions& g_;
  const ExperimentConfig& config_;
  std::string command_;
  json inputs_ = json::object();
};

fs::path out_dir(const ExperimentConfig& c) {
  fs::path dir = c.output;
  fs::create_directories(dir);
  return dir;
}

void say(const GlobalOptions& g, const std::string& line) {
  if (!g.quiet) std::cerr << line << '\n';
}

Partition partition_from_string(const std::string& s) {
  for (Partition p : kAllPartitions) {
    if (to_string(p) == s) return p;
  }
  throw ConfigError("unknown partition '" + s + "'");
}

/// --corpus, then the configured corpus file, then a planted corpus.
std::shared_ptr<const Corpus> load_corpus(const std::string& flag, const ExperimentConfig& c, Manifests& m) {
  const std::string path = !flag.empty() ? flag : c.corpus_path;
  if (path.empty()) return std::make_shared<const Corpus>(make_biased_corpus(c.planted).corpus);
  m.input("corpus", path);
  return std::make_shared<const Corpus>(ingest(path));
}

std::vector<LabeledText> labeled_file(const fs::path& path) {
  const auto corpus = ingest(path);
  std::vector<LabeledText> out;
  out.reserve(corpus.size());
  for (const auto& d : corpus) out.push_back({d.norm_text, d.genre, d.id});
  return out;
}

std::vector<std::string> texts_of(const std::vector<LabeledText>& items) {
  std::vector<std::string> out;
  for (const auto& t : items) out.push_back(t.text);
  return out;
}

std::shared_ptr<const Vocabulary> topic_vocabulary(const Corpus& corpus, const ExperimentConfig& c) {
  return std::make_shared<const Vocabulary>(build_vocabulary(corpus, c.min_count, c.stop_top_n));
}

LdaConfig lda_config(const ExperimentConfig& c) {
  LdaConfig lda = c.lda;
  lda.seed = derive_seed(c.seed, "lda");
  return lda;
}

std::string format_table(const ExperimentReport& report, const std::vector<Comparison>& comparisons) {
  std::ostringstream out;
  char buf[160];
  out << "condition        variant      cells   mean F1   stddev\n";
  for (const auto& s : report.summaries()) {
    std::snprintf(buf, sizeof buf, "%-16s %-12s %5d   %7.2f   %6.2f\n", std::string(to_string(s.condition)).c_str(),
                  s.variant.c_str(), s.cells, 100.0 * s.mean, 100.0 * s.stddev);
    out << buf;
  }
  if (!comparisons.empty()) out << "\npaired over topics             diff      t       p\n";
  for (const auto& cmp : comparisons) {
    auto name = [](Condition c, const std::string& v) { return std::string(to_string(c)) + (v.empty() ? "" : "[" + v + "]"); };
    const std::string label = name(cmp.a, cmp.variant_a) + " - " + name(cmp.b, cmp.variant_b);
    std::snprintf(buf, sizeof buf, "%-28s %7.2f %7.2f %7.4f%s\n", label.c_str(), 100.0 * cmp.test.mean_difference,
                  cmp.test.t, cmp.test.p, cmp.test.degenerate ? " (zero variance)" : "");
    out << buf;
  }
  return out.str();
}

void run_grid(const GlobalOptions& g, ExperimentConfig c, const std::string& command, const std::string& corpus_flag) {
  Manifests m(g, c, command);
  const auto corpus = load_corpus(corpus_flag, c, m);
  const auto pipeline = prepare_pipeline(c, corpus);
  const auto outcome = run_experiment(pipeline, [&](const std::string& label) { say(g, "done: " + label); });
  const auto comparisons = standard_comparisons(outcome.report);
  const auto dir = out_dir(c);
  write_report(outcome.report, comparisons, dir);
  for (const char* f : {"report.csv", "report.json", "plot_data.json"}) {
    m.output(dir / f, {{"cells", outcome.report.cells().size()}, {"failures", outcome.failures}});
  }
  std::cout << format_table(outcome.report, comparisons);
  for (const auto& f : outcome.failures) std::cerr << "failed: " << f << '\n';
  if (!outcome.failures.empty()) throw IncompleteRun{outcome.failures.size()};
}

}  // namespace

int main(int argc, char** argv) {
  GlobalOptions g;
  g.argv.assign(argv + 1, argv + argc);

  CLI::App app{"Measure and narrow topical domain-transfer gaps in genre classification"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--config", g.config_path, "Experiment configuration (JSON)")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "Root seed");
  app.add_option("--jobs", g.jobs, "Cells run concurrently")->check(CLI::PositiveNumber);
  app.add_flag("--fail-fast", g.fail_fast, "Stop at the first failing cell");
  app.add_option("--out", g.out, "Output directory");
  app.add_flag("--quiet", g.quiet, "No progress on stderr");

  std::string corpus_flag;
  auto corpus_option = [&](CLI::App* sub) { sub->add_option("--corpus", corpus_flag, "Corpus file (JSON lines)"); };

  // ingest
  auto* ingest_cmd = app.add_subcommand("ingest", "Validate and normalize a corpus");
  std::string ingest_path;
  ingest_cmd->add_option("corpus", ingest_path, "Corpus file")->required()->check(CLI::ExistingFile);

  // topics
  auto* topics_cmd = app.add_subcommand("topics", "Topic model");
  topics_cmd->require_subcommand(1);
  std::string model_path;
  auto* topics_train = topics_cmd->add_subcommand("train", "Train LDA");
  corpus_option(topics_train);
  std::optional<int> k_flag;
  topics_train->add_option("-k,--topics", k_flag, "Number of topics")->check(CLI::PositiveNumber);
  auto* topics_select = topics_cmd->add_subcommand("select", "Choose K by coherence x diversity");
  corpus_option(topics_select);
  std::vector<int> candidates;
  topics_select->add_option("--candidates", candidates, "Candidate K values")->delimiter(',');
  auto* topics_score = topics_cmd->add_subcommand("score", "Topic scores of every document");
  corpus_option(topics_score);
  topics_score->add_option("--model", model_path, "Topic model file");

  // split
  auto* split_cmd = app.add_subcommand("split", "Transfer splits");
  split_cmd->require_subcommand(1);
  auto* split_build = split_cmd->add_subcommand("build", "Build one topic split");
  corpus_option(split_build);
  split_build->add_option("--model", model_path, "Topic model file");
  int split_topic = 0;
  std::optional<int> split_n;
  split_build->add_option("--topic", split_topic, "Target topic")->required();
  split_build->add_option("--n", split_n, "Training documents per genre");

  // keywords
  auto* keywords_cmd = app.add_subcommand("keywords", "Keyword sequences");
  keywords_cmd->require_subcommand(1);
  auto* keywords_extract = keywords_cmd->add_subcommand("extract", "Keywords of a split partition");
  std::string split_dir, partition_name = "on_train";
  std::optional<std::string> m_flag;
  keywords_extract->add_option("--split", split_dir, "Split directory")->required()->check(CLI::ExistingDirectory);
  keywords_extract->add_option("--partition", partition_name, "Partition to extract from");
  keywords_extract->add_option("--model", model_path, "Topic model file");
  keywords_extract->add_option("-m,--keywords", m_flag, "Keywords per document (integer or 'all')");

  // augment
  auto* augment_cmd = app.add_subcommand("augment", "Synthetic data");
  augment_cmd->require_subcommand(1);
  auto* augment_generate = augment_cmd->add_subcommand("generate", "Generate a synthetic set");
  std::string keywords_path;
  std::optional<int> per_genre;
  bool shuffle_flag = false;
  augment_generate->add_option("--split", split_dir, "Split directory")->required()->check(CLI::ExistingDirectory);
  augment_generate->add_option("--keywords-file", keywords_path, "Keyword pool")->required()->check(CLI::ExistingFile);
  augment_generate->add_option("--model", model_path, "Topic model file");
  augment_generate->add_option("--per-genre", per_genre, "Documents per genre");
  augment_generate->add_flag("--shuffle-labels", shuffle_flag, "Permute genre labels afterwards");
  auto* augment_mix = augment_cmd->add_subcommand("mix", "Mix originals and synthetic documents");
  std::string original_path, synthetic_path;
  int n_original = 0, n_synthetic = 0;
  augment_mix->add_option("--original", original_path, "Original training file")->required()->check(CLI::ExistingFile);
  augment_mix->add_option("--synthetic", synthetic_path, "Synthetic file")->required()->check(CLI::ExistingFile);
  augment_mix->add_option("--n-original", n_original, "Originals per genre")->required();
  augment_mix->add_option("--n-synthetic", n_synthetic, "Synthetic documents per genre")->required();

  // classify
  auto* classify_cmd = app.add_subcommand("classify", "Genre classifier");
  classify_cmd->require_subcommand(1);
  auto* classify_train = classify_cmd->add_subcommand("train", "Train the built-in classifier");
  std::string train_path, val_path, test_path, classifier_path;
  classify_train->add_option("--train", train_path, "Training file")->required()->check(CLI::ExistingFile);
  classify_train->add_option("--val", val_path, "Validation file")->required()->check(CLI::ExistingFile);
  auto* classify_eval = classify_cmd->add_subcommand("eval", "Macro-F1 on a test file");
  classify_eval->add_option("--model", classifier_path, "Classifier file")->required()->check(CLI::ExistingFile);
  classify_eval->add_option("--test", test_path, "Test file")->required()->check(CLI::ExistingFile);

  // report and ablations
  auto* report_cmd = app.add_subcommand("report", "Run the condition grid and write the report");
  corpus_option(report_cmd);
  auto* ablate_cmd = app.add_subcommand("ablate", "Ablation sweeps");
  ablate_cmd->require_subcommand(1);
  auto* ablate_keywords = ablate_cmd->add_subcommand("keywords", "Sweep the keyword count");
  auto* ablate_mix = ablate_cmd->add_subcommand("mix", "Sweep original/synthetic proportions");
  auto* ablate_shuffle = ablate_cmd->add_subcommand("shuffle", "Shuffled-label control");
  for (auto* sub : {ablate_keywords, ablate_mix, ablate_shuffle}) corpus_option(sub);

  // synthkit
  auto* synthkit_cmd = app.add_subcommand("synthkit", "Planted corpora");
  synthkit_cmd->require_subcommand(1);
  auto* synthkit_make = synthkit_cmd->add_subcommand("make", "Write a planted corpus and its truth sidecar");
  std::optional<double> bias_flag;
  synthkit_make->add_option("--bias", bias_flag, "Topic-genre bias in [0,1]");

  for (auto* sub : app.get_subcommands({})) {
    sub->fallthrough();
    for (auto* leaf : sub->get_subcommands({})) leaf->fallthrough();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    set_quiet(g.quiet);
    auto config = load_config(g);
    const auto dir = out_dir(config);
    auto model_file = [&]() -> fs::path { return model_path.empty() ? dir / "topic_model.json" : fs::path(model_path); };
    auto load_model = [&](Manifests& m) {
      const auto p = model_file();
      m.input("topic_model", p);
      return std::make_shared<const TopicModel>(load_topic_model(p));
    };

    if (*ingest_cmd) {
      Manifests m(g, config, "ingest");
      m.input("corpus", ingest_path);
      const auto corpus = ingest(ingest_path);
      const auto out = dir / "corpus.jsonl";
      write_corpus(out, corpus.documents());
      m.output(out, {{"documents", corpus.size()}, {"genres", corpus.genres()}});
      std::map<std::string, int> per_genre_count;
      for (const auto& d : corpus) ++per_genre_count[d.genre];
      for (const auto& [genre, n] : per_genre_count) std::cout << genre << '\t' << n << '\n';
    } else if (*topics_train) {
      if (k_flag) config.lda.topics = *k_flag;
      Manifests m(g, config, "topics train");
      const auto corpus = load_corpus(corpus_flag, config, m);
      const auto result = train_lda(*corpus, topic_vocabulary(*corpus, config), lda_config(config));
      const auto out = model_file();
      save_topic_model(result.model, out);
      m.output(out, {{"excluded_documents", result.excluded_ids}});
      for (int t = 0; t < result.model.topics(); ++t) {
        std::cout << "topic " << t << ':';
        for (int w : top_words(result.model, t, 10)) std::cout << ' ' << result.model.vocabulary().word(w);
        std::cout << '\n';
      }
    } else if (*topics_select) {
      if (!candidates.empty()) config.topic_candidates = candidates;
      if (config.topic_candidates.empty()) throw ConfigError("no candidate topic counts given");
      Manifests m(g, config, "topics select");
      const auto corpus = load_corpus(corpus_flag, config, m);
      const auto vocab = topic_vocabulary(*corpus, config);
      const auto selection = select_topic_count(*corpus, vocab, config.topic_candidates, lda_config(config));
      json scores = json::array();
      for (const auto& s : selection.scores) {
        scores.push_back({{"K", s.topics}, {"coherence", s.coherence}, {"diversity", s.diversity}, {"product", s.product}});
        std::cout << "K=" << s.topics << "\tcoherence " << s.coherence << "\tdiversity " << s.diversity << "\tproduct "
                  << s.product << '\n';
      }
      const auto out = dir / "topic_selection.json";
      write_file_atomic(out, json{{"chosen", selection.chosen}, {"scores", scores}}.dump(2) + "\n");
      m.output(out);
      std::cout << "chosen K=" << selection.chosen << '\n';
    } else if (*topics_score) {
      Manifests m(g, config, "topics score");
      const auto corpus = load_corpus(corpus_flag, config, m);
      const auto model = load_model(m);
      const auto scores = score_corpus(*corpus, *model, config.fold_in_sweeps, derive_seed(config.seed, "doc-topics"));
      std::ostringstream lines;
      for (const auto& [id, s] : scores.scores) lines << json{{"id", id}, {"theta", s.theta}}.dump() << '\n';
      const auto out = dir / "doc_topics.jsonl";
      write_file_atomic(out, lines.str());
      m.output(out, {{"unscorable", scores.unscorable}});
    } else if (*split_build) {
      Manifests m(g, config, "split build");
      const auto corpus = load_corpus(corpus_flag, config, m);
      const auto model = load_model(m);
      const auto scores = score_corpus(*corpus, *model, config.fold_in_sweeps, derive_seed(config.seed, "doc-topics"));
      SplitSpec spec;
      spec.topic = split_topic;
      spec.n_train = split_n ? *split_n : config.n_values.front();
      spec.n_val = config.n_val;
      spec.n_test = config.n_test;
      spec.n_on_val = config.n_on_val;
      spec.seed = config.seed;
      const auto split = build_transfer_split(*corpus, scores, spec);
      const auto out = dir / ("split_t" + std::to_string(spec.topic) + "_n" + std::to_string(spec.n_train));
      emit_split(split, *corpus, out);
      m.output(out, {{"split_hash", split.hash()}});
      std::cout << out.string() << '\n';
    } else if (*keywords_extract) {
      Manifests m(g, config, "keywords extract");
      const auto model = load_model(m);
      m.input("split", split_dir);
      const int keywords = m_flag ? (*m_flag == "all" ? kAllKeywords : std::stoi(*m_flag)) : config.keywords;
      const auto part = partition_from_string(partition_name);
      const auto docs = ingest(fs::path(split_dir) / (std::string(to_string(part)) + ".jsonl"));
      std::vector<const Document*> ptrs;
      for (const auto& d : docs) ptrs.push_back(&d);
      const auto pool =
          build_keyword_pool(ptrs, *model, keywords, config.fold_in_sweeps, derive_seed(config.seed, "keywords"));
      const auto out = dir / ("keywords_" + partition_name + ".jsonl");
      write_keywords(out, pool);
      m.output(out, {{"sequences", pool.size()}});
    } else if (*augment_generate) {
      Manifests m(g, config, "augment generate");
      m.input("split", split_dir);
      m.input("keywords", keywords_path);
      const auto pool = read_keywords(keywords_path);
      const auto off_train = ingest(fs::path(split_dir) / "off_train.jsonl");
      std::map<std::string, GeneratorHandle> generators;
      std::shared_ptr<SharedAdapter> adapter;
      if (config.generator_backend == GeneratorBackend::external) {
        const auto path = adapter_from_environment();
        if (!path) throw ConfigError(std::string("external generator requested but ") + kAdapterEnv + " is not set");
        adapter = std::make_shared<SharedAdapter>(std::make_unique<AdapterProcess>(*path));
        adapter->process->handshake();
      }
      std::shared_ptr<const TopicModel> model;
      if (!adapter) model = load_model(m);
      for (const auto& genre : off_train.genres()) {
        std::vector<const Document*> docs;
        std::vector<std::string> ids;
        for (const auto& d : off_train) {
          if (d.genre != genre) continue;
          docs.push_back(&d);
          ids.push_back(d.id);
        }
        if (adapter) {
          generators.emplace(genre, external_generator(genre, adapter, ids));
        } else {
          GeneratorOptions opts = config.generator;
          opts.keywords = config.keywords;
          opts.fold_in_sweeps = config.fold_in_sweeps;
          opts.seed = derive_seed(config.seed, "generator", genre);
          generators.emplace(genre, train_builtin_generator(docs, *model, opts));
        }
      }
      const int n = per_genre ? *per_genre : (config.n_synthetic >= 0 ? config.n_synthetic : config.n_values.front());
      auto synthetic = build_synthetic_set(generators, pool, n, config.synthetic_length, derive_seed(config.seed, "synthetic"));
      if (shuffle_flag) synthetic = shuffle_labels(std::move(synthetic), derive_seed(config.seed, "shuffle"));
      std::ostringstream lines;
      for (std::size_t i = 0; i < synthetic.size(); ++i) {
        json j = synthetic[i].to_json();
        j["id"] = "syn-" + std::to_string(i);
        lines << j.dump() << '\n';
      }
      const auto out = dir / (shuffle_flag ? "synthetic_shuffled.jsonl" : "synthetic.jsonl");
      write_file_atomic(out, lines.str());
      m.output(out, {{"documents", synthetic.size()}});
    } else if (*augment_mix) {
      Manifests m(g, config, "augment mix");
      m.input("original", original_path);
      m.input("synthetic", synthetic_path);
      const auto original = labeled_file(original_path);
      const auto synthetic = labeled_file(synthetic_path);
      std::set<std::string> genre_set;
      for (const auto& t : original) genre_set.insert(t.genre);
      AugmentationPlan plan;
      plan.n_original = n_original;
      plan.n_synthetic = n_synthetic;
      const auto mixed =
          mix(original, synthetic, plan, {genre_set.begin(), genre_set.end()}, derive_seed(config.seed, "mix"));
      std::vector<Document> docs;
      for (std::size_t i = 0; i < mixed.size(); ++i) {
        auto d = Document::make("mix-" + std::to_string(i) + "-" + mixed[i].source, mixed[i].genre, mixed[i].text);
        docs.push_back(std::move(d));
      }
      const auto out = dir / "train_mix.jsonl";
      write_corpus(out, docs);
      m.output(out, {{"plan", plan.to_json()}});
    } else if (*classify_train) {
      Manifests m(g, config, "classify train");
      m.input("train", train_path);
      m.input("val", val_path);
      const auto train = labeled_file(train_path);
      const auto val = labeled_file(val_path);
      const auto texts = texts_of(train);
      auto vocab = std::make_shared<const Vocabulary>(
          build_vocabulary(texts, config.classifier_min_count, config.classifier_stop_top_n));
      ClassifierConfig cc = config.classifier;
      cc.seed = derive_seed(config.seed, "classifier");
      const auto model = train_classifier(train, val, vocab, cc);
      const auto out = dir / "classifier.json";
      save_classifier(model, out);
      m.output(out, {{"best_epoch", model.best_epoch}});
      std::cout << "best epoch " << model.best_epoch << ", validation macro-F1 "
                << model.history.at(static_cast<std::size_t>(model.best_epoch - 1)).val_macro_f1 << '\n';
    } else if (*classify_eval) {
      Manifests m(g, config, "classify eval");
      m.input("classifier", classifier_path);
      m.input("test", test_path);
      const auto model = load_classifier(classifier_path);
      const auto test = labeled_file(test_path);
      const auto predicted = predict_windows(model, test, model.config.window, derive_seed(config.seed, "test"));
      std::vector<std::string> gold;
      for (const auto& t : test) gold.push_back(t.genre);
      const double f1 = macro_f1(predicted, gold, model.genres());
      const auto out = dir / "eval.json";
      write_file_atomic(out, json{{"macro_f1", f1}, {"documents", test.size()}}.dump(2) + "\n");
      m.output(out);
      std::cout << "macro-F1 " << f1 << '\n';
    } else if (*report_cmd) {
      run_grid(g, config, "report", corpus_flag);
    } else if (*ablate_keywords) {
      config.conditions = {Condition::off_topic};
      if (config.keyword_sweep.empty()) config.keyword_sweep = {1, 10, kAllKeywords};
      run_grid(g, config, "ablate keywords", corpus_flag);
    } else if (*ablate_mix) {
      config.conditions = {Condition::off_topic};
      if (config.mix_grid.empty()) {
        const int n = config.n_values.front();
        config.mix_grid = {{0, n}, {n, n / 2}, {n, n}, {n, 2 * n}};
      }
      run_grid(g, config, "ablate mix", corpus_flag);
    } else if (*ablate_shuffle) {
      config.conditions = {Condition::off_topic, Condition::aug_baseline, Condition::aug_adapt, Condition::shuffled};
      run_grid(g, config, "ablate shuffle", corpus_flag);
    } else if (*synthkit_make) {
      if (bias_flag) config.planted.bias = *bias_flag;
      config.planted.seed = g.seed ? *g.seed : config.planted.seed;
      Manifests m(g, config, "synthkit make");
      const auto planted = make_biased_corpus(config.planted);
      const auto out = dir / "planted.jsonl";
      write_planted(planted, config.planted, out);
      m.output(out, {{"documents", planted.corpus.size()}});
      std::cout << out.string() << '\n';
    }
  } catch (const IncompleteRun& r) {
    std::cerr << "topicshift: " << r.failures << " cell(s) failed\n";
    return 1;
  } catch (const AdapterError& e) {
    std::cerr << "topicshift: " << e.what() << '\n';
    if (!e.payload().empty()) std::cerr << "  adapter said: " << e.payload() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "topicshift: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
