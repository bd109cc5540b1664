// End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
// exits nonzero if any of them fails. Takes a few minutes on one core.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "topicshift/classify.hpp"
#include "topicshift/evaluate.hpp"
#include "topicshift/experiment.hpp"
#include "topicshift/keywords.hpp"

namespace ts = topicshift;
namespace oracles = topicshift::oracles;

namespace {

int failures = 0;

void report(bool ok, const std::string& name, const std::string& detail) {
  std::cout << (ok ? "PASS " : "FAIL ") << name << ": " << detail << std::endl;
  failures += !ok;
}

std::string fmt(const char* pattern, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, pattern, args...);
  return buf;
}

/// Scratch directory removed on exit.
struct Scratch {
  std::filesystem::path path = std::filesystem::temp_directory_path() / "topicshift-acceptance";
  Scratch() {
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~Scratch() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::filesystem::path operator/(const std::string& name) const { return path / name; }
};

void note(const std::string& msg) { std::cerr << "[acceptance] " << msg << std::endl; }

struct Run {
  ts::ExperimentReport report;
  std::vector<std::string> failures;
  double seconds = 0;
};

Run run(const ts::ExperimentConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  const auto pipeline = ts::prepare_pipeline(config);
  auto out = ts::run_experiment(pipeline);
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
  return {std::move(out.report), std::move(out.failures), elapsed.count()};
}

/// Mean macro-F1 in points (0 to 100).
double mean_of(const ts::ExperimentReport& r, ts::Condition c, const std::string& variant = {}) {
  return 100.0 * r.summary(c, variant).mean;
}

/// Paired test over individual (topic, seed) cells, printed for reference.
double cell_paired_p(const ts::ExperimentReport& r, ts::Condition a, ts::Condition b) {
  std::map<std::pair<int, std::uint64_t>, double> left;
  for (const auto& cell : r.cells()) {
    if (cell.condition == a && cell.variant.empty()) left[{cell.topic, cell.seed}] = cell.macro_f1;
  }
  std::vector<double> x, y;
  for (const auto& cell : r.cells()) {
    if (cell.condition != b || !cell.variant.empty()) continue;
    auto it = left.find({cell.topic, cell.seed});
    if (it == left.end()) continue;
    x.push_back(it->second);
    y.push_back(cell.macro_f1);
  }
  return ts::paired_t_test(x, y).p;
}

ts::ExperimentConfig base_config(const std::string& out) {
  ts::ExperimentConfig c;
  c.output = out;
  return c;
}

void check_grid(const Scratch& dir) {
  using ts::Condition;

  note("default configuration, first run");
  const auto main = run(base_config((dir / "main").string()));
  const bool main_complete = main.failures.empty();
  const double on = mean_of(main.report, Condition::on_topic);
  const double off = mean_of(main.report, Condition::off_topic);
  const double base = mean_of(main.report, Condition::aug_baseline);
  const double adapt = mean_of(main.report, Condition::aug_adapt);
  const auto gap = main.report.compare(Condition::on_topic, Condition::off_topic);
  report(main_complete && on - off >= 10 && gap.test.p < 0.05 && main.seconds <= 300, "transfer_gap",
         fmt("on %.2f off %.2f diff %.2f (>= 10), per-topic paired p %.3g (< 0.05), cell-paired p %.3g, "
             "runtime %.0f s (<= 300), failed cells %zu",
             on, off, on - off, gap.test.p, cell_paired_p(main.report, Condition::on_topic, Condition::off_topic),
             main.seconds, main.failures.size()));

  const auto vs_off = main.report.compare(Condition::aug_adapt, Condition::off_topic);
  const auto vs_base = main.report.compare(Condition::aug_adapt, Condition::aug_baseline);
  report(main_complete && adapt - off >= 2 && vs_off.test.p < 0.05 && adapt > base && vs_base.test.p < 0.05,
         "augmentation_helps",
         fmt("adapt %.2f off %.2f diff %.2f (>= 2) p %.3g (< 0.05); adapt - baseline %.2f (> 0) p %.3g (< 0.05)",
             adapt, off, adapt - off, vs_off.test.p, adapt - base, vs_base.test.p));

  note("default configuration, rerun");
  const auto again = run(base_config((dir / "again").string()));
  const auto csv = main.report.to_csv();
  report(csv == again.report.to_csv() && main_complete, "determinism",
         fmt("report CSV of %zu bytes %s on rerun", csv.size(),
             csv == again.report.to_csv() ? "identical" : "differs"));

  note("ablations: shuffled labels and keyword sweep");
  auto ablate = base_config((dir / "ablate").string());
  ablate.conditions = {Condition::off_topic, Condition::shuffled};
  ablate.keyword_sweep = {1, 10, ts::kAllKeywords};
  const auto abl = run(ablate);
  const bool abl_complete = abl.failures.empty();
  const double abl_off = mean_of(abl.report, Condition::off_topic);
  const double shuffled = mean_of(abl.report, Condition::shuffled);
  report(abl_complete && std::abs(shuffled - abl_off) <= 1, "shuffled_labels",
         fmt("shuffled %.2f off %.2f |diff| %.2f (<= 1)", shuffled, abl_off, std::abs(shuffled - abl_off)));

  const double m1 = mean_of(abl.report, Condition::aug_adapt, "m=1");
  const double m10 = mean_of(abl.report, Condition::aug_adapt, "m=10");
  const double mall = mean_of(abl.report, Condition::aug_adapt, "m=all");
  report(abl_complete && m10 > m1 && m10 > mall, "keyword_sweep",
         fmt("m=1 %.2f, m=10 %.2f, m=all %.2f (m=10 above both)", m1, m10, mall));

  note("unbiased corpus control");
  auto control = base_config((dir / "control").string());
  control.planted.bias = 0.0;
  control.conditions = {Condition::on_topic, Condition::off_topic};
  const auto ctl = run(control);
  const double ctl_on = mean_of(ctl.report, Condition::on_topic);
  const double ctl_off = mean_of(ctl.report, Condition::off_topic);
  report(ctl.failures.empty() && std::abs(ctl_on - ctl_off) <= 3, "bias0_control",
         fmt("on %.2f off %.2f |diff| %.2f (<= 3)", ctl_on, ctl_off, std::abs(ctl_on - ctl_off)));
}

void check_lda_recovery() {
  auto fx = ts::fixtures::two_topic_corpus();
  auto vocab = std::make_shared<const ts::Vocabulary>(ts::build_vocabulary(fx.corpus, 1, 0));
  ts::LdaConfig cfg;
  cfg.topics = 2;
  cfg.sweeps = 200;
  const auto two = ts::train_lda(fx.corpus, vocab, cfg);
  const auto j = ts::fixtures::matched_jaccard(two.model, fx.topic_words, 10);
  const double worst_j = j.size() == 2 ? *std::min_element(j.begin(), j.end()) : 0.0;

  cfg.topics = 1;
  cfg.sweeps = 20;
  const auto one = ts::train_lda(fx.corpus, vocab, cfg);
  double total = 0;
  for (auto f : vocab->frequencies()) total += static_cast<double>(f);
  const double V = vocab->size();
  double worst = 0;
  for (int w = 0; w < vocab->size(); ++w) {
    const double expected = (static_cast<double>(vocab->frequency(w)) + cfg.hyper_beta) / (total + V * cfg.hyper_beta);
    worst = std::max(worst, std::abs(one.model.prob(w, 0) - expected));
  }
  report(j.size() == 2 && worst_j >= 0.8 && worst <= 1e-9, "lda_recovery",
         fmt("min matched Jaccard %.3f (>= 0.8), K=1 max deviation from smoothed unigram %.2e (<= 1e-9)", worst_j,
             worst));
}

double max_gradient_error(ts::ClassifierModel& model, std::span<const ts::Example> batch, double l2) {
  std::vector<double> gw, gb;
  ts::loss_and_gradient(model, batch, l2, gw, gb);
  const double h = 1e-5;
  double worst = 0;
  auto check = [&](double& param, double analytic) {
    const double keep = param;
    param = keep + h;
    const double up = ts::loss(model, batch, l2);
    param = keep - h;
    const double down = ts::loss(model, batch, l2);
    param = keep;
    const double numeric = (up - down) / (2 * h);
    const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
    worst = std::max(worst, std::abs(analytic - numeric) / scale);
  };
  for (std::size_t i = 0; i < model.weights().size(); ++i) check(model.weights()[i], gw[i]);
  for (std::size_t g = 0; g < model.bias().size(); ++g) check(model.bias()[g], gb[g]);
  return worst;
}

void check_numerics() {
  ts::Rng rng(2024);

  std::vector<std::string> words;
  for (const auto& w : oracles::letters_words(12)) words.push_back(w);
  auto vocab = std::make_shared<const ts::Vocabulary>(words, std::vector<std::uint64_t>(words.size(), 1));
  double grad_err = 0;
  for (int point = 0; point < 10; ++point) {
    ts::ClassifierModel model({"a", "b", "c"}, vocab);
    for (auto& w : model.weights()) w = ts::uniform01(rng) * 2 - 1;
    for (auto& b : model.bias()) b = ts::uniform01(rng) * 2 - 1;
    std::vector<ts::Example> batch;
    for (int i = 0; i < 6; ++i) {
      std::string text;
      for (int n = 0; n < 8; ++n) text += words[ts::uniform_index(rng, words.size())] + " ";
      batch.push_back({ts::to_input(ts::featurize(ts::normalize(text), *vocab)),
                       static_cast<int>(ts::uniform_index(rng, 3))});
    }
    grad_err = std::max(grad_err, max_gradient_error(model, batch, 1e-2));
  }

  // Normalization: softmax outputs, ETM rows, LDA word-topic rows, fold-in theta.
  double norm_err = 0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> logits(1 + ts::uniform_index(rng, 50));
    for (auto& x : logits) x = ts::uniform01(rng) * 400 - 200;
    ts::softmax(logits);
    double sum = 0;
    for (double x : logits) sum += x;
    norm_err = std::max(norm_err, std::abs(sum - 1));
  }
  ts::EtmParameters etm;
  etm.vocab_size = 30;
  etm.topics = 3;
  etm.embedding_dim = 4;
  for (int w = 0; w < etm.vocab_size; ++w) {
    for (int e = 0; e < etm.embedding_dim - 1; ++e) etm.rho.push_back(ts::uniform01(rng) * 4 - 2);
    etm.rho.push_back(1.0);
  }
  for (int t = 0; t < etm.topics; ++t) {
    for (int e = 0; e < etm.embedding_dim - 1; ++e) etm.alpha.push_back(ts::uniform01(rng) * 4 - 2);
    etm.alpha.push_back(0.0);
  }
  const auto rows = ts::etm_word_topic(etm);
  for (int t = 0; t < etm.topics; ++t) {
    double sum = 0;
    for (int w = 0; w < etm.vocab_size; ++w) sum += rows[static_cast<std::size_t>(t * etm.vocab_size + w)];
    norm_err = std::max(norm_err, std::abs(sum - 1));
  }
  auto fx = ts::fixtures::two_topic_corpus();
  auto lda_vocab = std::make_shared<const ts::Vocabulary>(ts::build_vocabulary(fx.corpus, 1, 0));
  ts::LdaConfig cfg;
  cfg.topics = 3;
  cfg.sweeps = 50;
  const auto lda = ts::train_lda(fx.corpus, lda_vocab, cfg);
  for (int t = 0; t < lda.model.topics(); ++t) {
    double sum = 0;
    for (int w = 0; w < lda.model.vocab_size(); ++w) sum += lda.model.prob(w, t);
    norm_err = std::max(norm_err, std::abs(sum - 1));
  }
  std::uint64_t seed = 1;
  for (const auto& doc : fx.corpus) {
    const auto theta = ts::infer_doc_topics(lda.model, doc, 10, seed++);
    double sum = 0;
    for (double x : theta.theta) sum += x;
    norm_err = std::max(norm_err, std::abs(sum - 1));
  }

  // A constant embedding coordinate adds the same amount to every logit of a topic.
  double shift_err = 0;
  for (int trial = 0; trial < 20; ++trial) {
    auto shifted = etm;
    for (int t = 0; t < etm.topics; ++t) {
      shifted.alpha[static_cast<std::size_t>(t * etm.embedding_dim + etm.embedding_dim - 1)] =
          ts::uniform01(rng) * 100 - 50;
    }
    const auto moved = ts::etm_word_topic(shifted);
    for (std::size_t i = 0; i < rows.size(); ++i) shift_err = std::max(shift_err, std::abs(rows[i] - moved[i]));
  }

  report(grad_err < 1e-4 && norm_err <= 1e-9 && shift_err <= 1e-12, "numerical_checks",
         fmt("gradient max relative error %.2e (< 1e-4), normalization error %.2e (<= 1e-9), "
             "ETM shift deviation %.2e (<= 1e-12)",
             grad_err, norm_err, shift_err));
}

void check_oracles() {
  ts::Rng rng(99);
  int mismatched = 0;
  std::string detail;
  auto tally = [&](const char* name, int bad) {
    mismatched += bad;
    detail += fmt("%s %d/100 ", name, 100 - bad);
  };

  int bad = 0;
  for (int trial = 0; trial < 100; ++trial) {
    auto m = oracles::random_model(rng, 1 + static_cast<int>(ts::uniform_index(rng, 4)), 6);
    auto theta = oracles::random_theta(rng, m.topics());
    auto doc = oracles::random_doc(rng, m, 12, true);
    bool ok = true;
    for (int w = 0; w < m.vocab_size(); ++w) {
      const auto& word = m.vocabulary().word(w);
      ok &= std::abs(ts::score_word(word, doc, theta, m) - oracles::score_word(word, doc, theta, m)) <= 1e-12;
    }
    bad += !ok;
  }
  tally("score_word", bad);

  bad = 0;
  for (int trial = 0; trial < 100; ++trial) {
    auto m = oracles::random_model(rng, 1 + static_cast<int>(ts::uniform_index(rng, 4)), 15);
    auto theta = oracles::random_theta(rng, m.topics());
    auto doc = oracles::random_doc(rng, m, 5 + static_cast<int>(ts::uniform_index(rng, 30)), true);
    const int top = 1 + static_cast<int>(ts::uniform_index(rng, 12));
    const auto expected = oracles::extract_keywords(doc, m, theta, top);
    const auto got = ts::extract_keywords(doc, m, theta, top);
    bad += !(got.tokens == expected.tokens && got.distinct_count == expected.distinct);
  }
  tally("extract_keywords", bad);

  bad = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int G = 2 + static_cast<int>(ts::uniform_index(rng, 6));
    const auto n = 1 + ts::uniform_index(rng, 200);
    std::vector<int> p(n), g(n);
    for (std::size_t i = 0; i < n; ++i) {
      g[i] = static_cast<int>(ts::uniform_index(rng, static_cast<std::uint64_t>(G)));
      p[i] = ts::uniform_index(rng, 3) == 0 ? g[i] : static_cast<int>(ts::uniform_index(rng, static_cast<std::uint64_t>(G)));
    }
    bad += std::abs(ts::macro_f1(p, g, G) - oracles::macro_f1(p, g, G)) > 1e-12;
  }
  tally("macro_f1", bad);

  bad = 0;
  for (int trial = 0; trial < 100; ++trial) {
    auto inst = oracles::random_split_instance(rng, 500, 3, 3, 1 + static_cast<int>(ts::uniform_index(rng, 6)));
    const auto spec = oracles::random_split_spec(rng, 3);
    auto split = ts::build_transfer_split(inst.corpus, inst.scores, spec);
    const auto expected = oracles::transfer_split(inst, spec);
    bool ok = true;
    for (ts::Partition p : ts::kAllPartitions) ok &= split[p] == expected.at(p);
    bad += !ok;
  }
  tally("build_transfer_split", bad);

  bad = 0;
  for (int trial = 0; trial < 100; ++trial) {
    auto m = oracles::random_model(rng, 2, 5 + static_cast<int>(ts::uniform_index(rng, 20)));
    const int t = static_cast<int>(ts::uniform_index(rng, 2));
    const int k = 1 + static_cast<int>(ts::uniform_index(rng, 30));
    bad += ts::top_words(m, t, k) != oracles::top_words(m, t, k);
  }
  tally("top_words", bad);

  detail.pop_back();
  report(mismatched == 0, "oracle_equivalence", detail);
}

}  // namespace

int main() {
  try {
    check_lda_recovery();
    check_numerics();
    check_oracles();
    Scratch dir;
    check_grid(dir);
  } catch (const std::exception& e) {
    std::cout << "FAIL acceptance run aborted: " << e.what() << std::endl;
    return 2;
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
