#include "topicshift/classify.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <map>

#include "topicshift/error.hpp"
#include "topicshift/evaluate.hpp"
#include "topicshift/topics.hpp"

namespace topicshift {

FeatureVector featurize(std::string_view normalized, const Vocabulary& vocab) {
  std::map<int, int> counts;
  for (auto tok : tokenize(normalized)) {
    int id = vocab.index(tok);
    if (id != Vocabulary::kNotFound) ++counts[id];
  }
  return FeatureVector(counts.begin(), counts.end());
}

SparseInput to_input(const FeatureVector& f) {
  SparseInput x;
  double norm = 0.0;
  for (auto [i, c] : f) norm += static_cast<double>(c) * c;
  norm = std::sqrt(norm);
  x.index.reserve(f.size());
  x.value.reserve(f.size());
  for (auto [i, c] : f) {
    x.index.push_back(i);
    x.value.push_back(c / norm);
  }
  return x;
}

nlohmann::json ClassifierConfig::to_json() const {
  return {{"learning_rate", learning_rate}, {"l2", l2},         {"epochs", epochs},
          {"batch_size", batch_size},       {"window", window}, {"fresh_windows", fresh_windows},
          {"seed", seed}};
}

ClassifierConfig ClassifierConfig::from_json(const nlohmann::json& j) {
  ClassifierConfig c;
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.l2 = j.value("l2", c.l2);
  c.epochs = j.value("epochs", c.epochs);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.window = j.value("window", c.window);
  c.fresh_windows = j.value("fresh_windows", c.fresh_windows);
  c.seed = j.value("seed", c.seed);
  return c;
}

double stability_threshold(double l2) { return 1.0 / (1.0 + l2); }

ClassifierModel::ClassifierModel(std::vector<std::string> genres, std::shared_ptr<const Vocabulary> vocabulary)
    : genres_(std::move(genres)), vocab_(std::move(vocabulary)) {
  if (genres_.empty()) throw ConfigError("classifier needs at least one genre");
  if (!vocab_) throw ConfigError("classifier needs a vocabulary");
  weights_.assign(static_cast<std::size_t>(genre_count()) * vocab_size(), 0.0);
  bias_.assign(static_cast<std::size_t>(genre_count()), 0.0);
}

int ClassifierModel::genre_index(std::string_view genre) const {
  auto it = std::find(genres_.begin(), genres_.end(), genre);
  return it == genres_.end() ? -1 : static_cast<int>(it - genres_.begin());
}

std::vector<double> ClassifierModel::logits(const SparseInput& x) const {
  const int G = genre_count();
  const std::size_t V = static_cast<std::size_t>(vocab_size());
  std::vector<double> z(bias_);
  for (int g = 0; g < G; ++g) {
    const double* row = weights_.data() + g * V;
    double s = 0.0;
    for (std::size_t k = 0; k < x.index.size(); ++k) s += row[x.index[k]] * x.value[k];
    z[static_cast<std::size_t>(g)] += s;
  }
  return z;
}

Prediction ClassifierModel::predict_input(const SparseInput& x) const {
  Prediction p;
  p.scores = logits(x);
  p.genre = static_cast<int>(std::max_element(p.scores.begin(), p.scores.end()) - p.scores.begin());
  softmax(p.scores);
  return p;
}

Prediction ClassifierModel::predict(std::string_view normalized) const {
  return predict_input(to_input(featurize(normalized, *vocab_)));
}

namespace {

double accumulate(const ClassifierModel& model, std::span<const Example> batch, std::vector<double>* grad_w,
                  std::vector<double>* grad_b) {
  const int G = model.genre_count();
  const std::size_t V = static_cast<std::size_t>(model.vocab_size());
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  double total = 0.0;
  for (const auto& ex : batch) {
    auto p = model.logits(ex.x);
    const double zmax = *std::max_element(p.begin(), p.end());
    double sum = 0.0;
    for (double& v : p) sum += (v = std::exp(v - zmax));
    total += -(std::log(p[static_cast<std::size_t>(ex.label)] / sum));
    if (!grad_w) continue;
    for (int g = 0; g < G; ++g) {
      double r = p[static_cast<std::size_t>(g)] / sum - (g == ex.label ? 1.0 : 0.0);
      r *= inv_n;
      (*grad_b)[static_cast<std::size_t>(g)] += r;
      double* row = grad_w->data() + g * V;
      for (std::size_t k = 0; k < ex.x.index.size(); ++k) row[ex.x.index[k]] += r * ex.x.value[k];
    }
  }
  return total * inv_n;
}

double penalty(const ClassifierModel& model, double l2) {
  double sq = 0.0;
  for (double w : model.weights()) sq += w * w;
  return 0.5 * l2 * sq;
}

}  // namespace

double loss_and_gradient(const ClassifierModel& model, std::span<const Example> batch, double l2,
                         std::vector<double>& grad_w, std::vector<double>& grad_b) {
  if (batch.empty()) throw ConfigError("empty batch");
  grad_w.assign(model.weights().size(), 0.0);
  grad_b.assign(model.bias().size(), 0.0);
  const double data = accumulate(model, batch, &grad_w, &grad_b);
  const auto& w = model.weights();
  for (std::size_t i = 0; i < w.size(); ++i) grad_w[i] += l2 * w[i];
  return data + penalty(model, l2);
}

double loss(const ClassifierModel& model, std::span<const Example> batch, double l2) {
  if (batch.empty()) throw ConfigError("empty batch");
  return accumulate(model, batch, nullptr, nullptr) + penalty(model, l2);
}

namespace {

// Token layout of one normalized text, so a window's features can be read off
// without re-tokenizing. Equivalent to featurize(sample_window(text)).
class WindowedText {
 public:
  WindowedText(std::string_view text, const Vocabulary& vocab) : text_(text), vocab_(&vocab) {
    ascii_ = std::all_of(text.begin(), text.end(), [](char c) { return static_cast<unsigned char>(c) < 0x80; });
    if (!ascii_) return;
    std::size_t start = 0;
    while (start < text.size()) {
      std::size_t end = text.find(' ', start);
      if (end == std::string_view::npos) end = text.size();
      if (end > start) spans_.push_back({start, end, vocab.index(text.substr(start, end - start))});
      start = end + 1;
    }
  }

  FeatureVector window(std::size_t width, Rng& rng) const {
    if (!ascii_) return featurize(sample_window(text_, width, rng), *vocab_);
    const std::size_t s = sample_window_offset(text_.size(), width, rng);
    const std::size_t e = std::min(text_.size(), s + width);
    std::vector<int> ids;
    auto first = std::lower_bound(spans_.begin(), spans_.end(), s,
                                  [](const Span& sp, std::size_t pos) { return sp.end <= pos; });
    for (auto it = first; it != spans_.end() && it->start < e; ++it) {
      int id = it->id;
      if (it->start < s || it->end > e) {
        const std::size_t a = std::max(it->start, s);
        const std::size_t b = std::min(it->end, e);
        id = vocab_->index(text_.substr(a, b - a));
      }
      if (id != Vocabulary::kNotFound) ids.push_back(id);
    }
    std::sort(ids.begin(), ids.end());
    FeatureVector f;
    for (std::size_t i = 0; i < ids.size();) {
      std::size_t j = i;
      while (j < ids.size() && ids[j] == ids[i]) ++j;
      f.emplace_back(ids[i], static_cast<int>(j - i));
      i = j;
    }
    return f;
  }

 private:
  struct Span {
    std::size_t start;
    std::size_t end;
    int id;
  };
  std::string_view text_;
  const Vocabulary* vocab_;
  bool ascii_ = true;
  std::vector<Span> spans_;
};

std::vector<Example> sample_examples(const std::vector<WindowedText>& texts, const std::vector<int>& labels,
                                     std::size_t width, Rng& rng) {
  std::vector<Example> out;
  out.reserve(texts.size());
  for (std::size_t i = 0; i < texts.size(); ++i) out.push_back({to_input(texts[i].window(width, rng)), labels[i]});
  return out;
}

}  // namespace

ClassifierModel train_classifier(std::span<const LabeledText> train, std::span<const LabeledText> val,
                                 std::shared_ptr<const Vocabulary> vocabulary, const ClassifierConfig& config) {
  if (config.epochs < 1 || config.batch_size < 1 || config.window < 1) {
    throw ConfigError("epochs, batch_size and window must be at least 1");
  }
  if (!(config.learning_rate > 0) || !(config.l2 >= 0)) throw ConfigError("learning_rate must be > 0 and l2 >= 0");
  if (val.empty()) throw ConfigError("validation set is empty");
  std::vector<std::string> genres;
  for (const auto& t : train) genres.push_back(t.genre);
  std::sort(genres.begin(), genres.end());
  genres.erase(std::unique(genres.begin(), genres.end()), genres.end());
  if (genres.size() < 2) throw ConfigError("training set must contain at least two genres");

  ClassifierModel model(genres, vocabulary);
  model.config = config;
  const auto& vocab = *vocabulary;

  auto prepare = [&](std::span<const LabeledText> items, const char* what) {
    std::pair<std::vector<WindowedText>, std::vector<int>> out;
    for (const auto& t : items) {
      int g = model.genre_index(t.genre);
      if (g < 0) throw ConfigError(std::string(what) + " label '" + t.genre + "' is not a training genre");
      out.first.emplace_back(t.text, vocab);
      out.second.push_back(g);
    }
    return out;
  };
  const auto [train_texts, train_labels] = prepare(train, "training");
  const auto [val_texts, val_labels] = prepare(val, "validation");

  Rng rng(config.seed);
  Rng val_rng(derive_seed(config.seed, "validation-windows"));
  Rng loss_rng(derive_seed(config.seed, "loss-windows"));
  const auto val_examples = sample_examples(val_texts, val_labels, config.window, val_rng);
  const auto loss_examples = sample_examples(train_texts, train_labels, config.window, loss_rng);

  auto val_f1 = [&]() {
    std::vector<int> pred;
    pred.reserve(val_examples.size());
    for (const auto& ex : val_examples) pred.push_back(model.predict_input(ex.x).genre);
    return macro_f1(pred, val_labels, model.genre_count());
  };

  std::vector<double> best_w = model.weights();
  std::vector<double> best_b = model.bias();
  double best_f1 = -1.0;
  double best_val_loss = std::numeric_limits<double>::infinity();
  std::vector<double> grad_w, grad_b;
  std::vector<Example> examples;
  std::vector<std::size_t> order(train_texts.size());

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    if (epoch == 1 || config.fresh_windows) examples = sample_examples(train_texts, train_labels, config.window, rng);
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    shuffle(order, rng);
    std::vector<Example> batch;
    batch.reserve(static_cast<std::size_t>(config.batch_size));
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.batch_size)) {
      batch.clear();
      const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      for (std::size_t i = start; i < stop; ++i) batch.push_back(examples[order[i]]);
      loss_and_gradient(model, batch, config.l2, grad_w, grad_b);
      auto& w = model.weights();
      for (std::size_t i = 0; i < w.size(); ++i) w[i] -= config.learning_rate * grad_w[i];
      auto& b = model.bias();
      for (std::size_t g = 0; g < b.size(); ++g) b[g] -= config.learning_rate * grad_b[g];
    }
    const double objective = loss(model, loss_examples, config.l2);
    if (!std::isfinite(objective)) {
      throw DivergenceError(epoch, "training diverged at epoch " + std::to_string(epoch) + " (loss is not finite)");
    }
    const double f1 = val_f1();
    const double val_loss = loss(model, val_examples, 0.0);
    model.history.push_back({epoch, objective, f1, val_loss});
    if (f1 > best_f1 || (f1 == best_f1 && val_loss < best_val_loss)) {
      best_f1 = f1;
      best_val_loss = val_loss;
      best_w = model.weights();
      best_b = model.bias();
      model.best_epoch = epoch;
    }
  }
  model.weights() = std::move(best_w);
  model.bias() = std::move(best_b);
  return model;
}

std::vector<std::string> predict_windows(const ClassifierModel& model, std::span<const LabeledText> texts,
                                         std::size_t window, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::string> out;
  out.reserve(texts.size());
  for (const auto& t : texts) {
    WindowedText wt(t.text, model.vocabulary());
    out.push_back(model.label(model.predict_input(to_input(wt.window(window, rng)))));
  }
  return out;
}

nlohmann::json classifier_to_json(const ClassifierModel& model) {
  nlohmann::json hist = nlohmann::json::array();
  for (const auto& h : model.history) {
    hist.push_back({{"epoch", h.epoch}, {"train_loss", h.train_loss}, {"val_macro_f1", h.val_macro_f1}, {"val_loss", h.val_loss}});
  }
  return {{"format", "topicshift.classifier"},
          {"version", 1},
          {"genres", model.genres()},
          {"vocabulary", model.vocabulary().to_json()},
          {"weights", model.weights()},
          {"bias", model.bias()},
          {"config", model.config.to_json()},
          {"best_epoch", model.best_epoch},
          {"history", hist}};
}

ClassifierModel classifier_from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "topicshift.classifier") throw ParseError(0, "not a classifier file");
  auto vocab = std::make_shared<const Vocabulary>(Vocabulary::from_json(j.at("vocabulary")));
  ClassifierModel model(j.at("genres").get<std::vector<std::string>>(), vocab);
  auto w = j.at("weights").get<std::vector<double>>();
  auto b = j.at("bias").get<std::vector<double>>();
  if (w.size() != model.weights().size() || b.size() != model.bias().size()) {
    throw ShapeError("classifier weights do not match genres x vocabulary");
  }
  for (double v : w) {
    if (!std::isfinite(v)) throw IntegrityError("classifier weights must be finite");
  }
  model.weights() = std::move(w);
  model.bias() = std::move(b);
  model.config = ClassifierConfig::from_json(j.at("config"));
  model.best_epoch = j.value("best_epoch", 0);
  for (const auto& h : j.value("history", nlohmann::json::array())) {
    model.history.push_back({h.at("epoch").get<int>(), h.at("train_loss").get<double>(),
                             h.at("val_macro_f1").get<double>(), h.value("val_loss", 0.0)});
  }
  return model;
}

void save_classifier(const ClassifierModel& model, const std::filesystem::path& path) {
  write_file_atomic(path, classifier_to_json(model).dump() + "\n");
}

ClassifierModel load_classifier(const std::filesystem::path& path) {
  return classifier_from_json(nlohmann::json::parse(read_file(path)));
}

}  // namespace topicshift
