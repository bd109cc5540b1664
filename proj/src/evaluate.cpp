#include "topicshift/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <tuple>

#include <boost/math/distributions/students_t.hpp>

#include "topicshift/error.hpp"

namespace topicshift {

double macro_f1(std::span<const int> predictions, std::span<const int> gold, int genre_count) {
  if (predictions.size() != gold.size()) {
    throw ShapeError("predictions and gold differ in length (" + std::to_string(predictions.size()) + " vs " +
                     std::to_string(gold.size()) + ")");
  }
  if (genre_count < 1) throw ConfigError("macro-F1 needs at least one genre");
  std::vector<long> tp(static_cast<std::size_t>(genre_count)), fp(tp), fn(tp);
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const int p = predictions[i];
    const int g = gold[i];
    if (p < 0 || p >= genre_count || g < 0 || g >= genre_count) throw ConfigError("label outside the genre set");
    if (p == g) {
      ++tp[static_cast<std::size_t>(g)];
    } else {
      ++fp[static_cast<std::size_t>(p)];
      ++fn[static_cast<std::size_t>(g)];
    }
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < tp.size(); ++k) {
    // 2PR/(P+R) simplifies to 2tp / (2tp + fp + fn).
    if (tp[k] > 0) sum += 2.0 * tp[k] / (2.0 * tp[k] + fp[k] + fn[k]);
  }
  return sum / genre_count;
}

double macro_f1(std::span<const std::string> predictions, std::span<const std::string> gold,
                std::span<const std::string> genres) {
  auto index_of = [&](const std::string& label) {
    auto it = std::find(genres.begin(), genres.end(), label);
    if (it == genres.end()) throw ConfigError("label '" + label + "' is not in the genre set");
    return static_cast<int>(it - genres.begin());
  };
  if (predictions.size() != gold.size()) {
    throw ShapeError("predictions and gold differ in length (" + std::to_string(predictions.size()) + " vs " +
                     std::to_string(gold.size()) + ")");
  }
  std::vector<int> p, g;
  for (const auto& s : predictions) p.push_back(index_of(s));
  for (const auto& s : gold) g.push_back(index_of(s));
  return macro_f1(p, g, static_cast<int>(genres.size()));
}

TTestResult paired_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ShapeError("paired samples differ in length");
  if (a.size() < 2) throw ConfigError("paired t-test needs at least two pairs");
  const std::size_t n = a.size();
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = a[i] - b[i];
  const double mean = std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  for (double x : d) ss += (x - mean) * (x - mean);
  const double var = ss / static_cast<double>(n - 1);

  TTestResult r;
  r.df = static_cast<int>(n - 1);
  r.mean_difference = mean;
  // Differences that agree to rounding noise count as zero variance.
  const double scale = std::max(1.0, std::abs(mean));
  if (var <= 1e-24 * scale * scale) {
    if (mean == 0.0) {
      r.t = 0.0;
      r.p = 1.0;
    } else {
      r.t = mean > 0 ? INFINITY : -INFINITY;
      r.p = 0.0;
      r.degenerate = true;
    }
    return r;
  }
  r.t = mean / std::sqrt(var / static_cast<double>(n));
  boost::math::students_t dist(static_cast<double>(r.df));
  r.p = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.t))));
  return r;
}

std::string_view to_string(Condition c) {
  switch (c) {
    case Condition::on_topic: return "on_topic";
    case Condition::off_topic: return "off_topic";
    case Condition::aug_baseline: return "aug_baseline";
    case Condition::aug_adapt: return "aug_adapt";
    case Condition::shuffled: return "shuffled";
    case Condition::synthetic_only: return "synthetic_only";
  }
  return "?";
}

Condition condition_from_string(std::string_view s) {
  for (auto c : {Condition::on_topic, Condition::off_topic, Condition::aug_baseline, Condition::aug_adapt,
                 Condition::shuffled, Condition::synthetic_only}) {
    if (to_string(c) == s) return c;
  }
  throw ConfigError("unknown condition '" + std::string(s) + "'");
}

void ExperimentReport::add(ConditionResult cell) {
  if (!(cell.macro_f1 >= 0.0 && cell.macro_f1 <= 1.0)) throw IntegrityError("macro-F1 outside [0,1]");
  cells_.push_back(std::move(cell));
}

std::map<int, double> ExperimentReport::per_topic_mean(Condition c, const std::string& variant) const {
  std::map<int, std::pair<double, int>> acc;
  for (const auto& cell : cells_) {
    if (cell.condition != c || cell.variant != variant) continue;
    auto& [sum, n] = acc[cell.topic];
    sum += cell.macro_f1;
    ++n;
  }
  std::map<int, double> out;
  for (const auto& [t, sn] : acc) out[t] = sn.first / sn.second;
  return out;
}

ConditionSummary ExperimentReport::summary(Condition c, const std::string& variant) const {
  ConditionSummary s{c, variant, 0.0, 0.0, 0};
  std::vector<double> v;
  for (const auto& cell : cells_) {
    if (cell.condition == c && cell.variant == variant) v.push_back(cell.macro_f1);
  }
  s.cells = static_cast<int>(v.size());
  if (v.empty()) return s;
  s.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return s;
}

std::vector<ConditionSummary> ExperimentReport::summaries() const {
  std::vector<std::pair<Condition, std::string>> keys;
  for (const auto& c : cells_) keys.emplace_back(c.condition, c.variant);
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  std::vector<ConditionSummary> out;
  for (const auto& [c, v] : keys) out.push_back(summary(c, v));
  return out;
}

Comparison ExperimentReport::compare(Condition a, Condition b, const std::string& variant_a,
                                     const std::string& variant_b) const {
  auto ma = per_topic_mean(a, variant_a);
  auto mb = per_topic_mean(b, variant_b);
  std::vector<double> xa, xb;
  for (const auto& [t, v] : ma) {
    auto it = mb.find(t);
    if (it == mb.end()) continue;
    xa.push_back(v);
    xb.push_back(it->second);
  }
  return {a, b, variant_a, variant_b, paired_t_test(xa, xb)};
}

std::vector<ConditionResult> ExperimentReport::sorted_cells() const {
  auto cells = cells_;
  std::stable_sort(cells.begin(), cells.end(), [](const ConditionResult& x, const ConditionResult& y) {
    return std::tie(x.condition, x.variant, x.topic, x.n_train, x.seed) <
           std::tie(y.condition, y.variant, y.topic, y.n_train, y.seed);
  });
  return cells;
}

std::string ExperimentReport::to_csv() const {
  std::ostringstream ss;
  ss << "condition,variant,topic,n_train,seed,macro_f1\n";
  for (const auto& c : sorted_cells()) {
    ss << to_string(c.condition) << ',' << c.variant << ',' << c.topic << ',' << c.n_train << ',' << c.seed << ','
       << std::setprecision(17) << c.macro_f1 << '\n';
  }
  return ss.str();
}

nlohmann::json ExperimentReport::to_json(const std::vector<Comparison>& comparisons) const {
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& c : sorted_cells()) {
    cells.push_back({{"condition", to_string(c.condition)},
                     {"variant", c.variant},
                     {"topic", c.topic},
                     {"n_train", c.n_train},
                     {"seed", c.seed},
                     {"macro_f1", c.macro_f1},
                     {"provenance", c.provenance}});
  }
  nlohmann::json sums = nlohmann::json::array();
  for (const auto& s : summaries()) {
    sums.push_back({{"condition", to_string(s.condition)},
                    {"variant", s.variant},
                    {"mean", s.mean},
                    {"stddev", s.stddev},
                    {"cells", s.cells}});
  }
  nlohmann::json tests = nlohmann::json::array();
  for (const auto& c : comparisons) {
    tests.push_back({{"a", to_string(c.a)},
                     {"variant_a", c.variant_a},
                     {"b", to_string(c.b)},
                     {"variant_b", c.variant_b},
                     {"t", std::isfinite(c.test.t) ? nlohmann::json(c.test.t) : nlohmann::json(c.test.t > 0 ? "inf" : "-inf")},
                     {"df", c.test.df},
                     {"p", c.test.p},
                     {"mean_difference", c.test.mean_difference},
                     {"degenerate", c.test.degenerate}});
  }
  return {{"format", "topicshift.report"}, {"version", 1},     {"metadata", metadata},
          {"summaries", sums},             {"tests", tests},   {"cells", cells}};
}

}  // namespace topicshift
