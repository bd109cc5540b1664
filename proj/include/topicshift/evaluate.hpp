#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace topicshift {

/// Unweighted mean of per-genre F1. A genre with no true positives scores 0,
/// including one absent from both predictions and gold.
double macro_f1(std::span<const std::string> predictions, std::span<const std::string> gold,
                std::span<const std::string> genres);
double macro_f1(std::span<const int> predictions, std::span<const int> gold, int genre_count);

struct TTestResult {
  double t = 0.0;
  int df = 0;
  double p = 1.0;
  double mean_difference = 0.0;
  /// Differences have zero variance but a nonzero mean: t is infinite and p is
  /// below anything representable, reported as 0.
  bool degenerate = false;
};

/// Two-sided paired t-test on a - b.
TTestResult paired_t_test(std::span<const double> a, std::span<const double> b);

enum class Condition { on_topic, off_topic, aug_baseline, aug_adapt, shuffled, synthetic_only };
std::string_view to_string(Condition c);
Condition condition_from_string(std::string_view s);

struct ConditionResult {
  int topic = 0;
  int n_train = 0;
  Condition condition = Condition::off_topic;
  /// Free-form variant tag for sweeps ("m=10", "1000:3000"); empty otherwise.
  std::string variant;
  double macro_f1 = 0.0;
  std::uint64_t seed = 0;
  nlohmann::json provenance = nlohmann::json::object();
};

struct ConditionSummary {
  Condition condition;
  std::string variant;
  double mean = 0.0;
  double stddev = 0.0;
  int cells = 0;
};

struct Comparison {
  Condition a;
  Condition b;
  std::string variant_a;
  std::string variant_b;
  TTestResult test;
};

/// Cells plus reductions. Per-topic means over seeds are the unit of the
/// paired tests.
class ExperimentReport {
 public:
  void add(ConditionResult cell);
  const std::vector<ConditionResult>& cells() const { return cells_; }

  /// Mean over seeds for each topic, ordered by topic.
  std::map<int, double> per_topic_mean(Condition c, const std::string& variant = {}) const;
  ConditionSummary summary(Condition c, const std::string& variant = {}) const;
  std::vector<ConditionSummary> summaries() const;
  /// Paired over topics present in both series.
  Comparison compare(Condition a, Condition b, const std::string& variant_a = {},
                     const std::string& variant_b = {}) const;

  /// One row per cell, cells sorted by (condition, variant, topic, n, seed).
  std::string to_csv() const;
  nlohmann::json to_json(const std::vector<Comparison>& comparisons = {}) const;

  nlohmann::json metadata = nlohmann::json::object();

 private:
  std::vector<ConditionResult> sorted_cells() const;
  std::vector<ConditionResult> cells_;
};

}  // namespace topicshift
