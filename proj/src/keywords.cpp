#include "topicshift/keywords.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "topicshift/error.hpp"

namespace topicshift {

nlohmann::json KeywordSequence::to_json() const { return {{"doc_id", source_doc}, {"tokens", tokens}}; }

KeywordSequence KeywordSequence::from_json(const nlohmann::json& j) {
  KeywordSequence k;
  k.source_doc = j.at("doc_id").get<std::string>();
  k.tokens = j.at("tokens").get<std::vector<std::string>>();
  std::vector<std::string> distinct = k.tokens;
  std::sort(distinct.begin(), distinct.end());
  k.distinct_count = static_cast<int>(std::unique(distinct.begin(), distinct.end()) - distinct.begin());
  return k;
}

namespace {

double topical_weight(int w, const TopicModel& model, const DocTopicScores& theta) {
  double s = 0.0;
  for (int t = 0; t < model.topics(); ++t) s += theta.theta[static_cast<std::size_t>(t)] * model.prob(w, t);
  return s;
}

}  // namespace

double score_word(std::string_view word, const Document& doc, const DocTopicScores& theta, const TopicModel& model) {
  const int w = model.vocabulary().index(word);
  if (w == Vocabulary::kNotFound) return 0.0;
  int count = 0;
  for (auto tok : tokenize(doc.norm_text)) count += (tok == word);
  return count * topical_weight(w, model, theta);
}

std::vector<int> select_keywords(std::span<const int> word_ids, const TopicModel& model, const DocTopicScores& theta,
                                 int m) {
  if (m < 1) throw ConfigError("keyword count must be at least 1");
  if (static_cast<int>(theta.theta.size()) != model.topics()) throw ShapeError("theta length differs from K");
  std::map<int, int> counts;
  for (int w : word_ids) ++counts[w];
  std::vector<std::pair<double, int>> scored;
  scored.reserve(counts.size());
  for (auto [w, c] : counts) scored.emplace_back(c * topical_weight(w, model, theta), w);
  std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  const std::size_t keep = std::min<std::size_t>(scored.size(), static_cast<std::size_t>(m));
  std::vector<int> out;
  out.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) out.push_back(scored[i].second);
  return out;
}

KeywordSequence extract_keywords(const Document& doc, const TopicModel& model, const DocTopicScores& theta, int m) {
  const auto ids = model.vocabulary().encode(doc.norm_text);
  if (ids.empty()) throw EmptyDocumentError(doc.id, "document '" + doc.id + "' has no in-vocabulary tokens");
  const auto chosen = select_keywords(ids, model, theta, m);
  std::vector<char> keep(static_cast<std::size_t>(model.vocab_size()), 0);
  for (int w : chosen) keep[static_cast<std::size_t>(w)] = 1;
  KeywordSequence seq;
  seq.source_doc = doc.id;
  seq.distinct_count = static_cast<int>(chosen.size());
  for (int w : ids) {
    if (keep[static_cast<std::size_t>(w)]) seq.tokens.push_back(model.vocabulary().word(w));
  }
  return seq;
}

void write_keywords(const std::filesystem::path& path, std::span<const KeywordSequence> sequences) {
  std::ostringstream ss;
  for (const auto& s : sequences) ss << s.to_json().dump() << '\n';
  write_file_atomic(path, ss.str());
}

std::vector<KeywordSequence> read_keywords(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open keyword file " + path.string());
  std::vector<KeywordSequence> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      out.push_back(KeywordSequence::from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(line_no, e.what());
    }
  }
  return out;
}

}  // namespace topicshift
