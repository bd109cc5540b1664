#include "topicshift/splits.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "topicshift/error.hpp"

namespace topicshift {

std::uint64_t document_seed(std::uint64_t seed, std::string_view doc_id) {
  return derive_seed(seed, "doc-topics", doc_id);
}

CorpusScores score_corpus(const Corpus& corpus, const TopicModel& model, int fold_in_sweeps, std::uint64_t seed) {
  CorpusScores out;
  out.model_hash = model.hash();
  for (const auto& d : corpus) {
    auto ids = model.vocabulary().encode(d.norm_text);
    if (ids.empty()) {
      out.unscorable.push_back(d.id);
      continue;
    }
    out.scores.emplace(d.id, infer_doc_topics(model, ids, fold_in_sweeps, document_seed(seed, d.id)));
  }
  if (out.scores.empty()) throw ConfigError("no document in the corpus could be scored");
  return out;
}

nlohmann::json SplitSpec::to_json() const {
  return {{"topic", topic}, {"n_train", n_train}, {"n_val", n_val},
          {"n_test", n_test}, {"n_on_val", on_val_count()}, {"seed", seed}};
}

SplitSpec SplitSpec::from_json(const nlohmann::json& j) {
  SplitSpec s;
  s.topic = j.at("topic").get<int>();
  s.n_train = j.at("n_train").get<int>();
  s.n_val = j.at("n_val").get<int>();
  s.n_test = j.at("n_test").get<int>();
  s.n_on_val = j.value("n_on_val", -1);
  s.seed = j.value("seed", std::uint64_t{0});
  return s;
}

std::string_view to_string(Partition p) {
  switch (p) {
    case Partition::on_train: return "on_train";
    case Partition::off_train: return "off_train";
    case Partition::off_val: return "off_val";
    case Partition::on_test: return "on_test";
    case Partition::on_val: return "on_val";
  }
  return "?";
}

std::vector<std::string> TransferSplit::ids(Partition p) const {
  std::vector<std::string> out;
  for (const auto& [genre, list] : parts.at(p)) out.insert(out.end(), list.begin(), list.end());
  return out;
}

std::string TransferSplit::hash() const {
  std::uint64_t h = fnv1a64(spec.to_json().dump());
  h = fnv1a64(model_hash, h);
  for (const auto& [p, lists] : parts) {
    h = fnv1a64(to_string(p), h);
    for (const auto& [g, ids] : lists) {
      h = fnv1a64(g, h);
      for (const auto& id : ids) h = fnv1a64(id + '\n', h);
    }
  }
  return hex64(h);
}

TransferSplit build_transfer_split(const Corpus& corpus, const CorpusScores& scores, const SplitSpec& spec) {
  if (spec.n_train < 1 || spec.n_val < 1 || spec.n_test < 1 || spec.on_val_count() < 0) {
    throw ConfigError("split counts must be at least 1");
  }
  if (scores.scores.empty()) throw ConfigError("no document scores");
  const int K = static_cast<int>(scores.scores.begin()->second.theta.size());
  if (spec.topic < 0 || spec.topic >= K) {
    throw ConfigError("split topic " + std::to_string(spec.topic) + " out of range for K=" + std::to_string(K));
  }

  struct Entry {
    double score;
    const std::string* id;
  };
  std::map<std::string, std::vector<Entry>> by_genre;
  for (const auto& g : corpus.genres()) by_genre[g];
  for (const auto& d : corpus) {
    auto it = scores.scores.find(d.id);
    if (it == scores.scores.end()) continue;
    by_genre[d.genre].push_back({it->second.theta.at(static_cast<std::size_t>(spec.topic)), &d.id});
  }

  TransferSplit split;
  split.spec = spec;
  split.model_hash = scores.model_hash;
  for (Partition p : kAllPartitions) split.parts[p];

  const int need = spec.required_per_genre();
  for (auto& [genre, entries] : by_genre) {
    if (static_cast<int>(entries.size()) < need) {
      throw CapacityError("genre '" + genre + "' has " + std::to_string(entries.size()) +
                          " scorable documents; split needs " + std::to_string(need) + " (short by " +
                          std::to_string(need - static_cast<int>(entries.size())) + ")");
    }
    auto high_first = entries;
    std::sort(high_first.begin(), high_first.end(), [](const Entry& a, const Entry& b) {
      if (a.score != b.score) return a.score > b.score;
      return *a.id < *b.id;
    });
    std::set<std::string_view> taken;
    std::size_t pos = 0;
    auto take_high = [&](Partition p, int n) {
      auto& list = split.parts[p][genre];
      for (int i = 0; i < n; ++i, ++pos) {
        list.push_back(*high_first[pos].id);
        taken.insert(*high_first[pos].id);
      }
    };
    take_high(Partition::on_test, spec.n_test);
    take_high(Partition::on_train, spec.n_train);
    take_high(Partition::on_val, spec.on_val_count());

    auto low_first = entries;
    std::sort(low_first.begin(), low_first.end(), [](const Entry& a, const Entry& b) {
      if (a.score != b.score) return a.score < b.score;
      return *a.id < *b.id;
    });
    std::size_t lpos = 0;
    auto take_low = [&](Partition p, int n) {
      auto& list = split.parts[p][genre];
      while (static_cast<int>(list.size()) < n) {
        const auto& e = low_first[lpos++];
        if (taken.count(*e.id)) continue;
        list.push_back(*e.id);
      }
    };
    take_low(Partition::off_train, spec.n_train);
    take_low(Partition::off_val, spec.n_val);
  }
  return split;
}

void emit_split(const TransferSplit& split, const Corpus& corpus, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  nlohmann::json counts = nlohmann::json::object();
  nlohmann::json files = nlohmann::json::object();
  for (Partition p : kAllPartitions) {
    std::ostringstream ss;
    std::size_t rows = 0;
    nlohmann::json per_genre = nlohmann::json::object();
    for (const auto& [genre, ids] : split[p]) {
      per_genre[genre] = ids.size();
      for (const auto& id : ids) {
        ss << document_to_json_line(corpus.at(id)) << '\n';
        ++rows;
      }
    }
    const std::string name = std::string(to_string(p)) + ".jsonl";
    write_file_atomic(dir / name, ss.str());
    counts[std::string(to_string(p))] = per_genre;
    files[std::string(to_string(p))] = {{"path", name}, {"rows", rows}};
  }
  nlohmann::json manifest = {{"format", "topicshift.split"},
                             {"version", 1},
                             {"spec", split.spec.to_json()},
                             {"seed", split.spec.seed},
                             {"model_hash", split.model_hash},
                             {"split_hash", split.hash()},
                             {"counts", counts},
                             {"files", files}};
  write_file_atomic(dir / "manifest.json", manifest.dump(2) + "\n");
}

TransferSplit load_split(const std::filesystem::path& dir) {
  auto manifest = nlohmann::json::parse(read_file(dir / "manifest.json"));
  TransferSplit split;
  split.spec = SplitSpec::from_json(manifest.at("spec"));
  split.model_hash = manifest.at("model_hash").get<std::string>();
  for (Partition p : kAllPartitions) {
    auto& lists = split.parts[p];
    const auto& entry = manifest.at("files").at(std::string(to_string(p)));
    std::ifstream in(dir / entry.at("path").get<std::string>());
    if (!in) throw Error("missing partition file for " + std::string(to_string(p)));
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      auto rec = nlohmann::json::parse(line, nullptr, false);
      if (rec.is_discarded() || !rec.contains("id") || !rec.contains("genre")) {
        throw ParseError(line_no, "bad record in " + entry.at("path").get<std::string>());
      }
      lists[rec.at("genre").get<std::string>()].push_back(rec.at("id").get<std::string>());
    }
  }
  if (manifest.contains("split_hash") && manifest.at("split_hash").get<std::string>() != split.hash()) {
    throw IntegrityError("split files do not match manifest hash");
  }
  return split;
}

}  // namespace topicshift
