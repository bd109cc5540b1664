// Deterministic stand-in for an external model adapter. It speaks the
// line-delimited JSON protocol with canned behaviour:
//   generate  text built from the keywords and a seed-driven word list
//   train     word/genre counts read from the training manifest
//   predict   label with the largest summed word counts
//   echo      returns the request unchanged under "echo"
//   exit      terminates without answering
// Flags: --protocol N advertises another version; --genres a,b,c overrides
// the genre list.

#include <cstdint>
#include <cstring>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

using nlohmann::json;

namespace {

std::vector<std::string> split_words(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

json error(const std::string& code, const std::string& detail) { return {{"error", code}, {"detail", detail}}; }

struct Stub {
  int protocol = 1;
  std::vector<std::string> genres = {"news", "review", "howto", "forum", "legal", "fiction"};
  bool greeted = false;
  std::map<std::string, std::map<std::string, double>> counts;  // word -> genre -> count
  std::vector<std::string> trained_genres;

  json generate(const json& r) const {
    const auto genre = r.at("genre").get<std::string>();
    const auto keywords = r.value("keywords", std::vector<std::string>{});
    const int max_tokens = r.at("max_tokens").get<int>();
    if (max_tokens < 1) return error("bad_request", "max_tokens must be positive");
    std::uint64_t state = mix64(r.at("seed").get<std::uint64_t>());
    static const char* const filler[] = {"Alpha", "beta", "Gamma", "delta", "Größe", "epsilon"};
    std::string text = genre;
    std::size_t next = 0;
    for (int i = 1; i < max_tokens; ++i) {
      state = mix64(state);
      text += ' ';
      if (!keywords.empty() && state % 3 == 0) {
        text += keywords[next++ % keywords.size()];
      } else {
        text += filler[state % 6];
      }
    }
    return {{"text", text}};
  }

  json train(const json& r) {
    std::ifstream in(r.at("train").get<std::string>());
    if (!in) return error("io", "cannot read training manifest");
    counts.clear();
    trained_genres = r.value("genres", std::vector<std::string>{});
    for (std::string line; std::getline(in, line);) {
      if (line.empty()) continue;
      const auto doc = json::parse(line);
      const auto genre = doc.at("genre").get<std::string>();
      for (const auto& w : split_words(doc.at("text").get<std::string>())) counts[w][genre] += 1;
    }
    if (trained_genres.empty()) return error("bad_request", "no genres given");
    return {{"ok", true}};
  }

  json predict(const json& r) const {
    if (trained_genres.empty()) return error("not_trained", "predict before train");
    json labels = json::array();
    for (const auto& t : r.at("texts")) {
      std::map<std::string, double> score;
      for (const auto& w : split_words(t.get<std::string>())) {
        auto it = counts.find(w);
        if (it == counts.end()) continue;
        double total = 0;
        for (const auto& [g, c] : it->second) total += c;
        for (const auto& [g, c] : it->second) score[g] += c / total;
      }
      std::string best = trained_genres.front();
      for (const auto& g : trained_genres) {
        if (score[g] > score[best]) best = g;
      }
      labels.push_back(best);
    }
    return {{"labels", labels}};
  }

  json handle(const json& r) {
    if (!r.is_object() || !r.contains("op") || !r.at("op").is_string()) return error("bad_request", "missing op");
    const auto op = r.at("op").get<std::string>();
    if (op == "handshake") {
      greeted = true;
      return {{"protocol_version", protocol}, {"genres", genres}, {"ops", {"generate", "train", "predict", "echo"}}};
    }
    if (!greeted) return error("handshake_required", op);
    if (op == "echo") return {{"echo", r}};
    if (op == "generate") return generate(r);
    if (op == "train") return train(r);
    if (op == "predict") return predict(r);
    return error("unknown_op", op);
  }
};

}  // namespace

int main(int argc, char** argv) {
  Stub stub;
  for (int i = 1; i + 1 < argc; i += 2) {
    if (std::strcmp(argv[i], "--protocol") == 0) stub.protocol = std::stoi(argv[i + 1]);
    if (std::strcmp(argv[i], "--genres") == 0) {
      stub.genres.clear();
      std::stringstream ss(argv[i + 1]);
      for (std::string g; std::getline(ss, g, ',');) stub.genres.push_back(g);
    }
  }
  std::ios::sync_with_stdio(false);
  for (std::string line; std::getline(std::cin, line);) {
    json response;
    try {
      const auto request = json::parse(line);
      if (request.is_object() && request.value("op", "") == "exit") return 3;
      response = stub.handle(request);
    } catch (const json::exception& e) {
      response = error("malformed_request", e.what());
    }
    std::cout << response.dump() << '\n' << std::flush;
  }
  return 0;
}
