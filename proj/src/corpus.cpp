#include "topicshift/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include "topicshift/error.hpp"

namespace topicshift {

namespace {

constexpr std::uint32_t kRemoveMask = U_GC_P_MASK | U_GC_S_MASK | U_GC_ND_MASK | U_GC_C_MASK;

bool is_ascii(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char c) { return static_cast<unsigned char>(c) < 0x80; });
}

// Byte offset of each code point start, plus a final entry at s.size().
std::vector<std::size_t> code_point_offsets(std::string_view s) {
  std::vector<std::size_t> offsets;
  offsets.reserve(s.size() + 1);
  const auto* p = reinterpret_cast<const uint8_t*>(s.data());
  const auto n = static_cast<int32_t>(s.size());
  int32_t i = 0;
  while (i < n) {
    offsets.push_back(static_cast<std::size_t>(i));
    UChar32 c;
    U8_NEXT(p, i, n, c);
    (void)c;
  }
  offsets.push_back(s.size());
  return offsets;
}

}  // namespace

std::string normalize(std::string_view text, const NormalizeOptions& options) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  const auto* p = reinterpret_cast<const uint8_t*>(text.data());
  const auto n = static_cast<int32_t>(text.size());
  int32_t i = 0;
  auto keep = [&](UChar32 c) {
    if (pending_space && !out.empty()) out.push_back(' ');
    pending_space = false;
    if (c < 0x80) {
      out.push_back(static_cast<char>(c));
    } else {
      char buf[U8_MAX_LENGTH];
      int32_t len = 0;
      U8_APPEND_UNSAFE(buf, len, c);
      out.append(buf, static_cast<std::size_t>(len));
    }
  };
  while (i < n) {
    UChar32 c;
    U8_NEXT(p, i, n, c);
    if (c < 0) continue;  // ill-formed sequence
    if (c < 0x80) {
      if ((c >= 'a' && c <= 'z')) {
        keep(c);
      } else if (c >= 'A' && c <= 'Z') {
        keep(options.lowercase ? c + ('a' - 'A') : c);
      } else if (c == ' ' || (c >= 0x09 && c <= 0x0d)) {
        pending_space = true;
      }
      // Remaining ASCII is digits, punctuation, symbols or control.
      continue;
    }
    if (u_isUWhiteSpace(c)) {
      pending_space = true;
      continue;
    }
    if (U_GET_GC_MASK(c) & kRemoveMask) continue;
    keep(options.lowercase ? u_tolower(c) : c);
  }
  return out;
}

std::vector<std::string_view> tokenize(std::string_view normalized) {
  std::vector<std::string_view> tokens;
  std::size_t start = 0;
  while (start < normalized.size()) {
    std::size_t end = normalized.find(' ', start);
    if (end == std::string_view::npos) end = normalized.size();
    if (end > start) tokens.push_back(normalized.substr(start, end - start));
    start = end + 1;
  }
  return tokens;
}

std::size_t char_length(std::string_view utf8) {
  if (is_ascii(utf8)) return utf8.size();
  return code_point_offsets(utf8).size() - 1;
}

Document Document::make(std::string id, std::string genre, std::string raw_text,
                         const NormalizeOptions& options) {
  Document d;
  d.id = std::move(id);
  d.genre = std::move(genre);
  d.raw_text = std::move(raw_text);
  d.norm_text = normalize(d.raw_text, options);
  return d;
}

Corpus::Corpus(std::vector<Document> documents, std::vector<std::string> declared_genres)
    : docs_(std::move(documents)) {
  if (docs_.empty()) throw IntegrityError("corpus is empty");
  std::set<std::string> declared(declared_genres.begin(), declared_genres.end());
  std::set<std::string> seen;
  index_.reserve(docs_.size());
  for (std::size_t i = 0; i < docs_.size(); ++i) {
    const auto& d = docs_[i];
    if (d.id.empty()) throw IntegrityError("document " + std::to_string(i) + " has an empty id");
    if (d.genre.empty()) throw IntegrityError("document '" + d.id + "' has an empty genre");
    if (!declared.empty() && !declared.count(d.genre)) {
      throw IntegrityError("document '" + d.id + "' has undeclared genre '" + d.genre + "'");
    }
    if (!index_.emplace(d.id, i).second) throw IntegrityError("duplicate document id '" + d.id + "'");
    seen.insert(d.genre);
  }
  const auto& all = declared.empty() ? seen : declared;
  genres_.assign(all.begin(), all.end());
}

const Document* Corpus::find(std::string_view id) const {
  auto it = index_.find(id);
  return it == index_.end() ? nullptr : &docs_[it->second];
}

const Document& Corpus::at(std::string_view id) const {
  if (const auto* d = find(id)) return *d;
  throw IntegrityError("unknown document id '" + std::string(id) + "'");
}

Corpus read_corpus(std::istream& in, const NormalizeOptions& options) {
  std::vector<Document> docs;
  std::set<std::string, std::less<>> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    nlohmann::ordered_json rec;
    try {
      rec = nlohmann::ordered_json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(line_no, std::string("invalid JSON: ") + e.what());
    }
    if (!rec.is_object()) throw ParseError(line_no, "record is not a JSON object");
    auto field = [&](const char* name) -> std::string {
      auto it = rec.find(name);
      if (it == rec.end() || !it->is_string()) {
        throw ParseError(line_no, std::string("missing string field \"") + name + "\"");
      }
      auto value = it->get<std::string>();
      if (value.empty()) throw ParseError(line_no, std::string("empty field \"") + name + "\"");
      return value;
    };
    Document d = Document::make(field("id"), field("genre"), field("text"), options);
    for (auto it = rec.begin(); it != rec.end(); ++it) {
      if (it.key() != "id" && it.key() != "genre" && it.key() != "text") d.extra[it.key()] = it.value();
    }
    if (!ids.insert(d.id).second) {
      throw IntegrityError("line " + std::to_string(line_no) + ": duplicate document id '" + d.id + "'");
    }
    docs.push_back(std::move(d));
  }
  return Corpus(std::move(docs));
}

Corpus ingest(const std::filesystem::path& path, const NormalizeOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open corpus file " + path.string());
  return read_corpus(in, options);
}

std::string document_to_json_line(const Document& doc) {
  nlohmann::ordered_json rec;
  rec["id"] = doc.id;
  rec["genre"] = doc.genre;
  rec["text"] = doc.raw_text;
  for (auto it = doc.extra.begin(); it != doc.extra.end(); ++it) rec[it.key()] = it.value();
  return rec.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

void write_corpus(std::ostream& out, std::span<const Document> docs) {
  for (const auto& d : docs) out << document_to_json_line(d) << '\n';
}

void write_corpus(const std::filesystem::path& path, std::span<const Document> docs) {
  std::ostringstream ss;
  write_corpus(ss, docs);
  write_file_atomic(path, ss.str());
}

std::size_t sample_window_offset(std::size_t length, std::size_t width, Rng& rng) {
  if (width == 0) throw ConfigError("window width must be at least 1");
  if (length <= width) return 0;
  return static_cast<std::size_t>(uniform_index(rng, length - width + 1));
}

std::string sample_window(std::string_view text, std::size_t width, Rng& rng) {
  if (is_ascii(text)) {
    std::size_t start = sample_window_offset(text.size(), width, rng);
    return std::string(text.substr(start, width));
  }
  auto offsets = code_point_offsets(text);
  const std::size_t length = offsets.size() - 1;
  std::size_t start = sample_window_offset(length, width, rng);
  std::size_t stop = std::min(length, start + width);
  return std::string(text.substr(offsets[start], offsets[stop] - offsets[start]));
}

Vocabulary::Vocabulary(std::vector<std::string> words, std::vector<std::uint64_t> frequencies,
                       std::vector<std::string> stoplist)
    : words_(std::move(words)), freqs_(std::move(frequencies)), stoplist_(std::move(stoplist)) {
  if (freqs_.size() != words_.size()) throw ShapeError("vocabulary word/frequency length mismatch");
  index_.reserve(words_.size());
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if (words_[i].empty()) throw IntegrityError("empty word in vocabulary");
    if (!index_.emplace(words_[i], static_cast<int>(i)).second) {
      throw IntegrityError("duplicate vocabulary word '" + words_[i] + "'");
    }
  }
  for (const auto& s : stoplist_) {
    if (index_.count(s)) throw IntegrityError("stopword '" + s + "' is also indexed");
    stopset_.insert(s);
  }
}

int Vocabulary::index(std::string_view word) const {
  auto it = index_.find(word);
  return it == index_.end() ? kNotFound : it->second;
}

bool Vocabulary::is_stopword(std::string_view word) const { return stopset_.count(word) > 0; }

std::vector<int> Vocabulary::encode(std::string_view normalized) const {
  std::vector<int> ids;
  for (auto tok : tokenize(normalized)) {
    int id = index(tok);
    if (id != kNotFound) ids.push_back(id);
  }
  return ids;
}

std::string Vocabulary::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& w : words_) {
    h = fnv1a64(w, h);
    h = fnv1a64(std::string_view("\0", 1), h);
  }
  return hex64(h);
}

nlohmann::json Vocabulary::to_json() const {
  return {{"words", words_}, {"frequencies", freqs_}, {"stoplist", stoplist_}};
}

Vocabulary Vocabulary::from_json(const nlohmann::json& j) {
  return Vocabulary(j.at("words").get<std::vector<std::string>>(),
                    j.at("frequencies").get<std::vector<std::uint64_t>>(),
                    j.value("stoplist", std::vector<std::string>{}));
}

Vocabulary build_vocabulary(std::span<const std::string> normalized_texts, int min_count,
                            int stop_top_n) {
  if (min_count < 1) throw ConfigError("min_count must be at least 1");
  if (stop_top_n < 0) throw ConfigError("stop_top_n must be non-negative");
  std::map<std::string, std::uint64_t, std::less<>> counts;
  for (const auto& text : normalized_texts) {
    for (auto tok : tokenize(text)) {
      auto it = counts.find(tok);
      if (it == counts.end()) {
        counts.emplace(std::string(tok), 1);
      } else {
        ++it->second;
      }
    }
  }
  std::vector<std::pair<std::string, std::uint64_t>> by_freq(counts.begin(), counts.end());
  std::stable_sort(by_freq.begin(), by_freq.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> stoplist;
  const std::size_t n_stop = std::min<std::size_t>(by_freq.size(), static_cast<std::size_t>(stop_top_n));
  for (std::size_t i = 0; i < n_stop; ++i) stoplist.push_back(by_freq[i].first);
  std::set<std::string> stopset(stoplist.begin(), stoplist.end());

  std::vector<std::string> words;
  std::vector<std::uint64_t> freqs;
  for (const auto& [w, c] : counts) {
    if (c >= static_cast<std::uint64_t>(min_count) && !stopset.count(w)) {
      words.push_back(w);
      freqs.push_back(c);
    }
  }
  if (words.empty()) throw ConfigError("vocabulary is empty after min_count/stoplist filtering");
  return Vocabulary(std::move(words), std::move(freqs), std::move(stoplist));
}

Vocabulary build_vocabulary(const Corpus& corpus, int min_count, int stop_top_n) {
  std::vector<std::string> texts;
  texts.reserve(corpus.size());
  for (const auto& d : corpus) texts.push_back(d.norm_text);
  return build_vocabulary(texts, min_count, stop_top_n);
}

}  // namespace topicshift
