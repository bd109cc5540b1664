#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "topicshift/util.hpp"

namespace topicshift {

struct NormalizeOptions {
  /// Fold letters to lower case (in addition to removing digits and
  /// punctuation).
  bool lowercase = true;
};

/// Removes Unicode punctuation (P*), symbols (S*), decimal digits (Nd) and
/// non-whitespace control characters; optionally lowercases; collapses
/// whitespace runs to one space and trims. Invalid UTF-8 bytes are dropped.
std::string normalize(std::string_view text, const NormalizeOptions& options = {});

/// Splits normalized text on single spaces.
std::vector<std::string_view> tokenize(std::string_view normalized);

/// Length in code points.
std::size_t char_length(std::string_view utf8);

struct Document {
  std::string id;
  std::string genre;
  std::string raw_text;
  std::string norm_text;
  /// Fields of the input record other than id/genre/text, kept for round-trip.
  nlohmann::ordered_json extra = nlohmann::ordered_json::object();

  static Document make(std::string id, std::string genre, std::string raw_text,
                       const NormalizeOptions& options = {});
};

class Corpus {
 public:
  /// Validates: non-empty, unique ids, non-empty fields, genres within
  /// `declared_genres` when that is given.
  explicit Corpus(std::vector<Document> documents, std::vector<std::string> declared_genres = {});

  const std::vector<Document>& documents() const { return docs_; }
  const std::vector<std::string>& genres() const { return genres_; }
  std::size_t size() const { return docs_.size(); }
  const Document& operator[](std::size_t i) const { return docs_[i]; }

  const Document* find(std::string_view id) const;
  const Document& at(std::string_view id) const;

  auto begin() const { return docs_.begin(); }
  auto end() const { return docs_.end(); }

 private:
  struct Hash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const { return std::hash<std::string_view>{}(s); }
  };

  std::vector<Document> docs_;
  std::vector<std::string> genres_;
  std::unordered_map<std::string, std::size_t, Hash, std::equal_to<>> index_;
};

/// Reads the line-delimited JSON corpus format: one object per line with
/// string fields "id", "genre", "text". Blank lines are skipped.
Corpus read_corpus(std::istream& in, const NormalizeOptions& options = {});
Corpus ingest(const std::filesystem::path& path, const NormalizeOptions& options = {});

std::string document_to_json_line(const Document& doc);
void write_corpus(std::ostream& out, std::span<const Document> docs);
void write_corpus(const std::filesystem::path& path, std::span<const Document> docs);

/// Start offset (in code points) of a window of `width` over a text of
/// `length` code points, uniform over all valid positions.
std::size_t sample_window_offset(std::size_t length, std::size_t width, Rng& rng);

/// Contiguous substring of `text` of min(width, length) code points.
std::string sample_window(std::string_view text, std::size_t width, Rng& rng);
inline std::string sample_window(const Document& doc, std::size_t width, Rng& rng) {
  return sample_window(doc.norm_text, width, rng);
}

class Vocabulary {
 public:
  static constexpr int kNotFound = -1;

  Vocabulary(std::vector<std::string> words, std::vector<std::uint64_t> frequencies,
             std::vector<std::string> stoplist = {});

  int size() const { return static_cast<int>(words_.size()); }
  int index(std::string_view word) const;
  bool contains(std::string_view word) const { return index(word) != kNotFound; }
  const std::string& word(int index) const { return words_.at(index); }
  std::uint64_t frequency(int index) const { return freqs_.at(index); }
  const std::vector<std::string>& words() const { return words_; }
  const std::vector<std::uint64_t>& frequencies() const { return freqs_; }
  const std::vector<std::string>& stoplist() const { return stoplist_; }
  bool is_stopword(std::string_view word) const;

  /// Token ids of the in-vocabulary tokens of normalized text, in order.
  std::vector<int> encode(std::string_view normalized) const;

  /// Stable content hash (hex) over the indexed words in order.
  std::string hash() const;

  nlohmann::json to_json() const;
  static Vocabulary from_json(const nlohmann::json& j);

 private:
  struct Hash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const { return std::hash<std::string_view>{}(s); }
  };

  std::vector<std::string> words_;
  std::vector<std::uint64_t> freqs_;
  std::vector<std::string> stoplist_;
  std::unordered_map<std::string, int, Hash, std::equal_to<>> index_;
  std::set<std::string, std::less<>> stopset_;
};

/// Indexes words occurring at least `min_count` times after dropping the
/// `stop_top_n` most frequent words (frequency ties broken by word). Words
/// are indexed in lexicographic order.
Vocabulary build_vocabulary(const Corpus& corpus, int min_count, int stop_top_n);
Vocabulary build_vocabulary(std::span<const std::string> normalized_texts, int min_count,
                            int stop_top_n);

}  // namespace topicshift
