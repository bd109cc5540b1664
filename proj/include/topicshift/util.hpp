#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace topicshift {

// All randomness in the library flows through this engine. Helpers below
// avoid the std distributions so that streams are identical across
// standard library implementations.
using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t basis = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t v);

inline std::uint64_t mix_seed(std::uint64_t h, std::uint64_t v) {
  return splitmix64(h ^ splitmix64(v + 0x9e3779b97f4a7c15ULL));
}
inline std::uint64_t mix_seed(std::uint64_t h, std::string_view v) {
  return mix_seed(h, fnv1a64(v));
}

/// Expands a root seed into an independent stream seed keyed by `parts`
/// (integers or strings).
template <class... Parts>
std::uint64_t derive_seed(std::uint64_t root, const Parts&... parts) {
  std::uint64_t h = splitmix64(root);
  ((h = mix_seed(h, parts)), ...);
  return h;
}

/// Uniform in [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform integer in [0, n); n must be positive.
std::uint64_t uniform_index(Rng& rng, std::uint64_t n);

template <class T>
void shuffle(std::span<T> items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::size_t j = uniform_index(rng, i);
    using std::swap;
    swap(items[i - 1], items[j]);
  }
}
template <class T>
void shuffle(std::vector<T>& items, Rng& rng) {
  shuffle(std::span<T>(items), rng);
}

/// Draws an index from unnormalized non-negative weights.
std::size_t sample_discrete(std::span<const double> weights, double total, Rng& rng);

/// Writes `contents` to `path` via a temporary sibling and rename.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);
std::string read_file(const std::filesystem::path& path);

/// Library diagnostics go to stderr unless silenced.
void set_quiet(bool quiet);
void log_warning(std::string_view message);

}  // namespace topicshift
