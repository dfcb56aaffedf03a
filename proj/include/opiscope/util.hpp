#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace opiscope {

inline bool is_ascii_digit(char c) { return c >= '0' && c <= '9'; }
inline bool is_ascii_alpha(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}
inline bool is_ascii_alnum(char c) { return is_ascii_digit(c) || is_ascii_alpha(c); }
inline char ascii_lower(char c) {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

std::string to_lower_copy(std::string_view s);
std::string_view trim_view(std::string_view s);

std::vector<std::string> split(std::string_view s, char sep);

// FNV-1a 64-bit. Stable across platforms; used for manifests and model files.
std::uint64_t fnv1a64(std::string_view bytes);
std::uint64_t fnv1a64_file(const std::filesystem::path& path);
std::string hex64(std::uint64_t value);

// Fixed-decimal formatting ('.' separator, locale independent).
std::string format_fixed(double value, int decimals);
// Shortest representation that round-trips through parsing.
std::string format_shortest(double value);

// Deterministic generator (splitmix64 state walk) so sampled artifacts are
// bit-identical across platforms; std::shuffle and <random> distributions
// are implementation-defined and would not be.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next();
  // Uniform in [0, n) via rejection sampling; n must be > 0.
  std::uint64_t below(std::uint64_t n);

  template <typename T>
  void shuffle(std::vector<T>& items) {
    if (items.size() < 2) return;
    for (std::size_t i = items.size() - 1; i > 0; --i) {
      std::size_t j = static_cast<std::size_t>(below(i + 1));
      using std::swap;
      swap(items[i], items[j]);
    }
  }

 private:
  std::uint64_t state_;
};

// Derives an independent stream for a keyed sub-task of a seeded run.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view content);

}  // namespace opiscope
