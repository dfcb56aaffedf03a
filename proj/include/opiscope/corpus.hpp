#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace opiscope {

enum class Source { Reddit, Twitter, Market, Synthetic };

std::string_view to_string(Source source);
std::optional<Source> parse_source(std::string_view token);

struct TokenSpan {
  std::size_t begin = 0;  // byte offset into the source text
  std::size_t end = 0;    // one past the last byte
  bool operator==(const TokenSpan&) const = default;
};

struct TokenSequence {
  std::vector<std::string> tokens;  // lowercased
  std::vector<TokenSpan> spans;     // parallel to tokens, strictly increasing

  std::size_t size() const { return tokens.size(); }
  bool empty() const { return tokens.empty(); }
  bool operator==(const TokenSequence&) const = default;
};

// Lowercased maximal runs of letters/digits. A single '-' or '\'' between
// alphanumerics stays inside the token ("u-47", "don't"); every other byte,
// '#' included, separates. Bytes >= 0x80 count as letters, so UTF-8
// sequences pass through intact.
TokenSequence tokenize(std::string_view text);

// Joins tokens with single spaces. Tokenizing the result reproduces tokens.
std::string join_tokens(const std::vector<std::string>& tokens);

struct Post {
  std::string id;
  Source source = Source::Synthetic;
  std::string collection;                  // e.g. subreddit; may be empty
  std::string text;
  std::vector<std::string> hashtags;       // lowercase, no '#', no whitespace
  std::optional<std::int64_t> created_at;  // seconds since Unix epoch, UTC

  bool operator==(const Post&) const = default;
};

struct Corpus {
  std::string name;
  std::vector<Post> posts;
};

enum class CorpusFormat { Jsonl, Csv };

// Tokens of `text` whose preceding byte is '#', first occurrence order.
std::vector<std::string> extract_hashtags(std::string_view text);

Corpus load_posts(const std::filesystem::path& path, CorpusFormat format);
// Format inferred from the extension (.csv -> CSV, anything else -> JSONL).
Corpus load_posts(const std::filesystem::path& path);

void write_posts_jsonl(const Corpus& corpus, const std::filesystem::path& path);
std::string post_to_jsonl(const Post& post);

// RFC 3339 subset: YYYY-MM-DDTHH:MM:SS[.frac][Z|+hh:mm|-hh:mm]. Fractional
// seconds are truncated. Returns nullopt on malformed input.
std::optional<std::int64_t> parse_rfc3339(std::string_view s);
std::string format_rfc3339_utc(std::int64_t epoch_seconds);

}  // namespace opiscope
