#include "opiscope/corpus.hpp"

#include "opiscope/errors.hpp"
#include "opiscope/util.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <unordered_set>

namespace opiscope {

namespace {

bool is_word_byte(unsigned char c) { return is_ascii_alnum(static_cast<char>(c)) || c >= 0x80; }

}  // namespace

std::string_view to_string(Source source) {
  switch (source) {
    case Source::Reddit: return "reddit";
    case Source::Twitter: return "twitter";
    case Source::Market: return "market";
    case Source::Synthetic: return "synthetic";
  }
  return "synthetic";
}

std::optional<Source> parse_source(std::string_view token) {
  std::string t = to_lower_copy(token);
  if (t == "reddit") return Source::Reddit;
  if (t == "twitter") return Source::Twitter;
  if (t == "market") return Source::Market;
  if (t == "synthetic") return Source::Synthetic;
  return std::nullopt;
}

TokenSequence tokenize(std::string_view text) {
  TokenSequence out;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    if (!is_word_byte(static_cast<unsigned char>(text[i]))) {
      ++i;
      continue;
    }
    const std::size_t begin = i++;
    while (i < n) {
      unsigned char c = static_cast<unsigned char>(text[i]);
      if (is_word_byte(c)) {
        ++i;
        continue;
      }
      // Keep a single internal '-' or '\'' when an alphanumeric follows.
      if ((c == '-' || c == '\'') && i + 1 < n &&
          is_word_byte(static_cast<unsigned char>(text[i + 1]))) {
        i += 2;
        continue;
      }
      break;
    }
    std::string token;
    token.reserve(i - begin);
    for (std::size_t k = begin; k < i; ++k) token.push_back(ascii_lower(text[k]));
    out.tokens.push_back(std::move(token));
    out.spans.push_back({begin, i});
  }
  return out;
}

std::string join_tokens(const std::vector<std::string>& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

std::vector<std::string> extract_hashtags(std::string_view text) {
  std::vector<std::string> tags;
  std::unordered_set<std::string> seen;
  TokenSequence toks = tokenize(text);
  for (std::size_t i = 0; i < toks.size(); ++i) {
    std::size_t begin = toks.spans[i].begin;
    if (begin == 0 || text[begin - 1] != '#') continue;
    if (seen.insert(toks.tokens[i]).second) tags.push_back(toks.tokens[i]);
  }
  return tags;
}

namespace {

// days since 1970-01-01 for a civil date (Howard Hinnant's algorithm)
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, std::int64_t& y, unsigned& m, unsigned& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = doy - (153 * mp + 2) / 5 + 1;
  m = mp + (mp < 10 ? 3 : -9);
  y += m <= 2;
}

bool is_leap(std::int64_t y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

unsigned days_in_month(std::int64_t y, unsigned m) {
  static const unsigned lengths[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (m == 2 && is_leap(y)) return 29;
  return lengths[m - 1];
}

bool parse_uint(std::string_view s, std::size_t& pos, std::size_t digits, unsigned& out) {
  if (pos + digits > s.size()) return false;
  unsigned value = 0;
  for (std::size_t i = 0; i < digits; ++i) {
    char c = s[pos + i];
    if (!is_ascii_digit(c)) return false;
    value = value * 10 + static_cast<unsigned>(c - '0');
  }
  pos += digits;
  out = value;
  return true;
}

}  // namespace

std::optional<std::int64_t> parse_rfc3339(std::string_view s) {
  std::size_t pos = 0;
  unsigned year = 0, month = 0, day = 0, hour = 0, minute = 0, second = 0;
  if (!parse_uint(s, pos, 4, year)) return std::nullopt;
  if (pos >= s.size() || s[pos++] != '-') return std::nullopt;
  if (!parse_uint(s, pos, 2, month)) return std::nullopt;
  if (pos >= s.size() || s[pos++] != '-') return std::nullopt;
  if (!parse_uint(s, pos, 2, day)) return std::nullopt;
  if (pos >= s.size() || (s[pos] != 'T' && s[pos] != 't' && s[pos] != ' ')) return std::nullopt;
  ++pos;
  if (!parse_uint(s, pos, 2, hour)) return std::nullopt;
  if (pos >= s.size() || s[pos++] != ':') return std::nullopt;
  if (!parse_uint(s, pos, 2, minute)) return std::nullopt;
  if (pos >= s.size() || s[pos++] != ':') return std::nullopt;
  if (!parse_uint(s, pos, 2, second)) return std::nullopt;

  if (month < 1 || month > 12 || day < 1 || day > days_in_month(year, month) || hour > 23 ||
      minute > 59 || second > 60) {
    return std::nullopt;
  }
  if (second == 60) second = 59;  // fold leap seconds

  if (pos < s.size() && s[pos] == '.') {
    ++pos;
    std::size_t frac_digits = 0;
    while (pos < s.size() && is_ascii_digit(s[pos])) {
      ++pos;
      ++frac_digits;
    }
    if (frac_digits == 0) return std::nullopt;
  }

  std::int64_t offset = 0;
  if (pos >= s.size()) return std::nullopt;
  if (s[pos] == 'Z' || s[pos] == 'z') {
    ++pos;
  } else if (s[pos] == '+' || s[pos] == '-') {
    const bool negative = s[pos] == '-';
    ++pos;
    unsigned off_h = 0, off_m = 0;
    if (!parse_uint(s, pos, 2, off_h)) return std::nullopt;
    if (pos >= s.size() || s[pos++] != ':') return std::nullopt;
    if (!parse_uint(s, pos, 2, off_m)) return std::nullopt;
    if (off_h > 23 || off_m > 59) return std::nullopt;
    offset = static_cast<std::int64_t>(off_h) * 3600 + static_cast<std::int64_t>(off_m) * 60;
    if (negative) offset = -offset;
  } else {
    return std::nullopt;
  }
  if (pos != s.size()) return std::nullopt;

  std::int64_t days = days_from_civil(static_cast<std::int64_t>(year), month, day);
  std::int64_t local = days * 86400 + hour * 3600 + minute * 60 + second;
  return local - offset;
}

std::string format_rfc3339_utc(std::int64_t epoch_seconds) {
  std::int64_t days = epoch_seconds / 86400;
  std::int64_t rem = epoch_seconds % 86400;
  if (rem < 0) {
    rem += 86400;
    --days;
  }
  std::int64_t year = 0;
  unsigned month = 0, day = 0;
  civil_from_days(days, year, month, day);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04lld-%02u-%02uT%02lld:%02lld:%02lldZ",
                static_cast<long long>(year), month, day, static_cast<long long>(rem / 3600),
                static_cast<long long>((rem % 3600) / 60), static_cast<long long>(rem % 60));
  return buf;
}

namespace {

using nlohmann::json;

// Lowercases and strips leading '#'; rejects entries that would break the
// hashtag invariants (whitespace, interior '#', empty).
std::string normalize_hashtag(const std::string& raw, const std::string& file, std::size_t line) {
  std::string tag = to_lower_copy(trim_view(raw));
  while (!tag.empty() && tag.front() == '#') tag.erase(tag.begin());
  if (tag.empty()) throw DataError(file, line, "field \"hashtags\": empty hashtag entry");
  for (char c : tag) {
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      throw DataError(file, line, "field \"hashtags\": hashtag \"" + raw + "\" contains whitespace");
    }
    if (c == '#') {
      throw DataError(file, line, "field \"hashtags\": hashtag \"" + raw + "\" contains '#'");
    }
  }
  return tag;
}

std::vector<std::string> merge_hashtags(std::vector<std::string> explicit_tags,
                                        const std::string& text) {
  std::vector<std::string> merged;
  std::unordered_set<std::string> seen;
  for (auto& tag : explicit_tags) {
    if (seen.insert(tag).second) merged.push_back(std::move(tag));
  }
  for (auto& tag : extract_hashtags(text)) {
    if (seen.insert(tag).second) merged.push_back(std::move(tag));
  }
  return merged;
}

struct RawRecord {
  std::size_t line = 0;
  std::string id;
  std::string source;
  std::string collection;
  std::string text;
  std::vector<std::string> hashtags;
  std::string created_at;
  bool has_id = false, has_source = false, has_text = false;
};

Post finish_record(const RawRecord& rec, const std::string& file,
                   std::unordered_set<std::string>& ids) {
  if (!rec.has_id || rec.id.empty()) throw DataError(file, rec.line, "missing field \"id\"");
  if (!rec.has_source || rec.source.empty())
    throw DataError(file, rec.line, "missing field \"source\"");
  if (!rec.has_text) throw DataError(file, rec.line, "missing field \"text\"");
  if (!ids.insert(rec.id).second)
    throw DataError(file, rec.line, "field \"id\": duplicate id \"" + rec.id + "\"");

  Post post;
  post.id = rec.id;
  auto source = parse_source(rec.source);
  if (!source)
    throw DataError(file, rec.line, "field \"source\": unknown source \"" + rec.source + "\"");
  post.source = *source;
  post.collection = rec.collection;
  post.text = rec.text;

  std::vector<std::string> explicit_tags;
  explicit_tags.reserve(rec.hashtags.size());
  for (const auto& raw : rec.hashtags) {
    explicit_tags.push_back(normalize_hashtag(raw, file, rec.line));
  }
  post.hashtags = merge_hashtags(std::move(explicit_tags), post.text);

  if (!rec.created_at.empty()) {
    auto ts = parse_rfc3339(rec.created_at);
    if (!ts) {
      throw DataError(file, rec.line,
                      "field \"created_at\": not an RFC 3339 timestamp: \"" + rec.created_at + "\"");
    }
    post.created_at = *ts;
  }
  return post;
}

Corpus load_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("failed to open " + path.string());
  const std::string file = path.string();

  Corpus corpus;
  corpus.name = path.stem().string();
  std::unordered_set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim_view(line).empty()) continue;
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      throw DataError(file, line_no, std::string("invalid JSON: ") + e.what());
    }
    if (!record.is_object()) throw DataError(file, line_no, "record is not a JSON object");

    RawRecord raw;
    raw.line = line_no;
    auto take_string = [&](const char* key, std::string& out, bool& present) {
      auto it = record.find(key);
      if (it == record.end()) return;
      if (!it->is_string())
        throw DataError(file, line_no, std::string("field \"") + key + "\": expected a string");
      out = it->get<std::string>();
      present = true;
    };
    bool ignored = false;
    take_string("id", raw.id, raw.has_id);
    take_string("source", raw.source, raw.has_source);
    take_string("text", raw.text, raw.has_text);
    take_string("collection", raw.collection, ignored);
    take_string("created_at", raw.created_at, ignored);
    if (auto it = record.find("hashtags"); it != record.end()) {
      if (!it->is_array())
        throw DataError(file, line_no, "field \"hashtags\": expected an array of strings");
      for (const auto& tag : *it) {
        if (!tag.is_string())
          throw DataError(file, line_no, "field \"hashtags\": expected an array of strings");
        raw.hashtags.push_back(tag.get<std::string>());
      }
    }
    corpus.posts.push_back(finish_record(raw, file, ids));
  }
  return corpus;
}

// Minimal RFC 4180 reader: quoted fields may contain commas, doubled quotes
// and newlines. Returns records with the line each one started on.
std::vector<std::pair<std::size_t, std::vector<std::string>>> read_csv(
    const std::filesystem::path& path) {
  std::string content = read_text_file(path);
  std::vector<std::pair<std::size_t, std::vector<std::string>>> records;
  std::vector<std::string> fields;
  std::string field;
  bool in_quotes = false;
  bool record_started = false;
  std::size_t line_no = 1;
  std::size_t record_line = 1;

  auto end_field = [&]() {
    fields.push_back(std::move(field));
    field.clear();
  };
  auto end_record = [&]() {
    if (!record_started && fields.empty() && field.empty()) return;
    end_field();
    records.emplace_back(record_line, std::move(fields));
    fields.clear();
    record_started = false;
  };

  for (std::size_t i = 0; i < content.size(); ++i) {
    char c = content[i];
    if (!record_started && c != '\n' && c != '\r') {
      record_started = true;
      record_line = line_no;
    }
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < content.size() && content[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line_no;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        in_quotes = true;
        break;
      case ',':
        record_started = true;
        end_field();
        break;
      case '\r':
        break;
      case '\n':
        if (record_started) end_record();
        ++line_no;
        break;
      default:
        field.push_back(c);
        break;
    }
  }
  if (in_quotes) throw DataError(path.string(), record_line, "unterminated quoted field");
  if (record_started) end_record();
  return records;
}

Corpus load_csv(const std::filesystem::path& path) {
  const std::string file = path.string();
  auto records = read_csv(path);
  if (records.empty()) {
    Corpus corpus;
    corpus.name = path.stem().string();
    return corpus;
  }

  const auto& header = records.front().second;
  auto column = [&](std::string_view name) -> std::size_t {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (to_lower_copy(trim_view(header[i])) == name) return i;
    }
    return static_cast<std::size_t>(-1);
  };
  const std::size_t col_id = column("id");
  const std::size_t col_source = column("source");
  const std::size_t col_text = column("text");
  const std::size_t col_collection = column("collection");
  const std::size_t col_hashtags = column("hashtags");
  const std::size_t col_created = column("created_at");
  for (auto [col, name] : {std::pair{col_id, "id"}, {col_source, "source"}, {col_text, "text"}}) {
    if (col == static_cast<std::size_t>(-1))
      throw DataError(file, records.front().first, std::string("missing column \"") + name + "\"");
  }

  Corpus corpus;
  corpus.name = path.stem().string();
  std::unordered_set<std::string> ids;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& [line_no, row] = records[r];
    auto cell = [&](std::size_t col) -> std::string {
      if (col == static_cast<std::size_t>(-1) || col >= row.size()) return {};
      return row[col];
    };
    RawRecord raw;
    raw.line = line_no;
    raw.id = cell(col_id);
    raw.has_id = !raw.id.empty();
    raw.source = cell(col_source);
    raw.has_source = !raw.source.empty();
    raw.text = cell(col_text);
    raw.has_text = col_text < row.size();
    raw.collection = cell(col_collection);
    raw.created_at = cell(col_created);
    if (std::string tags = cell(col_hashtags); !tags.empty()) {
      for (auto& part : split(tags, '|')) {
        if (!trim_view(part).empty()) raw.hashtags.push_back(part);
      }
    }
    corpus.posts.push_back(finish_record(raw, file, ids));
  }
  return corpus;
}

}  // namespace

Corpus load_posts(const std::filesystem::path& path, CorpusFormat format) {
  return format == CorpusFormat::Csv ? load_csv(path) : load_jsonl(path);
}

Corpus load_posts(const std::filesystem::path& path) {
  CorpusFormat format =
      to_lower_copy(path.extension().string()) == ".csv" ? CorpusFormat::Csv : CorpusFormat::Jsonl;
  return load_posts(path, format);
}

std::string post_to_jsonl(const Post& post) {
  json record = json::object();
  record["id"] = post.id;
  record["source"] = std::string(to_string(post.source));
  if (!post.collection.empty()) record["collection"] = post.collection;
  record["text"] = post.text;
  if (!post.hashtags.empty()) record["hashtags"] = post.hashtags;
  if (post.created_at) record["created_at"] = format_rfc3339_utc(*post.created_at);
  return record.dump();
}

void write_posts_jsonl(const Corpus& corpus, const std::filesystem::path& path) {
  std::string out;
  for (const Post& post : corpus.posts) {
    out += post_to_jsonl(post);
    out.push_back('\n');
  }
  write_text_file(path, out);
}

}  // namespace opiscope
