#include "opiscope/weak_labels.hpp"

#include "opiscope/errors.hpp"
#include "opiscope/util.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>

namespace opiscope {

std::string_view to_string(SentimentLabel label) {
  switch (label) {
    case SentimentLabel::Positive: return "Positive";
    case SentimentLabel::Negative: return "Negative";
    case SentimentLabel::Neutral: return "Neutral";
  }
  return "Neutral";
}

std::optional<SentimentLabel> parse_sentiment(std::string_view token) {
  std::string t = to_lower_copy(token);
  if (t == "positive") return SentimentLabel::Positive;
  if (t == "negative") return SentimentLabel::Negative;
  if (t == "neutral") return SentimentLabel::Neutral;
  return std::nullopt;
}

std::vector<std::string> sentiment_class_names() {
  return {"Positive", "Negative", "Neutral"};
}

const std::array<EmotionLabel, kEmotionCount>& all_emotions() {
  static const std::array<EmotionLabel, kEmotionCount> emotions = {
      EmotionLabel::Joy,  EmotionLabel::Sadness,      EmotionLabel::Anger,
      EmotionLabel::Love, EmotionLabel::Fear,         EmotionLabel::Thankfulness,
      EmotionLabel::Surprise,
  };
  return emotions;
}

std::string_view to_string(EmotionLabel label) {
  switch (label) {
    case EmotionLabel::Joy: return "Joy";
    case EmotionLabel::Sadness: return "Sadness";
    case EmotionLabel::Anger: return "Anger";
    case EmotionLabel::Love: return "Love";
    case EmotionLabel::Fear: return "Fear";
    case EmotionLabel::Thankfulness: return "Thankfulness";
    case EmotionLabel::Surprise: return "Surprise";
  }
  return "Joy";
}

std::optional<EmotionLabel> parse_emotion(std::string_view token) {
  std::string t = to_lower_copy(token);
  for (EmotionLabel emotion : all_emotions()) {
    if (t == to_lower_copy(to_string(emotion))) return emotion;
  }
  return std::nullopt;
}

std::vector<std::string> emotion_class_names() {
  std::vector<std::string> names;
  names.reserve(kEmotionCount);
  for (EmotionLabel emotion : all_emotions()) names.emplace_back(to_string(emotion));
  return names;
}

std::string_view to_string(Provenance provenance) {
  switch (provenance) {
    case Provenance::Weak: return "weak";
    case Provenance::Hashtag: return "hashtag";
    case Provenance::Gold: return "gold";
  }
  return "weak";
}

std::optional<Provenance> parse_provenance(std::string_view token) {
  std::string t = to_lower_copy(token);
  if (t == "weak") return Provenance::Weak;
  if (t == "hashtag") return Provenance::Hashtag;
  if (t == "gold") return Provenance::Gold;
  return std::nullopt;
}

PolarityLexicon PolarityLexicon::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("failed to open " + path.string());
  const std::string file = path.string();

  PolarityLexicon lexicon;
  std::string line;
  std::size_t line_no = 0;
  bool in_negators = false;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view trimmed = trim_view(line);
    if (trimmed.empty() || trimmed.front() == '#') continue;
    if (trimmed == "[negators]") {
      in_negators = true;
      continue;
    }
    if (in_negators) {
      lexicon.negators.insert(to_lower_copy(trimmed));
      continue;
    }
    std::vector<std::string> columns = split(line, '\t');
    if (columns.size() != 2) {
      throw DataError(file, line_no, "expected \"term<TAB>polarity\"");
    }
    std::string term = to_lower_copy(trim_view(columns[0]));
    if (term.empty()) throw DataError(file, line_no, "empty term");
    if (term.find(' ') != std::string::npos) {
      throw DataError(file, line_no, "term \"" + term + "\" must be a single token");
    }
    std::string_view value_text = trim_view(columns[1]);
    double value = 0.0;
    auto result = std::from_chars(value_text.data(), value_text.data() + value_text.size(), value);
    if (result.ec != std::errc{} || result.ptr != value_text.data() + value_text.size()) {
      throw DataError(file, line_no, "polarity is not a number: \"" + std::string(value_text) + "\"");
    }
    if (!(value >= -1.0 && value <= 1.0)) {
      throw DataError(file, line_no, "polarity out of [-1, 1]: " + std::string(value_text));
    }
    if (!lexicon.polarity.emplace(std::move(term), value).second) {
      throw DataError(file, line_no, "duplicate term \"" + std::string(trim_view(columns[0])) + "\"");
    }
  }
  return lexicon;
}

double polarity_score(const TokenSequence& tokens, const PolarityLexicon& lexicon) {
  double sum = 0.0;
  std::size_t matches = 0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    auto it = lexicon.polarity.find(tokens.tokens[i]);
    if (it == lexicon.polarity.end()) continue;
    bool negated = false;
    for (std::size_t back = 1; back <= 2 && back <= i; ++back) {
      if (lexicon.negators.count(tokens.tokens[i - back]) > 0) {
        negated = true;
        break;
      }
    }
    sum += negated ? -it->second : it->second;
    ++matches;
  }
  if (matches == 0) return 0.0;
  return sum / static_cast<double>(matches);
}

double polarity_score(std::string_view text, const PolarityLexicon& lexicon) {
  return polarity_score(tokenize(text), lexicon);
}

SentimentLabel sentiment_label(double score) {
  if (!(score >= -1.0 && score <= 1.0)) {
    throw UsageError("sentiment score out of [-1, 1]: " + format_shortest(score));
  }
  if (score > 0.1) return SentimentLabel::Positive;
  if (score < -0.1) return SentimentLabel::Negative;
  return SentimentLabel::Neutral;
}

HashtagMap HashtagMap::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("failed to open " + path.string());
  const std::string file = path.string();

  HashtagMap map;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view trimmed = trim_view(line);
    if (trimmed.empty() || trimmed.front() == '#') continue;
    std::vector<std::string> columns = split(line, '\t');
    if (columns.size() != 2) {
      throw DataError(file, line_no, "expected \"emotion<TAB>alias|alias|...\"");
    }
    auto emotion = parse_emotion(trim_view(columns[0]));
    if (!emotion) {
      throw DataError(file, line_no,
                      "unknown emotion \"" + std::string(trim_view(columns[0])) + "\"");
    }
    if (map.aliases.count(*emotion) > 0) {
      throw DataError(file, line_no,
                      "duplicate row for emotion \"" + std::string(to_string(*emotion)) + "\"");
    }
    std::unordered_set<std::string> aliases;
    for (auto& part : split(columns[1], '|')) {
      std::string alias = to_lower_copy(trim_view(part));
      if (alias.empty()) throw DataError(file, line_no, "empty hashtag alias");
      for (char c : alias) {
        if (c == '#' || c == ' ' || c == '\t') {
          throw DataError(file, line_no, "hashtag alias \"" + alias + "\" contains '#' or whitespace");
        }
      }
      aliases.insert(std::move(alias));
    }
    if (aliases.empty()) throw DataError(file, line_no, "no aliases listed");
    map.aliases.emplace(*emotion, std::move(aliases));
  }
  return map;
}

std::optional<EmotionAssignment> emotion_label(const Post& post, const HashtagMap& map) {
  std::set<EmotionLabel> found;
  for (const auto& [emotion, aliases] : map.aliases) {
    for (const std::string& tag : post.hashtags) {
      if (aliases.count(tag) > 0) {
        found.insert(emotion);
        break;
      }
    }
  }
  if (found.size() != 1) return std::nullopt;  // no supervision, or conflicting

  const EmotionLabel label = *found.begin();
  const auto& aliases = map.aliases.at(label);
  std::vector<std::string> kept;
  for (const std::string& token : tokenize(post.text).tokens) {
    if (aliases.count(token) == 0) kept.push_back(token);
  }
  return EmotionAssignment{label, join_tokens(kept)};
}

}  // namespace opiscope
