#pragma once

#include "opiscope/corpus.hpp"

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace opiscope {

enum class SentimentLabel { Positive, Negative, Neutral };
inline constexpr std::size_t kSentimentCount = 3;
std::string_view to_string(SentimentLabel label);
std::optional<SentimentLabel> parse_sentiment(std::string_view token);
// Class names in declaration order, for classifier class lists.
std::vector<std::string> sentiment_class_names();

enum class EmotionLabel { Joy, Sadness, Anger, Love, Fear, Thankfulness, Surprise };
inline constexpr std::size_t kEmotionCount = 7;
const std::array<EmotionLabel, kEmotionCount>& all_emotions();
std::string_view to_string(EmotionLabel label);
std::optional<EmotionLabel> parse_emotion(std::string_view token);
std::vector<std::string> emotion_class_names();

struct PolarityLexicon {
  std::unordered_map<std::string, double> polarity;  // lowercase term -> [-1, 1]
  std::unordered_set<std::string> negators;

  // TSV rows "term<TAB>polarity"; a "[negators]" section header switches to
  // one negator token per line. '#' starts a comment.
  static PolarityLexicon load(const std::filesystem::path& path);
};

// Mean polarity of matched unigram terms; a negator within the two tokens
// before a match flips that match's sign. No matches -> 0.
double polarity_score(const TokenSequence& tokens, const PolarityLexicon& lexicon);
double polarity_score(std::string_view text, const PolarityLexicon& lexicon);

// Dead band: > +0.1 Positive, < -0.1 Negative, else Neutral.
SentimentLabel sentiment_label(double score);

struct HashtagMap {
  std::map<EmotionLabel, std::unordered_set<std::string>> aliases;

  // TSV rows "emotion<TAB>alias|alias|...". Aliases are single hashtag
  // words (lowercase, no '#', no whitespace).
  static HashtagMap load(const std::filesystem::path& path);
};

struct EmotionAssignment {
  EmotionLabel label = EmotionLabel::Joy;
  std::string cleaned_text;  // space-joined tokens with the label's aliases removed
};

// Distant supervision: exactly one emotion's hashtags present -> that label
// plus the text scrubbed of it; zero or conflicting emotions -> absent.
std::optional<EmotionAssignment> emotion_label(const Post& post, const HashtagMap& map);

enum class Provenance { Weak, Hashtag, Gold };
std::string_view to_string(Provenance provenance);
std::optional<Provenance> parse_provenance(std::string_view token);

struct LabeledExample {
  std::string id;         // originating post id
  TokenSequence tokens;
  std::string label;      // must be one of the dataset's declared classes
  Provenance provenance = Provenance::Weak;
};

}  // namespace opiscope
