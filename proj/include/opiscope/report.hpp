#pragma once

#include "opiscope/corpus.hpp"
#include "opiscope/ontology.hpp"
#include "opiscope/weak_labels.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

namespace opiscope {

enum class CategoryMode {
  Multi,         // a post counts toward every category it mentions
  FirstMention,  // only the category of the first mention
};

struct CategorizedCorpus {
  const Corpus* corpus = nullptr;
  // Post indices per category, in corpus order.
  std::map<DrugCategory, std::vector<std::size_t>> members;
};

CategorizedCorpus categorize_corpus(const Corpus& corpus, const Ontology& ontology,
                                    CategoryMode mode);

struct CategorySample {
  std::map<DrugCategory, std::vector<std::size_t>> picks;  // post indices
  std::vector<std::string> warnings;  // categories clamped below n
};

// Uniform sample without replacement of min(n, available) posts per
// category; deterministic for a given corpus order and seed.
CategorySample sample_per_category(const CategorizedCorpus& categorized, std::size_t n,
                                   std::uint64_t seed);

struct SentimentReportRow {
  DrugCategory category = DrugCategory::Heroin;
  std::size_t positive = 0;
  std::size_t negative = 0;
  std::size_t neutral = 0;
  std::size_t sample_size = 0;  // always positive + negative + neutral
};

// One row per declared category, in declaration order. Sampled posts missing
// from `labels` are an error naming the post id.
std::vector<SentimentReportRow> sentiment_table(
    const CategorizedCorpus& categorized, const CategorySample& sample,
    const std::unordered_map<std::string, SentimentLabel>& labels);

struct EmotionReportRow {
  DrugCategory category = DrugCategory::Heroin;
  std::array<std::size_t, kEmotionCount> distribution{};  // emotion declaration order
  std::vector<EmotionLabel> top3;  // count descending, ties by declaration order
};

// Rows in the histogram map's category order (declaration order). k caps the
// top list; all-zero histograms rank nothing.
std::vector<EmotionReportRow> top_emotions(
    const std::map<DrugCategory, std::array<std::size_t, kEmotionCount>>& histograms,
    std::size_t k = 3);

// Grouped bar chart, one group per row, seven bars per group in emotion
// declaration order, with axes and a legend. Output bytes are a pure
// function of the rows.
void emit_chart(const std::vector<EmotionReportRow>& rows, const std::filesystem::path& path);
std::string render_chart_svg(const std::vector<EmotionReportRow>& rows);

}  // namespace opiscope
