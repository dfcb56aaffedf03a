#include "opiscope/report.hpp"

#include "opiscope/errors.hpp"
#include "opiscope/recognizer.hpp"
#include "opiscope/util.hpp"

#include <algorithm>
#include <numeric>

namespace opiscope {

CategorizedCorpus categorize_corpus(const Corpus& corpus, const Ontology& ontology,
                                    CategoryMode mode) {
  CategorizedCorpus out;
  out.corpus = &corpus;
  for (std::size_t i = 0; i < corpus.posts.size(); ++i) {
    if (mode == CategoryMode::Multi) {
      for (DrugCategory category : categorize(corpus.posts[i], ontology)) {
        out.members[category].push_back(i);
      }
    } else {
      auto mentions = recognize(corpus.posts[i].text, ontology);
      if (!mentions.empty()) out.members[mentions.front().category].push_back(i);
    }
  }
  return out;
}

CategorySample sample_per_category(const CategorizedCorpus& categorized, std::size_t n,
                                   std::uint64_t seed) {
  if (n < 1) throw UsageError("sample size must be >= 1");
  CategorySample sample;
  std::size_t category_stream = 0;
  for (DrugCategory category : all_drug_categories()) {
    ++category_stream;
    auto it = categorized.members.find(category);
    if (it == categorized.members.end()) continue;
    const auto& pool = it->second;

    std::vector<std::size_t> picks;
    if (pool.size() <= n) {
      picks = pool;
      if (pool.size() < n) {
        sample.warnings.push_back("category \"" + std::string(to_string(category)) + "\" has only " +
                                  std::to_string(pool.size()) + " posts, requested " +
                                  std::to_string(n));
      }
    } else {
      // Partial Fisher-Yates: the first n slots end up a uniform sample
      // without replacement.
      std::vector<std::size_t> order(pool.size());
      std::iota(order.begin(), order.end(), 0);
      Rng rng(mix_seed(seed, category_stream));
      for (std::size_t i = 0; i < n; ++i) {
        std::size_t j = i + static_cast<std::size_t>(rng.below(order.size() - i));
        std::swap(order[i], order[j]);
        picks.push_back(pool[order[i]]);
      }
    }
    sample.picks.emplace(category, std::move(picks));
  }
  return sample;
}

std::vector<SentimentReportRow> sentiment_table(
    const CategorizedCorpus& categorized, const CategorySample& sample,
    const std::unordered_map<std::string, SentimentLabel>& labels) {
  std::vector<SentimentReportRow> rows;
  rows.reserve(kDrugCategoryCount);
  for (DrugCategory category : all_drug_categories()) {
    SentimentReportRow row;
    row.category = category;
    if (auto it = sample.picks.find(category); it != sample.picks.end()) {
      for (std::size_t post_index : it->second) {
        const Post& post = categorized.corpus->posts[post_index];
        auto label_it = labels.find(post.id);
        if (label_it == labels.end()) {
          throw DataError("post \"" + post.id + "\" has no sentiment label");
        }
        switch (label_it->second) {
          case SentimentLabel::Positive: ++row.positive; break;
          case SentimentLabel::Negative: ++row.negative; break;
          case SentimentLabel::Neutral: ++row.neutral; break;
        }
      }
    }
    row.sample_size = row.positive + row.negative + row.neutral;
    rows.push_back(row);
  }
  return rows;
}

std::vector<EmotionReportRow> top_emotions(
    const std::map<DrugCategory, std::array<std::size_t, kEmotionCount>>& histograms,
    std::size_t k) {
  if (k < 1) throw UsageError("top_emotions requires k >= 1");
  std::vector<EmotionReportRow> rows;
  rows.reserve(histograms.size());
  for (const auto& [category, histogram] : histograms) {
    EmotionReportRow row;
    row.category = category;
    row.distribution = histogram;

    std::vector<std::size_t> order(kEmotionCount);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (histogram[a] != histogram[b]) return histogram[a] > histogram[b];
      return a < b;  // ties by emotion declaration order
    });
    for (std::size_t i = 0; i < std::min(k, order.size()); ++i) {
      if (histogram[order[i]] == 0) break;  // no evidence, no ranking
      row.top3.push_back(all_emotions()[order[i]]);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

const std::array<std::string_view, kEmotionCount> kEmotionColors = {
    "#f2c14e",  // Joy
    "#4e79a7",  // Sadness
    "#e15759",  // Anger
    "#d37295",  // Love
    "#59a14f",  // Fear
    "#9c755f",  // Thankfulness
    "#76b7b2",  // Surprise
};

std::string xml_escape(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c); break;
    }
  }
  return out;
}

std::string num(double value) { return format_fixed(value, 2); }

}  // namespace

std::string render_chart_svg(const std::vector<EmotionReportRow>& rows) {
  if (rows.empty()) throw UsageError("chart needs at least one category row");

  constexpr double bar_w = 16.0;
  constexpr double bar_gap = 2.0;
  constexpr double group_gap = 28.0;
  constexpr double margin_left = 56.0;
  constexpr double margin_top = 24.0;
  constexpr double plot_h = 220.0;
  constexpr double label_h = 44.0;
  constexpr double legend_h = 26.0;

  const double group_w = kEmotionCount * bar_w + (kEmotionCount - 1) * bar_gap;
  const double plot_w = rows.size() * group_w + (rows.size() + 1) * group_gap;
  const double width = margin_left + plot_w + 16.0;
  const double height = margin_top + plot_h + label_h + legend_h;
  const double base_y = margin_top + plot_h;

  std::size_t max_count = 1;
  for (const auto& row : rows) {
    for (std::size_t count : row.distribution) max_count = std::max(max_count, count);
  }

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width) + "\" height=\"" +
         num(height) + "\" viewBox=\"0 0 " + num(width) + " " + num(height) + "\">\n";
  svg += "<rect x=\"0\" y=\"0\" width=\"" + num(width) + "\" height=\"" + num(height) +
         "\" fill=\"#ffffff\"/>\n";

  // y axis with a top tick at the maximum count
  svg += "<line x1=\"" + num(margin_left) + "\" y1=\"" + num(margin_top) + "\" x2=\"" +
         num(margin_left) + "\" y2=\"" + num(base_y) + "\" stroke=\"#333333\"/>\n";
  svg += "<line x1=\"" + num(margin_left) + "\" y1=\"" + num(base_y) + "\" x2=\"" +
         num(margin_left + plot_w) + "\" y2=\"" + num(base_y) + "\" stroke=\"#333333\"/>\n";
  svg += "<text x=\"" + num(margin_left - 6.0) + "\" y=\"" + num(base_y + 4.0) +
         "\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"end\">0</text>\n";
  svg += "<text x=\"" + num(margin_left - 6.0) + "\" y=\"" + num(margin_top + 4.0) +
         "\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"end\">" +
         std::to_string(max_count) + "</text>\n";
  svg += "<text x=\"12\" y=\"" + num(margin_top + plot_h / 2.0) +
         "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\" transform=\"rotate(-90 12 " +
         num(margin_top + plot_h / 2.0) + ")\">posts</text>\n";

  double x = margin_left + group_gap;
  for (const auto& row : rows) {
    for (std::size_t e = 0; e < kEmotionCount; ++e) {
      const double h = plot_h * static_cast<double>(row.distribution[e]) /
                       static_cast<double>(max_count);
      const double bx = x + e * (bar_w + bar_gap);
      svg += "<rect class=\"bar\" x=\"" + num(bx) + "\" y=\"" + num(base_y - h) + "\" width=\"" +
             num(bar_w) + "\" height=\"" + num(h) + "\" fill=\"" +
             std::string(kEmotionColors[e]) + "\"><title>" +
             xml_escape(to_string(row.category)) + " / " +
             xml_escape(to_string(all_emotions()[e])) + ": " +
             std::to_string(row.distribution[e]) + "</title></rect>\n";
    }
    svg += "<text x=\"" + num(x + group_w / 2.0) + "\" y=\"" + num(base_y + 16.0) +
           "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">" +
           xml_escape(to_string(row.category)) + "</text>\n";
    x += group_w + group_gap;
  }

  // legend, one swatch per emotion
  double lx = margin_left;
  const double ly = base_y + label_h;
  for (std::size_t e = 0; e < kEmotionCount; ++e) {
    svg += "<rect class=\"legend-swatch\" x=\"" + num(lx) + "\" y=\"" + num(ly - 9.0) +
           "\" width=\"10\" height=\"10\" fill=\"" + std::string(kEmotionColors[e]) + "\"/>\n";
    std::string name(to_string(all_emotions()[e]));
    svg += "<text x=\"" + num(lx + 14.0) + "\" y=\"" + num(ly) +
           "\" font-family=\"sans-serif\" font-size=\"10\">" + xml_escape(name) + "</text>\n";
    lx += 14.0 + 7.0 * static_cast<double>(name.size()) + 16.0;
  }

  svg += "</svg>\n";
  return svg;
}

void emit_chart(const std::vector<EmotionReportRow>& rows, const std::filesystem::path& path) {
  write_text_file(path, render_chart_svg(rows));
}

}  // namespace opiscope
