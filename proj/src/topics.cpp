#include "opiscope/topics.hpp"

#include "opiscope/errors.hpp"
#include "opiscope/util.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace opiscope {

std::uint64_t Vocabulary::hash() const {
  if (hash_cached_) return cached_hash_;
  std::string blob;
  blob += std::to_string(n_min) + "," + std::to_string(n_max) + "," +
          std::to_string(document_count) + ";";
  for (std::size_t i = 0; i < terms.size(); ++i) {
    blob += terms[i];
    blob.push_back('\x1f');
    blob += std::to_string(doc_freq[i]);
    blob.push_back('\n');
  }
  cached_hash_ = fnv1a64(blob);
  hash_cached_ = true;
  return cached_hash_;
}

namespace {

void validate_options(const VocabularyOptions& options) {
  if (options.n_min < 1 || options.n_min > options.n_max || options.n_max > 3) {
    throw UsageError("n-gram range must satisfy 1 <= n_min <= n_max <= 3");
  }
  if (options.min_df < 1) throw UsageError("min_df must be >= 1");
}

bool keep_term(const std::string& term, const VocabularyOptions& options) {
  // Stopword filtering applies to unigrams only.
  if (options.stopwords.empty()) return true;
  if (term.find(' ') != std::string::npos) return true;
  return options.stopwords.count(term) == 0;
}

}  // namespace

Vocabulary build_vocabulary(const std::vector<TokenSequence>& documents,
                            const VocabularyOptions& options) {
  validate_options(options);
  if (documents.empty()) throw UsageError("cannot build a vocabulary from an empty corpus");

  // std::map keeps terms sorted, which fixes the column order.
  std::map<std::string, std::size_t> df;
  std::unordered_set<std::string> seen_in_doc;
  for (const TokenSequence& doc : documents) {
    seen_in_doc.clear();
    for_each_ngram(doc.tokens, options.n_min, options.n_max, [&](const std::string& term) {
      if (!keep_term(term, options)) return;
      if (seen_in_doc.insert(term).second) ++df[term];
    });
  }

  Vocabulary vocab;
  vocab.n_min = options.n_min;
  vocab.n_max = options.n_max;
  vocab.document_count = documents.size();
  for (auto& [term, count] : df) {
    if (count < options.min_df) continue;
    vocab.index.emplace(term, vocab.terms.size());
    vocab.terms.push_back(term);
    vocab.doc_freq.push_back(count);
  }
  return vocab;
}

Vocabulary build_vocabulary(const Corpus& corpus, const VocabularyOptions& options) {
  std::vector<TokenSequence> documents;
  documents.reserve(corpus.posts.size());
  for (const Post& post : corpus.posts) documents.push_back(tokenize(post.text));
  return build_vocabulary(documents, options);
}

double idf(std::size_t doc_freq, std::size_t n_docs) {
  return std::log((1.0 + static_cast<double>(n_docs)) / (1.0 + static_cast<double>(doc_freq))) +
         1.0;
}

namespace {

std::size_t count_occurrences(std::string_view term, const std::vector<std::string>& tokens) {
  // Occurrences of the space-joined n-gram as a token window.
  std::vector<std::string> parts = split(term, ' ');
  if (parts.empty() || parts.size() > tokens.size()) return 0;
  std::size_t count = 0;
  for (std::size_t i = 0; i + parts.size() <= tokens.size(); ++i) {
    bool match = true;
    for (std::size_t k = 0; k < parts.size() && match; ++k) {
      match = tokens[i + k] == parts[k];
    }
    if (match) ++count;
  }
  return count;
}

}  // namespace

double tfidf_score(std::string_view term, const TokenSequence& document, const Vocabulary& vocab,
                   std::size_t n_docs) {
  auto it = vocab.index.find(std::string(term));
  if (it == vocab.index.end()) {
    throw UsageError("term \"" + std::string(term) + "\" is not in the vocabulary");
  }
  std::size_t tf = count_occurrences(term, document.tokens);
  if (tf == 0) return 0.0;
  return static_cast<double>(tf) * idf(vocab.doc_freq[it->second], n_docs);
}

std::vector<TermScore> top_terms(const std::vector<TokenSequence>& documents,
                                 const Vocabulary& vocab, std::size_t k) {
  if (k < 1) throw UsageError("top_terms requires k >= 1");

  std::vector<double> scores(vocab.size(), 0.0);
  const std::size_t n_docs = documents.size();
  for (const TokenSequence& doc : documents) {
    for_each_ngram(doc.tokens, vocab.n_min, vocab.n_max, [&](const std::string& term) {
      auto it = vocab.index.find(term);
      if (it == vocab.index.end()) return;
      scores[it->second] += idf(vocab.doc_freq[it->second], n_docs);
    });
  }

  std::vector<std::size_t> order(vocab.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return vocab.terms[a] < vocab.terms[b];
  });

  std::vector<TermScore> top;
  const std::size_t take = std::min(k, order.size());
  top.reserve(take);
  for (std::size_t i = 0; i < take; ++i) {
    top.push_back(TermScore{vocab.terms[order[i]], scores[order[i]]});
  }
  return top;
}

std::vector<TermScore> top_terms(const Corpus& corpus, const Vocabulary& vocab, std::size_t k) {
  std::vector<TokenSequence> documents;
  documents.reserve(corpus.posts.size());
  for (const Post& post : corpus.posts) documents.push_back(tokenize(post.text));
  return top_terms(documents, vocab, k);
}

const std::unordered_set<std::string>& default_stopwords() {
  static const std::unordered_set<std::string> words = {
      "a",     "about", "above",  "after", "again",  "all",   "am",    "an",    "and",   "any",
      "are",   "as",    "at",     "be",    "because", "been",  "before", "being", "below", "between",
      "both",  "but",   "by",     "can",   "could",  "did",   "do",    "does",  "doing", "down",
      "during", "each", "few",    "for",   "from",   "further", "had",  "has",   "have",  "having",
      "he",    "her",   "here",   "hers",  "him",    "his",   "how",   "i",     "if",    "in",
      "into",  "is",    "it",     "its",   "just",   "me",    "more",  "most",  "my",    "no",
      "nor",   "not",   "now",    "of",    "off",    "on",    "once",  "only",  "or",    "other",
      "our",   "ours",  "out",    "over",  "own",    "same",  "she",   "should", "so",   "some",
      "such",  "than",  "that",   "the",   "their",  "theirs", "them", "then",  "there", "these",
      "they",  "this",  "those",  "through", "to",   "too",   "under", "until", "up",    "very",
      "was",   "we",    "were",   "what",  "when",   "where", "which", "while", "who",   "whom",
      "why",   "will",  "with",   "would", "you",    "your",  "yours",
  };
  return words;
}

}  // namespace opiscope
