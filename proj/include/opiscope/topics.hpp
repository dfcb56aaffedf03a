#pragma once

#include "opiscope/corpus.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace opiscope {

struct VocabularyOptions {
  int n_min = 1;
  int n_max = 1;
  std::size_t min_df = 1;
  // Applied to unigrams only; longer n-grams keep their stopwords.
  std::unordered_set<std::string> stopwords;
};

struct Vocabulary {
  std::vector<std::string> terms;  // lexicographically sorted n-grams
  std::unordered_map<std::string, std::size_t> index;
  std::vector<std::size_t> doc_freq;  // parallel to terms
  int n_min = 1;
  int n_max = 1;
  std::size_t document_count = 0;  // N of the corpus the vocabulary was built on

  std::size_t size() const { return terms.size(); }
  bool empty() const { return terms.empty(); }
  std::size_t df(std::size_t term_id) const { return doc_freq[term_id]; }
  // Content hash; model files store it to detect vocabulary mismatches.
  // Cached after the first call (vocabularies are immutable once built).
  std::uint64_t hash() const;

 private:
  mutable std::uint64_t cached_hash_ = 0;
  mutable bool hash_cached_ = false;
};

Vocabulary build_vocabulary(const std::vector<TokenSequence>& documents,
                            const VocabularyOptions& options);
Vocabulary build_vocabulary(const Corpus& corpus, const VocabularyOptions& options);

// Smoothed idf: ln((1+N)/(1+df)) + 1. Never zero, so corpus-wide terms
// still rank.
double idf(std::size_t doc_freq, std::size_t n_docs);

// tf(term, doc) * idf(term) with tf the raw occurrence count. Throws if the
// term is not in the vocabulary.
double tfidf_score(std::string_view term, const TokenSequence& document, const Vocabulary& vocab,
                   std::size_t n_docs);

struct TermScore {
  std::string term;
  double score = 0.0;
};

// Corpus-level score(t) = sum of per-document tf-idf. Top k, ties broken
// lexicographically ascending; fewer than k terms returns them all.
std::vector<TermScore> top_terms(const std::vector<TokenSequence>& documents,
                                 const Vocabulary& vocab, std::size_t k);
std::vector<TermScore> top_terms(const Corpus& corpus, const Vocabulary& vocab, std::size_t k);

// Bundled English function words, used by the CLI when no stopword file is
// configured.
const std::unordered_set<std::string>& default_stopwords();

// Calls fn(term) for every space-joined n-gram window, n in [n_min, n_max].
template <typename Fn>
void for_each_ngram(const std::vector<std::string>& tokens, int n_min, int n_max, Fn&& fn) {
  const std::size_t count = tokens.size();
  for (int n = n_min; n <= n_max; ++n) {
    const std::size_t width = static_cast<std::size_t>(n);
    if (width == 0 || width > count) continue;
    for (std::size_t start = 0; start + width <= count; ++start) {
      std::string term = tokens[start];
      for (std::size_t k = 1; k < width; ++k) {
        term.push_back(' ');
        term += tokens[start + k];
      }
      fn(term);
    }
  }
}

}  // namespace opiscope
