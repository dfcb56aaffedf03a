#pragma once

#include "opiscope/topics.hpp"
#include "opiscope/weak_labels.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace opiscope {

struct FeatureVector {
  // (column, tf-idf weight), sorted by column; zero weights never stored.
  std::vector<std::pair<std::size_t, double>> entries;
  std::size_t dimension = 0;
};

// Tf-idf weights over the vocabulary's n-grams; out-of-vocabulary n-grams
// are ignored. n_docs is the document count the idf is relative to.
FeatureVector featurize(const TokenSequence& tokens, const Vocabulary& vocab, std::size_t n_docs);

struct NBModel {
  std::vector<std::string> classes;
  std::vector<double> log_prior;                  // per class
  std::vector<std::vector<double>> log_likelihood;  // class x vocabulary term
  double alpha = 1.0;
  std::uint64_t vocab_hash = 0;
  std::size_t vocab_size = 0;
  std::size_t n_docs = 0;  // training document count
  std::uint64_t seed = 0;
};

// Multinomial naive Bayes on raw n-gram counts with Laplace smoothing:
// likelihood(t|c) = (count(t,c) + alpha) / (sum_t count(t,c) + alpha*|V|).
NBModel train_nb(const std::vector<LabeledExample>& examples,
                 const std::vector<std::string>& classes, const Vocabulary& vocab, double alpha);

struct LRHyperparams {
  double learning_rate = 0.5;
  double l2 = 0.0;
  std::size_t epochs = 100;
  std::uint64_t seed = 0;
};

struct LRModel {
  std::vector<std::string> classes;
  std::size_t dimension = 0;
  std::vector<double> weights;  // classes x dimension, row-major
  std::vector<double> bias;     // per class, unregularized
  LRHyperparams hp;
  std::uint64_t vocab_hash = 0;
  std::size_t n_docs = 0;
  std::vector<double> epoch_losses;  // loss before each update, plus final
};

struct LossGradient {
  double loss = 0.0;
  std::vector<double> grad_weights;  // classes x dimension
  std::vector<double> grad_bias;     // classes
};

// Mean softmax cross-entropy plus (l2/2)*||W||^2 (bias excluded), with its
// analytic gradient. Exposed so tests can check it against finite
// differences.
LossGradient lr_loss_and_gradient(const std::vector<FeatureVector>& features,
                                  const std::vector<std::size_t>& labels, std::size_t n_classes,
                                  std::size_t dimension, const std::vector<double>& weights,
                                  const std::vector<double>& bias, double l2);

// Full-batch gradient descent from zero weights; deterministic given the
// example order and hyperparameters. Throws if the loss goes non-finite,
// naming the epoch.
LRModel train_lr(const std::vector<LabeledExample>& examples,
                 const std::vector<std::string>& classes, const Vocabulary& vocab,
                 const LRHyperparams& hp);

struct Prediction {
  std::string label;
  std::vector<double> probabilities;  // per declared class, sums to 1
};

Prediction predict(const NBModel& model, const TokenSequence& tokens, const Vocabulary& vocab);
Prediction predict(const LRModel& model, const FeatureVector& features);

struct Metrics {
  std::vector<std::string> classes;
  std::vector<std::vector<std::size_t>> confusion;  // gold x predicted
  std::vector<double> precision;  // per class, 0 when the denominator is 0
  std::vector<double> recall;
  std::vector<double> f1;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
  double accuracy = 0.0;
};

Metrics metrics_from_confusion(const std::vector<std::string>& classes,
                               const std::vector<std::vector<std::size_t>>& confusion);

Metrics evaluate(const NBModel& model, const Vocabulary& vocab,
                 const std::vector<LabeledExample>& test);
Metrics evaluate(const LRModel& model, const Vocabulary& vocab,
                 const std::vector<LabeledExample>& test);

struct SplitResult {
  std::vector<LabeledExample> train;
  std::vector<LabeledExample> test;
};

// Seeded shuffle then split, stratified by label: per-class proportions hold
// to within one example and both sides keep at least one example per class.
// Classes with fewer than two examples are an error.
SplitResult stratified_split(const std::vector<LabeledExample>& examples, double train_fraction,
                             std::uint64_t seed);

void save_model(const NBModel& model, const std::filesystem::path& path);
void save_model(const LRModel& model, const std::filesystem::path& path);
NBModel load_nb_model(const std::filesystem::path& path);
LRModel load_lr_model(const std::filesystem::path& path);
// "nb" or "lr" from the file's model tag.
std::string peek_model_kind(const std::filesystem::path& path);

}  // namespace opiscope
