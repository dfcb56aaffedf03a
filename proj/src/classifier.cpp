#include "opiscope/classifier.hpp"

#include "opiscope/errors.hpp"
#include "opiscope/util.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

namespace opiscope {

namespace {

using nlohmann::json;

std::unordered_map<std::string, std::size_t> class_index(const std::vector<std::string>& classes) {
  if (classes.empty()) throw UsageError("empty class list");
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < classes.size(); ++i) {
    if (!index.emplace(classes[i], i).second) {
      throw UsageError("duplicate class \"" + classes[i] + "\"");
    }
  }
  return index;
}

std::size_t class_of(const std::unordered_map<std::string, std::size_t>& index,
                     const LabeledExample& example) {
  auto it = index.find(example.label);
  if (it == index.end()) {
    throw DataError("example \"" + example.id + "\" has undeclared class \"" + example.label +
                    "\"");
  }
  return it->second;
}

// Raw counts of vocabulary n-grams in the token sequence.
std::map<std::size_t, std::size_t> vocab_counts(const TokenSequence& tokens,
                                                const Vocabulary& vocab) {
  std::map<std::size_t, std::size_t> counts;
  for_each_ngram(tokens.tokens, vocab.n_min, vocab.n_max, [&](const std::string& term) {
    auto it = vocab.index.find(term);
    if (it != vocab.index.end()) ++counts[it->second];
  });
  return counts;
}

void softmax_in_place(std::vector<double>& logits) {
  double max_logit = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double& v : logits) {
    v = std::exp(v - max_logit);
    sum += v;
  }
  for (double& v : logits) v /= sum;
}

std::size_t argmax_first(const std::vector<double>& values) {
  // Ties go to the earlier declared class.
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

}  // namespace

FeatureVector featurize(const TokenSequence& tokens, const Vocabulary& vocab,
                        std::size_t n_docs) {
  if (vocab.empty()) throw UsageError("cannot featurize against an empty vocabulary");
  FeatureVector features;
  features.dimension = vocab.size();
  for (const auto& [column, count] : vocab_counts(tokens, vocab)) {
    features.entries.emplace_back(
        column, static_cast<double>(count) * idf(vocab.doc_freq[column], n_docs));
  }
  return features;
}

NBModel train_nb(const std::vector<LabeledExample>& examples,
                 const std::vector<std::string>& classes, const Vocabulary& vocab, double alpha) {
  if (!(alpha > 0.0)) throw UsageError("naive Bayes smoothing alpha must be > 0");
  if (vocab.empty()) throw UsageError("cannot train on an empty vocabulary");
  auto index = class_index(classes);

  const std::size_t n_classes = classes.size();
  const std::size_t n_terms = vocab.size();
  std::vector<std::size_t> class_count(n_classes, 0);
  std::vector<std::vector<std::size_t>> term_count(n_classes,
                                                   std::vector<std::size_t>(n_terms, 0));
  std::vector<std::size_t> total_count(n_classes, 0);

  for (const LabeledExample& example : examples) {
    std::size_t c = class_of(index, example);
    ++class_count[c];
    for (const auto& [column, count] : vocab_counts(example.tokens, vocab)) {
      term_count[c][column] += count;
      total_count[c] += count;
    }
  }
  for (std::size_t c = 0; c < n_classes; ++c) {
    if (class_count[c] == 0) {
      throw UsageError("class \"" + classes[c] + "\" has no training examples");
    }
  }

  NBModel model;
  model.classes = classes;
  model.alpha = alpha;
  model.vocab_hash = vocab.hash();
  model.vocab_size = n_terms;
  model.n_docs = examples.size();
  model.log_prior.resize(n_classes);
  model.log_likelihood.assign(n_classes, std::vector<double>(n_terms));
  const double total = static_cast<double>(examples.size());
  for (std::size_t c = 0; c < n_classes; ++c) {
    model.log_prior[c] = std::log(static_cast<double>(class_count[c]) / total);
    const double denom =
        static_cast<double>(total_count[c]) + alpha * static_cast<double>(n_terms);
    for (std::size_t t = 0; t < n_terms; ++t) {
      model.log_likelihood[c][t] =
          std::log((static_cast<double>(term_count[c][t]) + alpha) / denom);
    }
  }
  return model;
}

LossGradient lr_loss_and_gradient(const std::vector<FeatureVector>& features,
                                  const std::vector<std::size_t>& labels, std::size_t n_classes,
                                  std::size_t dimension, const std::vector<double>& weights,
                                  const std::vector<double>& bias, double l2) {
  if (features.size() != labels.size()) throw UsageError("features/labels size mismatch");
  if (features.empty()) throw UsageError("empty training batch");

  LossGradient out;
  out.grad_weights.assign(n_classes * dimension, 0.0);
  out.grad_bias.assign(n_classes, 0.0);

  const double inv_m = 1.0 / static_cast<double>(features.size());
  std::vector<double> logits(n_classes);
  double loss = 0.0;
  for (std::size_t i = 0; i < features.size(); ++i) {
    const FeatureVector& x = features[i];
    if (x.dimension != dimension) throw UsageError("feature dimension mismatch");
    for (std::size_t c = 0; c < n_classes; ++c) {
      double z = bias[c];
      const double* row = weights.data() + c * dimension;
      for (const auto& [column, value] : x.entries) z += row[column] * value;
      logits[c] = z;
    }
    double max_logit = *std::max_element(logits.begin(), logits.end());
    double sum_exp = 0.0;
    for (double z : logits) sum_exp += std::exp(z - max_logit);
    const double log_norm = max_logit + std::log(sum_exp);
    loss -= (logits[labels[i]] - log_norm) * inv_m;

    for (std::size_t c = 0; c < n_classes; ++c) {
      const double p = std::exp(logits[c] - log_norm);
      const double delta = (p - (c == labels[i] ? 1.0 : 0.0)) * inv_m;
      out.grad_bias[c] += delta;
      double* grad_row = out.grad_weights.data() + c * dimension;
      for (const auto& [column, value] : x.entries) grad_row[column] += delta * value;
    }
  }

  if (l2 != 0.0) {
    double penalty = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      penalty += weights[i] * weights[i];
      out.grad_weights[i] += l2 * weights[i];
    }
    loss += 0.5 * l2 * penalty;
  }
  out.loss = loss;
  return out;
}

LRModel train_lr(const std::vector<LabeledExample>& examples,
                 const std::vector<std::string>& classes, const Vocabulary& vocab,
                 const LRHyperparams& hp) {
  if (hp.epochs < 1) throw UsageError("epochs must be >= 1");
  if (!(hp.learning_rate > 0.0)) throw UsageError("learning rate must be > 0");
  if (hp.l2 < 0.0) throw UsageError("l2 strength must be >= 0");
  if (examples.empty()) throw UsageError("no training examples");
  auto index = class_index(classes);

  const std::size_t n_docs = examples.size();
  std::vector<FeatureVector> features;
  std::vector<std::size_t> labels;
  features.reserve(n_docs);
  labels.reserve(n_docs);
  for (const LabeledExample& example : examples) {
    labels.push_back(class_of(index, example));
    features.push_back(featurize(example.tokens, vocab, n_docs));
  }

  LRModel model;
  model.classes = classes;
  model.dimension = vocab.size();
  model.weights.assign(classes.size() * vocab.size(), 0.0);
  model.bias.assign(classes.size(), 0.0);
  model.hp = hp;
  model.vocab_hash = vocab.hash();
  model.n_docs = n_docs;
  model.epoch_losses.reserve(hp.epochs + 1);

  for (std::size_t epoch = 0; epoch < hp.epochs; ++epoch) {
    LossGradient lg = lr_loss_and_gradient(features, labels, classes.size(), model.dimension,
                                           model.weights, model.bias, hp.l2);
    if (!std::isfinite(lg.loss)) {
      throw DataError("non-finite loss at epoch " + std::to_string(epoch + 1) +
                      "; lower the learning rate");
    }
    model.epoch_losses.push_back(lg.loss);
    for (std::size_t i = 0; i < model.weights.size(); ++i) {
      model.weights[i] -= hp.learning_rate * lg.grad_weights[i];
    }
    for (std::size_t c = 0; c < model.bias.size(); ++c) {
      model.bias[c] -= hp.learning_rate * lg.grad_bias[c];
    }
  }
  LossGradient final_lg = lr_loss_and_gradient(features, labels, classes.size(), model.dimension,
                                               model.weights, model.bias, hp.l2);
  if (!std::isfinite(final_lg.loss)) {
    throw DataError("non-finite loss at epoch " + std::to_string(hp.epochs) +
                    "; lower the learning rate");
  }
  model.epoch_losses.push_back(final_lg.loss);
  return model;
}

Prediction predict(const NBModel& model, const TokenSequence& tokens, const Vocabulary& vocab) {
  if (vocab.size() != model.vocab_size || vocab.hash() != model.vocab_hash) {
    throw UsageError("vocabulary does not match the one the model was trained on");
  }
  std::vector<double> scores = model.log_prior;
  for (const auto& [column, count] : vocab_counts(tokens, vocab)) {
    for (std::size_t c = 0; c < model.classes.size(); ++c) {
      scores[c] += static_cast<double>(count) * model.log_likelihood[c][column];
    }
  }
  softmax_in_place(scores);
  return Prediction{model.classes[argmax_first(scores)], std::move(scores)};
}

Prediction predict(const LRModel& model, const FeatureVector& features) {
  if (features.dimension != model.dimension) {
    throw UsageError("feature dimension " + std::to_string(features.dimension) +
                     " does not match model dimension " + std::to_string(model.dimension));
  }
  std::vector<double> logits(model.classes.size());
  for (std::size_t c = 0; c < model.classes.size(); ++c) {
    double z = model.bias[c];
    const double* row = model.weights.data() + c * model.dimension;
    for (const auto& [column, value] : features.entries) z += row[column] * value;
    logits[c] = z;
  }
  softmax_in_place(logits);
  return Prediction{model.classes[argmax_first(logits)], std::move(logits)};
}

Metrics metrics_from_confusion(const std::vector<std::string>& classes,
                               const std::vector<std::vector<std::size_t>>& confusion) {
  const std::size_t n = classes.size();
  Metrics metrics;
  metrics.classes = classes;
  metrics.confusion = confusion;
  metrics.precision.assign(n, 0.0);
  metrics.recall.assign(n, 0.0);
  metrics.f1.assign(n, 0.0);

  std::size_t total = 0, correct = 0;
  for (std::size_t gold = 0; gold < n; ++gold) {
    for (std::size_t pred = 0; pred < n; ++pred) {
      total += confusion[gold][pred];
      if (gold == pred) correct += confusion[gold][pred];
    }
  }
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t tp = confusion[c][c];
    std::size_t pred_total = 0, gold_total = 0;
    for (std::size_t i = 0; i < n; ++i) {
      pred_total += confusion[i][c];
      gold_total += confusion[c][i];
    }
    // Zero denominators score 0 so macro averages stay defined.
    metrics.precision[c] =
        pred_total == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(pred_total);
    metrics.recall[c] =
        gold_total == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(gold_total);
    double pr = metrics.precision[c] + metrics.recall[c];
    metrics.f1[c] = pr == 0.0 ? 0.0 : 2.0 * metrics.precision[c] * metrics.recall[c] / pr;
    metrics.macro_precision += metrics.precision[c];
    metrics.macro_recall += metrics.recall[c];
    metrics.macro_f1 += metrics.f1[c];
  }
  metrics.macro_precision /= static_cast<double>(n);
  metrics.macro_recall /= static_cast<double>(n);
  metrics.macro_f1 /= static_cast<double>(n);
  metrics.accuracy = total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total);
  return metrics;
}

namespace {

template <typename PredictFn>
Metrics evaluate_with(const std::vector<std::string>& classes,
                      const std::vector<LabeledExample>& test, PredictFn&& predict_fn) {
  if (test.empty()) throw UsageError("test set is empty");
  auto index = class_index(classes);
  std::vector<std::vector<std::size_t>> confusion(classes.size(),
                                                  std::vector<std::size_t>(classes.size(), 0));
  for (const LabeledExample& example : test) {
    std::size_t gold = class_of(index, example);
    Prediction prediction = predict_fn(example);
    ++confusion[gold][index.at(prediction.label)];
  }
  return metrics_from_confusion(classes, confusion);
}

}  // namespace

Metrics evaluate(const NBModel& model, const Vocabulary& vocab,
                 const std::vector<LabeledExample>& test) {
  return evaluate_with(model.classes, test, [&](const LabeledExample& example) {
    return predict(model, example.tokens, vocab);
  });
}

Metrics evaluate(const LRModel& model, const Vocabulary& vocab,
                 const std::vector<LabeledExample>& test) {
  return evaluate_with(model.classes, test, [&](const LabeledExample& example) {
    return predict(model, featurize(example.tokens, vocab, model.n_docs));
  });
}

SplitResult stratified_split(const std::vector<LabeledExample>& examples, double train_fraction,
                             std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw UsageError("train fraction must be in (0, 1)");
  }

  // Group by label in first-occurrence order.
  std::vector<std::string> group_labels;
  std::unordered_map<std::string, std::size_t> group_of;
  std::vector<std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    auto [it, inserted] = group_of.emplace(examples[i].label, groups.size());
    if (inserted) {
      group_labels.push_back(examples[i].label);
      groups.emplace_back();
    }
    groups[it->second].push_back(i);
  }

  SplitResult result;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    auto& members = groups[g];
    if (members.size() < 2) {
      throw UsageError("class \"" + group_labels[g] + "\" has fewer than 2 examples");
    }
    Rng rng(mix_seed(seed, g));
    rng.shuffle(members);
    double ideal = train_fraction * static_cast<double>(members.size());
    auto n_train = static_cast<std::size_t>(std::floor(ideal + 0.5));
    n_train = std::clamp<std::size_t>(n_train, 1, members.size() - 1);
    for (std::size_t i = 0; i < members.size(); ++i) {
      (i < n_train ? result.train : result.test).push_back(examples[members[i]]);
    }
  }
  return result;
}

namespace {

constexpr int kModelFormatVersion = 1;

json model_header(const char* kind) {
  json j = json::object();
  j["format_version"] = kModelFormatVersion;
  j["model"] = kind;
  return j;
}

json load_model_json(const std::filesystem::path& path, const char* expected_kind) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    throw DataError("model file " + path.string() + ": invalid JSON: " + e.what());
  }
  if (j.value("format_version", -1) != kModelFormatVersion) {
    throw DataError("model file " + path.string() + ": unsupported format_version");
  }
  if (expected_kind && j.value("model", "") != expected_kind) {
    throw DataError("model file " + path.string() + ": expected a " + expected_kind + " model, got \"" +
                    j.value("model", "") + "\"");
  }
  return j;
}

}  // namespace

void save_model(const NBModel& model, const std::filesystem::path& path) {
  json j = model_header("nb");
  j["classes"] = model.classes;
  j["alpha"] = model.alpha;
  j["vocab_hash"] = hex64(model.vocab_hash);
  j["vocab_size"] = model.vocab_size;
  j["n_docs"] = model.n_docs;
  j["seed"] = model.seed;
  j["log_prior"] = model.log_prior;
  j["log_likelihood"] = model.log_likelihood;
  write_text_file(path, j.dump(2) + "\n");
}

void save_model(const LRModel& model, const std::filesystem::path& path) {
  json j = model_header("lr");
  j["classes"] = model.classes;
  j["dimension"] = model.dimension;
  j["vocab_hash"] = hex64(model.vocab_hash);
  j["n_docs"] = model.n_docs;
  j["hyperparams"] = {{"learning_rate", model.hp.learning_rate},
                      {"l2", model.hp.l2},
                      {"epochs", model.hp.epochs},
                      {"seed", model.hp.seed}};
  j["weights"] = model.weights;
  j["bias"] = model.bias;
  j["epoch_losses"] = model.epoch_losses;
  write_text_file(path, j.dump(2) + "\n");
}

NBModel load_nb_model(const std::filesystem::path& path) {
  json j = load_model_json(path, "nb");
  NBModel model;
  try {
    model.classes = j.at("classes").get<std::vector<std::string>>();
    model.alpha = j.at("alpha").get<double>();
    model.vocab_hash = std::stoull(j.at("vocab_hash").get<std::string>(), nullptr, 16);
    model.vocab_size = j.at("vocab_size").get<std::size_t>();
    model.n_docs = j.at("n_docs").get<std::size_t>();
    model.seed = j.at("seed").get<std::uint64_t>();
    model.log_prior = j.at("log_prior").get<std::vector<double>>();
    model.log_likelihood = j.at("log_likelihood").get<std::vector<std::vector<double>>>();
  } catch (const json::exception& e) {
    throw DataError("model file " + path.string() + ": " + e.what());
  }
  return model;
}

LRModel load_lr_model(const std::filesystem::path& path) {
  json j = load_model_json(path, "lr");
  LRModel model;
  try {
    model.classes = j.at("classes").get<std::vector<std::string>>();
    model.dimension = j.at("dimension").get<std::size_t>();
    model.vocab_hash = std::stoull(j.at("vocab_hash").get<std::string>(), nullptr, 16);
    model.n_docs = j.at("n_docs").get<std::size_t>();
    const json& hp = j.at("hyperparams");
    model.hp.learning_rate = hp.at("learning_rate").get<double>();
    model.hp.l2 = hp.at("l2").get<double>();
    model.hp.epochs = hp.at("epochs").get<std::size_t>();
    model.hp.seed = hp.at("seed").get<std::uint64_t>();
    model.weights = j.at("weights").get<std::vector<double>>();
    model.bias = j.at("bias").get<std::vector<double>>();
    model.epoch_losses = j.at("epoch_losses").get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw DataError("model file " + path.string() + ": " + e.what());
  }
  return model;
}

std::string peek_model_kind(const std::filesystem::path& path) {
  return load_model_json(path, nullptr).value("model", "");
}

}  // namespace opiscope
