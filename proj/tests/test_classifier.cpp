#include "opiscope/classifier.hpp"

#include "opiscope/errors.hpp"
#include "opiscope/util.hpp"
#include "support/oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <set>

using namespace opiscope;

namespace {

LabeledExample make_example(std::string id, const std::string& text, std::string label) {
  LabeledExample example;
  example.id = std::move(id);
  example.tokens = tokenize(text);
  example.label = std::move(label);
  example.provenance = Provenance::Weak;
  return example;
}

std::vector<TokenSequence> docs_of(const std::vector<LabeledExample>& examples) {
  std::vector<TokenSequence> docs;
  for (const auto& example : examples) docs.push_back(example.tokens);
  return docs;
}

// {"good"} -> Positive, {"bad"} -> Negative
std::vector<LabeledExample> two_doc_fixture() {
  return {make_example("p1", "good", "Positive"), make_example("n1", "bad", "Negative")};
}

const std::vector<std::string> kTwoClasses = {"Positive", "Negative"};

std::vector<LabeledExample> separable_toy() {
  return {
      make_example("a1", "alpha beta gamma", "A"),   make_example("a2", "beta delta", "A"),
      make_example("a3", "gamma epsilon alpha", "A"), make_example("a4", "delta alpha", "A"),
      make_example("a5", "epsilon beta", "A"),        make_example("b1", "zeta eta theta", "B"),
      make_example("b2", "eta iota", "B"),            make_example("b3", "theta kappa zeta", "B"),
      make_example("b4", "iota zeta", "B"),           make_example("b5", "kappa eta", "B"),
  };
}

}  // namespace

TEST_CASE("featurize produces sparse tf-idf vectors and ignores OOV") {
  auto examples = two_doc_fixture();
  Vocabulary vocab = build_vocabulary(docs_of(examples), {1, 1, 1, {}});

  FeatureVector empty = featurize(tokenize(""), vocab, 2);
  CHECK(empty.entries.empty());
  CHECK(empty.dimension == vocab.size());

  // single-entry vector for a one-term document over a 3-term vocabulary
  Vocabulary three =
      build_vocabulary(docs_of({make_example("x", "heroin withdrawal", "A"),
                                make_example("y", "kratom withdrawal", "A")}),
                       {1, 1, 1, {}});
  FeatureVector one = featurize(tokenize("withdrawal"), three, 2);
  REQUIRE(one.entries.size() == 1);
  CHECK(one.entries[0].first == three.index.at("withdrawal"));
  CHECK(one.entries[0].second == doctest::Approx(1.0).epsilon(1e-12));

  FeatureVector oov = featurize(tokenize("unseen words only"), three, 2);
  CHECK(oov.entries.empty());
}

TEST_CASE("train_nb matches hand-computed Laplace likelihoods exactly") {
  auto examples = two_doc_fixture();
  Vocabulary vocab = build_vocabulary(docs_of(examples), {1, 1, 1, {}});
  REQUIRE(vocab.terms == std::vector<std::string>{"bad", "good"});

  NBModel model = train_nb(examples, kTwoClasses, vocab, 1.0);
  const auto good_pos = oracles::make_fraction(1 + 1, 1 + 2);  // (count + a) / (total + a|V|)
  CHECK(std::exp(model.log_likelihood[0][vocab.index.at("good")]) ==
        doctest::Approx(good_pos.value()).epsilon(1e-12));
  const auto bad_pos = oracles::make_fraction(0 + 1, 1 + 2);
  CHECK(std::exp(model.log_likelihood[0][vocab.index.at("bad")]) ==
        doctest::Approx(bad_pos.value()).epsilon(1e-12));
  CHECK(std::exp(model.log_prior[0]) == doctest::Approx(0.5).epsilon(1e-12));

  // priors and per-class likelihoods are valid distributions
  double prior_sum = 0.0;
  for (double lp : model.log_prior) prior_sum += std::exp(lp);
  CHECK(prior_sum == doctest::Approx(1.0).epsilon(1e-9));
  for (const auto& row : model.log_likelihood) {
    double row_sum = 0.0;
    for (double ll : row) row_sum += std::exp(ll);
    CHECK(row_sum == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("train_nb exactness against the rational-arithmetic oracle") {
  std::vector<LabeledExample> examples = {
      make_example("p1", "good good clean", "Positive"),
      make_example("p2", "clean hope", "Positive"),
      make_example("n1", "bad pain pain", "Negative"),
      make_example("n2", "pain", "Negative"),
      make_example("n3", "bad bad hope", "Negative"),
  };
  Vocabulary vocab = build_vocabulary(docs_of(examples), {1, 1, 1, {}});
  NBModel model = train_nb(examples, kTwoClasses, vocab, 1.0);

  // per-class raw occurrence counts, tallied by hand over the fixture
  const long long v = static_cast<long long>(vocab.size());
  auto check_likelihood = [&](std::size_t cls, const std::string& term, long long count,
                              long long total) {
    auto expected = oracles::make_fraction(count + 1, total + v);
    CHECK(std::exp(model.log_likelihood[cls][vocab.index.at(term)]) ==
          doctest::Approx(expected.value()).epsilon(1e-12));
  };
  // Positive totals: good=2, clean=2, hope=1 -> 5 tokens
  check_likelihood(0, "good", 2, 5);
  check_likelihood(0, "clean", 2, 5);
  check_likelihood(0, "hope", 1, 5);
  check_likelihood(0, "bad", 0, 5);
  check_likelihood(0, "pain", 0, 5);
  // Negative totals: bad=3, pain=3, hope=1 -> 7 tokens
  check_likelihood(1, "bad", 3, 7);
  check_likelihood(1, "pain", 3, 7);
  check_likelihood(1, "hope", 1, 7);
  CHECK(std::exp(model.log_prior[0]) == doctest::Approx(oracles::make_fraction(2, 5).value()).epsilon(1e-12));
  CHECK(std::exp(model.log_prior[1]) == doctest::Approx(oracles::make_fraction(3, 5).value()).epsilon(1e-12));
}

TEST_CASE("train_nb degenerate and limit cases") {
  auto examples = two_doc_fixture();
  Vocabulary vocab = build_vocabulary(docs_of(examples), {1, 1, 1, {}});

  // single declared class: prior is 1
  std::vector<LabeledExample> one_class = {make_example("p1", "good", "A"),
                                           make_example("p2", "bad", "A")};
  NBModel single = train_nb(one_class, {"A"}, vocab, 1.0);
  CHECK(std::exp(single.log_prior[0]) == doctest::Approx(1.0).epsilon(1e-12));

  // huge alpha washes the likelihoods toward uniform
  NBModel washed = train_nb(examples, kTwoClasses, vocab, 1e6);
  for (const auto& row : washed.log_likelihood) {
    for (double ll : row) {
      CHECK(std::exp(ll) == doctest::Approx(1.0 / static_cast<double>(vocab.size())).epsilon(1e-5));
    }
  }

  CHECK_THROWS_AS(train_nb(examples, {"Positive", "Negative", "Neutral"}, vocab, 1.0), UsageError);
  CHECK_THROWS_AS(train_nb(examples, kTwoClasses, vocab, 0.0), UsageError);
}

TEST_CASE("NB prediction recovers the hand-computed posterior") {
  auto examples = two_doc_fixture();
  Vocabulary vocab = build_vocabulary(docs_of(examples), {1, 1, 1, {}});
  NBModel model = train_nb(examples, kTwoClasses, vocab, 1.0);

  Prediction prediction = predict(model, tokenize("good"), vocab);
  CHECK(prediction.label == "Positive");
  CHECK(prediction.probabilities[0] > 0.5);
  // exact posterior: (1/2 * 2/3) / (1/2 * 2/3 + 1/2 * 1/3) = 2/3
  CHECK(prediction.probabilities[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));

  double sum = 0.0;
  for (double p : prediction.probabilities) sum += p;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("zero-weight softmax is uniform and ties go to the first class") {
  LRModel model;
  model.classes = {"Positive", "Negative", "Neutral"};
  model.dimension = 4;
  model.weights.assign(3 * 4, 0.0);
  model.bias.assign(3, 0.0);

  FeatureVector empty;
  empty.dimension = 4;
  Prediction prediction = predict(model, empty);
  CHECK(prediction.label == "Positive");
  for (double p : prediction.probabilities) {
    CHECK(p == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
  }

  FeatureVector wrong;
  wrong.dimension = 5;
  CHECK_THROWS_AS(predict(model, wrong), UsageError);
}

TEST_CASE("one symmetric full-batch epoch keeps the balanced classes uniform") {
  std::vector<LabeledExample> examples = {make_example("a", "alpha", "A"),
                                          make_example("b", "beta", "B")};
  Vocabulary vocab = build_vocabulary(docs_of(examples), {1, 1, 1, {}});
  LRModel model = train_lr(examples, {"A", "B"}, vocab, {0.5, 0.0, 1, 0});
  FeatureVector empty;
  empty.dimension = vocab.size();
  Prediction prediction = predict(model, empty);
  for (double p : prediction.probabilities) {
    CHECK(p == doctest::Approx(0.5).epsilon(1e-9));
  }
}

TEST_CASE("analytic LR gradient matches central finite differences") {
  std::vector<LabeledExample> examples = {make_example("d1", "good clean good", "Positive"),
                                          make_example("d2", "bad pain", "Negative"),
                                          make_example("d3", "clean pain good", "Positive")};
  const std::vector<std::string> classes = {"Positive", "Negative"};
  Vocabulary vocab = build_vocabulary(docs_of(examples), {1, 1, 1, {}});
  const std::size_t dim = vocab.size();
  const std::size_t n_classes = classes.size();
  const double l2 = 0.1;

  std::vector<FeatureVector> features;
  std::vector<std::size_t> labels;
  for (const auto& example : examples) {
    features.push_back(featurize(example.tokens, vocab, examples.size()));
    labels.push_back(example.label == "Positive" ? 0 : 1);
  }

  auto loss_at = [&](const std::vector<double>& weights, const std::vector<double>& bias) {
    return lr_loss_and_gradient(features, labels, n_classes, dim, weights, bias, l2).loss;
  };
  auto check_point = [&](std::vector<double> weights, std::vector<double> bias) {
    LossGradient lg = lr_loss_and_gradient(features, labels, n_classes, dim, weights, bias, l2);
    const double h = 1e-5;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      auto plus = weights, minus = weights;
      plus[i] += h;
      minus[i] -= h;
      double fd = (loss_at(plus, bias) - loss_at(minus, bias)) / (2.0 * h);
      double denom = std::max({std::abs(fd), std::abs(lg.grad_weights[i]), 1e-6});
      CHECK(std::abs(fd - lg.grad_weights[i]) / denom < 1e-4);
    }
    for (std::size_t c = 0; c < n_classes; ++c) {
      auto plus = bias, minus = bias;
      plus[c] += h;
      minus[c] -= h;
      double fd = (loss_at(weights, plus) - loss_at(weights, minus)) / (2.0 * h);
      double denom = std::max({std::abs(fd), std::abs(lg.grad_bias[c]), 1e-6});
      CHECK(std::abs(fd - lg.grad_bias[c]) / denom < 1e-4);
    }
  };

  check_point(std::vector<double>(n_classes * dim, 0.0), std::vector<double>(n_classes, 0.0));

  std::vector<double> weights(n_classes * dim);
  std::vector<double> bias(n_classes);
  Rng rng(8);
  for (double& w : weights) w = static_cast<double>(rng.below(1000)) / 1000.0 - 0.5;
  for (double& b : bias) b = static_cast<double>(rng.below(1000)) / 1000.0 - 0.5;
  check_point(weights, bias);
}

TEST_CASE("LR reaches 100% training accuracy on the separable toy set") {
  auto examples = separable_toy();
  Vocabulary vocab = build_vocabulary(docs_of(examples), {1, 1, 1, {}});
  LRModel model = train_lr(examples, {"A", "B"}, vocab, {0.5, 0.0, 200, 1});

  std::size_t correct = 0;
  for (const auto& example : examples) {
    Prediction prediction = predict(model, featurize(example.tokens, vocab, examples.size()));
    if (prediction.label == example.label) ++correct;
  }
  CHECK(correct == examples.size());
}

TEST_CASE("full-batch LR loss is non-increasing at a modest learning rate") {
  auto examples = separable_toy();
  Vocabulary vocab = build_vocabulary(docs_of(examples), {1, 1, 1, {}});
  LRModel model = train_lr(examples, {"A", "B"}, vocab, {0.1, 0.01, 120, 1});
  REQUIRE(model.epoch_losses.size() == 121);
  for (std::size_t i = 1; i < model.epoch_losses.size(); ++i) {
    CHECK(model.epoch_losses[i] <= model.epoch_losses[i - 1] + 1e-12);
  }
}

TEST_CASE("LR training reports the epoch when the loss blows up") {
  auto examples = separable_toy();
  Vocabulary vocab = build_vocabulary(docs_of(examples), {1, 1, 1, {}});
  CHECK_THROWS_WITH_AS(train_lr(examples, {"A", "B"}, vocab, {1e160, 1.0, 10, 1}),
                       doctest::Contains("epoch"), DataError);
  CHECK_THROWS_AS(train_lr(examples, {"A", "B"}, vocab, {0.5, 0.0, 0, 1}), UsageError);
  CHECK_THROWS_AS(train_lr(examples, {"A", "B"}, vocab, {0.0, 0.0, 10, 1}), UsageError);
}

TEST_CASE("training is deterministic given identical inputs") {
  auto examples = separable_toy();
  Vocabulary vocab = build_vocabulary(docs_of(examples), {1, 1, 1, {}});
  LRModel lr_a = train_lr(examples, {"A", "B"}, vocab, {0.5, 0.01, 50, 7});
  LRModel lr_b = train_lr(examples, {"A", "B"}, vocab, {0.5, 0.01, 50, 7});
  CHECK(lr_a.weights == lr_b.weights);  // bit identical
  CHECK(lr_a.bias == lr_b.bias);
  CHECK(lr_a.epoch_losses == lr_b.epoch_losses);

  NBModel nb_a = train_nb(examples, {"A", "B"}, vocab, 1.0);
  NBModel nb_b = train_nb(examples, {"A", "B"}, vocab, 1.0);
  CHECK(nb_a.log_likelihood == nb_b.log_likelihood);
  CHECK(nb_a.log_prior == nb_b.log_prior);
}

TEST_CASE("metrics match hand-filled confusion matrices") {
  const std::vector<std::string> classes = {"A", "B"};

  Metrics perfect = metrics_from_confusion(classes, {{7, 0}, {0, 5}});
  CHECK(perfect.accuracy == doctest::Approx(1.0));
  CHECK(perfect.macro_precision == doctest::Approx(1.0));
  CHECK(perfect.macro_recall == doctest::Approx(1.0));
  CHECK(perfect.macro_f1 == doctest::Approx(1.0));

  // every prediction lands on class A over balanced classes
  Metrics collapsed = metrics_from_confusion(classes, {{5, 0}, {5, 0}});
  CHECK(collapsed.accuracy == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(collapsed.macro_recall == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(collapsed.macro_precision == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(collapsed.precision[1] == 0.0);  // zero-denominator convention
  CHECK(collapsed.recall[1] == 0.0);
  CHECK(collapsed.f1[1] == 0.0);

  Metrics mixed = metrics_from_confusion(classes, {{2, 1}, {1, 2}});
  CHECK(mixed.macro_precision == doctest::Approx(2.0 / 3.0).epsilon(1e-9));
  CHECK(mixed.macro_recall == doctest::Approx(2.0 / 3.0).epsilon(1e-9));
  CHECK(mixed.macro_f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-9));
}

TEST_CASE("evaluate builds the confusion matrix over declared classes") {
  auto examples = separable_toy();
  Vocabulary vocab = build_vocabulary(docs_of(examples), {1, 1, 1, {}});
  NBModel model = train_nb(examples, {"A", "B"}, vocab, 1.0);

  Metrics metrics = evaluate(model, vocab, examples);  // separable: perfect on train
  CHECK(metrics.accuracy == doctest::Approx(1.0));
  CHECK(metrics.macro_f1 == doctest::Approx(1.0));

  std::vector<LabeledExample> undeclared = {make_example("x", "alpha", "C")};
  CHECK_THROWS_AS(evaluate(model, vocab, undeclared), DataError);
  CHECK_THROWS_AS(evaluate(model, vocab, std::vector<LabeledExample>{}), UsageError);
}

TEST_CASE("stratified_split preserves class balance and is seeded") {
  std::vector<LabeledExample> examples;
  for (int i = 0; i < 50; ++i) {
    examples.push_back(make_example("a" + std::to_string(i), "alpha", "A"));
    examples.push_back(make_example("b" + std::to_string(i), "beta", "B"));
  }

  SplitResult split = stratified_split(examples, 0.8, 42);
  CHECK(split.train.size() == 80);
  CHECK(split.test.size() == 20);

  std::set<std::string> train_ids, test_ids;
  std::size_t train_a = 0, test_a = 0;
  for (const auto& example : split.train) {
    train_ids.insert(example.id);
    train_a += example.label == "A" ? 1 : 0;
  }
  for (const auto& example : split.test) {
    test_ids.insert(example.id);
    test_a += example.label == "A" ? 1 : 0;
  }
  CHECK(train_ids.size() == 80);  // no duplicates
  for (const auto& id : test_ids) CHECK(train_ids.count(id) == 0);
  CHECK(train_a == 40);  // balanced within one example
  CHECK(test_a == 10);

  SplitResult replay = stratified_split(examples, 0.8, 42);
  REQUIRE(replay.train.size() == split.train.size());
  for (std::size_t i = 0; i < split.train.size(); ++i) {
    CHECK(replay.train[i].id == split.train[i].id);
  }
  SplitResult other = stratified_split(examples, 0.8, 43);
  bool any_difference = false;
  for (std::size_t i = 0; i < split.train.size(); ++i) {
    any_difference = any_difference || other.train[i].id != split.train[i].id;
  }
  CHECK(any_difference);

  // tiny classes keep one example on each side
  std::vector<LabeledExample> tiny = {make_example("1", "x", "A"), make_example("2", "y", "A"),
                                      make_example("3", "z", "B"), make_example("4", "w", "B")};
  SplitResult tiny_split = stratified_split(tiny, 0.8, 1);
  CHECK(tiny_split.train.size() == 2);
  CHECK(tiny_split.test.size() == 2);

  std::vector<LabeledExample> lone = {make_example("1", "x", "A"), make_example("2", "y", "A"),
                                      make_example("3", "z", "B")};
  CHECK_THROWS_WITH_AS(stratified_split(lone, 0.8, 1), doctest::Contains("fewer than 2"),
                       UsageError);
  CHECK_THROWS_AS(stratified_split(tiny, 0.0, 1), UsageError);
  CHECK_THROWS_AS(stratified_split(tiny, 1.0, 1), UsageError);
}

TEST_CASE("model files round-trip through the JSON container") {
  auto examples = separable_toy();
  Vocabulary vocab = build_vocabulary(docs_of(examples), {1, 1, 1, {}});
  auto dir = oracles::fresh_temp_dir("models");

  NBModel nb = train_nb(examples, {"A", "B"}, vocab, 0.5);
  nb.seed = 99;
  save_model(nb, dir / "nb.json");
  CHECK(peek_model_kind(dir / "nb.json") == "nb");
  NBModel nb_loaded = load_nb_model(dir / "nb.json");
  CHECK(nb_loaded.classes == nb.classes);
  CHECK(nb_loaded.alpha == nb.alpha);
  CHECK(nb_loaded.vocab_hash == nb.vocab_hash);
  CHECK(nb_loaded.seed == 99);
  CHECK(nb_loaded.log_prior == nb.log_prior);
  CHECK(nb_loaded.log_likelihood == nb.log_likelihood);

  LRModel lr = train_lr(examples, {"A", "B"}, vocab, {0.5, 0.01, 30, 7});
  save_model(lr, dir / "lr.json");
  CHECK(peek_model_kind(dir / "lr.json") == "lr");
  LRModel lr_loaded = load_lr_model(dir / "lr.json");
  CHECK(lr_loaded.weights == lr.weights);
  CHECK(lr_loaded.bias == lr.bias);
  CHECK(lr_loaded.hp.epochs == 30);
  CHECK(lr_loaded.hp.seed == 7);
  CHECK(lr_loaded.vocab_hash == lr.vocab_hash);
  CHECK(lr_loaded.epoch_losses == lr.epoch_losses);

  CHECK_THROWS_AS(load_nb_model(dir / "lr.json"), DataError);
  CHECK_THROWS_AS(load_lr_model(dir / "nb.json"), DataError);
}
