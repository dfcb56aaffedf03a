#include "opiscope/classifier.hpp"
#include "opiscope/corpus.hpp"
#include "opiscope/errors.hpp"
#include "opiscope/listing.hpp"
#include "opiscope/ontology.hpp"
#include "opiscope/recognizer.hpp"
#include "opiscope/report.hpp"
#include "opiscope/topics.hpp"
#include "opiscope/util.hpp"
#include "opiscope/weak_labels.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace opiscope;

namespace {

constexpr const char* kVersion = "0.1.0";

struct Config {
  // paths
  std::string corpus;
  std::string listings;
  std::string ontology;
  std::string lexicon;
  std::string hashtag_map;
  std::string stopwords;  // optional; compiled-in default list when empty
  std::string labels;     // optional override for train/eval input
  std::string out_dir = "out";
  std::string corpus_format = "auto";  // auto|jsonl|csv
  // knobs
  int ngram_min = 1;
  int ngram_max = 3;
  std::size_t min_df = 1;
  std::size_t topics_k = 15;
  std::size_t sample_n = 800;
  std::optional<std::uint64_t> seed;  // mandatory, never defaulted
  std::string model = "nb";
  double nb_alpha = 1.0;
  double lr_learning_rate = 0.5;
  double lr_l2 = 1e-4;
  std::size_t lr_epochs = 200;
  double train_fraction = 0.8;
  std::string task = "sentiment";  // sentiment|emotion
  std::string category_mode = "multi";  // multi|first
};

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  auto result = std::from_chars(value.data(), value.data() + value.size(), out);
  if (result.ec != std::errc{} || result.ptr != value.data() + value.size()) {
    throw UsageError("config field \"" + key + "\": expected a number, got \"" + value + "\"");
  }
  return out;
}

double parse_double(const std::string& key, const std::string& value) {
  double out = 0.0;
  auto result = std::from_chars(value.data(), value.data() + value.size(), out);
  if (result.ec != std::errc{} || result.ptr != value.data() + value.size()) {
    throw UsageError("config field \"" + key + "\": expected a number, got \"" + value + "\"");
  }
  return out;
}

void apply_config_entry(Config& cfg, const std::string& key, const std::string& value) {
  if (key == "corpus") cfg.corpus = value;
  else if (key == "listings") cfg.listings = value;
  else if (key == "ontology") cfg.ontology = value;
  else if (key == "lexicon") cfg.lexicon = value;
  else if (key == "hashtag_map") cfg.hashtag_map = value;
  else if (key == "stopwords") cfg.stopwords = value;
  else if (key == "labels") cfg.labels = value;
  else if (key == "out_dir") cfg.out_dir = value;
  else if (key == "corpus_format") cfg.corpus_format = value;
  else if (key == "ngram_min") cfg.ngram_min = parse_number<int>(key, value);
  else if (key == "ngram_max") cfg.ngram_max = parse_number<int>(key, value);
  else if (key == "min_df") cfg.min_df = parse_number<std::size_t>(key, value);
  else if (key == "topics_k") cfg.topics_k = parse_number<std::size_t>(key, value);
  else if (key == "sample_n") cfg.sample_n = parse_number<std::size_t>(key, value);
  else if (key == "seed") cfg.seed = parse_number<std::uint64_t>(key, value);
  else if (key == "model") cfg.model = value;
  else if (key == "nb_alpha") cfg.nb_alpha = parse_double(key, value);
  else if (key == "lr_learning_rate") cfg.lr_learning_rate = parse_double(key, value);
  else if (key == "lr_l2") cfg.lr_l2 = parse_double(key, value);
  else if (key == "lr_epochs") cfg.lr_epochs = parse_number<std::size_t>(key, value);
  else if (key == "train_fraction") cfg.train_fraction = parse_double(key, value);
  else if (key == "task") cfg.task = value;
  else if (key == "category_mode") cfg.category_mode = value;
  else throw UsageError("unknown config field \"" + key + "\"");
}

void load_config_file(Config& cfg, const fs::path& path) {
  if (!fs::exists(path)) throw UsageError("config file not found: " + path.string());
  std::ifstream in(path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view trimmed = trim_view(line);
    if (trimmed.empty() || trimmed.front() == '#') continue;
    std::size_t eq = trimmed.find('=');
    if (eq == std::string_view::npos) {
      throw UsageError(path.string() + ":" + std::to_string(line_no) +
                       ": expected \"key = value\"");
    }
    std::string key(trim_view(trimmed.substr(0, eq)));
    std::string value(trim_view(trimmed.substr(eq + 1)));
    apply_config_entry(cfg, key, value);
  }
}

// Resolved configuration as sorted key/value pairs; feeds the manifest and
// the config hash.
std::map<std::string, std::string> config_map(const Config& cfg) {
  std::map<std::string, std::string> m;
  m["corpus"] = cfg.corpus;
  m["listings"] = cfg.listings;
  m["ontology"] = cfg.ontology;
  m["lexicon"] = cfg.lexicon;
  m["hashtag_map"] = cfg.hashtag_map;
  m["stopwords"] = cfg.stopwords;
  m["labels"] = cfg.labels;
  m["out_dir"] = cfg.out_dir;
  m["corpus_format"] = cfg.corpus_format;
  m["ngram_min"] = std::to_string(cfg.ngram_min);
  m["ngram_max"] = std::to_string(cfg.ngram_max);
  m["min_df"] = std::to_string(cfg.min_df);
  m["topics_k"] = std::to_string(cfg.topics_k);
  m["sample_n"] = std::to_string(cfg.sample_n);
  m["seed"] = cfg.seed ? std::to_string(*cfg.seed) : "";
  m["model"] = cfg.model;
  m["nb_alpha"] = format_shortest(cfg.nb_alpha);
  m["lr_learning_rate"] = format_shortest(cfg.lr_learning_rate);
  m["lr_l2"] = format_shortest(cfg.lr_l2);
  m["lr_epochs"] = std::to_string(cfg.lr_epochs);
  m["train_fraction"] = format_shortest(cfg.train_fraction);
  m["task"] = cfg.task;
  m["category_mode"] = cfg.category_mode;
  return m;
}

std::string config_hash(const Config& cfg) {
  std::string blob;
  for (const auto& [key, value] : config_map(cfg)) {
    blob += key;
    blob.push_back('=');
    blob += value;
    blob.push_back('\n');
  }
  return hex64(fnv1a64(blob));
}

void require_field(const std::string& value, const char* field) {
  if (value.empty()) throw UsageError(std::string("missing config field \"") + field + "\"");
  if (!fs::exists(value)) {
    throw UsageError(std::string("config field \"") + field + "\": file not found: " + value);
  }
}

void validate_common(const Config& cfg) {
  if (!cfg.seed) throw UsageError("missing config field \"seed\" (seeds are never defaulted)");
  if (cfg.ngram_min < 1 || cfg.ngram_min > cfg.ngram_max || cfg.ngram_max > 3) {
    throw UsageError("config fields \"ngram_min\"/\"ngram_max\": need 1 <= min <= max <= 3");
  }
  if (cfg.min_df < 1) throw UsageError("config field \"min_df\" must be >= 1");
  if (cfg.topics_k < 1) throw UsageError("config field \"topics_k\" must be >= 1");
  if (cfg.sample_n < 1) throw UsageError("config field \"sample_n\" must be >= 1");
  if (cfg.model != "nb" && cfg.model != "lr") {
    throw UsageError("config field \"model\" must be \"nb\" or \"lr\"");
  }
  if (!(cfg.train_fraction > 0.0 && cfg.train_fraction < 1.0)) {
    throw UsageError("config field \"train_fraction\" must be in (0, 1)");
  }
  if (cfg.task != "sentiment" && cfg.task != "emotion") {
    throw UsageError("config field \"task\" must be \"sentiment\" or \"emotion\"");
  }
  if (cfg.category_mode != "multi" && cfg.category_mode != "first") {
    throw UsageError("config field \"category_mode\" must be \"multi\" or \"first\"");
  }
  if (cfg.corpus_format != "auto" && cfg.corpus_format != "jsonl" && cfg.corpus_format != "csv") {
    throw UsageError("config field \"corpus_format\" must be auto, jsonl or csv");
  }
  if (cfg.out_dir.empty()) throw UsageError("missing config field \"out_dir\"");
}

// Tracks the files a run read and wrote, then freezes them into the manifest.
struct RunContext {
  const Config& cfg;
  std::string command;
  std::map<std::string, std::string> inputs;
  std::map<std::string, std::string> outputs;

  fs::path out_path(const std::string& name) const { return fs::path(cfg.out_dir) / name; }

  void note_input(const fs::path& path) { inputs[path.string()] = hex64(fnv1a64_file(path)); }
  void note_output(const fs::path& path) { outputs[path.string()] = hex64(fnv1a64_file(path)); }

  void write_manifest() {
    json manifest = json::object();
    manifest["tool"] = "opiscope";
    manifest["version"] = kVersion;
    manifest["command"] = command;
    manifest["seed"] = *cfg.seed;
    manifest["config"] = config_map(cfg);
    manifest["config_hash"] = config_hash(cfg);
    manifest["inputs"] = inputs;
    manifest["outputs"] = outputs;
    write_text_file(out_path("manifest.json"), manifest.dump(2) + "\n");
  }
};

Corpus load_corpus(RunContext& ctx) {
  require_field(ctx.cfg.corpus, "corpus");
  ctx.note_input(ctx.cfg.corpus);
  if (ctx.cfg.corpus_format == "jsonl") return load_posts(ctx.cfg.corpus, CorpusFormat::Jsonl);
  if (ctx.cfg.corpus_format == "csv") return load_posts(ctx.cfg.corpus, CorpusFormat::Csv);
  return load_posts(ctx.cfg.corpus);
}

Ontology load_ontology_input(RunContext& ctx) {
  require_field(ctx.cfg.ontology, "ontology");
  ctx.note_input(ctx.cfg.ontology);
  return Ontology::load(ctx.cfg.ontology);
}

VocabularyOptions vocabulary_options(RunContext& ctx) {
  VocabularyOptions options;
  options.n_min = ctx.cfg.ngram_min;
  options.n_max = ctx.cfg.ngram_max;
  options.min_df = ctx.cfg.min_df;
  if (!ctx.cfg.stopwords.empty()) {
    require_field(ctx.cfg.stopwords, "stopwords");
    ctx.note_input(ctx.cfg.stopwords);
    std::ifstream in(ctx.cfg.stopwords);
    std::string line;
    while (std::getline(in, line)) {
      std::string_view word = trim_view(line);
      if (word.empty() || word.front() == '#') continue;
      options.stopwords.insert(to_lower_copy(word));
    }
  } else {
    options.stopwords = default_stopwords();
  }
  return options;
}

std::string csv_field(const std::string& value) {
  if (value.find_first_of(",\"\n") == std::string::npos) return value;
  std::string quoted = "\"";
  for (char c : value) {
    if (c == '"') quoted += "\"\"";
    else quoted.push_back(c);
  }
  quoted.push_back('"');
  return quoted;
}

// ---------------------------------------------------------------- stages --

Corpus stage_ingest(RunContext& ctx) {
  Corpus corpus = load_corpus(ctx);
  fs::path out = ctx.out_path("posts.jsonl");
  write_posts_jsonl(corpus, out);
  ctx.note_output(out);
  std::cout << "[ingest] " << corpus.posts.size() << " posts -> " << out.string() << "\n";
  return corpus;
}

void stage_parse_listings(RunContext& ctx, const Ontology& ontology) {
  require_field(ctx.cfg.listings, "listings");
  ctx.note_input(ctx.cfg.listings);

  std::ifstream in(ctx.cfg.listings, std::ios::binary);
  if (!in) throw DataError("failed to open " + ctx.cfg.listings);
  std::string out_text;
  std::string line;
  std::size_t line_no = 0;
  std::size_t count = 0;
  std::size_t warned = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim_view(line).empty()) continue;
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      throw DataError(ctx.cfg.listings, line_no, std::string("invalid JSON: ") + e.what());
    }
    if (!record.is_object()) throw DataError(ctx.cfg.listings, line_no, "record is not an object");
    std::map<std::string, std::string> fields;
    for (const auto& [key, value] : record.items()) {
      if (value.is_string()) fields[key] = value.get<std::string>();
      else if (value.is_number() || value.is_boolean()) fields[key] = value.dump();
      else if (value.is_null()) continue;
      else throw DataError(ctx.cfg.listings, line_no, "field \"" + key + "\": expected a scalar");
    }
    Listing listing;
    try {
      listing = parse_listing(fields, ontology);
    } catch (const ListingParseError& e) {
      throw ListingParseError(ctx.cfg.listings, line_no, e.what());
    }
    warned += listing.warnings.empty() ? 0 : 1;
    out_text += listing_to_json(listing).dump();
    out_text.push_back('\n');
    ++count;
  }
  fs::path out = ctx.out_path("listings.jsonl");
  write_text_file(out, out_text);
  ctx.note_output(out);
  std::cout << "[parse-listings] " << count << " listings (" << warned << " with warnings) -> "
            << out.string() << "\n";
}

void stage_ner(RunContext& ctx, const Corpus& corpus, const Ontology& ontology) {
  std::string out_text;
  std::size_t count = 0;
  for (const Post& post : corpus.posts) {
    for (const EntityMention& mention : recognize(post.text, ontology)) {
      json row = json::object();
      row["post_id"] = post.id;
      row["alias"] = mention.alias;
      row["canonical"] = mention.canonical;
      row["category"] = std::string(to_string(mention.category));
      row["start"] = mention.char_begin;
      row["end"] = mention.char_end;
      out_text += row.dump();
      out_text.push_back('\n');
      ++count;
    }
  }
  fs::path out = ctx.out_path("mentions.jsonl");
  write_text_file(out, out_text);
  ctx.note_output(out);
  std::cout << "[ner] " << count << " mentions -> " << out.string() << "\n";
}

void stage_topics(RunContext& ctx, const Corpus& corpus) {
  VocabularyOptions options = vocabulary_options(ctx);

  std::map<std::string, std::vector<TokenSequence>> by_collection;
  for (const Post& post : corpus.posts) {
    by_collection[post.collection].push_back(tokenize(post.text));
  }

  std::string csv = "collection,rank,term,score\n";
  for (const auto& [collection, documents] : by_collection) {
    Vocabulary vocab = build_vocabulary(documents, options);
    if (vocab.empty()) continue;
    auto ranked = top_terms(documents, vocab, ctx.cfg.topics_k);
    for (std::size_t i = 0; i < ranked.size(); ++i) {
      csv += csv_field(collection) + "," + std::to_string(i + 1) + "," + csv_field(ranked[i].term) +
             "," + format_fixed(ranked[i].score, 6) + "\n";
    }
  }
  fs::path out = ctx.out_path("topics.csv");
  write_text_file(out, csv);
  ctx.note_output(out);
  std::cout << "[topics] " << by_collection.size() << " collections -> " << out.string() << "\n";
}

struct WeakLabelFiles {
  fs::path sentiment;
  fs::path emotion;
};

WeakLabelFiles stage_weaklabel(RunContext& ctx, const Corpus& corpus) {
  require_field(ctx.cfg.lexicon, "lexicon");
  require_field(ctx.cfg.hashtag_map, "hashtag_map");
  ctx.note_input(ctx.cfg.lexicon);
  ctx.note_input(ctx.cfg.hashtag_map);
  PolarityLexicon lexicon = PolarityLexicon::load(ctx.cfg.lexicon);
  HashtagMap hashtags = HashtagMap::load(ctx.cfg.hashtag_map);

  std::string sentiment_text;
  std::string emotion_text;
  std::size_t emotion_count = 0;
  for (const Post& post : corpus.posts) {
    SentimentLabel label = sentiment_label(polarity_score(post.text, lexicon));
    json row = json::object();
    row["post_id"] = post.id;
    row["label"] = std::string(to_string(label));
    row["provenance"] = std::string(to_string(Provenance::Weak));
    row["text"] = post.text;
    sentiment_text += row.dump();
    sentiment_text.push_back('\n');

    if (auto assigned = emotion_label(post, hashtags)) {
      json erow = json::object();
      erow["post_id"] = post.id;
      erow["label"] = std::string(to_string(assigned->label));
      erow["provenance"] = std::string(to_string(Provenance::Hashtag));
      erow["text"] = assigned->cleaned_text;
      emotion_text += erow.dump();
      emotion_text.push_back('\n');
      ++emotion_count;
    }
  }

  WeakLabelFiles files{ctx.out_path("labels_sentiment.jsonl"), ctx.out_path("labels_emotion.jsonl")};
  write_text_file(files.sentiment, sentiment_text);
  write_text_file(files.emotion, emotion_text);
  ctx.note_output(files.sentiment);
  ctx.note_output(files.emotion);
  std::cout << "[weaklabel] " << corpus.posts.size() << " sentiment labels, " << emotion_count
            << " emotion labels -> " << ctx.cfg.out_dir << "\n";
  return files;
}

std::vector<LabeledExample> load_labeled_examples(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("failed to open " + path.string());
  std::vector<LabeledExample> examples;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim_view(line).empty()) continue;
    json row;
    try {
      row = json::parse(line);
    } catch (const json::parse_error& e) {
      throw DataError(path.string(), line_no, std::string("invalid JSON: ") + e.what());
    }
    LabeledExample example;
    try {
      example.id = row.at("post_id").get<std::string>();
      example.label = row.at("label").get<std::string>();
      example.tokens = tokenize(row.at("text").get<std::string>());
      auto provenance = parse_provenance(row.value("provenance", "weak"));
      if (!provenance) throw DataError(path.string(), line_no, "unknown provenance");
      example.provenance = *provenance;
    } catch (const json::exception& e) {
      throw DataError(path.string(), line_no, e.what());
    }
    examples.push_back(std::move(example));
  }
  if (examples.empty()) throw DataError("no labeled examples in " + path.string());
  return examples;
}

fs::path labels_path_for_task(const RunContext& ctx) {
  if (!ctx.cfg.labels.empty()) return ctx.cfg.labels;
  return fs::path(ctx.cfg.out_dir) /
         (ctx.cfg.task == "emotion" ? "labels_emotion.jsonl" : "labels_sentiment.jsonl");
}

std::vector<std::string> classes_for_task(const Config& cfg) {
  return cfg.task == "emotion" ? emotion_class_names() : sentiment_class_names();
}

void print_metrics(const Metrics& metrics) {
  std::cout << "class            precision  recall     f1\n";
  for (std::size_t c = 0; c < metrics.classes.size(); ++c) {
    std::cout << metrics.classes[c];
    for (std::size_t pad = metrics.classes[c].size(); pad < 17; ++pad) std::cout << ' ';
    std::cout << format_fixed(metrics.precision[c], 3) << "      " << format_fixed(metrics.recall[c], 3)
              << "      " << format_fixed(metrics.f1[c], 3) << "\n";
  }
  std::cout << "macro            " << format_fixed(metrics.macro_precision, 3) << "      "
            << format_fixed(metrics.macro_recall, 3) << "      " << format_fixed(metrics.macro_f1, 3)
            << "\n";
  std::cout << "accuracy         " << format_fixed(metrics.accuracy, 3) << "\n";
}

void stage_train(RunContext& ctx) {
  fs::path labels = labels_path_for_task(ctx);
  if (!fs::exists(labels)) {
    throw UsageError("config field \"labels\": file not found: " + labels.string() +
                     " (run the weaklabel stage first)");
  }
  ctx.note_input(labels);
  auto examples = load_labeled_examples(labels);
  auto classes = classes_for_task(ctx.cfg);

  SplitResult split = stratified_split(examples, ctx.cfg.train_fraction, *ctx.cfg.seed);
  std::vector<TokenSequence> train_docs;
  train_docs.reserve(split.train.size());
  for (const auto& example : split.train) train_docs.push_back(example.tokens);
  Vocabulary vocab = build_vocabulary(train_docs, vocabulary_options(ctx));
  if (vocab.empty()) throw DataError("training vocabulary is empty; lower min_df");

  fs::path out = ctx.out_path("model.json");
  if (ctx.cfg.model == "nb") {
    NBModel model = train_nb(split.train, classes, vocab, ctx.cfg.nb_alpha);
    model.seed = *ctx.cfg.seed;
    save_model(model, out);
  } else {
    LRHyperparams hp{ctx.cfg.lr_learning_rate, ctx.cfg.lr_l2, ctx.cfg.lr_epochs, *ctx.cfg.seed};
    LRModel model = train_lr(split.train, classes, vocab, hp);
    save_model(model, out);
  }
  ctx.note_output(out);
  std::cout << "[train] " << ctx.cfg.model << " on " << split.train.size() << " examples ("
            << vocab.size() << " features) -> " << out.string() << "\n";
}

void stage_eval(RunContext& ctx) {
  fs::path labels = labels_path_for_task(ctx);
  if (!fs::exists(labels)) {
    throw UsageError("config field \"labels\": file not found: " + labels.string());
  }
  fs::path model_path = ctx.out_path("model.json");
  if (!fs::exists(model_path)) {
    throw UsageError("model file not found: " + model_path.string() + " (run the train stage first)");
  }
  ctx.note_input(labels);
  ctx.note_input(model_path);

  auto examples = load_labeled_examples(labels);
  SplitResult split = stratified_split(examples, ctx.cfg.train_fraction, *ctx.cfg.seed);
  std::vector<TokenSequence> train_docs;
  train_docs.reserve(split.train.size());
  for (const auto& example : split.train) train_docs.push_back(example.tokens);
  Vocabulary vocab = build_vocabulary(train_docs, vocabulary_options(ctx));

  Metrics metrics;
  std::string kind = peek_model_kind(model_path);
  if (kind == "nb") {
    NBModel model = load_nb_model(model_path);
    if (model.vocab_hash != vocab.hash()) {
      throw DataError("model was trained on a different vocabulary (seed/config mismatch)");
    }
    metrics = evaluate(model, vocab, split.test);
  } else if (kind == "lr") {
    LRModel model = load_lr_model(model_path);
    if (model.vocab_hash != vocab.hash()) {
      throw DataError("model was trained on a different vocabulary (seed/config mismatch)");
    }
    metrics = evaluate(model, vocab, split.test);
  } else {
    throw DataError("model file " + model_path.string() + ": unknown model kind \"" + kind + "\"");
  }

  json out = json::object();
  out["task"] = ctx.cfg.task;
  out["model"] = kind;
  out["n_train"] = split.train.size();
  out["n_test"] = split.test.size();
  out["classes"] = metrics.classes;
  out["accuracy"] = metrics.accuracy;
  out["macro"] = {{"precision", metrics.macro_precision},
                  {"recall", metrics.macro_recall},
                  {"f1", metrics.macro_f1}};
  json per_class = json::object();
  for (std::size_t c = 0; c < metrics.classes.size(); ++c) {
    per_class[metrics.classes[c]] = {{"precision", metrics.precision[c]},
                                     {"recall", metrics.recall[c]},
                                     {"f1", metrics.f1[c]}};
  }
  out["per_class"] = per_class;
  fs::path metrics_path = ctx.out_path("metrics.json");
  write_text_file(metrics_path, out.dump(2) + "\n");
  ctx.note_output(metrics_path);

  std::string csv = "gold";
  for (const auto& name : metrics.classes) csv += "," + csv_field(name);
  csv += "\n";
  for (std::size_t gold = 0; gold < metrics.classes.size(); ++gold) {
    csv += csv_field(metrics.classes[gold]);
    for (std::size_t pred = 0; pred < metrics.classes.size(); ++pred) {
      csv += "," + std::to_string(metrics.confusion[gold][pred]);
    }
    csv += "\n";
  }
  fs::path confusion_path = ctx.out_path("confusion.csv");
  write_text_file(confusion_path, csv);
  ctx.note_output(confusion_path);

  std::cout << "[eval] " << kind << " on " << split.test.size() << " held-out examples\n";
  print_metrics(metrics);
}

void stage_report(RunContext& ctx, const Corpus& corpus, const Ontology& ontology) {
  fs::path sentiment_labels_path = ctx.out_path("labels_sentiment.jsonl");
  fs::path emotion_labels_path = ctx.out_path("labels_emotion.jsonl");
  for (const fs::path& path : {sentiment_labels_path, emotion_labels_path}) {
    if (!fs::exists(path)) {
      throw UsageError("labels file not found: " + path.string() + " (run the weaklabel stage first)");
    }
    ctx.note_input(path);
  }

  std::unordered_map<std::string, SentimentLabel> sentiment;
  for (const auto& example : load_labeled_examples(sentiment_labels_path)) {
    auto label = parse_sentiment(example.label);
    if (!label) throw DataError("unknown sentiment label \"" + example.label + "\"");
    sentiment[example.id] = *label;
  }
  std::unordered_map<std::string, EmotionLabel> emotions;
  {
    std::ifstream in(emotion_labels_path, std::ios::binary);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (trim_view(line).empty()) continue;
      json row = json::parse(line);
      auto label = parse_emotion(row.at("label").get<std::string>());
      if (!label) {
        throw DataError(emotion_labels_path.string(), line_no, "unknown emotion label");
      }
      emotions[row.at("post_id").get<std::string>()] = *label;
    }
  }

  CategoryMode mode =
      ctx.cfg.category_mode == "first" ? CategoryMode::FirstMention : CategoryMode::Multi;
  CategorizedCorpus categorized = categorize_corpus(corpus, ontology, mode);
  CategorySample sample = sample_per_category(categorized, ctx.cfg.sample_n, *ctx.cfg.seed);
  for (const auto& warning : sample.warnings) std::cerr << "warning: " << warning << "\n";

  auto rows = sentiment_table(categorized, sample, sentiment);
  std::string sentiment_csv = "category,positive,negative,neutral,sample_size\n";
  for (const auto& row : rows) {
    sentiment_csv += csv_field(std::string(to_string(row.category))) + "," +
                     std::to_string(row.positive) + "," + std::to_string(row.negative) + "," +
                     std::to_string(row.neutral) + "," + std::to_string(row.sample_size) + "\n";
  }
  fs::path sentiment_out = ctx.out_path("sentiment_report.csv");
  write_text_file(sentiment_out, sentiment_csv);
  ctx.note_output(sentiment_out);

  // Emotion histograms over every categorized post that has an emotion label.
  std::map<DrugCategory, std::array<std::size_t, kEmotionCount>> histograms;
  for (DrugCategory category : all_drug_categories()) histograms[category] = {};
  for (const auto& [category, members] : categorized.members) {
    for (std::size_t post_index : members) {
      auto it = emotions.find(corpus.posts[post_index].id);
      if (it == emotions.end()) continue;
      ++histograms[category][static_cast<std::size_t>(it->second)];
    }
  }
  auto emotion_rows = top_emotions(histograms, 3);
  std::string emotion_csv = "category,emotion,count\n";
  for (const auto& row : emotion_rows) {
    for (std::size_t e = 0; e < kEmotionCount; ++e) {
      emotion_csv += csv_field(std::string(to_string(row.category))) + "," +
                     std::string(to_string(all_emotions()[e])) + "," +
                     std::to_string(row.distribution[e]) + "\n";
    }
  }
  fs::path emotion_out = ctx.out_path("emotion_report.csv");
  write_text_file(emotion_out, emotion_csv);
  ctx.note_output(emotion_out);

  fs::path chart_out = ctx.out_path("emotions.svg");
  emit_chart(emotion_rows, chart_out);
  ctx.note_output(chart_out);

  std::cout << "[report] category            positive negative neutral  top emotions\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::string name(to_string(rows[i].category));
    std::cout << "[report] " << name;
    for (std::size_t pad = name.size(); pad < 28; ++pad) std::cout << ' ';
    std::cout << rows[i].positive << " / " << rows[i].negative << " / " << rows[i].neutral << "  ";
    for (std::size_t t = 0; t < emotion_rows[i].top3.size(); ++t) {
      if (t > 0) std::cout << ", ";
      std::cout << to_string(emotion_rows[i].top3[t]);
    }
    std::cout << "\n";
  }
}

int run_command(const std::string& command, Config& cfg) {
  validate_common(cfg);
  fs::create_directories(cfg.out_dir);
  RunContext ctx{cfg, command, {}, {}};

  if (command == "ingest") {
    stage_ingest(ctx);
  } else if (command == "parse-listings") {
    Ontology ontology = load_ontology_input(ctx);
    stage_parse_listings(ctx, ontology);
  } else if (command == "ner") {
    Ontology ontology = load_ontology_input(ctx);
    Corpus corpus = load_corpus(ctx);
    stage_ner(ctx, corpus, ontology);
  } else if (command == "topics") {
    Corpus corpus = load_corpus(ctx);
    stage_topics(ctx, corpus);
  } else if (command == "weaklabel") {
    Corpus corpus = load_corpus(ctx);
    stage_weaklabel(ctx, corpus);
  } else if (command == "train") {
    stage_train(ctx);
  } else if (command == "eval") {
    stage_eval(ctx);
  } else if (command == "report") {
    Ontology ontology = load_ontology_input(ctx);
    Corpus corpus = load_corpus(ctx);
    stage_report(ctx, corpus, ontology);
  } else if (command == "pipeline") {
    Ontology ontology = load_ontology_input(ctx);
    Corpus corpus = stage_ingest(ctx);
    stage_parse_listings(ctx, ontology);
    stage_ner(ctx, corpus, ontology);
    stage_topics(ctx, corpus);
    stage_weaklabel(ctx, corpus);
    stage_train(ctx);
    stage_eval(ctx);
    stage_report(ctx, corpus, ontology);
  } else {
    throw UsageError("unknown subcommand \"" + command + "\"");
  }

  ctx.write_manifest();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"opiscope: corpus analytics for drug-market listings and social posts"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  std::string config_path;
  Config cfg;
  // Flag overrides; empty/unset means "keep the config file value".
  std::optional<std::uint64_t> seed_flag;
  std::optional<std::size_t> sample_n_flag, min_df_flag, lr_epochs_flag, topics_k_flag;
  std::optional<int> ngram_max_flag;
  std::optional<std::string> model_flag, corpus_flag, listings_flag, ontology_flag, lexicon_flag,
      hashtag_map_flag, out_flag, task_flag;

  const std::vector<std::string> commands = {"ingest", "parse-listings", "ner",
                                             "topics", "weaklabel",      "train",
                                             "eval",   "report",         "pipeline"};
  const std::map<std::string, std::string> descriptions = {
      {"ingest", "Load and normalize a corpus to posts.jsonl"},
      {"parse-listings", "Parse raw market listing records into the typed schema"},
      {"ner", "Emit gazetteer entity mentions as JSONL"},
      {"topics", "Per-collection TF-IDF top terms as CSV"},
      {"weaklabel", "Generate weak sentiment and hashtag emotion labels"},
      {"train", "Train the configured classifier on weak labels"},
      {"eval", "Evaluate the trained model on the held-out split"},
      {"report", "Per-category sentiment/emotion tables and chart"},
      {"pipeline", "Run every stage in order"},
  };
  for (const auto& name : commands) {
    CLI::App* sub = app.add_subcommand(name, descriptions.at(name));
    sub->add_option("--config", config_path, "Key-value config file");
    sub->add_option("--corpus", corpus_flag, "Corpus file (JSONL or CSV)");
    sub->add_option("--listings", listings_flag, "Raw listings JSONL");
    sub->add_option("--ontology", ontology_flag, "Ontology TSV");
    sub->add_option("--lexicon", lexicon_flag, "Polarity lexicon TSV");
    sub->add_option("--hashtag-map", hashtag_map_flag, "Emotion hashtag map TSV");
    sub->add_option("--out", out_flag, "Output directory");
    sub->add_option("--seed", seed_flag, "Deterministic seed (required)");
    sub->add_option("--sample-n", sample_n_flag, "Sample size per category");
    sub->add_option("--ngram-max", ngram_max_flag, "Largest n-gram (1-3)");
    sub->add_option("--min-df", min_df_flag, "Minimum document frequency");
    sub->add_option("--topics-k", topics_k_flag, "Top terms per collection");
    sub->add_option("--lr-epochs", lr_epochs_flag, "Gradient descent epochs");
    sub->add_option("--model", model_flag, "Classifier: nb or lr")
        ->check(CLI::IsMember({"nb", "lr"}));
    sub->add_option("--task", task_flag, "Label task: sentiment or emotion")
        ->check(CLI::IsMember({"sentiment", "emotion"}));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (!config_path.empty()) load_config_file(cfg, config_path);
    if (corpus_flag) cfg.corpus = *corpus_flag;
    if (listings_flag) cfg.listings = *listings_flag;
    if (ontology_flag) cfg.ontology = *ontology_flag;
    if (lexicon_flag) cfg.lexicon = *lexicon_flag;
    if (hashtag_map_flag) cfg.hashtag_map = *hashtag_map_flag;
    if (out_flag) cfg.out_dir = *out_flag;
    if (seed_flag) cfg.seed = *seed_flag;
    if (sample_n_flag) cfg.sample_n = *sample_n_flag;
    if (ngram_max_flag) cfg.ngram_max = *ngram_max_flag;
    if (min_df_flag) cfg.min_df = *min_df_flag;
    if (topics_k_flag) cfg.topics_k = *topics_k_flag;
    if (lr_epochs_flag) cfg.lr_epochs = *lr_epochs_flag;
    if (model_flag) cfg.model = *model_flag;
    if (task_flag) cfg.task = *task_flag;

    return run_command(app.get_subcommands().front()->get_name(), cfg);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
}
