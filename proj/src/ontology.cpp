#include "opiscope/ontology.hpp"

#include "opiscope/corpus.hpp"
#include "opiscope/errors.hpp"
#include "opiscope/util.hpp"

#include <fstream>
#include <sstream>

namespace opiscope {

const std::array<DrugCategory, kDrugCategoryCount>& all_drug_categories() {
  static const std::array<DrugCategory, kDrugCategoryCount> categories = {
      DrugCategory::Heroin,
      DrugCategory::SyntheticHeroin,
      DrugCategory::PharmaceuticalFentanyl,
      DrugCategory::NonPharmaceuticalFentanyl,
      DrugCategory::Fentanyl,
      DrugCategory::Oxycodone,
      DrugCategory::Kratom,
      DrugCategory::Opium,
  };
  return categories;
}

std::string_view to_string(DrugCategory category) {
  switch (category) {
    case DrugCategory::Heroin: return "Heroin";
    case DrugCategory::SyntheticHeroin: return "Synthetic Heroin";
    case DrugCategory::PharmaceuticalFentanyl: return "Pharmaceutical Fentanyl";
    case DrugCategory::NonPharmaceuticalFentanyl: return "Non-Pharmaceutical Fentanyl";
    case DrugCategory::Fentanyl: return "Fentanyl";
    case DrugCategory::Oxycodone: return "Oxycodone";
    case DrugCategory::Kratom: return "Kratom";
    case DrugCategory::Opium: return "Opium";
  }
  return "Heroin";
}

std::optional<DrugCategory> parse_drug_category(std::string_view token) {
  std::string compact;
  for (char c : token) {
    if (c == ' ' || c == '-' || c == '_') continue;
    compact.push_back(ascii_lower(c));
  }
  for (DrugCategory category : all_drug_categories()) {
    std::string key;
    for (char c : to_string(category)) {
      if (c == ' ' || c == '-') continue;
      key.push_back(ascii_lower(c));
    }
    if (key == compact) return category;
  }
  return std::nullopt;
}

std::string Ontology::add_entry(OntologyEntry entry) {
  const std::size_t index = entries_.size();

  // The canonical name is always an alias of itself.
  std::vector<std::string> aliases;
  aliases.push_back(to_lower_copy(entry.canonical));
  for (const auto& alias : entry.aliases) {
    aliases.push_back(to_lower_copy(trim_view(alias)));
  }

  std::vector<std::string> kept;
  for (const auto& alias : aliases) {
    if (alias.empty()) return "empty alias";
    TokenSequence toks = tokenize(alias);
    if (toks.empty()) return "alias \"" + alias + "\" has no tokens";
    std::string key = join_tokens(toks.tokens);
    auto it = alias_index_.find(key);
    if (it != alias_index_.end()) {
      if (it->second.entry != index) {
        return "duplicate alias \"" + alias + "\" (already maps to \"" +
               entries_[it->second.entry].canonical + "\")";
      }
      continue;  // same entry listed a spelling twice
    }
    alias_index_.emplace(std::move(key), AliasItem{alias, index, toks.size()});
    max_alias_tokens_ = std::max(max_alias_tokens_, toks.size());
    kept.push_back(alias);
  }

  entry.aliases = std::move(kept);
  entries_.push_back(std::move(entry));
  return {};
}

Ontology Ontology::from_entries(std::vector<OntologyEntry> entries) {
  Ontology ontology;
  for (auto& entry : entries) {
    if (std::string err = ontology.add_entry(std::move(entry)); !err.empty()) {
      throw DataError("ontology: " + err);
    }
  }
  return ontology;
}

Ontology Ontology::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("failed to open " + path.string());
  const std::string file = path.string();

  Ontology ontology;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view trimmed = trim_view(line);
    if (trimmed.empty() || trimmed.front() == '#') continue;

    std::vector<std::string> columns = split(line, '\t');
    if (columns.size() != 4) {
      throw DataError(file, line_no,
                      "expected 4 tab-separated columns, got " + std::to_string(columns.size()));
    }
    OntologyEntry entry;
    entry.canonical = std::string(trim_view(columns[0]));
    entry.drug_class = std::string(trim_view(columns[1]));
    if (entry.canonical.empty()) throw DataError(file, line_no, "empty canonical name");

    auto category = parse_drug_category(trim_view(columns[2]));
    if (!category) {
      throw DataError(file, line_no,
                      "unknown supercategory \"" + std::string(trim_view(columns[2])) + "\"");
    }
    entry.supercategory = *category;

    if (!trim_view(columns[3]).empty()) {
      for (auto& alias : split(columns[3], '|')) {
        std::string_view t = trim_view(alias);
        if (t.empty()) throw DataError(file, line_no, "empty alias");
        entry.aliases.emplace_back(t);
      }
    }

    if (std::string err = ontology.add_entry(std::move(entry)); !err.empty()) {
      throw DataError(file, line_no, err);
    }
  }
  return ontology;
}

const OntologyEntry* Ontology::find(std::string_view alias) const {
  TokenSequence toks = tokenize(alias);
  if (toks.empty()) return nullptr;
  auto it = alias_index_.find(join_tokens(toks.tokens));
  if (it == alias_index_.end()) return nullptr;
  return &entries_[it->second.entry];
}

std::optional<Resolution> Ontology::resolve(std::string_view alias) const {
  const OntologyEntry* entry = find(alias);
  if (!entry) return std::nullopt;
  return Resolution{entry->canonical, entry->drug_class, entry->supercategory};
}

}  // namespace opiscope
