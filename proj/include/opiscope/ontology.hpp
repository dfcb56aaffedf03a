#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace opiscope {

// The eight supercategories drug entities map to. Order here is the
// declaration order used for report rows and tie-breaking.
enum class DrugCategory {
  Heroin,
  SyntheticHeroin,
  PharmaceuticalFentanyl,
  NonPharmaceuticalFentanyl,
  Fentanyl,
  Oxycodone,
  Kratom,
  Opium,
};

inline constexpr std::size_t kDrugCategoryCount = 8;

const std::array<DrugCategory, kDrugCategoryCount>& all_drug_categories();
std::string_view to_string(DrugCategory category);
// Accepts display names ("Synthetic Heroin") and compact forms
// ("SyntheticHeroin", "synthetic-heroin"), case-insensitively.
std::optional<DrugCategory> parse_drug_category(std::string_view token);

struct OntologyEntry {
  std::string canonical;             // e.g. "Heroin"
  std::string drug_class;            // e.g. "Opiate"
  DrugCategory supercategory = DrugCategory::Heroin;
  std::vector<std::string> aliases;  // lowercase; includes the canonical form
};

struct Resolution {
  std::string canonical;
  std::string drug_class;
  DrugCategory category = DrugCategory::Heroin;
  bool operator==(const Resolution&) const = default;
};

// Alias lexicon with case-insensitive, exact-after-tokenization lookup.
// Immutable once built.
class Ontology {
 public:
  Ontology() = default;

  // TSV columns: canonical, drug_class, supercategory, aliases ('|'-separated).
  // '#' starts a comment line. Duplicate aliases (after tokenization), unknown
  // supercategory tokens and untokenizable aliases fail with the line number.
  static Ontology load(const std::filesystem::path& path);
  static Ontology from_entries(std::vector<OntologyEntry> entries);

  std::optional<Resolution> resolve(std::string_view alias) const;
  const OntologyEntry* find(std::string_view alias) const;

  const std::vector<OntologyEntry>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }

  // Alias table keyed by the space-joined token form; used by the recognizer.
  struct AliasItem {
    std::string alias;        // original lowercase spelling
    std::size_t entry = 0;    // index into entries()
    std::size_t n_tokens = 0;
  };
  const std::unordered_map<std::string, AliasItem>& alias_index() const { return alias_index_; }
  std::size_t max_alias_tokens() const { return max_alias_tokens_; }

 private:
  // Returns an error message instead of throwing so loaders can add context.
  std::string add_entry(OntologyEntry entry);

  std::vector<OntologyEntry> entries_;
  std::unordered_map<std::string, AliasItem> alias_index_;
  std::size_t max_alias_tokens_ = 0;
};

}  // namespace opiscope
