#include "opiscope/listing.hpp"

#include "opiscope/errors.hpp"
#include "opiscope/recognizer.hpp"
#include "opiscope/util.hpp"

#include <charconv>
#include <cmath>

namespace opiscope {

std::string_view to_string(Unit unit) {
  switch (unit) {
    case Unit::Gram: return "gram";
    case Unit::Milligram: return "milligram";
    case Unit::Kilogram: return "kilogram";
    case Unit::Unit: return "unit";
  }
  return "unit";
}

std::string_view to_string(Currency currency) {
  switch (currency) {
    case Currency::Btc: return "BTC";
    case Currency::Usd: return "USD";
    case Currency::Eur: return "EUR";
  }
  return "USD";
}

std::optional<Currency> parse_currency(std::string_view code) {
  std::string c = to_lower_copy(code);
  if (c == "btc") return Currency::Btc;
  if (c == "usd") return Currency::Usd;
  if (c == "eur") return Currency::Eur;
  return std::nullopt;
}

namespace {

// Parses a non-negative decimal ('.' separator only) at pos; advances pos.
std::optional<double> parse_leading_number(std::string_view s, std::size_t& pos) {
  std::size_t start = pos;
  if (start >= s.size()) return std::nullopt;
  char first = s[start];
  if (!is_ascii_digit(first) && first != '.') return std::nullopt;

  double value = 0.0;
  auto result = std::from_chars(s.data() + start, s.data() + s.size(), value);
  if (result.ec != std::errc{} || result.ptr == s.data() + start) return std::nullopt;
  if (!std::isfinite(value) || value < 0.0) return std::nullopt;
  pos = static_cast<std::size_t>(result.ptr - s.data());
  return value;
}

void skip_spaces(std::string_view s, std::size_t& pos) {
  while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t')) ++pos;
}

std::string take_word(std::string_view s, std::size_t& pos) {
  std::size_t start = pos;
  while (pos < s.size() && is_ascii_alpha(s[pos])) ++pos;
  return to_lower_copy(s.substr(start, pos - start));
}

Unit normalize_unit(std::string_view word) {
  std::string w = to_lower_copy(word);
  if (w == "g" || w == "gr" || w == "gram" || w == "grams") return Unit::Gram;
  if (w == "mg" || w == "milligram" || w == "milligrams") return Unit::Milligram;
  if (w == "kg" || w == "kilogram" || w == "kilograms") return Unit::Kilogram;
  return Unit::Unit;
}

}  // namespace

Quantity parse_quantity(std::string_view raw) {
  std::size_t pos = 0;
  skip_spaces(raw, pos);
  auto value = parse_leading_number(raw, pos);
  if (!value) {
    throw QuantityParseError("no leading number in quantity \"" + std::string(raw) + "\"");
  }
  skip_spaces(raw, pos);
  std::string word = take_word(raw, pos);
  return Quantity{*value, normalize_unit(word)};
}

Price parse_price(std::string_view raw) {
  std::size_t pos = 0;
  skip_spaces(raw, pos);

  std::optional<Currency> currency;
  auto read_code = [&]() -> bool {
    std::size_t probe = pos;
    std::string word = take_word(raw, probe);
    if (word.empty()) return false;
    auto parsed = parse_currency(word);
    if (!parsed) {
      throw PriceParseError("unknown currency code \"" + word + "\" in \"" + std::string(raw) +
                            "\"");
    }
    if (currency) {
      throw PriceParseError("two currency codes in \"" + std::string(raw) + "\"");
    }
    currency = parsed;
    pos = probe;
    return true;
  };

  read_code();
  skip_spaces(raw, pos);
  auto amount = parse_leading_number(raw, pos);
  if (!amount) {
    throw PriceParseError("missing amount in price \"" + std::string(raw) + "\"");
  }
  skip_spaces(raw, pos);
  read_code();
  skip_spaces(raw, pos);
  if (pos != raw.size()) {
    throw PriceParseError("trailing characters in price \"" + std::string(raw) + "\"");
  }
  if (!currency) {
    throw PriceParseError("missing currency code in \"" + std::string(raw) + "\"");
  }
  return Price{*amount, *currency};
}

std::string format_quantity(const Quantity& quantity) {
  return format_shortest(quantity.value) + " " + std::string(to_string(quantity.unit));
}

std::string format_price(const Price& price) {
  return std::string(to_string(price.currency)) + " " + format_shortest(price.amount);
}

Listing parse_listing(const std::map<std::string, std::string>& record, const Ontology& ontology) {
  auto field = [&](const char* key) -> std::optional<std::string> {
    auto it = record.find(key);
    if (it == record.end()) return std::nullopt;
    std::string value(trim_view(it->second));
    if (value.empty()) return std::nullopt;
    return value;
  };

  Listing listing;
  auto name = field("name");
  if (!name) throw ListingParseError("listing record has no product name");
  listing.product_name = *name;

  // Substance: explicit key wins; otherwise first gazetteer mention in the
  // product name. Class is always the ontology's, never the record's.
  if (auto substance = field("substance")) {
    if (auto resolved = ontology.resolve(*substance)) {
      listing.substance = resolved->canonical;
      listing.drug_class = resolved->drug_class;
    } else {
      listing.warnings.push_back("substance \"" + *substance + "\" not in ontology");
    }
  } else {
    auto mentions = recognize(listing.product_name, ontology);
    if (!mentions.empty()) {
      listing.substance = mentions.front().canonical;
      if (const OntologyEntry* entry = ontology.find(mentions.front().alias)) {
        listing.drug_class = entry->drug_class;
      }
    }
  }

  auto parse_quantity_field = [&](const char* key, std::optional<Quantity>& out) {
    auto value = field(key);
    if (!value) return;
    try {
      out = parse_quantity(*value);
    } catch (const QuantityParseError& e) {
      listing.warnings.push_back(std::string(key) + ": " + e.what());
    }
  };
  parse_quantity_field("dosage", listing.dosage);
  parse_quantity_field("quantity", listing.quantity);

  if (auto price = field("price")) {
    try {
      listing.price = parse_price(*price);
    } catch (const PriceParseError& e) {
      listing.warnings.push_back(std::string("price: ") + e.what());
    }
  }

  listing.vendor = field("vendor");
  listing.ships_to = field("ships_to");
  listing.ships_from = field("ships_from");
  return listing;
}

nlohmann::json listing_to_json(const Listing& listing) {
  nlohmann::json out = nlohmann::json::object();
  out["name"] = listing.product_name;
  if (listing.substance) out["substance"] = *listing.substance;
  if (listing.drug_class) out["class"] = *listing.drug_class;
  if (listing.dosage) out["dosage"] = format_quantity(*listing.dosage);
  if (listing.quantity) out["quantity"] = format_quantity(*listing.quantity);
  if (listing.vendor) out["vendor"] = *listing.vendor;
  if (listing.price) out["price"] = format_price(*listing.price);
  if (listing.ships_to) out["ships_to"] = *listing.ships_to;
  if (listing.ships_from) out["ships_from"] = *listing.ships_from;
  out["warnings"] = listing.warnings;
  return out;
}

}  // namespace opiscope
