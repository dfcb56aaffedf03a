#pragma once

#include "opiscope/ontology.hpp"

#include <json.hpp>

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace opiscope {

enum class Unit { Gram, Milligram, Kilogram, Unit };
std::string_view to_string(Unit unit);

struct Quantity {
  double value = 0.0;  // >= 0
  Unit unit = Unit::Unit;
  bool operator==(const Quantity&) const = default;
};

enum class Currency { Btc, Usd, Eur };
std::string_view to_string(Currency currency);
std::optional<Currency> parse_currency(std::string_view code);

struct Price {
  double amount = 0.0;  // >= 0
  Currency currency = Currency::Usd;
  bool operator==(const Price&) const = default;
};

// "50 gram" -> {50, gram}. Leading decimal number plus a unit word; unit
// aliases normalized (g/gr/gram/grams, mg, kg); an unrecognized or missing
// unit with a valid number falls back to Unit::Unit.
Quantity parse_quantity(std::string_view raw);

// "BTC 0.0444" / "0.5 eur" / "btc0.5". Exactly one case-insensitive currency
// code, before or after the amount.
Price parse_price(std::string_view raw);

std::string format_quantity(const Quantity& quantity);
std::string format_price(const Price& price);

struct Listing {
  std::string product_name;
  std::optional<std::string> substance;   // canonical entity name
  std::optional<std::string> drug_class;  // derived from the ontology
  std::optional<Quantity> dosage;
  std::optional<Quantity> quantity;
  std::optional<std::string> vendor;
  std::optional<Price> price;
  std::optional<std::string> ships_to;
  std::optional<std::string> ships_from;
  std::vector<std::string> warnings;      // optional fields that failed to parse
};

// Keys: name (required), substance, class, dosage, quantity, vendor, price,
// ships_to, ships_from. Substance comes from the explicit key when present,
// otherwise from gazetteer recognition over the product name; class always
// comes from the ontology. Optional-field parse failures become warnings.
Listing parse_listing(const std::map<std::string, std::string>& record, const Ontology& ontology);

nlohmann::json listing_to_json(const Listing& listing);

}  // namespace opiscope
