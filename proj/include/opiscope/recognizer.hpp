#pragma once

#include "opiscope/corpus.hpp"
#include "opiscope/ontology.hpp"

#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace opiscope {

struct EntityMention {
  std::string alias;      // ontology spelling that matched, lowercase
  std::string canonical;
  DrugCategory category = DrugCategory::Heroin;
  std::size_t token_begin = 0;  // [token_begin, token_end)
  std::size_t token_end = 0;
  std::size_t char_begin = 0;   // byte offsets into the source text
  std::size_t char_end = 0;
};

// Gazetteer pass over the token sequence: at each position the longest
// alias wins, matched tokens are consumed, mentions come back in text order.
std::vector<EntityMention> recognize(std::string_view text, const Ontology& ontology);
std::vector<EntityMention> recognize(const TokenSequence& tokens, const Ontology& ontology);

// Categories of every mention in the post's text; empty set when none.
std::set<DrugCategory> categorize(const Post& post, const Ontology& ontology);

}  // namespace opiscope
