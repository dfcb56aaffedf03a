#include "opiscope/recognizer.hpp"

namespace opiscope {

std::vector<EntityMention> recognize(const TokenSequence& tokens, const Ontology& ontology) {
  std::vector<EntityMention> mentions;
  const auto& index = ontology.alias_index();
  if (index.empty() || tokens.empty()) return mentions;

  const std::size_t n = tokens.size();
  std::size_t pos = 0;
  std::string key;
  while (pos < n) {
    std::size_t longest = std::min(ontology.max_alias_tokens(), n - pos);
    bool matched = false;
    for (std::size_t len = longest; len >= 1 && !matched; --len) {
      key.clear();
      for (std::size_t k = pos; k < pos + len; ++k) {
        if (k > pos) key.push_back(' ');
        key += tokens.tokens[k];
      }
      auto it = index.find(key);
      if (it == index.end()) continue;

      const auto& item = it->second;
      const auto& entry = ontology.entries()[item.entry];
      EntityMention mention;
      mention.alias = item.alias;
      mention.canonical = entry.canonical;
      mention.category = entry.supercategory;
      mention.token_begin = pos;
      mention.token_end = pos + len;
      mention.char_begin = tokens.spans[pos].begin;
      mention.char_end = tokens.spans[pos + len - 1].end;
      mentions.push_back(std::move(mention));
      pos += len;  // consume; mentions never overlap
      matched = true;
    }
    if (!matched) ++pos;
  }
  return mentions;
}

std::vector<EntityMention> recognize(std::string_view text, const Ontology& ontology) {
  return recognize(tokenize(text), ontology);
}

std::set<DrugCategory> categorize(const Post& post, const Ontology& ontology) {
  std::set<DrugCategory> categories;
  for (const auto& mention : recognize(post.text, ontology)) {
    categories.insert(mention.category);
  }
  return categories;
}

}  // namespace opiscope
