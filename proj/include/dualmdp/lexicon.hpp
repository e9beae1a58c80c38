#pragma once

#include <map>
#include <string>
#include <vector>

namespace dualmdp {

// Task instruction with its verb-phrase span [vp_begin, vp_end) over tokens.
struct Instruction {
  std::string text;
  std::vector<std::string> tokens;
  int vp_begin = 0;
  int vp_end = 0;

  std::vector<std::string> vp_tokens() const {
    return {tokens.begin() + vp_begin, tokens.begin() + vp_end};
  }
};

// Embedded POS/antonym lexicon standing in for the external parser and
// WordNet services.  Antonym lists are ranked; the relation is symmetric.
struct Lexicon {
  std::map<std::string, std::vector<std::string>> pos_table;
  std::map<std::string, std::vector<std::string>> antonym_table;

  bool has_word(const std::string& w) const { return pos_table.count(w) > 0; }
  bool has_tag(const std::string& w, const std::string& tag) const;

  // Throws std::logic_error when the antonym relation is not symmetric.
  void validate() const;
};

// One record per line: word <TAB> pos-tags(comma-sep) <TAB> antonyms(comma-sep,
// ranked, may be empty).  Lines starting with '#' are skipped.
Lexicon load_lexicon(const std::string& path);
Lexicon load_lexicon_default();  // data/lexicon.tsv shipped with the project

std::vector<std::string> tokenize(const std::string& text);

// Shallow parse: the verb phrase is the maximal initial run of
// verb/particle/adverb tokens; the remainder is the noun phrase.
// Throws std::invalid_argument on unknown tokens or when no verb is found.
Instruction parse_vp(const std::string& text, const Lexicon& lexicon);

// Replace every verb-phrase token by its rank-1 antonym.
// Throws std::invalid_argument naming the word when an antonym is missing.
Instruction symmetrize_instruction(const Instruction& instr,
                                   const Lexicon& lexicon);

}  // namespace dualmdp
