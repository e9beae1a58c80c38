#include "dualmdp/lexicon.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dualmdp {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(item);
  return out;
}

bool vp_tag(const std::string& tag) {
  return tag == "VB" || tag == "RP" || tag == "RB";
}

}  // namespace

bool Lexicon::has_tag(const std::string& w, const std::string& tag) const {
  auto it = pos_table.find(w);
  if (it == pos_table.end()) return false;
  return std::find(it->second.begin(), it->second.end(), tag) !=
         it->second.end();
}

void Lexicon::validate() const {
  for (const auto& [word, ants] : antonym_table) {
    for (const std::string& a : ants) {
      auto it = antonym_table.find(a);
      if (it == antonym_table.end() ||
          std::find(it->second.begin(), it->second.end(), word) ==
              it->second.end())
        throw std::logic_error("lexicon: antonym relation not symmetric for '" +
                               word + "' -> '" + a + "'");
    }
  }
}

Lexicon load_lexicon(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open lexicon file: " + path);
  Lexicon lex;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto fields = split(line, '\t');
    if (fields.size() < 2)
      throw std::runtime_error("lexicon: malformed line: " + line);
    const std::string& word = fields[0];
    lex.pos_table[word] = split(fields[1], ',');
    if (fields.size() >= 3 && !fields[2].empty())
      lex.antonym_table[word] = split(fields[2], ',');
  }
  lex.validate();
  return lex;
}

Lexicon load_lexicon_default() {
  return load_lexicon(std::string(DUALMDP_DATA_DIR) + "/lexicon.tsv");
}

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!cur.empty()) tokens.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(static_cast<char>(
          std::tolower(static_cast<unsigned char>(c))));
    }
  }
  if (!cur.empty()) tokens.push_back(cur);
  return tokens;
}

Instruction parse_vp(const std::string& text, const Lexicon& lexicon) {
  Instruction instr;
  instr.text = text;
  instr.tokens = tokenize(text);
  if (instr.tokens.empty())
    throw std::invalid_argument("parse_vp: empty instruction");

  for (const std::string& t : instr.tokens)
    if (!lexicon.has_word(t))
      throw std::invalid_argument("parse_vp: unknown token '" + t + "'");

  int end = 0;
  bool has_verb = false;
  for (const std::string& t : instr.tokens) {
    const auto& tags = lexicon.pos_table.at(t);
    const bool in_vp = std::any_of(tags.begin(), tags.end(), [](const auto& g) {
      return vp_tag(g);
    });
    if (!in_vp) break;
    has_verb = has_verb || lexicon.has_tag(t, "VB");
    ++end;
  }
  if (end == 0 || !has_verb)
    throw std::invalid_argument("parse_vp: no verb found in '" + text + "'");
  instr.vp_begin = 0;
  instr.vp_end = end;
  return instr;
}

Instruction symmetrize_instruction(const Instruction& instr,
                                   const Lexicon& lexicon) {
  Instruction out = instr;
  for (int i = instr.vp_begin; i < instr.vp_end; ++i) {
    const std::string& w = instr.tokens[static_cast<size_t>(i)];
    auto it = lexicon.antonym_table.find(w);
    if (it == lexicon.antonym_table.end() || it->second.empty())
      throw std::invalid_argument("symmetrize: no antonym for '" + w + "'");
    out.tokens[static_cast<size_t>(i)] = it->second.front();
  }
  std::string text;
  for (size_t i = 0; i < out.tokens.size(); ++i) {
    if (i) text += ' ';
    text += out.tokens[i];
  }
  out.text = text;
  return out;
}

}  // namespace dualmdp
