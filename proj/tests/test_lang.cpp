#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <set>

#include "dualmdp/embedding.hpp"
#include "dualmdp/lexicon.hpp"
#include "dualmdp/registry.hpp"

using namespace dualmdp;

namespace {

const Lexicon& lex() {
  static const Lexicon l = load_lexicon_default();
  return l;
}

std::vector<std::string> corpus_texts() {
  std::vector<std::string> out;
  for (const auto& [id, text] : builtin_registry().instructions)
    out.push_back(text);
  return out;
}

}  // namespace

TEST_CASE("verb phrase of the drawer instruction matches the parse tree") {
  const Instruction i = parse_vp("push forward the drawer handle", lex());
  CHECK(i.vp_tokens() == std::vector<std::string>{"push", "forward"});
  CHECK(i.tokens.size() == 5);
}

TEST_CASE("single-verb instruction") {
  const Instruction i = parse_vp("open the door", lex());
  CHECK(i.vp_tokens() == std::vector<std::string>{"open"});
}

TEST_CASE("instruction without a verb is rejected") {
  CHECK_THROWS_AS(parse_vp("the drawer handle", lex()), std::invalid_argument);
}

TEST_CASE("unknown tokens are rejected by name") {
  try {
    parse_vp("open the spaceship", lex());
    FAIL("expected error");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("spaceship") != std::string::npos);
  }
}

TEST_CASE("drawer pair reproduces the reference strings") {
  const Instruction i = parse_vp("push forward the drawer handle", lex());
  const Instruction s = symmetrize_instruction(i, lex());
  CHECK(s.text == "pull backward the drawer handle");
  const Instruction back = symmetrize_instruction(s, lex());
  CHECK(back.text == "push forward the drawer handle");
}

TEST_CASE("door pair") {
  const Instruction i = parse_vp("open the door", lex());
  CHECK(symmetrize_instruction(i, lex()).text == "close the door");
}

TEST_CASE("missing antonym is an error naming the word") {
  Lexicon small;
  small.pos_table["wiggle"] = {"VB"};
  small.pos_table["it"] = {"NN"};
  const Instruction i = parse_vp("wiggle it", small);
  try {
    symmetrize_instruction(i, small);
    FAIL("expected error");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("wiggle") != std::string::npos);
  }
}

TEST_CASE("symmetrization changes only the verb-phrase span") {
  for (const std::string& text : corpus_texts()) {
    const Instruction i = parse_vp(text, lex());
    const Instruction s = symmetrize_instruction(i, lex());
    REQUIRE(s.tokens.size() == i.tokens.size());
    for (size_t k = 0; k < i.tokens.size(); ++k) {
      const bool in_vp = static_cast<int>(k) >= i.vp_begin &&
                         static_cast<int>(k) < i.vp_end;
      if (!in_vp) CHECK(s.tokens[k] == i.tokens[k]);
    }
  }
}

TEST_CASE("corpus coverage: every registered instruction parses and round-trips") {
  const TaskSetRegistry reg = builtin_registry();
  REQUIRE(reg.instructions.size() == 12);
  for (const auto& [id, text] : reg.instructions) {
    const Instruction i = parse_vp(text, lex());
    CHECK(i.vp_end > i.vp_begin);
    const Instruction s = symmetrize_instruction(i, lex());
    const Instruction back = symmetrize_instruction(s, lex());
    CHECK(back.text == text);
    // the symmetrical instruction is the registered instruction of the
    // paired task
    CHECK(s.text == reg.instruction_text(symmetric_family(id)));
  }
}

TEST_CASE("lexicon antonym relation is symmetric") {
  CHECK_NOTHROW(lex().validate());
  Lexicon broken;
  broken.pos_table["up"] = {"RB"};
  broken.pos_table["down"] = {"RB"};
  broken.antonym_table["up"] = {"down"};
  CHECK_THROWS_AS(broken.validate(), std::logic_error);
}

TEST_CASE("embedding: zero counts give the zero vector") {
  const Vocab v = build_vocab(corpus_texts());
  const auto W = init_embedding_table(v.size(), 3);
  const InstructionEmbedding e = embed({}, v, W);
  for (double x : e.vector) CHECK(x == 0.0);
}

TEST_CASE("embedding is a bag of words") {
  const Vocab v = build_vocab(corpus_texts());
  const auto W = init_embedding_table(v.size(), 3);
  const auto a = embed({"open", "the", "door"}, v, W);
  const auto b = embed({"door", "open", "the"}, v, W);
  CHECK(a.vector == b.vector);
  for (double x : a.vector) {
    CHECK(x > -1.0);
    CHECK(x < 1.0);
  }
}

TEST_CASE("out-of-vocabulary words map to the reserved index") {
  const Vocab v = build_vocab(corpus_texts());
  CHECK(v.lookup("zebra") == 0);
  const auto counts = count_vector({"zebra", "zebra", "door"}, v);
  CHECK(counts[0] == 2.0);
}

TEST_CASE("registered instructions have pairwise distinct count vectors") {
  const Vocab v = build_vocab(corpus_texts());
  std::set<std::vector<double>> seen;
  for (const std::string& text : corpus_texts())
    seen.insert(count_vector(tokenize(text), v));
  CHECK(seen.size() == corpus_texts().size());
}
