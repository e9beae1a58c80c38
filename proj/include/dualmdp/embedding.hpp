#pragma once

#include <map>
#include <string>
#include <vector>

#include "dualmdp/lexicon.hpp"

namespace dualmdp {

constexpr int kEmbeddingDim = 16;

// Word -> index map built from the registered instruction corpus.
// Index 0 is reserved for out-of-vocabulary words.
struct Vocab {
  std::map<std::string, int> index;

  int size() const { return static_cast<int>(index.size()) + 1; }
  int lookup(const std::string& w) const {
    auto it = index.find(w);
    return it == index.end() ? 0 : it->second;
  }
  uint64_t hash() const;
};

Vocab build_vocab(const std::vector<std::string>& corpus_texts);

// Bag-of-words counts over the vocab (position 0 counts OOV words).
std::vector<double> count_vector(const std::vector<std::string>& tokens,
                                 const Vocab& vocab);

struct InstructionEmbedding {
  std::vector<double> vector;  // kEmbeddingDim, components in (-1, 1)
};

// tanh(W^T counts); W is (vocab.size() x kEmbeddingDim) row-major.  The map
// is learned inside the policy; a seeded table is provided for standalone use.
InstructionEmbedding embed(const std::vector<std::string>& tokens,
                           const Vocab& vocab, const std::vector<double>& W);

std::vector<double> init_embedding_table(int vocab_size, uint64_t seed);

}  // namespace dualmdp
