#include "dualmdp/embedding.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

#include "dualmdp/rng.hpp"

namespace dualmdp {

uint64_t Vocab::hash() const {
  uint64_t h = 1469598103934665603ull;
  for (const auto& [w, i] : index) {
    h = fnv1a_str(w, h);
    h = fnv1a(&i, sizeof(i), h);
  }
  return h;
}

Vocab build_vocab(const std::vector<std::string>& corpus_texts) {
  std::set<std::string> words;
  for (const std::string& text : corpus_texts)
    for (const std::string& t : tokenize(text)) words.insert(t);
  Vocab v;
  int next = 1;  // 0 reserved for OOV
  for (const std::string& w : words) v.index[w] = next++;
  return v;
}

std::vector<double> count_vector(const std::vector<std::string>& tokens,
                                 const Vocab& vocab) {
  std::vector<double> counts(static_cast<size_t>(vocab.size()), 0.0);
  for (const std::string& t : tokens)
    counts[static_cast<size_t>(vocab.lookup(t))] += 1.0;
  return counts;
}

InstructionEmbedding embed(const std::vector<std::string>& tokens,
                           const Vocab& vocab, const std::vector<double>& W) {
  const size_t v = static_cast<size_t>(vocab.size());
  if (W.size() != v * kEmbeddingDim)
    throw std::invalid_argument("embed: projection size mismatch");
  const std::vector<double> counts = count_vector(tokens, vocab);
  InstructionEmbedding e;
  e.vector.assign(kEmbeddingDim, 0.0);
  for (size_t r = 0; r < v; ++r) {
    if (counts[r] == 0.0) continue;
    for (int c = 0; c < kEmbeddingDim; ++c)
      e.vector[static_cast<size_t>(c)] += counts[r] * W[r * kEmbeddingDim + c];
  }
  for (double& x : e.vector) x = std::tanh(x);
  return e;
}

std::vector<double> init_embedding_table(int vocab_size, uint64_t seed) {
  Rng rng(seed);
  std::vector<double> W(static_cast<size_t>(vocab_size) * kEmbeddingDim);
  for (double& w : W) w = rng.normal(0.0, 0.5);
  return W;
}

}  // namespace dualmdp
