#pragma once

#include <cstdint>
#include <filesystem>
#include <span>

#include "hoaxdet/core/tensor.hpp"
#include "hoaxdet/text/pipeline.hpp"

namespace hoaxdet::w2v {

struct SkipGramConfig {
  std::size_t dim = 50;
  std::size_t window = 5;
  std::size_t negatives = 5;
  std::size_t epochs = 5;
  double learning_rate = 0.025;  // decays linearly towards learning_rate * 1e-4
  std::uint64_t seed = 0;
};

struct EmbeddingMatrix {
  text::Vocabulary vocab;
  Tensor<float> table;  // [V x dim]

  std::span<const float> row(text::TokenId id) const {
    return {table.data() + static_cast<Index>(id) * table.dim(1), static_cast<std::size_t>(table.dim(1))};
  }
};

/// Skip-gram with negative sampling over the token lists of `corpus`.
/// Negatives are drawn from the unigram distribution raised to 0.75; PAD and
/// OOV rows stay zero and never appear in training pairs. Single-threaded and
/// bitwise deterministic for a given seed.
EmbeddingMatrix train_skipgram(std::span<const text::TokenList> corpus, const text::Vocabulary& vocab,
                               const SkipGramConfig& config = {});

double cosine_similarity(std::span<const float> u, std::span<const float> v);

/// Text format: first line "<V> <dim>", then "<token> <dim floats>" per row.
void save_embeddings(const EmbeddingMatrix& matrix, const std::filesystem::path& path);
std::string serialize_embeddings(const EmbeddingMatrix& matrix);
EmbeddingMatrix load_embeddings(const std::filesystem::path& path);
EmbeddingMatrix parse_embeddings(std::istream& in);

}  // namespace hoaxdet::w2v
