#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "hoaxdet/embed/word2vec.hpp"

using namespace hoaxdet;
using namespace hoaxdet::w2v;
using text::TokenList;

namespace {

// "a" and "b" always appear together; "z" lives in separate documents with
// its own companions.
std::vector<TokenList> cooccurrence_corpus() {
  std::vector<TokenList> docs;
  for (int i = 0; i < 300; ++i) {
    docs.push_back({"a", "b", "c" + std::to_string(i % 7), "a", "b"});
    docs.push_back({"z", "y", "x" + std::to_string(i % 5), "z", "y"});
  }
  return docs;
}

}  // namespace

TEST(Cosine, Examples) {
  const std::vector<float> v{0.3f, -1.2f, 2.0f};
  EXPECT_NEAR(cosine_similarity(v, v), 1.0, 1e-9);
  EXPECT_NEAR(cosine_similarity(std::vector<float>{1, 0}, std::vector<float>{0, 1}), 0.0, 1e-12);
  EXPECT_NEAR(cosine_similarity(std::vector<float>{1, 1}, std::vector<float>{1, 0}), 0.7071, 1e-4);
  EXPECT_THROW(cosine_similarity(std::vector<float>{0, 0}, std::vector<float>{1, 0}), ContractError);
}

TEST(SkipGram, DefaultWidthIsFifty) {
  const auto corpus = cooccurrence_corpus();
  const auto vocab = text::Vocabulary::build(corpus);
  SkipGramConfig config;
  config.epochs = 1;
  const auto m = train_skipgram(corpus, vocab, config);
  EXPECT_EQ(m.table.dim(0), static_cast<Index>(vocab.size()));
  EXPECT_EQ(m.table.dim(1), 50);
  EXPECT_TRUE(m.table.all_finite());
}

TEST(SkipGram, CooccurringTokensAreCloserForFiveSeeds) {
  const auto corpus = cooccurrence_corpus();
  const auto vocab = text::Vocabulary::build(corpus);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    SkipGramConfig config;
    config.seed = seed;
    const auto m = train_skipgram(corpus, vocab, config);
    const double ab = cosine_similarity(m.row(vocab.id("a")), m.row(vocab.id("b")));
    const double az = cosine_similarity(m.row(vocab.id("a")), m.row(vocab.id("z")));
    EXPECT_GT(ab, az) << "seed " << seed;
  }
}

TEST(SkipGram, DeterministicUnderSeed) {
  const auto corpus = cooccurrence_corpus();
  const auto vocab = text::Vocabulary::build(corpus);
  SkipGramConfig config;
  config.seed = 9;
  config.epochs = 2;
  const auto a = train_skipgram(corpus, vocab, config);
  const auto b = train_skipgram(corpus, vocab, config);
  EXPECT_EQ(std::memcmp(a.table.data(), b.table.data(), sizeof(float) * static_cast<std::size_t>(a.table.size())), 0);
}

TEST(SkipGram, ReservedRowsStayZero) {
  const auto corpus = cooccurrence_corpus();
  const auto vocab = text::Vocabulary::build(corpus);
  const auto m = train_skipgram(corpus, vocab);
  for (const auto id : {text::kPadId, text::kOovId}) {
    for (const float x : m.row(id)) EXPECT_EQ(x, 0.0f);
  }
}

TEST(SkipGram, EmptyCorpusIsContractError) {
  const std::vector<TokenList> seed_docs{{"a"}};
  const auto vocab = text::Vocabulary::build(seed_docs);
  EXPECT_THROW(train_skipgram(std::vector<TokenList>{}, vocab), ContractError);
}

TEST(EmbeddingFile, RoundTripKeepsOrderAndValues) {
  const auto corpus = cooccurrence_corpus();
  const auto vocab = text::Vocabulary::build(corpus);
  SkipGramConfig config;
  config.epochs = 1;
  const auto m = train_skipgram(corpus, vocab, config);
  const auto path = std::filesystem::temp_directory_path() / "hoaxdet_w2v_test.txt";
  save_embeddings(m, path);
  const auto back = load_embeddings(path);
  std::filesystem::remove(path);
  EXPECT_EQ(back.vocab, m.vocab);
  ASSERT_EQ(back.table.shape(), m.table.shape());
  for (Index i = 0; i < m.table.size(); ++i) EXPECT_NEAR(back.table[i], m.table[i], 1e-6);
}

TEST(EmbeddingFile, FormatHeaderThenRows) {
  const std::vector<TokenList> docs{{"a", "b"}};
  const auto vocab = text::Vocabulary::build(docs);
  SkipGramConfig config;
  config.dim = 3;
  config.epochs = 1;
  const auto text = serialize_embeddings(train_skipgram(docs, vocab, config));
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "4 3");
  std::getline(in, line);
  EXPECT_EQ(line.rfind("<PAD> ", 0), 0u);
  EXPECT_EQ(std::count(line.begin(), line.end(), ' '), 3);
}

TEST(EmbeddingFile, ShortBodyIsParseErrorWithLine) {
  std::istringstream in("3 2\n<PAD> 0 0\n<OOV> 0 0\n");
  try {
    parse_embeddings(in);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_GE(e.line(), 1);
  }
  std::istringstream bad_header("three 50\n");
  EXPECT_THROW(parse_embeddings(bad_header), ParseError);
}
