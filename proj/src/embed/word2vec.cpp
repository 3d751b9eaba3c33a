#include "hoaxdet/embed/word2vec.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "hoaxdet/core/errors.hpp"
#include "hoaxdet/core/rng.hpp"

namespace hoaxdet::w2v {

namespace {

class NegativeSampler {
 public:
  explicit NegativeSampler(const std::vector<std::size_t>& counts) {
    cumulative_.reserve(counts.size());
    double total = 0;
    for (std::size_t c : counts) {
      total += c ? std::pow(static_cast<double>(c), 0.75) : 0.0;
      cumulative_.push_back(total);
    }
  }

  text::TokenId draw(Rng& rng) const {
    const double u = rng.uniform() * cumulative_.back();
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    return static_cast<text::TokenId>(std::min<std::ptrdiff_t>(it - cumulative_.begin(),
                                                               static_cast<std::ptrdiff_t>(cumulative_.size()) - 1));
  }

 private:
  std::vector<double> cumulative_;
};

}  // namespace

EmbeddingMatrix train_skipgram(std::span<const text::TokenList> corpus, const text::Vocabulary& vocab,
                               const SkipGramConfig& config) {
  if (corpus.empty()) throw ContractError("train_skipgram: empty corpus");
  if (config.dim == 0 || config.window == 0 || config.negatives == 0) {
    throw ConfigError("train_skipgram: dim, window and negatives must be positive");
  }
  const auto vocab_size = static_cast<Index>(vocab.size());
  const auto dim = static_cast<Index>(config.dim);

  std::vector<std::vector<text::TokenId>> sentences;
  std::vector<std::size_t> counts(vocab.size(), 0);
  std::size_t total_words = 0;
  for (const auto& doc : corpus) {
    std::vector<text::TokenId> ids;
    for (const auto& tok : doc) {
      const text::TokenId id = vocab.id(tok);
      if (id <= text::kOovId) continue;
      ids.push_back(id);
      ++counts[static_cast<std::size_t>(id)];
    }
    total_words += ids.size();
    if (ids.size() > 1) sentences.push_back(std::move(ids));
  }

  EmbeddingMatrix result{vocab, Tensor<float>(Shape{vocab_size, dim})};
  if (total_words == 0) return result;

  Rng rng(config.seed);
  RowMatrix<float>& input = result.table.matrix();
  for (Index r = 2; r < vocab_size; ++r) {
    for (Index c = 0; c < dim; ++c) input(r, c) = static_cast<float>((rng.uniform() - 0.5) / static_cast<double>(dim));
  }
  RowMatrix<float> output = RowMatrix<float>::Zero(vocab_size, dim);
  const NegativeSampler sampler(counts);

  const double total_steps = static_cast<double>(config.epochs * total_words) + 1.0;
  double processed = 0;
  Eigen::Matrix<float, 1, Eigen::Dynamic> accum(dim);

  auto train_pair = [&](text::TokenId center, text::TokenId context, float lr) {
    accum.setZero();
    auto in = input.row(center);
    for (std::size_t k = 0; k <= config.negatives; ++k) {
      text::TokenId target = context;
      float label = 1.0f;
      if (k > 0) {
        target = sampler.draw(rng);
        if (target == context) continue;
        label = 0.0f;
      }
      auto out = output.row(target);
      const float score = in.dot(out);
      const float g = (label - 1.0f / (1.0f + std::exp(-score))) * lr;
      accum += g * out;
      out += g * in;
    }
    in += accum;
  };

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    for (const auto& ids : sentences) {
      for (std::size_t i = 0; i < ids.size(); ++i) {
        const double fraction = processed / total_steps;
        const auto lr = static_cast<float>(config.learning_rate * std::max(1e-4, 1.0 - fraction));
        const std::size_t reach = config.window - static_cast<std::size_t>(rng.uniform_int(config.window));
        const std::size_t lo = i >= reach ? i - reach : 0;
        const std::size_t hi = std::min(ids.size() - 1, i + reach);
        for (std::size_t j = lo; j <= hi; ++j) {
          if (j != i) train_pair(ids[j], ids[i], lr);
        }
        processed += 1;
      }
    }
  }
  return result;
}

double cosine_similarity(std::span<const float> u, std::span<const float> v) {
  if (u.size() != v.size()) throw ShapeError("cosine_similarity: vector lengths differ");
  double dot = 0, nu = 0, nv = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += static_cast<double>(u[i]) * v[i];
    nu += static_cast<double>(u[i]) * u[i];
    nv += static_cast<double>(v[i]) * v[i];
  }
  if (nu == 0 || nv == 0) throw ContractError("cosine_similarity: zero vector");
  return std::clamp(dot / std::sqrt(nu * nv), -1.0, 1.0);
}

std::string serialize_embeddings(const EmbeddingMatrix& matrix) {
  const auto& t = matrix.table.matrix();
  if (static_cast<std::size_t>(t.rows()) != matrix.vocab.size()) {
    throw ShapeError("embedding rows do not match vocabulary size");
  }
  std::string out = std::to_string(t.rows()) + " " + std::to_string(t.cols()) + "\n";
  char buf[32];
  for (Index r = 0; r < t.rows(); ++r) {
    out += matrix.vocab.token(static_cast<text::TokenId>(r));
    for (Index c = 0; c < t.cols(); ++c) {
      const auto res = std::to_chars(buf, buf + sizeof buf, t(r, c));
      out += ' ';
      out.append(buf, res.ptr);
    }
    out += '\n';
  }
  return out;
}

void save_embeddings(const EmbeddingMatrix& matrix, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ResourceError("cannot write embeddings " + path.string());
  out << serialize_embeddings(matrix);
}

EmbeddingMatrix parse_embeddings(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("missing header", 1);
  long rows = 0, cols = 0;
  {
    std::istringstream header(line);
    std::string extra;
    if (!(header >> rows >> cols) || (header >> extra) || rows < 2 || cols < 1) {
      throw ParseError("header must be '<V> <dim>'", 1);
    }
  }
  std::vector<std::string> tokens;
  RowMatrix<float> table(rows, cols);
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (static_cast<long>(tokens.size()) == rows) throw ParseError("more rows than the header declares", line_no);
    const auto space = line.find(' ');
    if (space == std::string::npos || space == 0) throw ParseError("expected '<token> <values>'", line_no);
    tokens.push_back(line.substr(0, space));
    const char* p = line.data() + space;
    const char* end = line.data() + line.size();
    for (long c = 0; c < cols; ++c) {
      if (p == end || *p != ' ') throw ParseError("expected " + std::to_string(cols) + " values", line_no);
      ++p;
      float v = 0;
      const auto res = std::from_chars(p, end, v);
      if (res.ec != std::errc{}) throw ParseError("malformed value", line_no);
      table(static_cast<Index>(tokens.size() - 1), c) = v;
      p = res.ptr;
    }
    if (p != end) throw ParseError("more than " + std::to_string(cols) + " values", line_no);
  }
  if (static_cast<long>(tokens.size()) != rows) {
    throw ParseError("header declares " + std::to_string(rows) + " rows but file has " + std::to_string(tokens.size()),
                     line_no);
  }
  return {text::Vocabulary::from_tokens(std::move(tokens)), Tensor<float>::from_matrix(std::move(table))};
}

EmbeddingMatrix load_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ResourceError("cannot read embeddings " + path.string());
  return parse_embeddings(in);
}

}  // namespace hoaxdet::w2v
