#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "factline/errors.hpp"

namespace factline {

using TokenList = std::vector<std::string>;

struct PreprocessOptions {
  bool stem = true;
  std::set<std::string> stopwords;  // matched before and after stemming
};

// Lowercase, strip everything outside [a-z0-9'], split on whitespace,
// drop stopwords, Porter-stem pure-alphabetic tokens. Stems are re-applied
// to a fixed point and stopwords filtered on both sides of stemming, so
// the pass is idempotent on its own output joined by spaces.
TokenList preprocess(std::string_view text, const PreprocessOptions& options = {});

std::set<std::string> load_stopwords(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Vocabulary / sparse vectors
// ---------------------------------------------------------------------------

class Vocabulary {
 public:
  // Tokens with document frequency >= min_df, indexed lexicographically.
  static Vocabulary build(const std::vector<TokenList>& docs,
                          std::size_t min_df = 1);

  std::optional<std::size_t> index_of(std::string_view token) const;
  std::size_t size() const { return tokens_.size(); }
  std::size_t doc_count() const { return doc_count_; }
  std::size_t df(std::size_t index) const { return df_[index]; }
  std::optional<std::size_t> df(std::string_view token) const;
  const std::vector<std::string>& tokens() const { return tokens_; }

  std::string to_json() const;
  static Vocabulary from_json(std::string_view text);

 private:
  std::vector<std::string> tokens_;         // index -> token, sorted
  std::map<std::string, std::size_t> index_;
  std::vector<std::size_t> df_;
  std::size_t doc_count_ = 0;
};

struct SparseVector {
  std::vector<std::pair<std::uint32_t, double>> entries;  // sorted by index
  std::size_t dim = 0;

  double norm() const;
  bool operator==(const SparseVector&) const = default;
};

enum class Weighting { Count, TfIdf };

// Count mode: raw term counts. TfIdf mode: tf * (ln((1+N)/(1+df)) + 1),
// L2-normalized. Out-of-vocabulary tokens are ignored.
SparseVector vectorize(const TokenList& doc, const Vocabulary& vocab,
                       Weighting weighting);

double idf(std::size_t doc_count, std::size_t df);

// ---------------------------------------------------------------------------
// Embeddings
// ---------------------------------------------------------------------------

class EmbeddingTable {
 public:
  // JSONL of {"id": string, "vector": [numbers]}. Every vector must share
  // one dimension and be finite; duplicate ids are rejected.
  static EmbeddingTable load(const std::filesystem::path& path,
                             std::optional<std::size_t> expected_dim = {});

  void insert(std::string id, std::vector<double> vector);

  const std::vector<double>* find(std::string_view id) const;
  bool contains(std::string_view id) const { return find(id) != nullptr; }
  std::size_t dim() const { return dim_; }
  std::size_t size() const { return table_.size(); }
  const std::map<std::string, std::vector<double>>& entries() const {
    return table_;
  }

 private:
  std::map<std::string, std::vector<double>> table_;
  std::size_t dim_ = 0;
};

// ---------------------------------------------------------------------------
// Cosine similarity
// ---------------------------------------------------------------------------

// u.v / (|u||v|), clamped into [-1, 1]. Zero vectors are an error.
double cosine_similarity(std::span<const double> u, std::span<const double> v);
double cosine_similarity(const SparseVector& u, const SparseVector& v);

inline double cosine_distance(std::span<const double> u,
                              std::span<const double> v) {
  return 1.0 - cosine_similarity(u, v);
}

}  // namespace factline
