#include "factline/textrep.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "factline/stemmer.hpp"

namespace factline {

// ---------------------------------------------------------------------------
// Preprocessing
// ---------------------------------------------------------------------------

TokenList preprocess(std::string_view text, const PreprocessOptions& options) {
  std::string cleaned;
  cleaned.reserve(text.size());
  for (const char ch : text) {
    const unsigned char c = static_cast<unsigned char>(ch);
    if (c >= 'a' && c <= 'z') {
      cleaned += static_cast<char>(c);
    } else if (c >= 'A' && c <= 'Z') {
      cleaned += static_cast<char>(c - 'A' + 'a');
    } else if ((c >= '0' && c <= '9') || c == '\'') {
      cleaned += static_cast<char>(c);
    } else {
      cleaned += ' ';
    }
  }

  TokenList out;
  std::size_t i = 0;
  while (i < cleaned.size()) {
    while (i < cleaned.size() && cleaned[i] == ' ') ++i;
    std::size_t j = i;
    while (j < cleaned.size() && cleaned[j] != ' ') ++j;
    if (j > i) {
      std::string token = cleaned.substr(i, j - i);
      // strip enclosing apostrophes ("'quoted'" -> "quoted")
      std::size_t b = 0, e = token.size();
      while (b < e && token[b] == '\'') ++b;
      while (e > b && token[e - 1] == '\'') --e;
      token = token.substr(b, e - b);
      if (!token.empty() && !options.stopwords.count(token)) {
        if (options.stem &&
            std::all_of(token.begin(), token.end(),
                        [](char c) { return c >= 'a' && c <= 'z'; })) {
          // stem to a fixed point: the suffix stripper is not idempotent on
          // every word, and preprocess must be
          for (int pass = 0; pass < 4; ++pass) {
            std::string stemmed = porter_stem(token);
            if (stemmed == token) break;
            token = std::move(stemmed);
          }
        }
        // a stem may itself be a stopword; filter again so the pass is
        // idempotent
        if (!options.stopwords.count(token)) out.push_back(std::move(token));
      }
    }
    i = j;
  }
  return out;
}

std::set<std::string> load_stopwords(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open stopword list: " + path.string());
  std::set<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n'))
      line.pop_back();
    std::string word;
    for (char c : line) {
      if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
      if (!std::isspace(static_cast<unsigned char>(c))) word += c;
    }
    if (!word.empty() && word[0] != '#') words.insert(word);
  }
  return words;
}

// ---------------------------------------------------------------------------
// Vocabulary
// ---------------------------------------------------------------------------

Vocabulary Vocabulary::build(const std::vector<TokenList>& docs,
                             std::size_t min_df) {
  if (docs.empty()) throw ConfigError("cannot build a vocabulary from zero documents");
  std::map<std::string, std::size_t> df;
  for (const auto& doc : docs) {
    std::set<std::string_view> seen;
    for (const auto& tok : doc) {
      if (seen.insert(tok).second) ++df[tok];
    }
  }

  Vocabulary vocab;
  vocab.doc_count_ = docs.size();
  for (const auto& [token, count] : df) {
    if (count >= min_df) {
      vocab.index_[token] = vocab.tokens_.size();
      vocab.tokens_.push_back(token);
      vocab.df_.push_back(count);
    }
  }
  if (vocab.tokens_.empty()) throw EmptyVocabularyError();
  return vocab;
}

std::optional<std::size_t> Vocabulary::index_of(std::string_view token) const {
  const auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> Vocabulary::df(std::string_view token) const {
  const auto idx = index_of(token);
  if (!idx) return std::nullopt;
  return df_[*idx];
}

std::string Vocabulary::to_json() const {
  nlohmann::json j;
  j["doc_count"] = doc_count_;
  j["tokens"] = tokens_;
  j["df"] = df_;
  return j.dump();
}

Vocabulary Vocabulary::from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid vocabulary json: ") + e.what());
  }
  Vocabulary vocab;
  vocab.doc_count_ = j.at("doc_count").get<std::size_t>();
  vocab.tokens_ = j.at("tokens").get<std::vector<std::string>>();
  vocab.df_ = j.at("df").get<std::vector<std::size_t>>();
  if (vocab.tokens_.size() != vocab.df_.size())
    throw ParseError("vocabulary tokens/df length mismatch");
  for (std::size_t i = 0; i < vocab.tokens_.size(); ++i)
    vocab.index_[vocab.tokens_[i]] = i;
  return vocab;
}

// ---------------------------------------------------------------------------
// Vectorization
// ---------------------------------------------------------------------------

double SparseVector::norm() const {
  double sum = 0.0;
  for (const auto& [idx, w] : entries) sum += w * w;
  return std::sqrt(sum);
}

double idf(std::size_t doc_count, std::size_t df) {
  return std::log((1.0 + static_cast<double>(doc_count)) /
                  (1.0 + static_cast<double>(df))) +
         1.0;
}

SparseVector vectorize(const TokenList& doc, const Vocabulary& vocab,
                       Weighting weighting) {
  std::map<std::size_t, double> counts;
  for (const auto& tok : doc) {
    if (const auto idx = vocab.index_of(tok)) counts[*idx] += 1.0;
  }

  SparseVector vec;
  vec.dim = vocab.size();
  vec.entries.reserve(counts.size());
  for (const auto& [idx, count] : counts) {
    double w = count;
    if (weighting == Weighting::TfIdf)
      w *= idf(vocab.doc_count(), vocab.df(idx));
    vec.entries.push_back({static_cast<std::uint32_t>(idx), w});
  }

  if (weighting == Weighting::TfIdf && !vec.entries.empty()) {
    const double n = vec.norm();
    if (n > 0.0) {
      for (auto& [idx, w] : vec.entries) w /= n;
    }
  }
  return vec;
}

// ---------------------------------------------------------------------------
// Embeddings
// ---------------------------------------------------------------------------

void EmbeddingTable::insert(std::string id, std::vector<double> vector) {
  if (dim_ == 0 && table_.empty()) {
    dim_ = vector.size();
  } else if (vector.size() != dim_) {
    throw DimensionError("embedding for \"" + id + "\" has dimension " +
                         std::to_string(vector.size()) + ", expected " +
                         std::to_string(dim_));
  }
  for (const double v : vector) {
    if (!std::isfinite(v))
      throw ParseError("embedding for \"" + id + "\" has a non-finite component");
  }
  if (table_.count(id)) throw DuplicateIdError(id);
  table_.emplace(std::move(id), std::move(vector));
}

EmbeddingTable EmbeddingTable::load(const std::filesystem::path& path,
                                    std::optional<std::size_t> expected_dim) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open embedding file: " + path.string());
  EmbeddingTable table;
  if (expected_dim) table.dim_ = *expected_dim;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("invalid embedding json: ") + e.what(), lineno);
    }
    if (!j.contains("id") || !j.contains("vector"))
      throw ParseError("embedding row needs 'id' and 'vector'", lineno);
    std::string id = j["id"].get<std::string>();
    std::vector<double> vec;
    for (const auto& x : j["vector"]) {
      if (!x.is_number())
        throw ParseError("embedding for \"" + id + "\" has a non-numeric component",
                         lineno);
      vec.push_back(x.get<double>());
    }
    table.insert(std::move(id), std::move(vec));
  }
  return table;
}

const std::vector<double>* EmbeddingTable::find(std::string_view id) const {
  const auto it = table_.find(std::string(id));
  if (it == table_.end()) return nullptr;
  return &it->second;
}

// ---------------------------------------------------------------------------
// Cosine
// ---------------------------------------------------------------------------

double cosine_similarity(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size())
    throw DimensionError("cosine: dimensions differ (" + std::to_string(u.size()) +
                         " vs " + std::to_string(v.size()) + ")");
  double dot = 0.0, nu = 0.0, nv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  if (nu == 0.0 || nv == 0.0)
    throw ConfigError("cosine similarity is undefined for a zero vector");
  return std::clamp(dot / (std::sqrt(nu) * std::sqrt(nv)), -1.0, 1.0);
}

double cosine_similarity(const SparseVector& u, const SparseVector& v) {
  if (u.dim != v.dim)
    throw DimensionError("cosine: dimensions differ (" + std::to_string(u.dim) +
                         " vs " + std::to_string(v.dim) + ")");
  double dot = 0.0;
  std::size_t i = 0, j = 0;
  while (i < u.entries.size() && j < v.entries.size()) {
    if (u.entries[i].first == v.entries[j].first) {
      dot += u.entries[i].second * v.entries[j].second;
      ++i;
      ++j;
    } else if (u.entries[i].first < v.entries[j].first) {
      ++i;
    } else {
      ++j;
    }
  }
  const double nu = u.norm(), nv = v.norm();
  if (nu == 0.0 || nv == 0.0)
    throw ConfigError("cosine similarity is undefined for a zero vector");
  return std::clamp(dot / (nu * nv), -1.0, 1.0);
}

}  // namespace factline
