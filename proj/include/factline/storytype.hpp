#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "factline/classify.hpp"
#include "factline/corpus.hpp"
#include "factline/enrich.hpp"
#include "factline/textrep.hpp"

namespace factline {

inline constexpr const char* kUnclassified = "Unclassified";
inline constexpr const char* kPublicFigures = "PublicFigures";

// The nine baseline categories; per-medium label sets extend these through
// configuration.
std::vector<std::string> default_story_types();

// ---------------------------------------------------------------------------
// Keyword lexicon
// ---------------------------------------------------------------------------

class KeywordLexicon {
 public:
  // Priority follows insertion order; triggers are preprocessed with the
  // same options as story text so stems line up. A trigger may belong to
  // only one type.
  static KeywordLexicon from_pairs(
      const std::vector<std::pair<std::string, std::vector<std::string>>>&
          type_triggers,
      const PreprocessOptions& options = {});

  // JSON object {type: [triggers]}; key order in the file is the priority
  // order.
  static KeywordLexicon load(const std::filesystem::path& path,
                             const PreprocessOptions& options = {});

  // First type (in priority order) with a trigger hit in the token list.
  std::optional<std::string> match(const TokenList& tokens) const;

  const std::vector<std::string>& types() const { return types_; }

 private:
  std::vector<std::string> types_;  // priority order
  // per type: trigger token sequences (single- or multi-token)
  std::vector<std::vector<TokenList>> triggers_;
};

// ---------------------------------------------------------------------------
// Classifiers
// ---------------------------------------------------------------------------

using PageLookupFn = std::function<bool(const std::string& name)>;

struct BowTypeOptions {
  PreprocessOptions preprocess;
  bool keyword_first = false;  // invert the public-figure/keyword order
};

// Public-figure check first (any extracted person with a dedicated page),
// then the keyword scan, else the Unclassified sentinel.
std::string classify_bow_type(const StoryRecord& story,
                              const KeywordLexicon& lexicon,
                              const PersonAnnotator& persons,
                              const PageLookupFn& has_page,
                              const BowTypeOptions& options = {});

struct AnnotatedItem {
  std::string id;
  std::vector<double> embedding;
  std::string label;
};

struct AnnotatedSet {
  std::vector<AnnotatedItem> items;
  std::string medium;  // "stories" | "tweets"
  std::size_t dim = 0;
};

struct Annotation {
  std::string id;
  std::string label;
  std::string medium;
};

// JSONL of {"id", "label", "medium"}.
std::vector<Annotation> load_annotations(const std::filesystem::path& path);

AnnotatedSet join_annotations(std::span<const Annotation> annotations,
                              const EmbeddingTable& embeddings,
                              std::string_view medium);

// Label of the minimum-cosine-distance item; distance ties go to the
// lexicographically smallest record id.
std::string classify_nn_type(std::span<const double> query,
                             const AnnotatedSet& annotated);

// ---------------------------------------------------------------------------
// Cross-medium evaluation
// ---------------------------------------------------------------------------

enum class TypeMethod { Bow, Nn };

// Classifies every test item against `train` only. Test labels that never
// occur in train stay in the gold side and score as misses. For the BOW
// method a per-item classifier (id -> label) must be supplied.
EvalScores cross_medium_eval(
    const AnnotatedSet& train, const AnnotatedSet& test, TypeMethod method,
    const std::function<std::string(const AnnotatedItem&)>& bow_classifier =
        nullptr);

// ---------------------------------------------------------------------------
// Random baselines
// ---------------------------------------------------------------------------

enum class BaselineMode { Uniform, Frequency };

struct BaselineReport {
  BaselineMode mode = BaselineMode::Uniform;
  std::size_t label_count = 0;
  double expected_accuracy = 0.0;  // 1/k or sum p_i^2
  double mc_accuracy = 0.0;
  double mc_precision_macro = 0.0;
  double mc_recall_macro = 0.0;
  double mc_f1_macro = 0.0;
  std::size_t trials = 0;
};

// Analytic expectation plus a Monte-Carlo estimate of the full P/R/F1
// vector. The label set defaults to the distinct gold labels.
BaselineReport random_baseline(
    const std::vector<std::string>& gold, BaselineMode mode,
    std::size_t trials, std::uint64_t seed,
    const std::optional<std::vector<std::string>>& label_set = std::nullopt);

}  // namespace factline
