#include "factline/storytype.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>

#include <json.hpp>

#include "factline/rng.hpp"

namespace factline {

std::vector<std::string> default_story_types() {
  return {"CaseOccurrences",
          "CommercialActivityPromotion",
          "Conspiracy",
          "CorrectionCallingOut",
          "EmergencyResponses",
          "FakeCures",
          "FakeTrueFactOrPrevention",
          "FakeTruePublicHealthResponses",
          "PublicFigures"};
}

// ---------------------------------------------------------------------------
// KeywordLexicon
// ---------------------------------------------------------------------------

KeywordLexicon KeywordLexicon::from_pairs(
    const std::vector<std::pair<std::string, std::vector<std::string>>>&
        type_triggers,
    const PreprocessOptions& options) {
  KeywordLexicon lex;
  std::map<TokenList, std::string> owner;
  for (const auto& [type, triggers] : type_triggers) {
    lex.types_.push_back(type);
    std::vector<TokenList> compiled;
    for (const auto& trigger : triggers) {
      TokenList tokens = preprocess(trigger, options);
      if (tokens.empty())
        throw ConfigError("trigger \"" + trigger + "\" for type \"" + type +
                          "\" normalizes to nothing");
      const auto it = owner.find(tokens);
      if (it != owner.end() && it->second != type)
        throw ConfigError("trigger \"" + trigger + "\" maps to both \"" +
                          it->second + "\" and \"" + type + "\"");
      owner[tokens] = type;
      compiled.push_back(std::move(tokens));
    }
    lex.triggers_.push_back(std::move(compiled));
  }
  return lex;
}

KeywordLexicon KeywordLexicon::load(const std::filesystem::path& path,
                                    const PreprocessOptions& options) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open keyword lexicon: " + path.string());
  nlohmann::ordered_json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid keyword lexicon: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("keyword lexicon must be a json object");
  std::vector<std::pair<std::string, std::vector<std::string>>> pairs;
  for (const auto& [type, triggers] : j.items()) {
    if (!triggers.is_array())
      throw ParseError("triggers for \"" + type + "\" must be an array");
    pairs.push_back({type, triggers.get<std::vector<std::string>>()});
  }
  return from_pairs(pairs, options);
}

std::optional<std::string> KeywordLexicon::match(const TokenList& tokens) const {
  const auto contains_seq = [&](const TokenList& needle) {
    if (needle.size() > tokens.size()) return false;
    for (std::size_t i = 0; i + needle.size() <= tokens.size(); ++i) {
      bool ok = true;
      for (std::size_t j = 0; j < needle.size(); ++j) {
        if (tokens[i + j] != needle[j]) {
          ok = false;
          break;
        }
      }
      if (ok) return true;
    }
    return false;
  };

  for (std::size_t t = 0; t < types_.size(); ++t) {
    for (const auto& trigger : triggers_[t]) {
      if (contains_seq(trigger)) return types_[t];
    }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// BOW classifier
// ---------------------------------------------------------------------------

std::string classify_bow_type(const StoryRecord& story,
                              const KeywordLexicon& lexicon,
                              const PersonAnnotator& persons,
                              const PageLookupFn& has_page,
                              const BowTypeOptions& options) {
  const auto keyword_hit = [&]() -> std::optional<std::string> {
    return lexicon.match(preprocess(story.story, options.preprocess));
  };
  const auto figure_hit = [&]() -> bool {
    for (const auto& name : persons.annotate(story.id, story.story)) {
      if (has_page(name)) return true;
    }
    return false;
  };

  if (options.keyword_first) {
    if (const auto type = keyword_hit()) return *type;
    if (figure_hit()) return kPublicFigures;
  } else {
    if (figure_hit()) return kPublicFigures;
    if (const auto type = keyword_hit()) return *type;
  }
  return kUnclassified;
}

// ---------------------------------------------------------------------------
// Annotations / NN classifier
// ---------------------------------------------------------------------------

std::vector<Annotation> load_annotations(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open annotations: " + path.string());
  std::vector<Annotation> out;
  std::string line;
  std::size_t lineno = 0;
  std::set<std::string> seen;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("invalid annotation json: ") + e.what(),
                       lineno);
    }
    Annotation a;
    a.id = j.at("id").get<std::string>();
    a.label = j.at("label").get<std::string>();
    a.medium = j.at("medium").get<std::string>();
    if (!seen.insert(a.id).second) throw DuplicateIdError(a.id);
    out.push_back(std::move(a));
  }
  return out;
}

AnnotatedSet join_annotations(std::span<const Annotation> annotations,
                              const EmbeddingTable& embeddings,
                              std::string_view medium) {
  AnnotatedSet set;
  set.medium = std::string(medium);
  set.dim = embeddings.dim();
  std::vector<std::string> missing;
  for (const auto& a : annotations) {
    if (a.medium != medium) continue;
    const auto* vec = embeddings.find(a.id);
    if (!vec) {
      missing.push_back(a.id);
      continue;
    }
    set.items.push_back({a.id, *vec, a.label});
  }
  if (!missing.empty()) {
    std::string msg = "annotated records without embeddings:";
    for (const auto& id : missing) msg += " " + id;
    throw ConfigError(msg);
  }
  return set;
}

std::string classify_nn_type(std::span<const double> query,
                             const AnnotatedSet& annotated) {
  if (annotated.items.empty())
    throw ConfigError("nearest-neighbor classification needs a non-empty set");
  if (query.size() != annotated.dim)
    throw DimensionError("query dimension " + std::to_string(query.size()) +
                         " does not match annotated set dimension " +
                         std::to_string(annotated.dim));

  const AnnotatedItem* best = nullptr;
  double best_dist = 0.0;
  for (const auto& item : annotated.items) {
    const double dist = 1.0 - cosine_similarity(query, item.embedding);
    if (!best || dist < best_dist ||
        (dist == best_dist && item.id < best->id)) {
      best = &item;
      best_dist = dist;
    }
  }
  return best->label;
}

// ---------------------------------------------------------------------------
// Cross-medium evaluation
// ---------------------------------------------------------------------------

EvalScores cross_medium_eval(
    const AnnotatedSet& train, const AnnotatedSet& test, TypeMethod method,
    const std::function<std::string(const AnnotatedItem&)>& bow_classifier) {
  if (train.items.empty() || test.items.empty())
    throw ConfigError("cross-medium evaluation needs non-empty sets");
  if (method == TypeMethod::Bow && !bow_classifier)
    throw ConfigError("BOW evaluation needs a classifier callback");

  std::vector<std::string> gold, pred;
  gold.reserve(test.items.size());
  pred.reserve(test.items.size());
  for (const auto& item : test.items) {
    gold.push_back(item.label);
    if (method == TypeMethod::Nn) {
      pred.push_back(classify_nn_type(item.embedding, train));
    } else {
      pred.push_back(bow_classifier(item));
    }
  }
  return evaluate_f1(pred, gold);
}

// ---------------------------------------------------------------------------
// Random baselines
// ---------------------------------------------------------------------------

BaselineReport random_baseline(
    const std::vector<std::string>& gold, BaselineMode mode,
    std::size_t trials, std::uint64_t seed,
    const std::optional<std::vector<std::string>>& label_set) {
  if (gold.empty()) throw ConfigError("baseline needs a non-empty gold list");

  std::vector<std::string> labels;
  if (label_set) {
    labels = *label_set;
    std::sort(labels.begin(), labels.end());
    labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  } else {
    const std::set<std::string> s(gold.begin(), gold.end());
    labels.assign(s.begin(), s.end());
  }
  const std::size_t k = labels.size();
  if (k == 0) throw ConfigError("baseline label set is empty");

  std::map<std::string, std::size_t> pos;
  for (std::size_t i = 0; i < k; ++i) pos[labels[i]] = i;
  std::vector<double> p(k, 0.0);
  for (const auto& g : gold) {
    const auto it = pos.find(g);
    if (it == pos.end())
      throw ConfigError("gold label \"" + g + "\" is not in the label set");
    p[it->second] += 1.0;
  }
  for (double& x : p) x /= static_cast<double>(gold.size());

  BaselineReport report;
  report.mode = mode;
  report.label_count = k;
  report.trials = trials;
  if (mode == BaselineMode::Uniform) {
    report.expected_accuracy = 1.0 / static_cast<double>(k);
  } else {
    double s = 0.0;
    for (const double x : p) s += x * x;
    report.expected_accuracy = s;
  }

  if (trials == 0) return report;

  // cumulative distribution for frequency draws
  std::vector<double> cum(k);
  double run = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    run += p[i];
    cum[i] = run;
  }

  Rng rng(seed);
  const auto draw = [&]() -> const std::string& {
    if (mode == BaselineMode::Uniform)
      return labels[rng.uniform_index(k)];
    const double r = rng.uniform01();
    for (std::size_t i = 0; i < k; ++i) {
      if (r < cum[i]) return labels[i];
    }
    return labels[k - 1];
  };

  double acc_sum = 0.0, prec_sum = 0.0, rec_sum = 0.0, f1_sum = 0.0;
  std::vector<std::string> pred(gold.size());
  for (std::size_t t = 0; t < trials; ++t) {
    for (std::size_t i = 0; i < gold.size(); ++i) pred[i] = draw();
    const EvalScores s = evaluate_f1(pred, gold, labels);
    acc_sum += s.accuracy;
    prec_sum += s.macro_precision;
    rec_sum += s.macro_recall;
    f1_sum += s.macro_f1;
  }
  const double t = static_cast<double>(trials);
  report.mc_accuracy = acc_sum / t;
  report.mc_precision_macro = prec_sum / t;
  report.mc_recall_macro = rec_sum / t;
  report.mc_f1_macro = f1_sum / t;
  return report;
}

}  // namespace factline
