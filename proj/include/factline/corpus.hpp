#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "factline/date.hpp"
#include "factline/errors.hpp"

namespace factline {

// ---------------------------------------------------------------------------
// Harmonized validity scale.
// ---------------------------------------------------------------------------

enum class Validity { True, PartiallyTrue, PartiallyFalse, False, Unknown };

inline constexpr int kValidityCount = 5;

std::string to_string(Validity v);
std::optional<Validity> validity_from_string(std::string_view canonical);

// ---------------------------------------------------------------------------
// Fact-checking site.
// ---------------------------------------------------------------------------

struct Site {
  enum class Kind { Poynter, Snopes, PolitiFact, Twitter, Other };

  Kind kind = Kind::Other;
  std::string name;  // normalized lowercase, only used when kind == Other

  static Site parse(std::string_view raw);
  std::string str() const;

  auto operator<=>(const Site&) const = default;
};

// ---------------------------------------------------------------------------
// Originating medium.
// ---------------------------------------------------------------------------

struct MediumTag {
  enum class Kind {
    Website,
    Person,
    Facebook,
    Twitter,
    WhatsApp,
    Instagram,
    YouTube,
    TikTok,
    Email,
    Other
  };

  Kind kind = Kind::Other;
  std::string name;  // normalized lowercase, only used when kind == Other

  static MediumTag other(std::string_view name);
  std::string str() const;

  auto operator<=>(const MediumTag&) const = default;
};

// ---------------------------------------------------------------------------
// Records.
// ---------------------------------------------------------------------------

enum class RecordKind { FactCheck, Tweet };

std::string to_string(RecordKind k);
std::optional<RecordKind> record_kind_from_string(std::string_view s);

struct StoryRecord {
  std::string id;
  Site site;
  std::optional<Date> date;
  bool date_flagged = false;  // raw date present but unparseable
  std::string raw_validity;
  Validity validity = Validity::Unknown;
  std::string story;
  std::optional<std::string> elaboration;
  std::optional<std::string> raw_medium;
  std::set<MediumTag> mediums;
  std::optional<std::string> story_type;  // only for annotated records
  RecordKind kind = RecordKind::FactCheck;

  bool operator==(const StoryRecord&) const = default;
};

// ---------------------------------------------------------------------------
// Validity lexicon: normalized raw label -> harmonized label.
// ---------------------------------------------------------------------------

class ValidityLexicon {
 public:
  // The built-in default table. ~30 site-specific verdict spellings mapped
  // onto the five-way scale. The shipped JSON asset mirrors this.
  static ValidityLexicon defaults();

  // JSON file of {"raw": "harmonized"} pairs, harmonized being one of
  // True | PartiallyTrue | PartiallyFalse | False | Unknown.
  static ValidityLexicon load(const std::filesystem::path& path);

  void add(std::string_view raw, Validity v);
  std::optional<Validity> lookup(std::string_view raw) const;
  std::size_t size() const { return map_.size(); }
  const std::map<std::string, Validity>& entries() const { return map_; }

  // Lowercase, trim, hyphens/underscores to spaces, collapse space runs.
  static std::string normalize(std::string_view raw);

 private:
  std::map<std::string, Validity> map_;  // keys normalized
};

// Throws UnmappedLabelError unless fallback_to_unknown is set.
Validity harmonize_validity(std::string_view raw, const ValidityLexicon& lexicon,
                            bool fallback_to_unknown = false);

// ---------------------------------------------------------------------------
// Medium harmonization.
// ---------------------------------------------------------------------------

// Person extraction hook; the enrich module provides implementations.
using PersonExtractFn =
    std::function<std::vector<std::string>(std::string_view text)>;

// Cumulative pipeline: URL/TLD tokens -> Website, person hits -> Person,
// known platform names -> platform tags. Tags are unioned; a story may
// carry several originators.
std::set<MediumTag> harmonize_medium(std::string_view raw,
                                     const PersonExtractFn& extract_persons);

// ---------------------------------------------------------------------------
// Ingestion.
// ---------------------------------------------------------------------------

enum class RecordFormat { Jsonl, Csv };

using DateParserFn = std::function<std::optional<Date>(std::string_view)>;

struct IngestOptions {
  const ValidityLexicon* lexicon = nullptr;  // nullptr -> built-in defaults
  PersonExtractFn extract_persons;           // empty -> no Person tags
  bool fallback_to_unknown = false;          // permissive validity mode
  std::vector<DateParserFn> extra_date_parsers;
  RecordKind default_kind = RecordKind::FactCheck;
};

// Columns/keys: id, site, date, raw_validity, story, elaboration,
// raw_medium, story_type, kind. `story` is required; a missing id is
// synthesized from site + row index; everything else is optional.
std::vector<StoryRecord> ingest_records(const std::filesystem::path& path,
                                        RecordFormat format,
                                        const IngestOptions& options = {});

void serialize_records(const std::vector<StoryRecord>& records,
                       const std::filesystem::path& path, RecordFormat format);

// ---------------------------------------------------------------------------
// Train/test split.
// ---------------------------------------------------------------------------

struct IndexSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
  std::vector<std::string> warnings;
};

// Deterministic given seed. |train| = round(ratio*n); exact partition.
// With strata: per-stratum quotas by largest remainder, so every label's
// train share is within one record of proportional; singleton strata go to
// train with a warning.
IndexSplit split_indices(std::size_t n, double ratio, std::uint64_t seed,
                         const std::vector<std::string>* strata = nullptr);

struct RecordSplit {
  std::vector<StoryRecord> train;
  std::vector<StoryRecord> test;
  std::vector<std::string> warnings;
};

enum class StratifyBy { None, Validity };

RecordSplit train_test_split(const std::vector<StoryRecord>& records,
                             double ratio, std::uint64_t seed,
                             StratifyBy stratify = StratifyBy::None);

}  // namespace factline
