#include "factline/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <regex>
#include <sstream>

#include <json.hpp>

#include "factline/csv.hpp"
#include "factline/rng.hpp"

namespace factline {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

}  // namespace

// ---------------------------------------------------------------------------
// Validity
// ---------------------------------------------------------------------------

std::string to_string(Validity v) {
  switch (v) {
    case Validity::True: return "True";
    case Validity::PartiallyTrue: return "PartiallyTrue";
    case Validity::PartiallyFalse: return "PartiallyFalse";
    case Validity::False: return "False";
    case Validity::Unknown: return "Unknown";
  }
  return "Unknown";
}

std::optional<Validity> validity_from_string(std::string_view s) {
  if (s == "True") return Validity::True;
  if (s == "PartiallyTrue") return Validity::PartiallyTrue;
  if (s == "PartiallyFalse") return Validity::PartiallyFalse;
  if (s == "False") return Validity::False;
  if (s == "Unknown") return Validity::Unknown;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Site
// ---------------------------------------------------------------------------

Site Site::parse(std::string_view raw) {
  const std::string l = lower(trim(raw));
  if (l == "poynter") return {Kind::Poynter, {}};
  if (l == "snopes") return {Kind::Snopes, {}};
  if (l == "politifact") return {Kind::PolitiFact, {}};
  if (l == "twitter") return {Kind::Twitter, {}};
  return {Kind::Other, l};
}

std::string Site::str() const {
  switch (kind) {
    case Kind::Poynter: return "Poynter";
    case Kind::Snopes: return "Snopes";
    case Kind::PolitiFact: return "PolitiFact";
    case Kind::Twitter: return "Twitter";
    case Kind::Other: return name;
  }
  return name;
}

// ---------------------------------------------------------------------------
// MediumTag
// ---------------------------------------------------------------------------

MediumTag MediumTag::other(std::string_view name) {
  return {Kind::Other, lower(trim(name))};
}

std::string MediumTag::str() const {
  switch (kind) {
    case Kind::Website: return "Website";
    case Kind::Person: return "Person";
    case Kind::Facebook: return "Facebook";
    case Kind::Twitter: return "Twitter";
    case Kind::WhatsApp: return "WhatsApp";
    case Kind::Instagram: return "Instagram";
    case Kind::YouTube: return "YouTube";
    case Kind::TikTok: return "TikTok";
    case Kind::Email: return "Email";
    case Kind::Other: return name;
  }
  return name;
}

std::string to_string(RecordKind k) {
  return k == RecordKind::FactCheck ? "FactCheck" : "Tweet";
}

std::optional<RecordKind> record_kind_from_string(std::string_view s) {
  if (s == "FactCheck") return RecordKind::FactCheck;
  if (s == "Tweet") return RecordKind::Tweet;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// ValidityLexicon
// ---------------------------------------------------------------------------

std::string ValidityLexicon::normalize(std::string_view raw) {
  std::string s = lower(trim(raw));
  for (char& c : s) {
    if (c == '-' || c == '_') c = ' ';
  }
  std::string out;
  out.reserve(s.size());
  bool prev_space = false;
  for (char c : s) {
    const bool space = (c == ' ');
    if (space && prev_space) continue;
    out += c;
    prev_space = space;
  }
  return trim(out);
}

void ValidityLexicon::add(std::string_view raw, Validity v) {
  map_[normalize(raw)] = v;
}

std::optional<Validity> ValidityLexicon::lookup(std::string_view raw) const {
  const auto it = map_.find(normalize(raw));
  if (it == map_.end()) return std::nullopt;
  return it->second;
}

ValidityLexicon ValidityLexicon::defaults() {
  ValidityLexicon lex;
  const auto add_all = [&](Validity v,
                           std::initializer_list<const char*> raws) {
    for (const char* r : raws) lex.add(r, v);
  };
  add_all(Validity::True, {"Correct", "Correct Attribution", "True"});
  add_all(Validity::PartiallyTrue,
          {"Half true", "Half truth", "Mixed", "Mixture", "Mostly True",
           "Partially True", "Partly True", "Partially correct", "True but"});
  add_all(Validity::PartiallyFalse,
          {"Mostly False", "Partly False", "Partially False",
           "Two Pinocchios"});
  // "Barely-true" sits under False here even though the issuing site's own
  // scale reads it as partially true; the default table is editable if a
  // deployment wants to remap it.
  add_all(Validity::False, {"False", "Falseo", "Fake", "Misleading",
                            "Pants on fire", "Pants-fire", "Scam",
                            "Barely-true"});
  add_all(Validity::Unknown,
          {"Org. doesn't apply rating", "In dispute", "No evidence",
           "Unproven", "Unverified", "Suspicions"});
  return lex;
}

ValidityLexicon ValidityLexicon::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open validity lexicon: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("invalid lexicon json: " + std::string(e.what()));
  }
  if (!j.is_object()) throw ParseError("lexicon must be a json object");
  ValidityLexicon lex;
  for (const auto& [raw, harmonized] : j.items()) {
    if (!harmonized.is_string())
      throw ParseError("lexicon value for \"" + raw + "\" must be a string");
    const auto v = validity_from_string(harmonized.get<std::string>());
    if (!v)
      throw ParseError("unknown harmonized label \"" +
                       harmonized.get<std::string>() + "\" for \"" + raw +
                       "\"");
    lex.add(raw, *v);
  }
  return lex;
}

Validity harmonize_validity(std::string_view raw, const ValidityLexicon& lexicon,
                            bool fallback_to_unknown) {
  const auto v = lexicon.lookup(raw);
  if (v) return *v;
  if (fallback_to_unknown) return Validity::Unknown;
  throw UnmappedLabelError(std::string(raw));
}

// ---------------------------------------------------------------------------
// Medium harmonization
// ---------------------------------------------------------------------------

namespace {

const std::regex kUrlPattern(
    R"((https?://\S+)|(www\.\S+)|([a-z0-9][a-z0-9.-]*\.(com|net|org|info|gov|edu|io|co|ly|me|tv|uk|us|ca|au|de|fr|in|it|br|ru)(/\S*)?))",
    std::regex::icase);

bool is_website_token(const std::string& token) {
  return std::regex_match(token, kUrlPattern);
}

struct Platform {
  const char* word;
  MediumTag::Kind kind;
};

constexpr Platform kPlatforms[] = {
    {"facebook", MediumTag::Kind::Facebook},
    {"twitter", MediumTag::Kind::Twitter},
    {"whatsapp", MediumTag::Kind::WhatsApp},
    {"instagram", MediumTag::Kind::Instagram},
    {"youtube", MediumTag::Kind::YouTube},
    {"tiktok", MediumTag::Kind::TikTok},
    {"email", MediumTag::Kind::Email},
    {"e-mail", MediumTag::Kind::Email},
};

}  // namespace

std::set<MediumTag> harmonize_medium(std::string_view raw,
                                     const PersonExtractFn& extract_persons) {
  std::set<MediumTag> tags;
  const std::string text = trim(raw);
  if (text.empty()) return tags;

  // Split on whitespace and separators, keeping tokens for the URL check.
  std::vector<std::string> tokens;
  std::string cur;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c)) || c == ',' || c == ';') {
      if (!cur.empty()) tokens.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) tokens.push_back(cur);

  std::string leftover;  // text with website tokens removed
  for (const auto& tok : tokens) {
    if (is_website_token(tok)) {
      tags.insert({MediumTag::Kind::Website, {}});
    } else {
      if (!leftover.empty()) leftover += ' ';
      leftover += tok;
    }
  }

  if (extract_persons && !leftover.empty()) {
    if (!extract_persons(leftover).empty())
      tags.insert({MediumTag::Kind::Person, {}});
  }

  const std::string l = lower(text);
  for (const auto& p : kPlatforms) {
    const std::string word = p.word;
    std::size_t pos = 0;
    while ((pos = l.find(word, pos)) != std::string::npos) {
      const bool left_ok =
          pos == 0 || !std::isalnum(static_cast<unsigned char>(l[pos - 1]));
      const std::size_t end = pos + word.size();
      const bool right_ok =
          end == l.size() || !std::isalnum(static_cast<unsigned char>(l[end]));
      if (left_ok && right_ok) {
        tags.insert({p.kind, {}});
        break;
      }
      pos = end;
    }
  }
  return tags;
}

// ---------------------------------------------------------------------------
// Ingestion
// ---------------------------------------------------------------------------

namespace {

struct RawRow {
  std::map<std::string, std::string> fields;  // present keys only
  std::size_t line = 0;
};

std::optional<Date> parse_date_with(const IngestOptions& opt,
                                    std::string_view s) {
  if (auto d = Date::parse_iso(s)) return d;
  for (const auto& parser : opt.extra_date_parsers) {
    if (auto d = parser(s)) return d;
  }
  return std::nullopt;
}

StoryRecord record_from_row(const RawRow& row, std::size_t index,
                            const ValidityLexicon& lexicon,
                            const IngestOptions& opt) {
  StoryRecord rec;
  const auto get = [&](const char* key) -> std::optional<std::string> {
    const auto it = row.fields.find(key);
    if (it == row.fields.end() || it->second.empty()) return std::nullopt;
    return it->second;
  };

  const auto story = get("story");
  if (!story) throw ParseError("missing required field 'story'", row.line);
  rec.story = *story;

  rec.site = Site::parse(get("site").value_or(""));
  if (auto id = get("id")) {
    rec.id = *id;
  } else {
    rec.id = lower(rec.site.str()) + "-" + std::to_string(index);
  }

  if (auto date = get("date")) {
    if (auto parsed = parse_date_with(opt, *date)) {
      rec.date = parsed;
    } else {
      rec.date = std::nullopt;
      rec.date_flagged = true;
    }
  }

  if (auto raw_validity = get("raw_validity")) {
    rec.raw_validity = *raw_validity;
    rec.validity =
        harmonize_validity(*raw_validity, lexicon, opt.fallback_to_unknown);
  } else {
    rec.validity = Validity::Unknown;
  }

  rec.elaboration = get("elaboration");
  rec.raw_medium = get("raw_medium");
  if (rec.raw_medium)
    rec.mediums = harmonize_medium(*rec.raw_medium, opt.extract_persons);
  rec.story_type = get("story_type");

  if (auto kind = get("kind")) {
    const auto k = record_kind_from_string(*kind);
    if (!k) throw ParseError("unknown record kind \"" + *kind + "\"", row.line);
    rec.kind = *k;
  } else {
    rec.kind = opt.default_kind;
  }
  return rec;
}

constexpr const char* kColumns[] = {"id",          "site",       "date",
                                    "raw_validity", "story",      "elaboration",
                                    "raw_medium",  "story_type", "kind"};

std::vector<RawRow> read_jsonl_rows(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open input file: " + path.string());
  std::vector<RawRow> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("invalid json: ") + e.what(), lineno);
    }
    if (!j.is_object()) throw ParseError("expected a json object", lineno);
    RawRow row;
    row.line = lineno;
    for (const char* col : kColumns) {
      if (!j.contains(col) || j[col].is_null()) continue;
      const auto& v = j[col];
      if (v.is_string()) {
        row.fields[col] = v.get<std::string>();
      } else {
        row.fields[col] = v.dump();
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<RawRow> read_csv_rows(const std::filesystem::path& path) {
  const auto table = csv::parse_file(path);
  if (table.empty()) return {};
  const auto& header = table.front();
  std::map<std::string, std::size_t> col_index;
  for (std::size_t i = 0; i < header.size(); ++i) col_index[header[i]] = i;
  if (!col_index.count("story"))
    throw ParseError("csv header must include a 'story' column", 1);

  std::vector<RawRow> rows;
  for (std::size_t r = 1; r < table.size(); ++r) {
    RawRow row;
    row.line = r + 1;
    for (const char* col : kColumns) {
      const auto it = col_index.find(col);
      if (it == col_index.end()) continue;
      if (it->second >= table[r].size()) continue;
      const auto& value = table[r][it->second];
      if (!value.empty()) row.fields[col] = value;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

std::vector<StoryRecord> ingest_records(const std::filesystem::path& path,
                                        RecordFormat format,
                                        const IngestOptions& options) {
  const ValidityLexicon defaults = ValidityLexicon::defaults();
  const ValidityLexicon& lexicon =
      options.lexicon ? *options.lexicon : defaults;

  const auto rows = format == RecordFormat::Jsonl ? read_jsonl_rows(path)
                                                  : read_csv_rows(path);
  std::vector<StoryRecord> records;
  records.reserve(rows.size());
  std::set<std::string> seen_ids;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    StoryRecord rec = record_from_row(rows[i], i, lexicon, options);
    if (!seen_ids.insert(rec.id).second) throw DuplicateIdError(rec.id);
    records.push_back(std::move(rec));
  }
  return records;
}

void serialize_records(const std::vector<StoryRecord>& records,
                       const std::filesystem::path& path,
                       RecordFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write file: " + path.string());

  const auto field = [](const StoryRecord& r, const std::string& col)
      -> std::optional<std::string> {
    if (col == "id") return r.id;
    if (col == "site") return r.site.str();
    if (col == "date") {
      if (r.date) return r.date->to_iso();
      return std::nullopt;
    }
    if (col == "raw_validity")
      return r.raw_validity.empty() ? std::nullopt
                                    : std::optional(r.raw_validity);
    if (col == "story") return r.story;
    if (col == "elaboration") return r.elaboration;
    if (col == "raw_medium") return r.raw_medium;
    if (col == "story_type") return r.story_type;
    if (col == "kind") return to_string(r.kind);
    return std::nullopt;
  };

  if (format == RecordFormat::Jsonl) {
    for (const auto& r : records) {
      nlohmann::json j;
      for (const char* col : kColumns) {
        if (auto v = field(r, col)) j[col] = *v;
      }
      out << j.dump() << '\n';
    }
  } else {
    std::vector<csv::Row> rows;
    csv::Row header;
    for (const char* col : kColumns) header.push_back(col);
    rows.push_back(header);
    for (const auto& r : records) {
      csv::Row row;
      for (const char* col : kColumns) row.push_back(field(r, col).value_or(""));
      rows.push_back(row);
    }
    csv::write(out, rows);
  }
}

// ---------------------------------------------------------------------------
// Train/test split
// ---------------------------------------------------------------------------

IndexSplit split_indices(std::size_t n, double ratio, std::uint64_t seed,
                         const std::vector<std::string>* strata) {
  if (!(ratio > 0.0 && ratio < 1.0))
    throw ConfigError("split ratio must be in (0, 1)");
  if (n == 0) throw ConfigError("cannot split an empty list");
  if (strata && strata->size() != n)
    throw ConfigError("strata length must match record count");

  IndexSplit result;
  const std::size_t n_train =
      static_cast<std::size_t>(std::llround(ratio * static_cast<double>(n)));

  if (!strata) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    Rng rng(seed);
    rng.shuffle(idx);
    result.train.assign(idx.begin(), idx.begin() + n_train);
    result.test.assign(idx.begin() + n_train, idx.end());
  } else {
    // Group indices per stratum in first-appearance order.
    std::vector<std::string> order;
    std::map<std::string, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& key = (*strata)[i];
      if (!groups.count(key)) order.push_back(key);
      groups[key].push_back(i);
    }
    std::sort(order.begin(), order.end());

    // Singletons go to train outright.
    std::size_t remaining_quota = n_train;
    std::vector<std::string> multi;
    for (const auto& key : order) {
      if (groups[key].size() == 1) {
        result.train.push_back(groups[key][0]);
        result.warnings.push_back("stratum \"" + key +
                                  "\" has a single record; assigned to train");
        remaining_quota = remaining_quota > 0 ? remaining_quota - 1 : 0;
      } else {
        multi.push_back(key);
      }
    }

    // Largest-remainder quotas over the remaining strata.
    std::vector<std::size_t> floors(multi.size());
    std::vector<std::pair<double, std::size_t>> fracs;
    std::size_t floor_sum = 0;
    for (std::size_t s = 0; s < multi.size(); ++s) {
      const double share =
          ratio * static_cast<double>(groups[multi[s]].size());
      floors[s] = static_cast<std::size_t>(share);
      floor_sum += floors[s];
      fracs.push_back({share - static_cast<double>(floors[s]), s});
    }
    std::sort(fracs.begin(), fracs.end(), [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return a.second < b.second;
    });
    std::size_t extra = remaining_quota > floor_sum
                            ? remaining_quota - floor_sum
                            : 0;
    for (const auto& [frac, s] : fracs) {
      if (extra == 0) break;
      if (floors[s] < groups[multi[s]].size()) {
        ++floors[s];
        --extra;
      }
    }

    Rng rng(seed);
    for (std::size_t s = 0; s < multi.size(); ++s) {
      auto idx = groups[multi[s]];
      rng.shuffle(idx);
      const std::size_t take = std::min(floors[s], idx.size());
      for (std::size_t i = 0; i < idx.size(); ++i) {
        (i < take ? result.train : result.test).push_back(idx[i]);
      }
    }
  }
  std::sort(result.train.begin(), result.train.end());
  std::sort(result.test.begin(), result.test.end());
  if (result.test.empty())
    result.warnings.push_back("split produced an empty test set");
  return result;
}

RecordSplit train_test_split(const std::vector<StoryRecord>& records,
                             double ratio, std::uint64_t seed,
                             StratifyBy stratify) {
  std::vector<std::string> strata;
  const std::vector<std::string>* strata_ptr = nullptr;
  if (stratify == StratifyBy::Validity) {
    strata.reserve(records.size());
    for (const auto& r : records) strata.push_back(to_string(r.validity));
    strata_ptr = &strata;
  }
  const IndexSplit idx = split_indices(records.size(), ratio, seed, strata_ptr);
  RecordSplit out;
  out.warnings = idx.warnings;
  for (const auto i : idx.train) out.train.push_back(records[i]);
  for (const auto i : idx.test) out.test.push_back(records[i]);
  return out;
}

}  // namespace factline
