#include <doctest.h>

#include <algorithm>
#include <set>

#include "factline/corpus.hpp"
#include "helpers.hpp"

using namespace factline;

TEST_SUITE_BEGIN("corpus");

namespace {

// Every verdict spelling the default table must cover, with its harmonized
// label. This is the goldenfile: additions to the table must not break
// these rows.
const std::vector<std::pair<std::string, Validity>> kGoldenVariants = {
    {"Correct", Validity::True},
    {"Correct Attribution", Validity::True},
    {"True", Validity::True},
    {"Half true", Validity::PartiallyTrue},
    {"Half truth", Validity::PartiallyTrue},
    {"Mixed", Validity::PartiallyTrue},
    {"Mixture", Validity::PartiallyTrue},
    {"Mostly True", Validity::PartiallyTrue},
    {"Partially True", Validity::PartiallyTrue},
    {"Partly True", Validity::PartiallyTrue},
    {"Partially correct", Validity::PartiallyTrue},
    {"True but", Validity::PartiallyTrue},
    {"Mostly False", Validity::PartiallyFalse},
    {"Partly False", Validity::PartiallyFalse},
    {"Partially False", Validity::PartiallyFalse},
    {"Two Pinocchios", Validity::PartiallyFalse},
    {"False", Validity::False},
    {"Falseo", Validity::False},
    {"Fake", Validity::False},
    {"Misleading", Validity::False},
    {"Pants on fire", Validity::False},
    {"Pants-fire", Validity::False},
    {"Scam", Validity::False},
    {"Barely-true", Validity::False},
    {"Org. doesn't apply rating", Validity::Unknown},
    {"In dispute", Validity::Unknown},
    {"No evidence", Validity::Unknown},
    {"Unproven", Validity::Unknown},
    {"Unverified", Validity::Unknown},
    {"Suspicions", Validity::Unknown},
};

StoryRecord make_record(const std::string& id, Validity v) {
  StoryRecord r;
  r.id = id;
  r.validity = v;
  r.story = "story " + id;
  return r;
}

}  // namespace

TEST_CASE("goldenfile: every default variant maps to its harmonized label") {
  const ValidityLexicon lex = ValidityLexicon::defaults();
  CHECK(kGoldenVariants.size() == 30);
  CHECK(lex.size() == 30);
  for (const auto& [raw, expected] : kGoldenVariants) {
    CAPTURE(raw);
    CHECK(harmonize_validity(raw, lex) == expected);
  }
}

TEST_CASE("goldenfile: shipped lexicon asset matches the built-in defaults") {
  const ValidityLexicon asset =
      ValidityLexicon::load(test::asset_dir() / "validity_lexicon.json");
  const ValidityLexicon builtin = ValidityLexicon::defaults();
  CHECK(asset.entries() == builtin.entries());
}

TEST_CASE("harmonize_validity normalizes case, hyphens and spacing") {
  const ValidityLexicon lex = ValidityLexicon::defaults();
  CHECK(harmonize_validity("Pants on fire", lex) == Validity::False);
  CHECK(harmonize_validity("PANTS-ON-FIRE", lex) == Validity::False);
  CHECK(harmonize_validity("  pants_on_fire ", lex) == Validity::False);
  CHECK(harmonize_validity("Correct Attribution", lex) == Validity::True);
  CHECK(harmonize_validity("correct   attribution", lex) == Validity::True);
  CHECK(harmonize_validity("Unproven", lex) == Validity::Unknown);
}

TEST_CASE("harmonize_validity rejects unmapped labels unless permissive") {
  const ValidityLexicon lex = ValidityLexicon::defaults();
  CHECK_THROWS_AS(harmonize_validity("totally bogus", lex), UnmappedLabelError);
  CHECK(harmonize_validity("totally bogus", lex, true) == Validity::Unknown);
  try {
    harmonize_validity("totally bogus", lex);
    FAIL("expected UnmappedLabelError");
  } catch (const UnmappedLabelError& e) {
    CHECK(e.raw_label() == "totally bogus");
  }
}

TEST_CASE("site parsing is case-insensitive with Other fallback") {
  CHECK(Site::parse("poynter").kind == Site::Kind::Poynter);
  CHECK(Site::parse("PolitiFact").kind == Site::Kind::PolitiFact);
  CHECK(Site::parse("SNOPES").kind == Site::Kind::Snopes);
  const Site other = Site::parse("Full Fact");
  CHECK(other.kind == Site::Kind::Other);
  CHECK(other.name == "full fact");
  CHECK(other.str() == "full fact");
}

TEST_CASE("harmonize_medium: website detection from TLD patterns") {
  const auto tags = harmonize_medium("https://example.net", nullptr);
  CHECK(tags == std::set<MediumTag>{{MediumTag::Kind::Website, {}}});
  CHECK(harmonize_medium("www.rumors.org", nullptr)
            .count({MediumTag::Kind::Website, {}}) == 1);
  CHECK(harmonize_medium("example.com/post/7", nullptr)
            .count({MediumTag::Kind::Website, {}}) == 1);
}

TEST_CASE("harmonize_medium: platform names parse case-insensitively") {
  const auto tags = harmonize_medium("Facebook, WhatsApp", nullptr);
  CHECK(tags == std::set<MediumTag>{{MediumTag::Kind::Facebook, {}},
                                    {MediumTag::Kind::WhatsApp, {}}});
  CHECK(harmonize_medium("FACEBOOK", nullptr)
            .count({MediumTag::Kind::Facebook, {}}) == 1);
  CHECK(harmonize_medium("tiktok video", nullptr)
            .count({MediumTag::Kind::TikTok, {}}) == 1);
}

TEST_CASE("harmonize_medium: person hits tag Person") {
  const PersonExtractFn stub = [](std::string_view text) {
    std::vector<std::string> names;
    if (text.find("John Smith") != std::string_view::npos)
      names.push_back("John Smith");
    return names;
  };
  CHECK(harmonize_medium("John Smith", stub) ==
        std::set<MediumTag>{{MediumTag::Kind::Person, {}}});
  CHECK(harmonize_medium("nobody here", stub).empty());
  CHECK(harmonize_medium("", stub).empty());
}

TEST_CASE("harmonize_medium union is monotone under added platform mentions") {
  const std::vector<std::string> bases = {
      "https://example.net", "John Smith", "Twitter", "WhatsApp, Instagram",
      "random text"};
  for (const auto& base : bases) {
    CAPTURE(base);
    const auto before = harmonize_medium(base, nullptr);
    const auto after = harmonize_medium(base + ", Facebook", nullptr);
    CHECK(std::includes(after.begin(), after.end(), before.begin(),
                        before.end()));
    CHECK(after.count({MediumTag::Kind::Facebook, {}}) == 1);
  }
}

TEST_CASE("ingest: jsonl happy path with harmonization") {
  test::TempDir dir("ingest");
  test::write_file(dir.file("in.jsonl"),
                   R"({"id":"p1","site":"poynter","date":"2020-03-01","raw_validity":"FALSE","story":"Bats cause it","raw_medium":"Facebook"})"
                   "\n"
                   R"({"id":"p2","site":"snopes","date":"2020-03-08","raw_validity":"Unproven","story":"Second story"})"
                   "\n");
  const auto records = ingest_records(dir.file("in.jsonl"), RecordFormat::Jsonl);
  REQUIRE(records.size() == 2);
  CHECK(records[0].id == "p1");
  CHECK(records[0].site.kind == Site::Kind::Poynter);
  CHECK(records[0].validity == Validity::False);
  CHECK(records[0].date == Date{2020, 3, 1});
  CHECK(records[0].mediums.count({MediumTag::Kind::Facebook, {}}) == 1);
  CHECK(records[1].validity == Validity::Unknown);
  CHECK(records[1].kind == RecordKind::FactCheck);
}

TEST_CASE("ingest: empty file gives an empty list") {
  test::TempDir dir("ingest_empty");
  test::write_file(dir.file("in.jsonl"), "");
  CHECK(ingest_records(dir.file("in.jsonl"), RecordFormat::Jsonl).empty());
}

TEST_CASE("ingest: duplicate ids are rejected by name") {
  test::TempDir dir("ingest_dup");
  test::write_file(dir.file("in.jsonl"),
                   R"({"id":"x","story":"one"})" "\n"
                   R"({"id":"x","story":"two"})" "\n");
  try {
    ingest_records(dir.file("in.jsonl"), RecordFormat::Jsonl);
    FAIL("expected DuplicateIdError");
  } catch (const DuplicateIdError& e) {
    CHECK(e.id() == "x");
  }
}

TEST_CASE("ingest: malformed json carries the line number") {
  test::TempDir dir("ingest_bad");
  test::write_file(dir.file("in.jsonl"),
                   R"({"id":"a","story":"fine"})" "\n"
                   "{not json\n");
  try {
    ingest_records(dir.file("in.jsonl"), RecordFormat::Jsonl);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("ingest: missing id is synthesized from site and row index") {
  test::TempDir dir("ingest_noid");
  test::write_file(dir.file("in.jsonl"),
                   R"({"site":"poynter","story":"one"})" "\n"
                   R"({"site":"poynter","story":"two"})" "\n");
  const auto records = ingest_records(dir.file("in.jsonl"), RecordFormat::Jsonl);
  CHECK(records[0].id == "poynter-0");
  CHECK(records[1].id == "poynter-1");
}

TEST_CASE("ingest: unparseable dates are nulled and flagged") {
  test::TempDir dir("ingest_date");
  test::write_file(dir.file("in.jsonl"),
                   R"({"id":"a","date":"March 1st","story":"s"})" "\n"
                   R"({"id":"b","date":"2020-02-30","story":"s"})" "\n"
                   R"({"id":"c","story":"s"})" "\n");
  const auto records = ingest_records(dir.file("in.jsonl"), RecordFormat::Jsonl);
  CHECK(!records[0].date);
  CHECK(records[0].date_flagged);
  CHECK(!records[1].date);  // not a real calendar date
  CHECK(records[1].date_flagged);
  CHECK(!records[2].date);
  CHECK(!records[2].date_flagged);  // absent, not malformed
}

TEST_CASE("ingest: extra date parsers are consulted after ISO") {
  test::TempDir dir("ingest_extra");
  test::write_file(dir.file("in.jsonl"),
                   R"({"id":"a","date":"01/03/2020","story":"s"})" "\n");
  IngestOptions options;
  options.extra_date_parsers.push_back(
      [](std::string_view s) -> std::optional<Date> {
        if (s.size() != 10 || s[2] != '/' || s[5] != '/') return std::nullopt;
        const Date d{std::stoi(std::string(s.substr(6, 4))),
                     static_cast<unsigned>(std::stoi(std::string(s.substr(3, 2)))),
                     static_cast<unsigned>(std::stoi(std::string(s.substr(0, 2))))};
        if (!d.valid()) return std::nullopt;
        return d;
      });
  const auto records =
      ingest_records(dir.file("in.jsonl"), RecordFormat::Jsonl, options);
  CHECK(records[0].date == Date{2020, 3, 1});
}

TEST_CASE("ingest: csv with RFC-4180 quoting") {
  test::TempDir dir("ingest_csv");
  test::write_file(
      dir.file("in.csv"),
      "id,site,date,raw_validity,story,elaboration,raw_medium,story_type,kind\n"
      "c1,politifact,2020-04-01,Pants on fire,\"Claim, with commas "
      "\"\"quoted\"\"\",,Twitter,,FactCheck\n");
  const auto records = ingest_records(dir.file("in.csv"), RecordFormat::Csv);
  REQUIRE(records.size() == 1);
  CHECK(records[0].story == "Claim, with commas \"quoted\"");
  CHECK(records[0].validity == Validity::False);
  CHECK(records[0].site.kind == Site::Kind::PolitiFact);
  CHECK(records[0].mediums.count({MediumTag::Kind::Twitter, {}}) == 1);
}

TEST_CASE("ingest -> serialize -> ingest round-trips identically") {
  test::TempDir dir("roundtrip");
  test::write_file(
      dir.file("in.jsonl"),
      R"({"id":"p1","site":"poynter","date":"2020-03-01","raw_validity":"False","story":"A story","elaboration":"More","raw_medium":"Facebook"})"
      "\n"
      R"({"id":"t1","site":"twitter","raw_validity":"Fake","story":"tweet text","kind":"Tweet","story_type":"Conspiracy"})"
      "\n");
  const auto original =
      ingest_records(dir.file("in.jsonl"), RecordFormat::Jsonl);

  for (const RecordFormat format : {RecordFormat::Jsonl, RecordFormat::Csv}) {
    const auto path =
        dir.file(format == RecordFormat::Jsonl ? "out.jsonl" : "out.csv");
    serialize_records(original, path, format);
    const auto reloaded = ingest_records(path, format);
    CHECK(reloaded == original);
  }
}

TEST_CASE("split: 10 records at 0.8 give 8 train / 2 test") {
  std::vector<StoryRecord> records;
  for (int i = 0; i < 10; ++i)
    records.push_back(make_record("r" + std::to_string(i), Validity::False));
  const RecordSplit split = train_test_split(records, 0.8, 7);
  CHECK(split.train.size() == 8);
  CHECK(split.test.size() == 2);
}

TEST_CASE("split: single record goes to train with a warning") {
  const std::vector<StoryRecord> records = {make_record("only", Validity::True)};
  const RecordSplit split = train_test_split(records, 0.8, 7);
  CHECK(split.train.size() == 1);
  CHECK(split.test.empty());
  CHECK(!split.warnings.empty());
}

TEST_CASE("split: same seed twice gives identical partitions") {
  std::vector<StoryRecord> records;
  for (int i = 0; i < 23; ++i)
    records.push_back(make_record("r" + std::to_string(i),
                                  i % 3 ? Validity::False : Validity::True));
  const RecordSplit a = train_test_split(records, 0.7, 99);
  const RecordSplit b = train_test_split(records, 0.7, 99);
  CHECK(a.train == b.train);
  CHECK(a.test == b.test);
  const RecordSplit c = train_test_split(records, 0.7, 100);
  CHECK(a.train != c.train);  // different seed, different shuffle
}

TEST_CASE("split: ratio out of range is an error") {
  std::vector<StoryRecord> records = {make_record("a", Validity::True),
                                      make_record("b", Validity::False)};
  CHECK_THROWS_AS(train_test_split(records, 0.0, 1), ConfigError);
  CHECK_THROWS_AS(train_test_split(records, 1.0, 1), ConfigError);
  CHECK_THROWS_AS(train_test_split({}, 0.5, 1), ConfigError);
}

TEST_CASE("split property: exact partition for many seeds and ratios") {
  for (const std::uint64_t seed : {1ULL, 2ULL, 77ULL, 12345ULL}) {
    for (const double ratio : {0.2, 0.5, 0.8, 0.9}) {
      for (const std::size_t n : {1UL, 2UL, 7UL, 40UL}) {
        CAPTURE(seed);
        CAPTURE(ratio);
        CAPTURE(n);
        const IndexSplit split = split_indices(n, ratio, seed);
        std::set<std::size_t> all(split.train.begin(), split.train.end());
        for (const auto i : split.test) {
          CHECK(all.insert(i).second);  // no overlap
        }
        CHECK(all.size() == n);  // union covers everything
        CHECK(split.train.size() ==
              static_cast<std::size_t>(std::llround(ratio * double(n))));
      }
    }
  }
}

TEST_CASE("split property: stratified proportions within one record") {
  std::vector<std::string> strata;
  for (int i = 0; i < 40; ++i) strata.push_back("False");
  for (int i = 0; i < 10; ++i) strata.push_back("True");
  for (int i = 0; i < 5; ++i) strata.push_back("Unknown");

  for (const std::uint64_t seed : {3ULL, 9ULL, 21ULL}) {
    const IndexSplit split = split_indices(strata.size(), 0.8, seed, &strata);
    CHECK(split.train.size() == 44);  // round(0.8 * 55)
    std::map<std::string, std::size_t> train_counts;
    for (const auto i : split.train) ++train_counts[strata[i]];
    CHECK(std::abs(double(train_counts["False"]) - 0.8 * 40) <= 1.0);
    CHECK(std::abs(double(train_counts["True"]) - 0.8 * 10) <= 1.0);
    CHECK(std::abs(double(train_counts["Unknown"]) - 0.8 * 5) <= 1.0);
  }
}

TEST_CASE("split: singleton stratum lands in train with a warning") {
  std::vector<std::string> strata = {"A", "A", "A", "A", "B"};
  const IndexSplit split = split_indices(5, 0.8, 3, &strata);
  bool b_in_train = false;
  for (const auto i : split.train) {
    if (strata[i] == "B") b_in_train = true;
  }
  CHECK(b_in_train);
  CHECK(!split.warnings.empty());
}

TEST_SUITE_END();
