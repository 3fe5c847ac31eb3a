#include <doctest.h>

#include <fstream>
#include <set>

#include "factline/csv.hpp"
#include "factline/date.hpp"
#include "factline/pipeline.hpp"
#include "helpers.hpp"

using namespace factline;

TEST_SUITE_BEGIN("pipeline");

namespace {

PipelineConfig fixture_config(const std::filesystem::path& out) {
  PipelineConfig c;
  c.stories_path = test::fixture_dir() / "stories.jsonl";
  c.tweets_path = test::fixture_dir() / "tweets.jsonl";
  c.embeddings_path = test::fixture_dir() / "embeddings.jsonl";
  c.annotations_path = test::fixture_dir() / "annotations.jsonl";
  c.validity_lexicon_path = test::asset_dir() / "validity_lexicon.json";
  c.type_lexicon_path = test::asset_dir() / "storytype_lexicon.json";
  c.stopwords_path = test::asset_dir() / "stopwords.txt";
  c.gazetteer_path = test::asset_dir() / "name_gazetteer.txt";
  c.name_stoplist_path = test::asset_dir() / "name_stoplist.txt";
  c.wiki_cache_path = test::fixture_dir() / "wiki_cache.jsonl";
  c.offline = true;
  c.baseline_trials = 200;
  c.out_dir = out;
  return c;
}

const std::vector<std::string> kReportFiles = {
    "records.jsonl",       "vocab.json",
    "tfidf.jsonl",         "cluster_model.json",
    "assignments.csv",     "validity_f1.csv",
    "agreement.csv",       "agreement_evidence.jsonl",
    "storytype_eval.csv",  "timeseries_week.csv",
    "clusters_by_site.csv", "clusters_by_medium.csv",
    "clusters_by_validity.csv", "manifest.json"};

const std::vector<std::string> kCsvOutputs = {
    "assignments.csv",      "validity_f1.csv",
    "agreement.csv",        "storytype_eval.csv",
    "timeseries_week.csv",  "clusters_by_site.csv",
    "clusters_by_medium.csv", "clusters_by_validity.csv"};

StoryRecord dated_record(const std::string& id, std::optional<Date> date) {
  StoryRecord r;
  r.id = id;
  r.story = "s";
  r.date = date;
  return r;
}

}  // namespace

TEST_CASE("iso weeks match the reference table") {
  // frozen from an independent calendar implementation
  const std::vector<std::pair<Date, IsoWeek>> table = {
      {{2020, 1, 1}, {2020, 1}},   {{2019, 12, 29}, {2019, 52}},
      {{2019, 12, 30}, {2020, 1}}, {{2019, 12, 31}, {2020, 1}},
      {{2020, 12, 28}, {2020, 53}}, {{2020, 12, 29}, {2020, 53}},
      {{2020, 12, 31}, {2020, 53}}, {{2021, 1, 1}, {2020, 53}},
      {{2021, 1, 3}, {2020, 53}},  {{2021, 1, 4}, {2021, 1}},
      {{2020, 3, 30}, {2020, 14}}, {{2020, 6, 5}, {2020, 23}},
      {{2020, 1, 14}, {2020, 3}},  {{2016, 1, 1}, {2015, 53}},
      {{2015, 12, 28}, {2015, 53}}, {{2026, 8, 9}, {2026, 32}},
  };
  for (const auto& [date, week] : table) {
    CAPTURE(date.to_iso());
    CHECK(iso_week(date) == week);
  }
  CHECK(iso_week(Date{2020, 1, 14}).str() == "2020-W03");
}

TEST_CASE("dates: iso parsing accepts only real calendar dates") {
  CHECK(Date::parse_iso("2020-02-29") == Date{2020, 2, 29});
  CHECK(!Date::parse_iso("2021-02-29"));
  CHECK(!Date::parse_iso("2020-13-01"));
  CHECK(!Date::parse_iso("20200101"));
  CHECK(!Date::parse_iso("2020-1-1"));
  CHECK(Date{2020, 2, 29}.to_iso() == "2020-02-29");
}

TEST_CASE("timeseries: aggregation, buckets, dateless exclusion") {
  std::vector<StoryRecord> records;
  std::vector<int> clusters;
  // three same-week records in one cluster
  for (int i = 0; i < 3; ++i) {
    records.push_back(dated_record("a" + std::to_string(i),
                                   Date{2020, 3, static_cast<unsigned>(10 + i)}));
    clusters.push_back(2);
  }
  // a year-boundary record: 2021-01-01 is ISO week 2020-W53
  records.push_back(dated_record("y", Date{2021, 1, 1}));
  clusters.push_back(0);
  records.push_back(dated_record("nodate", std::nullopt));
  clusters.push_back(0);

  const TimeseriesResult weekly = timeseries_report(records, clusters);
  CHECK(weekly.dateless == 1);
  REQUIRE(weekly.rows.size() == 3);  // header + 2 buckets
  CHECK(weekly.rows[0] ==
        std::vector<std::string>{"iso_week", "cluster", "count"});
  CHECK(weekly.rows[1] == std::vector<std::string>{"2020-W11", "2", "3"});
  CHECK(weekly.rows[2] == std::vector<std::string>{"2020-W53", "0", "1"});

  TimeseriesOptions daily;
  daily.bucket = "day";
  const TimeseriesResult by_day = timeseries_report(records, clusters, daily);
  CHECK(by_day.rows.size() == 5);  // header + 4 distinct dates
  CHECK(by_day.rows[0][0] == "date");
}

TEST_CASE("timeseries: empty input emits a header-only table") {
  const TimeseriesResult r = timeseries_report({}, {});
  REQUIRE(r.rows.size() == 1);
  CHECK(r.rows[0] == std::vector<std::string>{"iso_week", "cluster", "count"});
}

TEST_CASE("cluster breakdowns report counts and per-cluster fractions") {
  std::vector<StoryRecord> records;
  std::vector<int> clusters;
  for (int i = 0; i < 4; ++i) {
    StoryRecord r = dated_record("r" + std::to_string(i), std::nullopt);
    r.site = Site::parse(i < 3 ? "poynter" : "snopes");
    r.validity = i % 2 ? Validity::False : Validity::True;
    if (i == 0) r.mediums = {{MediumTag::Kind::Facebook, {}},
                             {MediumTag::Kind::WhatsApp, {}}};
    records.push_back(r);
    clusters.push_back(0);
  }
  const auto by_site = cluster_breakdown_by_site(records, clusters);
  REQUIRE(by_site.size() == 3);
  CHECK(by_site[0] ==
        std::vector<std::string>{"cluster", "site", "count", "fraction"});
  CHECK(by_site[1] == std::vector<std::string>{"0", "Poynter", "3", "0.750000"});
  CHECK(by_site[2] == std::vector<std::string>{"0", "Snopes", "1", "0.250000"});

  const auto by_medium = cluster_breakdown_by_medium(records, clusters);
  // one record with two tags, three with none
  REQUIRE(by_medium.size() == 4);
  CHECK(by_medium[1][1] == "Facebook");
  CHECK(by_medium[1][3] == "0.200000");  // 1 of 5 medium counts
  CHECK(by_medium[3][1] == "none");

  const auto by_validity = cluster_breakdown_by_validity(records, clusters);
  REQUIRE(by_validity.size() == 3);
  CHECK(by_validity[1][1] == "False");
  CHECK(by_validity[1][2] == "2");
}

TEST_CASE("config validation fails fast on missing files and bad ranges") {
  test::TempDir dir("cfg");
  PipelineConfig config = fixture_config(dir.path() / "out");
  SUBCASE("missing embedding file") {
    config.embeddings_path = dir.file("missing.jsonl");
    CHECK_THROWS_AS(config.validate({Stage::Cluster}), ConfigError);
  }
  SUBCASE("bad split ratio") {
    config.split_ratio = 1.2;
    CHECK_THROWS_AS(config.validate({Stage::Validity}), ConfigError);
  }
  SUBCASE("bad bucket") {
    config.bucket = "month";
    CHECK_THROWS_AS(config.validate({Stage::Report}), ConfigError);
  }
  SUBCASE("storytype needs annotations") {
    config.annotations_path.clear();
    CHECK_THROWS_AS(config.validate({Stage::Storytype}), ConfigError);
  }
  SUBCASE("fixture config is valid") {
    CHECK_NOTHROW(config.validate({Stage::Report}));
  }
}

TEST_CASE("full fixture run emits every report with stable schemas") {
  test::TempDir dir("run");
  const PipelineConfig config = fixture_config(dir.path() / "out");
  const RunManifest manifest = run_pipeline(config);

  for (const auto& name : kReportFiles) {
    CAPTURE(name);
    CHECK(std::filesystem::exists(dir.path() / "out" / name));
  }
  CHECK(manifest.stages.size() == 7);
  CHECK(manifest.input_digests.size() >= 5);

  // schema checks on the emitted CSV headers
  const auto header_of = [&](const std::string& file) {
    const auto rows = csv::parse_file(dir.path() / "out" / file);
    REQUIRE(!rows.empty());
    return rows[0];
  };
  CHECK(header_of("validity_f1.csv") ==
        std::vector<std::string>{"cluster", "representation", "classifier",
                                 "f1_macro", "f1_weighted", "f1_micro",
                                 "n_train", "n_test"});
  CHECK(header_of("agreement.csv") ==
        std::vector<std::string>{"cluster", "site_a", "site_b", "candidates",
                                 "matches", "agreement", "zero_candidate_flag"});
  CHECK(header_of("storytype_eval.csv") ==
        std::vector<std::string>{"train_medium", "test_medium", "method",
                                 "precision", "recall", "f1"});
  CHECK(header_of("assignments.csv") ==
        std::vector<std::string>{"id", "cluster"});

  // the fixture has six planted topics; the elbow should find them
  const auto assignments = csv::parse_file(dir.path() / "out" / "assignments.csv");
  std::set<std::string> distinct;
  for (std::size_t i = 1; i < assignments.size(); ++i)
    distinct.insert(assignments[i][1]);
  CHECK(distinct.size() == 6);
  CHECK(assignments.size() == 61);  // header + 60 stories

  // storytype rows cover all four train/test combinations plus baselines
  const auto type_rows = csv::parse_file(dir.path() / "out" / "storytype_eval.csv");
  std::set<std::string> combos;
  for (std::size_t i = 1; i < type_rows.size(); ++i)
    combos.insert(type_rows[i][0] + "|" + type_rows[i][1] + "|" + type_rows[i][2]);
  CHECK(combos.count("stories|stories|nn"));
  CHECK(combos.count("stories|stories|bow"));
  CHECK(combos.count("tweets|stories|nn"));
  CHECK(combos.count("stories|tweets|nn"));
  CHECK(combos.count("tweets|tweets|nn"));
  CHECK(combos.count("-|stories|random_uniform"));
  CHECK(combos.count("-|tweets|random_frequency"));
}

TEST_CASE("rerunning the fixture produces byte-identical CSVs") {
  test::TempDir dir("determinism");
  const PipelineConfig a = fixture_config(dir.path() / "a");
  const PipelineConfig b = fixture_config(dir.path() / "b");
  run_pipeline(a);
  run_pipeline(b);
  for (const auto& name : kCsvOutputs) {
    CAPTURE(name);
    CHECK(test::read_file(dir.path() / "a" / name) ==
          test::read_file(dir.path() / "b" / name));
  }
}

TEST_CASE("stage resumption reuses fresh outputs and recomputes stale ones") {
  test::TempDir dir("resume");
  const PipelineConfig config = fixture_config(dir.path() / "out");
  run_pipeline(config);
  std::map<std::string, std::string> first;
  for (const auto& name : kCsvOutputs)
    first[name] = test::read_file(dir.path() / "out" / name);

  SUBCASE("second run resumes every stage and leaves outputs untouched") {
    const RunManifest again = run_pipeline(config);
    for (const auto& stage : again.stages) {
      CAPTURE(stage.name);
      CHECK(stage.resumed);
    }
    for (const auto& name : kCsvOutputs)
      CHECK(test::read_file(dir.path() / "out" / name) == first[name]);
  }

  SUBCASE("deleting a late output recomputes only that stage, same bytes") {
    std::filesystem::remove(dir.path() / "out" / "agreement.csv");
    const RunManifest again = run_pipeline(config);
    for (const auto& stage : again.stages) {
      CAPTURE(stage.name);
      CHECK(stage.resumed == (stage.name != "agreement"));
    }
    CHECK(test::read_file(dir.path() / "out" / "agreement.csv") ==
          first["agreement.csv"]);
  }

  SUBCASE("a config change invalidates the fingerprint") {
    PipelineConfig changed = config;
    changed.agree_threshold = 0.9;
    const RunManifest again = run_pipeline(changed);
    bool agreement_recomputed = false;
    for (const auto& stage : again.stages) {
      if (stage.name == "agreement") agreement_recomputed = !stage.resumed;
    }
    CHECK(agreement_recomputed);
  }
}

TEST_CASE("manifest digests change only when input bytes change") {
  test::TempDir dir("digest");
  // copy the fixture so it can be mutated
  const auto stories = dir.file("stories.jsonl");
  test::write_file(stories, test::read_file(test::fixture_dir() / "stories.jsonl"));

  PipelineConfig config = fixture_config(dir.path() / "out1");
  config.stories_path = stories;
  const RunManifest m1 = run_pipeline(config, {Stage::Ingest});

  config.out_dir = dir.path() / "out2";
  const RunManifest m2 = run_pipeline(config, {Stage::Ingest});
  CHECK(m1.input_digests == m2.input_digests);

  // append one byte to the stories file
  {
    std::ofstream out(stories, std::ios::app | std::ios::binary);
    out << "\n";
  }
  config.out_dir = dir.path() / "out3";
  const RunManifest m3 = run_pipeline(config, {Stage::Ingest});
  CHECK(m3.input_digests.at(stories.string()) !=
        m1.input_digests.at(stories.string()));
}

TEST_CASE("a failing stage reports its name and aborts the run") {
  test::TempDir dir("fail");
  PipelineConfig config = fixture_config(dir.path() / "out");
  // embeddings that cover none of the record ids
  test::write_file(dir.file("bad_embeddings.jsonl"),
                   R"({"id":"ghost","vector":[1,0]})" "\n");
  config.embeddings_path = dir.file("bad_embeddings.jsonl");
  try {
    run_pipeline(config);
    FAIL("expected StageError");
  } catch (const StageError& e) {
    CHECK(e.stage() == "cluster");
  }
  // upstream intermediates still exist; nothing downstream was written
  CHECK(std::filesystem::exists(dir.path() / "out" / "records.jsonl"));
  CHECK(!std::filesystem::exists(dir.path() / "out" / "agreement.csv"));
}

TEST_CASE("explicit k overrides the elbow rule") {
  test::TempDir dir("k3");
  PipelineConfig config = fixture_config(dir.path() / "out");
  config.k = 3;
  run_pipeline(config, {Stage::Cluster});
  const auto assignments = csv::parse_file(dir.path() / "out" / "assignments.csv");
  std::set<std::string> distinct;
  for (std::size_t i = 1; i < assignments.size(); ++i)
    distinct.insert(assignments[i][1]);
  CHECK(distinct.size() == 3);
}

TEST_CASE("atomic writes leave a .partial file behind on failure") {
  test::TempDir dir("atomic");
  CHECK_NOTHROW(write_text_atomic(dir.file("ok.txt"), "content"));
  CHECK(test::read_file(dir.file("ok.txt")) == "content");
  CHECK(!std::filesystem::exists(dir.file("ok.txt.partial")));
}

TEST_SUITE_END();
