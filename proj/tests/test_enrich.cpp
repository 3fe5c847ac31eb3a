#include <doctest.h>

#include <atomic>

#include "factline/enrich.hpp"
#include "helpers.hpp"

using namespace factline;

TEST_SUITE_BEGIN("enrich");

namespace {

RuleBasedAnnotator asset_annotator() {
  return RuleBasedAnnotator::load(test::asset_dir() / "name_gazetteer.txt",
                                  test::asset_dir() / "name_stoplist.txt");
}

class CountingTransport final : public Transport {
 public:
  explicit CountingTransport(std::string body, int status = 200)
      : body_(std::move(body)), status_(status) {}
  HttpResponse get(const std::string&, const std::string&) override {
    ++calls;
    return {status_, body_};
  }
  std::atomic<int> calls{0};

 private:
  std::string body_;
  int status_;
};

class FailingTransport final : public Transport {
 public:
  HttpResponse get(const std::string&, const std::string&) override {
    ++calls;
    throw NetworkError("connection refused");
  }
  std::atomic<int> calls{0};
};

constexpr const char* kExistsBody =
    R"({"query":{"pages":{"42":{"pageid":42,"title":"Some Person"}}}})";
constexpr const char* kMissingBody =
    R"({"query":{"pages":{"-1":{"title":"Nobody","missing":""}}}})";

}  // namespace

TEST_CASE("rule-based extraction: headline with stoplisted title words") {
  const RuleBasedAnnotator annotator = asset_annotator();
  const auto names = annotator.annotate(
      {}, "Did Kim Jong Un Order North Korea First Coronavirus Patient To Be "
          "Executed");
  bool found = false;
  for (const auto& n : names) {
    if (n == "Kim Jong Un") found = true;
  }
  CHECK(found);
}

TEST_CASE("rule-based extraction: empty and lowercase-only text") {
  const RuleBasedAnnotator annotator = asset_annotator();
  CHECK(annotator.annotate({}, "").empty());
  CHECK(annotator.annotate({}, "the quick brown fox").empty());
}

TEST_CASE("rule-based extraction: sentence-initial names need the gazetteer") {
  const RuleBasedAnnotator annotator = asset_annotator();
  // "John" is gazetteered, so the sentence-opening bigram is kept
  const auto names = annotator.annotate({}, "John Smith said the claim is false.");
  REQUIRE(names.size() == 1);
  CHECK(names[0] == "John Smith");
  // "Quarterly" is not a first name; mid-sentence capitals still qualify
  const auto none = annotator.annotate({}, "Quarterly results disappointed.");
  CHECK(none.empty());
}

TEST_CASE("rule-based extraction: honorific licenses a single name") {
  const RuleBasedAnnotator annotator = asset_annotator();
  const auto names = annotator.annotate({}, "A statement by Dr. Fauci yesterday");
  REQUIRE(!names.empty());
  CHECK(names[0] == "Fauci");
}

TEST_CASE("rule-based extraction: deduplicated, first-appearance order, verbatim") {
  const RuleBasedAnnotator annotator = asset_annotator();
  const std::string text =
      "Boris Johnson met Angela Merkel. Later Boris Johnson spoke again.";
  const auto names = annotator.annotate({}, text);
  REQUIRE(names.size() == 2);
  CHECK(names[0] == "Boris Johnson");
  CHECK(names[1] == "Angela Merkel");
  for (const auto& n : names) {
    CHECK(text.find(n) != std::string::npos);  // names appear verbatim
  }
  // deterministic
  CHECK(annotator.annotate({}, text) == names);
}

TEST_CASE("sidecar annotator: lookup by record id, error on a miss") {
  test::TempDir dir("sidecar");
  test::write_file(dir.file("persons.jsonl"),
                   R"({"id":"r1","persons":["Jane Doe"]})" "\n"
                   R"({"id":"r2","persons":[]})" "\n");
  const SidecarAnnotator annotator = SidecarAnnotator::load(dir.file("persons.jsonl"));
  CHECK(annotator.annotate("r1", "ignored text") ==
        std::vector<std::string>{"Jane Doe"});
  CHECK(annotator.annotate("r2", "").empty());
  try {
    annotator.annotate("missing-id", "");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("missing-id") != std::string::npos);
  }
}

TEST_CASE("wiki cache: round-trip, case normalization, append persistence") {
  test::TempDir dir("cache");
  const auto path = dir.file("cache.jsonl");
  {
    WikiCache cache = WikiCache::load(path);
    CHECK(cache.size() == 0);
    cache.put("Ada Lovelace", true);
    cache.put("Nobody Realname", false);
    CHECK(cache.lookup("ada lovelace") == true);
    CHECK(cache.lookup("ADA  LOVELACE") == true);
  }
  {
    const WikiCache cache = WikiCache::load(path);
    CHECK(cache.size() == 2);
    CHECK(cache.lookup("Ada Lovelace") == true);
    CHECK(cache.lookup("Nobody Realname") == false);
    CHECK(!cache.lookup("Unseen Person"));
  }
}

TEST_CASE("mediawiki response parsing") {
  CHECK(mediawiki_page_exists(kExistsBody));
  CHECK(!mediawiki_page_exists(kMissingBody));
  CHECK_THROWS_AS(mediawiki_page_exists("not json"), ParseError);
}

TEST_CASE("offline mode answers from cache and records misses, zero network") {
  test::TempDir dir("offline");
  WikiCache cache = WikiCache::load(dir.file("cache.jsonl"));
  cache.put("Known Person", true);

  const auto failing = std::make_shared<FailingTransport>();
  WikiClientConfig config;
  config.mode = WikiMode::Offline;
  WikiClient client(cache, config, failing);

  CHECK(client.has_page("Known Person"));
  CHECK(!client.has_page("Unknown Person"));
  CHECK(client.offline_misses() == std::vector<std::string>{"Unknown Person"});
  CHECK(failing->calls == 0);
  CHECK(client.network_requests() == 0);
  CHECK_THROWS_AS(client.has_page("  "), ConfigError);
}

TEST_CASE("online mode: caches answers, one request per distinct name") {
  test::TempDir dir("online");
  WikiCache cache = WikiCache::load(dir.file("cache.jsonl"));
  const auto transport = std::make_shared<CountingTransport>(kExistsBody);
  WikiClientConfig config;
  config.mode = WikiMode::Online;
  config.rate_interval = std::chrono::milliseconds(0);
  WikiClient client(cache, config, transport);

  CHECK(client.has_page("Ada Lovelace"));
  CHECK(client.has_page("Ada Lovelace"));
  CHECK(client.has_page("ada lovelace"));
  CHECK(transport->calls == 1);

  CHECK(client.has_page("Alan Turing"));
  CHECK(transport->calls == 2);

  // the second client reads the answers straight from the persisted cache
  WikiCache reloaded = WikiCache::load(dir.file("cache.jsonl"));
  const auto failing = std::make_shared<FailingTransport>();
  WikiClient offline_client(reloaded, config, failing);
  CHECK(offline_client.has_page("Ada Lovelace"));
  CHECK(failing->calls == 0);
}

TEST_CASE("online mode: missing pages cache as false") {
  test::TempDir dir("online_miss");
  WikiCache cache = WikiCache::load(dir.file("cache.jsonl"));
  const auto transport = std::make_shared<CountingTransport>(kMissingBody);
  WikiClientConfig config;
  config.mode = WikiMode::Online;
  config.rate_interval = std::chrono::milliseconds(0);
  WikiClient client(cache, config, transport);
  CHECK(!client.has_page("Nobody Realname"));
  CHECK(cache.lookup("Nobody Realname") == false);
}

TEST_CASE("online mode: three failing attempts then an error") {
  test::TempDir dir("retry");
  WikiCache cache = WikiCache::load(dir.file("cache.jsonl"));
  const auto failing = std::make_shared<FailingTransport>();
  WikiClientConfig config;
  config.mode = WikiMode::Online;
  config.max_attempts = 3;
  config.backoff_base = std::chrono::milliseconds(1);
  config.rate_interval = std::chrono::milliseconds(0);
  WikiClient client(cache, config, failing);
  CHECK_THROWS_AS(client.has_page("Ada Lovelace"), NetworkError);
  CHECK(failing->calls == 3);
  CHECK(!cache.lookup("Ada Lovelace"));  // failures are not cached
}

TEST_CASE("url encoding of titles") {
  CHECK(url_encode("Ada Lovelace") == "Ada%20Lovelace");
  CHECK(url_encode("Søren") == "S%C3%B8ren");
  CHECK(url_encode("a-b_c.d~e") == "a-b_c.d~e");
}

TEST_SUITE_END();
