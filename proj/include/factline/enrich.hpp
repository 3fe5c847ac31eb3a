#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "factline/errors.hpp"

namespace factline {

// ---------------------------------------------------------------------------
// Person extraction
// ---------------------------------------------------------------------------

class PersonAnnotator {
 public:
  virtual ~PersonAnnotator() = default;
  // De-duplicated names in first-appearance order. record_id is only
  // meaningful to sidecar-style annotators.
  virtual std::vector<std::string> annotate(std::string_view record_id,
                                            std::string_view text) const = 0;
};

// Capitalized-run heuristic: maximal runs of capitalized tokens, filtered
// against a non-name stoplist, qualify when they are at least two tokens
// long or when a single token is honorific-preceded or gazetteered. A
// sentence-initial token only opens a run if it is in the gazetteer.
class RuleBasedAnnotator final : public PersonAnnotator {
 public:
  RuleBasedAnnotator(std::set<std::string> gazetteer,
                     std::set<std::string> stoplist);

  static RuleBasedAnnotator load(const std::filesystem::path& gazetteer,
                                 const std::filesystem::path& stoplist);

  std::vector<std::string> annotate(std::string_view record_id,
                                    std::string_view text) const override;

 private:
  std::set<std::string> gazetteer_;  // lowercase first names
  std::set<std::string> stoplist_;   // lowercase non-name words
  std::set<std::string> honorifics_;
};

// Reads pre-computed annotations from a JSONL sidecar of
// {"id": ..., "persons": [...]}; a missing record id is an error.
class SidecarAnnotator final : public PersonAnnotator {
 public:
  static SidecarAnnotator load(const std::filesystem::path& path);

  std::vector<std::string> annotate(std::string_view record_id,
                                    std::string_view text) const override;

 private:
  std::map<std::string, std::vector<std::string>> by_id_;
};

std::vector<std::string> extract_person_names(std::string_view text,
                                              const PersonAnnotator& annotator,
                                              std::string_view record_id = {});

// ---------------------------------------------------------------------------
// Wikipedia page-existence client
// ---------------------------------------------------------------------------

struct HttpResponse {
  int status = 0;
  std::string body;
};

class Transport {
 public:
  virtual ~Transport() = default;
  // host like "https://en.wikipedia.org", path starting with '/'.
  virtual HttpResponse get(const std::string& host, const std::string& path) = 0;
};

std::shared_ptr<Transport> make_httplib_transport();

class RateLimiter {
 public:
  explicit RateLimiter(std::chrono::milliseconds min_interval =
                           std::chrono::milliseconds(200))
      : min_interval_(min_interval) {}
  void wait();

 private:
  std::chrono::milliseconds min_interval_;
  std::chrono::steady_clock::time_point last_{};
  std::mutex mutex_;
};

// Append-only persistent cache of name -> page-exists answers. Lookups are
// case-normalized; every put is flushed to disk immediately.
class WikiCache {
 public:
  WikiCache() = default;
  static WikiCache load(const std::filesystem::path& path);

  std::optional<bool> lookup(std::string_view name) const;
  void put(std::string_view name, bool exists);
  std::size_t size() const { return entries_.size(); }

  static std::string normalize(std::string_view name);

 private:
  std::map<std::string, bool> entries_;
  std::filesystem::path path_;  // empty for a purely in-memory cache
};

enum class WikiMode { Online, Offline };

struct WikiClientConfig {
  WikiMode mode = WikiMode::Offline;
  std::string host = "https://en.wikipedia.org";
  std::string api_path = "/w/api.php";
  int max_attempts = 3;
  std::chrono::milliseconds backoff_base{200};
  std::chrono::milliseconds rate_interval{200};
};

class WikiClient {
 public:
  WikiClient(WikiCache& cache, const WikiClientConfig& config,
             std::shared_ptr<Transport> transport = nullptr);

  // Cache first; online misses query the MediaWiki API (action=query,
  // titles=<name>) and the answer is cached. Offline misses return false
  // and are recorded.
  bool has_page(std::string_view name);

  const std::vector<std::string>& offline_misses() const { return misses_; }
  std::size_t network_requests() const { return requests_; }

 private:
  WikiCache& cache_;
  WikiClientConfig config_;
  std::shared_ptr<Transport> transport_;
  RateLimiter limiter_;
  std::vector<std::string> misses_;
  std::size_t requests_ = 0;
};

std::string url_encode(std::string_view s);

// Parses a MediaWiki action=query response; a page exists when the page
// set has an entry without the "missing" marker.
bool mediawiki_page_exists(const std::string& body);

}  // namespace factline
