#include "factline/enrich.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <thread>

#include <json.hpp>

// CPPHTTPLIB_OPENSSL_SUPPORT comes from the build so every translation
// unit sees one httplib configuration
#include <httplib.h>

namespace factline {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::set<std::string> load_word_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open word list: " + path.string());
  std::set<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n'))
      line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    words.insert(lower(line));
  }
  return words;
}

}  // namespace

// ---------------------------------------------------------------------------
// RuleBasedAnnotator
// ---------------------------------------------------------------------------

RuleBasedAnnotator::RuleBasedAnnotator(std::set<std::string> gazetteer,
                                       std::set<std::string> stoplist)
    : gazetteer_(std::move(gazetteer)),
      stoplist_(std::move(stoplist)),
      honorifics_({"mr", "mrs", "ms", "dr", "prof", "professor", "president",
                   "senator", "gov", "governor", "sir", "madam", "mayor",
                   "minister", "chancellor", "pope", "rev", "capt", "captain",
                   "gen", "general", "sgt", "lord", "lady", "king", "queen",
                   "prince", "princess"}) {}

RuleBasedAnnotator RuleBasedAnnotator::load(
    const std::filesystem::path& gazetteer,
    const std::filesystem::path& stoplist) {
  return RuleBasedAnnotator(load_word_file(gazetteer), load_word_file(stoplist));
}

namespace {

struct Token {
  std::size_t begin = 0;  // offsets of the trimmed core in the input
  std::size_t end = 0;
  bool sentence_initial = false;
  std::string text;
};

std::vector<Token> tokenize_with_offsets(std::string_view text) {
  std::vector<Token> tokens;
  bool at_sentence_start = true;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() &&
           std::isspace(static_cast<unsigned char>(text[i])))
      ++i;
    if (i >= text.size()) break;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j])))
      ++j;

    std::size_t b = i, e = j;
    auto is_wordchar = [&](std::size_t p) {
      const unsigned char c = static_cast<unsigned char>(text[p]);
      return std::isalnum(c) || c == '\'' || c == '-' || c == '.';
    };
    while (b < e && !is_wordchar(b)) ++b;
    while (e > b && !is_wordchar(e - 1)) --e;
    // trailing sentence punctuation stays out of the token
    bool sentence_end = false;
    for (std::size_t p = e; p < j; ++p) {
      if (text[p] == '.' || text[p] == '!' || text[p] == '?') sentence_end = true;
    }
    while (e > b && (text[e - 1] == '.' || text[e - 1] == ',')) {
      if (text[e - 1] == '.') sentence_end = true;
      --e;
    }

    if (e > b) {
      Token t;
      t.begin = b;
      t.end = e;
      t.sentence_initial = at_sentence_start;
      t.text = std::string(text.substr(b, e - b));
      tokens.push_back(std::move(t));
      at_sentence_start = sentence_end;
    }
    i = j;
  }
  return tokens;
}

bool looks_capitalized(const std::string& word) {
  if (word.empty()) return false;
  if (!std::isupper(static_cast<unsigned char>(word[0]))) return false;
  for (const char ch : word) {
    const unsigned char c = static_cast<unsigned char>(ch);
    if (!std::isalpha(c) && c != '\'' && c != '-' && c != '.') return false;
  }
  return true;
}

}  // namespace

std::vector<std::string> RuleBasedAnnotator::annotate(
    std::string_view, std::string_view text) const {
  const auto tokens = tokenize_with_offsets(text);
  std::vector<std::string> names;
  std::set<std::string> seen;

  const auto is_honorific = [&](std::size_t idx) {
    std::string w = lower(tokens[idx].text);
    while (!w.empty() && w.back() == '.') w.pop_back();
    return honorifics_.count(w) > 0;
  };
  const auto eligible = [&](std::size_t idx) {
    const auto& t = tokens[idx];
    return looks_capitalized(t.text) && !stoplist_.count(lower(t.text)) &&
           !is_honorific(idx);
  };

  std::size_t i = 0;
  while (i < tokens.size()) {
    if (!eligible(i)) {
      ++i;
      continue;
    }
    const bool honorific_before = i > 0 && is_honorific(i - 1);
    std::size_t j = i;
    while (j < tokens.size() && eligible(j) &&
           (j == i || !tokens[j].sentence_initial))
      ++j;

    std::size_t begin = i;
    // a sentence-opening capital is usually just the sentence; keep it only
    // when the gazetteer or an honorific vouches for it
    if (tokens[begin].sentence_initial && !honorific_before &&
        !gazetteer_.count(lower(tokens[begin].text))) {
      ++begin;
    }

    const std::size_t len = j - begin;
    const bool qualifies =
        len >= 2 ||
        (len == 1 && (honorific_before ||
                      gazetteer_.count(lower(tokens[begin].text)) > 0));
    if (qualifies && len <= 4) {
      std::string name(text.substr(tokens[begin].begin,
                                   tokens[j - 1].end - tokens[begin].begin));
      if (seen.insert(name).second) names.push_back(name);
    }
    i = j > i ? j : i + 1;
  }
  return names;
}

// ---------------------------------------------------------------------------
// SidecarAnnotator
// ---------------------------------------------------------------------------

SidecarAnnotator SidecarAnnotator::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open annotation sidecar: " + path.string());
  SidecarAnnotator annotator;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("invalid sidecar json: ") + e.what(), lineno);
    }
    annotator.by_id_[j.at("id").get<std::string>()] =
        j.at("persons").get<std::vector<std::string>>();
  }
  return annotator;
}

std::vector<std::string> SidecarAnnotator::annotate(std::string_view record_id,
                                                    std::string_view) const {
  const auto it = by_id_.find(std::string(record_id));
  if (it == by_id_.end())
    throw ConfigError("sidecar has no person annotation for record \"" +
                      std::string(record_id) + "\"");
  return it->second;
}

std::vector<std::string> extract_person_names(std::string_view text,
                                              const PersonAnnotator& annotator,
                                              std::string_view record_id) {
  return annotator.annotate(record_id, text);
}

// ---------------------------------------------------------------------------
// HTTP transport
// ---------------------------------------------------------------------------

namespace {

class HttplibTransport final : public Transport {
 public:
  HttpResponse get(const std::string& host, const std::string& path) override {
    httplib::Client client(host);
    client.set_connection_timeout(10);
    client.set_read_timeout(10);
    client.set_follow_location(true);
    const auto res = client.Get(path);
    if (!res) throw NetworkError("request to " + host + " failed: " +
                                 httplib::to_string(res.error()));
    return {res->status, res->body};
  }
};

}  // namespace

std::shared_ptr<Transport> make_httplib_transport() {
  return std::make_shared<HttplibTransport>();
}

void RateLimiter::wait() {
  std::unique_lock lock(mutex_);
  const auto now = std::chrono::steady_clock::now();
  if (last_.time_since_epoch().count() != 0) {
    const auto next = last_ + min_interval_;
    if (now < next) std::this_thread::sleep_for(next - now);
  }
  last_ = std::chrono::steady_clock::now();
}

// ---------------------------------------------------------------------------
// WikiCache
// ---------------------------------------------------------------------------

std::string WikiCache::normalize(std::string_view name) {
  std::string out;
  bool prev_space = true;
  for (const char ch : name) {
    char c = ch;
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!prev_space) out += ' ';
      prev_space = true;
      continue;
    }
    prev_space = false;
    out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

WikiCache WikiCache::load(const std::filesystem::path& path) {
  WikiCache cache;
  cache.path_ = path;
  std::ifstream in(path);
  if (!in) return cache;  // created on first put
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("invalid cache line: ") + e.what(), lineno);
    }
    cache.entries_[normalize(j.at("name").get<std::string>())] =
        j.at("exists").get<bool>();
  }
  return cache;
}

std::optional<bool> WikiCache::lookup(std::string_view name) const {
  const auto it = entries_.find(normalize(name));
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void WikiCache::put(std::string_view name, bool exists) {
  entries_[normalize(name)] = exists;
  if (path_.empty()) return;
  std::ofstream out(path_, std::ios::app);
  if (!out) throw ConfigError("cannot append to cache file: " + path_.string());
  nlohmann::json j;
  j["name"] = std::string(name);
  j["exists"] = exists;
  j["checked_at"] = static_cast<std::int64_t>(
      std::chrono::duration_cast<std::chrono::seconds>(
          std::chrono::system_clock::now().time_since_epoch())
          .count());
  out << j.dump() << '\n';
}

// ---------------------------------------------------------------------------
// WikiClient
// ---------------------------------------------------------------------------

std::string url_encode(std::string_view s) {
  static const char* hex = "0123456789ABCDEF";
  std::string out;
  for (const char ch : s) {
    const unsigned char c = static_cast<unsigned char>(ch);
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
      out += static_cast<char>(c);
    } else if (c == ' ') {
      out += "%20";
    } else {
      out += '%';
      out += hex[c >> 4];
      out += hex[c & 15];
    }
  }
  return out;
}

bool mediawiki_page_exists(const std::string& body) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(body);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid MediaWiki response: ") + e.what());
  }
  if (!j.contains("query") || !j["query"].contains("pages")) return false;
  const auto& pages = j["query"]["pages"];
  for (const auto& [key, page] : pages.items()) {
    (void)key;
    if (!page.contains("missing") && !page.contains("invalid")) return true;
  }
  return false;
}

WikiClient::WikiClient(WikiCache& cache, const WikiClientConfig& config,
                       std::shared_ptr<Transport> transport)
    : cache_(cache),
      config_(config),
      transport_(std::move(transport)),
      limiter_(config.rate_interval) {
  if (!transport_ && config_.mode == WikiMode::Online)
    transport_ = make_httplib_transport();
}

bool WikiClient::has_page(std::string_view name) {
  if (WikiCache::normalize(name).empty())
    throw ConfigError("page lookup needs a non-empty name");

  if (const auto cached = cache_.lookup(name)) return *cached;

  if (config_.mode == WikiMode::Offline) {
    misses_.push_back(std::string(name));
    return false;
  }

  const std::string path = config_.api_path +
                           "?action=query&format=json&titles=" +
                           url_encode(name);
  std::string last_error;
  auto backoff = config_.backoff_base;
  for (int attempt = 0; attempt < config_.max_attempts; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
    limiter_.wait();
    ++requests_;
    try {
      const HttpResponse res = transport_->get(config_.host, path);
      if (res.status == 429) {
        last_error = "rate limited (429)";
        continue;
      }
      if (res.status != 200) {
        last_error = "unexpected status " + std::to_string(res.status);
        continue;
      }
      const bool exists = mediawiki_page_exists(res.body);
      cache_.put(name, exists);
      return exists;
    } catch (const NetworkError& e) {
      last_error = e.what();
    }
  }
  throw NetworkError("lookup for \"" + std::string(name) + "\" failed after " +
                     std::to_string(config_.max_attempts) +
                     " attempts: " + last_error);
}

}  // namespace factline
