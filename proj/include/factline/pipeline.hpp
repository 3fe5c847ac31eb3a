#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "factline/agreement.hpp"
#include "factline/classify.hpp"
#include "factline/corpus.hpp"
#include "factline/numcore.hpp"
#include "factline/storytype.hpp"
#include "factline/textrep.hpp"

namespace factline {

inline constexpr const char* kArtifactVersion = "0.1.0";

enum class Stage {
  Ingest,
  Represent,
  Cluster,
  Validity,
  Agreement,
  Storytype,
  Report
};

std::string to_string(Stage s);

struct PipelineConfig {
  // inputs
  std::filesystem::path stories_path;      // --input
  std::filesystem::path tweets_path;       // --tweets
  std::filesystem::path embeddings_path;   // --embeddings
  std::filesystem::path annotations_path;  // --annotations
  std::filesystem::path validity_lexicon_path;  // --lexicon
  std::filesystem::path type_lexicon_path;      // --type-lexicon
  std::filesystem::path stopwords_path;         // --stopwords
  std::filesystem::path gazetteer_path;         // --gazetteer
  std::filesystem::path name_stoplist_path;     // --name-stoplist
  std::filesystem::path wiki_cache_path;        // --wiki-cache / FACTLINE_CACHE

  // representation
  std::size_t min_df = 1;
  bool stem = true;

  // pca
  std::optional<std::size_t> pca_components;  // --pca-components
  double pca_variance = 0.95;                 // --pca-var
  std::size_t pca_max_components = 100;

  // clustering
  std::optional<std::size_t> k;  // --k <int>; empty means auto (elbow)
  std::size_t k_max = 12;        // elbow scans k in [1, min(k_max, N)]
  std::size_t restarts = 5;

  // agreement
  double agree_threshold = 0.70;  // --agree-threshold
  int agree_k = 5;                // --agree-k
  bool agree_both_directions = false;
  bool agree_on_reduced = false;  // compare in PCA space instead of raw

  // splits / classifiers
  double split_ratio = 0.8;  // --split
  std::uint64_t seed = 13;   // --seed
  TrainConfig train;

  // story types
  std::size_t baseline_trials = 2000;
  bool keyword_first = false;

  // reports
  std::string bucket = "week";  // week | day

  bool offline = false;  // --offline
  std::filesystem::path out_dir;  // --out

  // Fail-fast checks; `stages` is the set the caller wants to reach.
  void validate(const std::set<Stage>& stages) const;

  std::string snapshot_json() const;  // stable config serialization
};

struct StageTiming {
  std::string name;
  double millis = 0.0;
  bool resumed = false;
};

struct RunManifest {
  std::string config_snapshot;  // json
  std::map<std::string, std::string> input_digests;  // path -> sha256
  std::vector<StageTiming> stages;
  std::vector<std::string> outputs;
  std::string version = kArtifactVersion;
  std::size_t dateless_records = 0;
  std::vector<std::string> notes;

  std::string to_json() const;
};

// Runs the requested stages (and their dependencies) with resumable,
// versioned intermediates under out_dir. A stage is recomputed when its
// fingerprint (config + input digests) or any of its outputs is missing or
// stale; otherwise its persisted outputs are reloaded. Failures surface as
// StageError; the failing stage's partially written files keep a .partial
// suffix.
RunManifest run_pipeline(const PipelineConfig& config,
                         const std::set<Stage>& stages = {
                             Stage::Validity, Stage::Agreement,
                             Stage::Storytype, Stage::Report});

// ---------------------------------------------------------------------------
// Time-series / distribution reports (plot-ready CSV)
// ---------------------------------------------------------------------------

struct TimeseriesOptions {
  std::string bucket = "week";  // week | day
};

struct TimeseriesResult {
  std::vector<std::vector<std::string>> rows;  // header + data
  std::size_t dateless = 0;                    // excluded records
};

// Rows (iso_week|date, cluster, count), sorted. Records without dates are
// excluded and counted.
TimeseriesResult timeseries_report(const std::vector<StoryRecord>& records,
                                   const std::vector<int>& clusters,
                                   const TimeseriesOptions& options = {});

// (cluster, <key>, count, fraction) where fraction is count over the
// cluster's total for that breakdown.
std::vector<std::vector<std::string>> cluster_breakdown_by_site(
    const std::vector<StoryRecord>& records, const std::vector<int>& clusters);
std::vector<std::vector<std::string>> cluster_breakdown_by_medium(
    const std::vector<StoryRecord>& records, const std::vector<int>& clusters);
std::vector<std::vector<std::string>> cluster_breakdown_by_validity(
    const std::vector<StoryRecord>& records, const std::vector<int>& clusters);

// Write-to-temp-then-rename; a crash leaves <path>.partial behind.
void write_text_atomic(const std::filesystem::path& path,
                       const std::string& content);

std::string csv_to_string(const std::vector<std::vector<std::string>>& rows);

}  // namespace factline
