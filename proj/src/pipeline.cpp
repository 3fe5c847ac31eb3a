#include "factline/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "factline/csv.hpp"
#include "factline/digest.hpp"
#include "factline/enrich.hpp"
#include "factline/rng.hpp"

namespace factline {

namespace fs = std::filesystem;

std::string to_string(Stage s) {
  switch (s) {
    case Stage::Ingest: return "ingest";
    case Stage::Represent: return "represent";
    case Stage::Cluster: return "cluster";
    case Stage::Validity: return "validity";
    case Stage::Agreement: return "agreement";
    case Stage::Storytype: return "storytype";
    case Stage::Report: return "report";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

namespace {

void require_file(const fs::path& p, const char* what) {
  if (p.empty()) throw ConfigError(std::string(what) + " path is required");
  if (!fs::exists(p))
    throw ConfigError(std::string(what) + " file does not exist: " + p.string());
}

std::set<Stage> with_dependencies(const std::set<Stage>& stages) {
  std::set<Stage> closure = stages;
  const auto need = [&](Stage s) { return closure.count(s) > 0; };
  if (need(Stage::Report) || need(Stage::Agreement) || need(Stage::Validity))
    closure.insert(Stage::Cluster);
  if (need(Stage::Validity)) closure.insert(Stage::Represent);
  if (need(Stage::Cluster) || need(Stage::Represent) ||
      need(Stage::Storytype))
    closure.insert(Stage::Ingest);
  return closure;
}

}  // namespace

void PipelineConfig::validate(const std::set<Stage>& stages) const {
  const std::set<Stage> closure = with_dependencies(stages);
  if (out_dir.empty()) throw ConfigError("output directory is required");
  require_file(stories_path, "input");
  if (!tweets_path.empty()) require_file(tweets_path, "tweets");
  if (closure.count(Stage::Cluster) || closure.count(Stage::Agreement) ||
      closure.count(Stage::Storytype))
    require_file(embeddings_path, "embeddings");
  if (stages.count(Stage::Storytype) && annotations_path.empty())
    throw ConfigError("story-type evaluation needs --annotations");
  if (!annotations_path.empty()) require_file(annotations_path, "annotations");
  if (!validity_lexicon_path.empty())
    require_file(validity_lexicon_path, "lexicon");
  if (!type_lexicon_path.empty()) require_file(type_lexicon_path, "type lexicon");
  if (!stopwords_path.empty()) require_file(stopwords_path, "stopwords");
  if (!gazetteer_path.empty()) require_file(gazetteer_path, "gazetteer");
  if (!name_stoplist_path.empty())
    require_file(name_stoplist_path, "name stoplist");

  if (!(split_ratio > 0.0 && split_ratio < 1.0))
    throw ConfigError("--split must be in (0, 1)");
  if (!(pca_variance > 0.0 && pca_variance <= 1.0))
    throw ConfigError("--pca-var must be in (0, 1]");
  if (agree_k <= 0) throw ConfigError("--agree-k must be positive");
  if (!(agree_threshold >= -1.0 && agree_threshold <= 1.0))
    throw ConfigError("--agree-threshold must be in [-1, 1]");
  if (bucket != "week" && bucket != "day")
    throw ConfigError("--bucket must be week or day");
  if (k && *k == 0) throw ConfigError("--k must be positive or auto");
}

std::string PipelineConfig::snapshot_json() const {
  nlohmann::json j;
  j["stories"] = stories_path.string();
  j["tweets"] = tweets_path.string();
  j["embeddings"] = embeddings_path.string();
  j["annotations"] = annotations_path.string();
  j["validity_lexicon"] = validity_lexicon_path.string();
  j["type_lexicon"] = type_lexicon_path.string();
  j["stopwords"] = stopwords_path.string();
  j["gazetteer"] = gazetteer_path.string();
  j["name_stoplist"] = name_stoplist_path.string();
  j["wiki_cache"] = wiki_cache_path.string();
  j["min_df"] = min_df;
  j["stem"] = stem;
  if (pca_components) j["pca_components"] = *pca_components;
  j["pca_variance"] = pca_variance;
  j["pca_max_components"] = pca_max_components;
  if (k) j["k"] = *k;
  j["k_max"] = k_max;
  j["restarts"] = restarts;
  j["agree_threshold"] = agree_threshold;
  j["agree_k"] = agree_k;
  j["agree_both_directions"] = agree_both_directions;
  j["agree_on_reduced"] = agree_on_reduced;
  j["split_ratio"] = split_ratio;
  j["seed"] = seed;
  j["baseline_trials"] = baseline_trials;
  j["keyword_first"] = keyword_first;
  j["bucket"] = bucket;
  j["offline"] = offline;
  j["nb_alpha"] = train.nb_alpha;
  j["learning_rate"] = train.learning_rate;
  j["l2"] = train.l2;
  j["max_epochs"] = train.max_epochs;
  j["tol"] = train.tol;
  return j.dump();
}

std::string RunManifest::to_json() const {
  nlohmann::json j;
  j["version"] = version;
  j["config"] = nlohmann::json::parse(config_snapshot);
  j["input_digests"] = input_digests;
  j["outputs"] = outputs;
  j["dateless_records"] = dateless_records;
  j["notes"] = notes;
  nlohmann::json stages_json = nlohmann::json::array();
  for (const auto& s : stages) {
    stages_json.push_back(
        {{"name", s.name}, {"millis", s.millis}, {"resumed", s.resumed}});
  }
  j["stages"] = stages_json;
  return j.dump(2);
}

// ---------------------------------------------------------------------------
// Atomic writes
// ---------------------------------------------------------------------------

void write_text_atomic(const fs::path& path, const std::string& content) {
  const fs::path partial = path.string() + ".partial";
  {
    std::ofstream out(partial, std::ios::binary);
    if (!out) throw ConfigError("cannot write: " + partial.string());
    out << content;
    if (!out) throw ConfigError("short write: " + partial.string());
  }
  fs::rename(partial, path);
}

std::string csv_to_string(const std::vector<std::vector<std::string>>& rows) {
  std::string out;
  for (const auto& row : rows) {
    out += csv::format_row(row);
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

TimeseriesResult timeseries_report(const std::vector<StoryRecord>& records,
                                   const std::vector<int>& clusters,
                                   const TimeseriesOptions& options) {
  if (records.size() != clusters.size())
    throw DimensionError("records and cluster assignments differ in length");
  TimeseriesResult result;
  const bool weekly = options.bucket != "day";
  std::map<std::pair<std::string, int>, std::size_t> counts;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!records[i].date) {
      ++result.dateless;
      continue;
    }
    const std::string bucket = weekly ? iso_week(*records[i].date).str()
                                      : records[i].date->to_iso();
    ++counts[{bucket, clusters[i]}];
  }
  result.rows.push_back({weekly ? "iso_week" : "date", "cluster", "count"});
  for (const auto& [key, count] : counts) {
    result.rows.push_back(
        {key.first, std::to_string(key.second), std::to_string(count)});
  }
  return result;
}

namespace {

std::vector<std::vector<std::string>> breakdown(
    const std::vector<StoryRecord>& records, const std::vector<int>& clusters,
    const std::string& key_name,
    const std::function<std::vector<std::string>(const StoryRecord&)>& keys_of) {
  if (records.size() != clusters.size())
    throw DimensionError("records and cluster assignments differ in length");
  std::map<int, std::map<std::string, std::size_t>> counts;
  std::map<int, std::size_t> totals;
  for (std::size_t i = 0; i < records.size(); ++i) {
    for (const auto& key : keys_of(records[i])) {
      ++counts[clusters[i]][key];
      ++totals[clusters[i]];
    }
  }
  std::vector<std::vector<std::string>> rows;
  rows.push_back({"cluster", key_name, "count", "fraction"});
  for (const auto& [cluster, by_key] : counts) {
    for (const auto& [key, count] : by_key) {
      const double fraction = static_cast<double>(count) /
                              static_cast<double>(totals[cluster]);
      rows.push_back({std::to_string(cluster), key, std::to_string(count),
                      csv::format_double(fraction)});
    }
  }
  return rows;
}

}  // namespace

std::vector<std::vector<std::string>> cluster_breakdown_by_site(
    const std::vector<StoryRecord>& records, const std::vector<int>& clusters) {
  return breakdown(records, clusters, "site", [](const StoryRecord& r) {
    return std::vector<std::string>{r.site.str()};
  });
}

std::vector<std::vector<std::string>> cluster_breakdown_by_medium(
    const std::vector<StoryRecord>& records, const std::vector<int>& clusters) {
  return breakdown(records, clusters, "medium", [](const StoryRecord& r) {
    std::vector<std::string> keys;
    for (const auto& m : r.mediums) keys.push_back(m.str());
    if (keys.empty()) keys.push_back("none");
    return keys;
  });
}

std::vector<std::vector<std::string>> cluster_breakdown_by_validity(
    const std::vector<StoryRecord>& records, const std::vector<int>& clusters) {
  return breakdown(records, clusters, "validity", [](const StoryRecord& r) {
    return std::vector<std::string>{to_string(r.validity)};
  });
}

// ---------------------------------------------------------------------------
// Pipeline
// ---------------------------------------------------------------------------

namespace {

RecordFormat format_of(const fs::path& p) {
  return p.extension() == ".csv" ? RecordFormat::Csv : RecordFormat::Jsonl;
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ConfigError("cannot read: " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class StageState {
 public:
  explicit StageState(fs::path path) : path_(std::move(path)) {
    if (!fs::exists(path_)) return;
    const nlohmann::json j = nlohmann::json::parse(read_text(path_));
    for (const auto& [stage, fp] : j.items())
      fingerprints_[stage] = fp.get<std::string>();
  }

  bool fresh(const std::string& stage, const std::string& fingerprint,
             const std::vector<fs::path>& outputs) const {
    const auto it = fingerprints_.find(stage);
    if (it == fingerprints_.end() || it->second != fingerprint) return false;
    for (const auto& p : outputs) {
      if (!fs::exists(p)) return false;
    }
    return true;
  }

  void record(const std::string& stage, const std::string& fingerprint) {
    fingerprints_[stage] = fingerprint;
    nlohmann::json j;
    for (const auto& [s, fp] : fingerprints_) j[s] = fp;
    write_text_atomic(path_, j.dump(2));
  }

 private:
  fs::path path_;
  std::map<std::string, std::string> fingerprints_;
};

struct PipelineContext {
  explicit PipelineContext(const PipelineConfig& cfg) : config(cfg) {}

  const PipelineConfig& config;
  fs::path out;
  std::string fingerprint;  // config + input digests

  std::vector<StoryRecord> records;       // all (stories + tweets)
  std::vector<std::size_t> story_rows;    // indices of FactCheck records
  Vocabulary vocab;
  std::vector<SparseVector> tfidf;        // per story row
  EmbeddingTable embeddings;
  ClusterModel cluster_model;
  std::vector<int> story_clusters;        // per story row
  std::set<std::string> stopwords;

  std::vector<StoryRecord> stories() const {
    std::vector<StoryRecord> out;
    out.reserve(story_rows.size());
    for (const auto i : story_rows) out.push_back(records[i]);
    return out;
  }
};

using CsvRows = std::vector<std::vector<std::string>>;

}  // namespace

RunManifest run_pipeline(const PipelineConfig& config,
                         const std::set<Stage>& requested) {
  config.validate(requested);
  const std::set<Stage> stages = with_dependencies(requested);

  fs::create_directories(config.out_dir);
  RunManifest manifest;
  manifest.config_snapshot = config.snapshot_json();

  for (const fs::path& p :
       {config.stories_path, config.tweets_path, config.embeddings_path,
        config.annotations_path, config.validity_lexicon_path,
        config.type_lexicon_path, config.stopwords_path, config.gazetteer_path,
        config.name_stoplist_path}) {
    if (!p.empty() && fs::exists(p))
      manifest.input_digests[p.string()] = sha256_file(p);
  }

  PipelineContext ctx(config);
  ctx.out = config.out_dir;
  {
    std::string fp_src = manifest.config_snapshot;
    for (const auto& [path, digest] : manifest.input_digests)
      fp_src += "\n" + path + "=" + digest;
    ctx.fingerprint = sha256_hex(fp_src);
  }
  StageState state(ctx.out / "stage_state.json");

  const auto run_stage =
      [&](Stage stage, const std::vector<fs::path>& outputs,
          const std::function<void()>& compute,
          const std::function<void()>& reload) {
        if (!stages.count(stage)) return;
        const std::string name = to_string(stage);
        const auto start = std::chrono::steady_clock::now();
        StageTiming timing;
        timing.name = name;
        try {
          if (state.fresh(name, ctx.fingerprint, outputs)) {
            timing.resumed = true;
            reload();
          } else {
            compute();
            state.record(name, ctx.fingerprint);
          }
        } catch (const Error& e) {
          throw StageError(name, e.what());
        } catch (const std::exception& e) {
          throw StageError(name, e.what());
        }
        timing.millis = std::chrono::duration<double, std::milli>(
                            std::chrono::steady_clock::now() - start)
                            .count();
        manifest.stages.push_back(timing);
        for (const auto& p : outputs) manifest.outputs.push_back(p.string());
      };

  // ---------------------------------------------------------------- ingest
  const fs::path records_path = ctx.out / "records.jsonl";
  const auto load_lexicon = [&] {
    return config.validity_lexicon_path.empty()
               ? ValidityLexicon::defaults()
               : ValidityLexicon::load(config.validity_lexicon_path);
  };
  const auto make_annotator = [&]() -> RuleBasedAnnotator {
    if (!config.gazetteer_path.empty() && !config.name_stoplist_path.empty())
      return RuleBasedAnnotator::load(config.gazetteer_path,
                                      config.name_stoplist_path);
    return RuleBasedAnnotator({}, {});
  };

  const auto ingest_compute = [&] {
    const ValidityLexicon lexicon = load_lexicon();
    const RuleBasedAnnotator annotator = make_annotator();
    IngestOptions options;
    options.lexicon = &lexicon;
    options.extract_persons = [&annotator](std::string_view text) {
      return annotator.annotate({}, text);
    };
    ctx.records = ingest_records(config.stories_path,
                                 format_of(config.stories_path), options);
    if (!config.tweets_path.empty()) {
      options.default_kind = RecordKind::Tweet;
      auto tweets = ingest_records(config.tweets_path,
                                   format_of(config.tweets_path), options);
      std::set<std::string> ids;
      for (const auto& r : ctx.records) ids.insert(r.id);
      for (auto& t : tweets) {
        if (!ids.insert(t.id).second) throw DuplicateIdError(t.id);
        ctx.records.push_back(std::move(t));
      }
    }
    serialize_records(ctx.records, records_path, RecordFormat::Jsonl);
  };
  const auto ingest_reload = [&] {
    const ValidityLexicon lexicon = load_lexicon();
    const RuleBasedAnnotator annotator = make_annotator();
    IngestOptions options;
    options.lexicon = &lexicon;
    options.extract_persons = [&annotator](std::string_view text) {
      return annotator.annotate({}, text);
    };
    ctx.records = ingest_records(records_path, RecordFormat::Jsonl, options);
  };
  run_stage(Stage::Ingest, {records_path}, ingest_compute, ingest_reload);

  if (stages.count(Stage::Ingest)) {
    for (std::size_t i = 0; i < ctx.records.size(); ++i) {
      if (ctx.records[i].kind == RecordKind::FactCheck)
        ctx.story_rows.push_back(i);
    }
    for (const auto& r : ctx.records) {
      if (!r.date) ++manifest.dateless_records;
    }
    if (!config.stopwords_path.empty())
      ctx.stopwords = load_stopwords(config.stopwords_path);
  }

  // ------------------------------------------------------------- represent
  const fs::path vocab_path = ctx.out / "vocab.json";
  const fs::path tfidf_path = ctx.out / "tfidf.jsonl";
  const auto preprocess_options = [&] {
    PreprocessOptions opt;
    opt.stem = config.stem;
    opt.stopwords = ctx.stopwords;
    return opt;
  };
  const auto represent_compute = [&] {
    const PreprocessOptions opt = preprocess_options();
    std::vector<TokenList> docs;
    docs.reserve(ctx.story_rows.size());
    for (const auto i : ctx.story_rows)
      docs.push_back(preprocess(ctx.records[i].story, opt));
    ctx.vocab = Vocabulary::build(docs, config.min_df);
    ctx.tfidf.clear();
    for (const auto& doc : docs)
      ctx.tfidf.push_back(vectorize(doc, ctx.vocab, Weighting::TfIdf));

    write_text_atomic(vocab_path, ctx.vocab.to_json());
    std::string lines;
    for (std::size_t r = 0; r < ctx.story_rows.size(); ++r) {
      nlohmann::json j;
      j["id"] = ctx.records[ctx.story_rows[r]].id;
      j["dim"] = ctx.tfidf[r].dim;
      nlohmann::json entries = nlohmann::json::array();
      for (const auto& [idx, w] : ctx.tfidf[r].entries)
        entries.push_back({idx, w});
      j["entries"] = entries;
      lines += j.dump() + "\n";
    }
    write_text_atomic(tfidf_path, lines);
  };
  const auto represent_reload = [&] {
    ctx.vocab = Vocabulary::from_json(read_text(vocab_path));
    ctx.tfidf.clear();
    std::istringstream in(read_text(tfidf_path));
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const nlohmann::json j = nlohmann::json::parse(line);
      SparseVector v;
      v.dim = j.at("dim").get<std::size_t>();
      for (const auto& e : j.at("entries"))
        v.entries.push_back({e[0].get<std::uint32_t>(), e[1].get<double>()});
      ctx.tfidf.push_back(std::move(v));
    }
    if (ctx.tfidf.size() != ctx.story_rows.size())
      throw ParseError("tfidf intermediate does not match the record count");
  };
  run_stage(Stage::Represent, {vocab_path, tfidf_path}, represent_compute,
            represent_reload);

  // --------------------------------------------------------------- cluster
  const fs::path model_path = ctx.out / "cluster_model.json";
  const fs::path assignments_path = ctx.out / "assignments.csv";

  const auto load_embedding_table = [&] {
    if (ctx.embeddings.size() == 0 && !config.embeddings_path.empty())
      ctx.embeddings = EmbeddingTable::load(config.embeddings_path);
  };

  const auto story_embedding_matrix = [&]() -> Matrix {
    std::vector<std::string> missing;
    for (const auto i : ctx.story_rows) {
      if (!ctx.embeddings.contains(ctx.records[i].id))
        missing.push_back(ctx.records[i].id);
    }
    if (!missing.empty()) {
      std::string msg = "records without embeddings:";
      for (const auto& id : missing) msg += " " + id;
      throw ConfigError(msg);
    }
    Matrix m(ctx.story_rows.size(), ctx.embeddings.dim());
    for (std::size_t r = 0; r < ctx.story_rows.size(); ++r) {
      const auto* vec = ctx.embeddings.find(ctx.records[ctx.story_rows[r]].id);
      std::copy(vec->begin(), vec->end(), m.row(r).begin());
    }
    return m;
  };

  const auto cluster_compute = [&] {
    load_embedding_table();
    const Matrix x = story_embedding_matrix();

    PcaTarget target;
    if (config.pca_components) {
      target = PcaTarget::by_components(
          std::min(*config.pca_components, x.cols));
    } else {
      target =
          PcaTarget::by_variance(config.pca_variance, config.pca_max_components);
    }
    ctx.cluster_model.pca = pca_fit(x, target);
    const Matrix projected = pca_transform(ctx.cluster_model.pca, x);

    std::size_t chosen_k;
    if (config.k) {
      chosen_k = *config.k;
      if (chosen_k > projected.rows)
        throw ConfigError("--k exceeds the number of stories");
    } else {
      std::vector<std::size_t> ks;
      for (std::size_t k = 1; k <= std::min(config.k_max, projected.rows); ++k)
        ks.push_back(k);
      const auto curve = wss_curve(projected, ks, config.seed, config.restarts);
      chosen_k = select_k_elbow(curve);
    }
    ctx.cluster_model.kmeans =
        kmeans_fit(projected, chosen_k, derive_seed(config.seed, 0x6b, 2));
    ctx.story_clusters = ctx.cluster_model.kmeans.assignments;

    write_text_atomic(model_path, ctx.cluster_model.to_json());
    CsvRows rows;
    rows.push_back({"id", "cluster"});
    for (std::size_t r = 0; r < ctx.story_rows.size(); ++r) {
      rows.push_back({ctx.records[ctx.story_rows[r]].id,
                      std::to_string(ctx.story_clusters[r])});
    }
    write_text_atomic(assignments_path, csv_to_string(rows));
  };
  const auto cluster_reload = [&] {
    load_embedding_table();
    ctx.cluster_model = ClusterModel::from_json(read_text(model_path));
    ctx.story_clusters = ctx.cluster_model.kmeans.assignments;
    if (ctx.story_clusters.size() != ctx.story_rows.size())
      throw ParseError("cluster model does not match the record count");
  };
  run_stage(Stage::Cluster, {model_path, assignments_path}, cluster_compute,
            cluster_reload);

  // -------------------------------------------------------------- validity
  const fs::path validity_path = ctx.out / "validity_f1.csv";
  const auto validity_compute = [&] {
    std::vector<std::string> labels;
    labels.reserve(ctx.story_rows.size());
    for (const auto i : ctx.story_rows)
      labels.push_back(to_string(ctx.records[i].validity));

    const FeatureMatrix bow =
        FeatureMatrix::from_sparse(ctx.tfidf, ctx.vocab.size());
    const FeatureMatrix dense = FeatureMatrix::from_dense(story_embedding_matrix());

    ValidityExperimentConfig vconfig;
    vconfig.split_ratio = config.split_ratio;
    vconfig.seed = config.seed;
    vconfig.train = config.train;
    const auto cells = run_validity_experiment(
        labels, ctx.story_clusters,
        {{"bow_tfidf", &bow}, {"embedding", &dense}}, vconfig);
    write_text_atomic(validity_path, csv_to_string(experiment_to_csv(cells)));
  };
  run_stage(Stage::Validity, {validity_path}, validity_compute, [] {});

  // ------------------------------------------------------------- agreement
  const fs::path agreement_path = ctx.out / "agreement.csv";
  const fs::path evidence_path = ctx.out / "agreement_evidence.jsonl";
  const auto agreement_compute = [&] {
    load_embedding_table();
    const std::vector<StoryRecord> stories = ctx.stories();

    EmbeddingTable reduced;
    const EmbeddingTable* table = &ctx.embeddings;
    if (config.agree_on_reduced) {
      const Matrix x = story_embedding_matrix();
      const Matrix projected = pca_transform(ctx.cluster_model.pca, x);
      for (std::size_t r = 0; r < stories.size(); ++r) {
        const auto row = projected.row(r);
        reduced.insert(stories[r].id, {row.begin(), row.end()});
      }
      table = &reduced;
    }

    const AgreementReport report = agreement_table(
        stories, ctx.story_clusters, *table, default_site_pairs(),
        config.agree_threshold, config.agree_k, config.agree_both_directions);
    write_text_atomic(agreement_path, csv_to_string(agreement_to_csv(report)));

    std::string evidence;
    for (const auto& [cluster, ev] : report.evidence) {
      nlohmann::json j;
      j["cluster"] = cluster;
      j["story_id"] = ev.story_id;
      j["neighbor_ids"] = ev.neighbor_ids;
      j["similarities"] = ev.similarities;
      j["candidate"] = ev.candidate;
      j["matched"] = ev.matched;
      if (ev.mode) j["mode_validity"] = to_string(*ev.mode);
      evidence += j.dump() + "\n";
    }
    write_text_atomic(evidence_path, evidence);
  };
  run_stage(Stage::Agreement, {agreement_path, evidence_path},
            agreement_compute, [] {});

  // ------------------------------------------------------------- storytype
  const fs::path storytype_path = ctx.out / "storytype_eval.csv";
  const auto storytype_compute = [&] {
    if (config.annotations_path.empty()) return;
    load_embedding_table();
    const auto annotations = load_annotations(config.annotations_path);
    const AnnotatedSet story_set =
        join_annotations(annotations, ctx.embeddings, "stories");
    const AnnotatedSet tweet_set =
        join_annotations(annotations, ctx.embeddings, "tweets");

    std::map<std::string, const StoryRecord*> by_id;
    for (const auto& r : ctx.records) by_id[r.id] = &r;

    const PreprocessOptions opt = preprocess_options();
    const KeywordLexicon lexicon =
        config.type_lexicon_path.empty()
            ? KeywordLexicon::from_pairs(
                  {{"Conspiracy", {"bioweapon", "5g", "hoax"}},
                   {"FakeCures", {"cure", "vaccine", "remedy"}}},
                  opt)
            : KeywordLexicon::load(config.type_lexicon_path, opt);
    const RuleBasedAnnotator annotator = make_annotator();

    const fs::path cache_path = config.wiki_cache_path.empty()
                                    ? ctx.out / "wiki_cache.jsonl"
                                    : config.wiki_cache_path;
    WikiCache cache = WikiCache::load(cache_path);
    WikiClientConfig wconfig;
    wconfig.mode = config.offline ? WikiMode::Offline : WikiMode::Online;
    WikiClient wiki(cache, wconfig);
    const PageLookupFn has_page = [&wiki](const std::string& name) {
      return wiki.has_page(name);
    };

    BowTypeOptions bow_options;
    bow_options.preprocess = opt;
    bow_options.keyword_first = config.keyword_first;
    const auto bow_classify =
        [&](const AnnotatedItem& item) -> std::string {
      const auto it = by_id.find(item.id);
      if (it == by_id.end())
        throw ConfigError("annotated id \"" + item.id + "\" has no record");
      return classify_bow_type(*it->second, lexicon, annotator, has_page,
                               bow_options);
    };

    // same-medium rows evaluate a held-out slice; cross-medium rows use the
    // full sets
    const auto split_set = [&](const AnnotatedSet& set, std::uint64_t salt) {
      std::vector<std::string> strata;
      for (const auto& item : set.items) strata.push_back(item.label);
      const IndexSplit split = split_indices(
          set.items.size(), config.split_ratio,
          derive_seed(config.seed, salt, 7), &strata);
      AnnotatedSet train, test;
      train.medium = test.medium = set.medium;
      train.dim = test.dim = set.dim;
      for (const auto i : split.train) train.items.push_back(set.items[i]);
      for (const auto i : split.test) test.items.push_back(set.items[i]);
      return std::pair{train, test};
    };

    CsvRows rows;
    rows.push_back(
        {"train_medium", "test_medium", "method", "precision", "recall", "f1"});
    const auto add_row = [&](const std::string& train_m,
                             const std::string& test_m,
                             const std::string& method, double p, double r,
                             double f1) {
      rows.push_back({train_m, test_m, method, csv::format_double(p),
                      csv::format_double(r), csv::format_double(f1)});
    };
    const auto eval_pair = [&](const AnnotatedSet& train,
                               const AnnotatedSet& test) {
      if (train.items.empty() || test.items.empty()) return;
      const EvalScores nn = cross_medium_eval(train, test, TypeMethod::Nn);
      add_row(train.medium, test.medium, "nn", nn.macro_precision,
              nn.macro_recall, nn.macro_f1);
      const EvalScores bow =
          cross_medium_eval(train, test, TypeMethod::Bow, bow_classify);
      add_row(train.medium, test.medium, "bow", bow.macro_precision,
              bow.macro_recall, bow.macro_f1);
    };

    const bool have_stories = !story_set.items.empty();
    const bool have_tweets = !tweet_set.items.empty();
    if (have_stories && story_set.items.size() >= 2) {
      const auto [train, test] = split_set(story_set, 1);
      eval_pair(train, test);
    }
    if (have_tweets && have_stories) eval_pair(tweet_set, story_set);
    if (have_stories && have_tweets) eval_pair(story_set, tweet_set);
    if (have_tweets && tweet_set.items.size() >= 2) {
      const auto [train, test] = split_set(tweet_set, 2);
      eval_pair(train, test);
    }

    const auto add_baselines = [&](const AnnotatedSet& set,
                                   std::uint64_t salt) {
      if (set.items.empty()) return;
      std::vector<std::string> gold;
      for (const auto& item : set.items) gold.push_back(item.label);
      const BaselineReport uniform = random_baseline(
          gold, BaselineMode::Uniform, config.baseline_trials,
          derive_seed(config.seed, salt, 11));
      add_row("-", set.medium, "random_uniform", uniform.mc_precision_macro,
              uniform.mc_recall_macro, uniform.mc_f1_macro);
      const BaselineReport freq = random_baseline(
          gold, BaselineMode::Frequency, config.baseline_trials,
          derive_seed(config.seed, salt, 13));
      add_row("-", set.medium, "random_frequency", freq.mc_precision_macro,
              freq.mc_recall_macro, freq.mc_f1_macro);
    };
    add_baselines(story_set, 3);
    add_baselines(tweet_set, 4);

    write_text_atomic(storytype_path, csv_to_string(rows));
  };
  if (!config.annotations_path.empty()) {
    run_stage(Stage::Storytype, {storytype_path}, storytype_compute, [] {});
  } else if (stages.count(Stage::Storytype)) {
    manifest.notes.push_back("storytype stage skipped: no annotations provided");
  }

  // ---------------------------------------------------------------- report
  const fs::path timeseries_path =
      ctx.out / (config.bucket == "day" ? "timeseries_day.csv"
                                        : "timeseries_week.csv");
  const fs::path by_site_path = ctx.out / "clusters_by_site.csv";
  const fs::path by_medium_path = ctx.out / "clusters_by_medium.csv";
  const fs::path by_validity_path = ctx.out / "clusters_by_validity.csv";
  const auto report_compute = [&] {
    const std::vector<StoryRecord> stories = ctx.stories();
    TimeseriesOptions topt;
    topt.bucket = config.bucket;
    const TimeseriesResult ts =
        timeseries_report(stories, ctx.story_clusters, topt);
    write_text_atomic(timeseries_path, csv_to_string(ts.rows));
    if (ts.dateless > 0) {
      manifest.notes.push_back(std::to_string(ts.dateless) +
                               " dateless records excluded from the time series");
    }
    write_text_atomic(by_site_path, csv_to_string(cluster_breakdown_by_site(
                                        stories, ctx.story_clusters)));
    write_text_atomic(by_medium_path,
                      csv_to_string(cluster_breakdown_by_medium(
                          stories, ctx.story_clusters)));
    write_text_atomic(by_validity_path,
                      csv_to_string(cluster_breakdown_by_validity(
                          stories, ctx.story_clusters)));
  };
  run_stage(Stage::Report,
            {timeseries_path, by_site_path, by_medium_path, by_validity_path},
            report_compute, [] {});

  write_text_atomic(ctx.out / "manifest.json", manifest.to_json());
  manifest.outputs.push_back((ctx.out / "manifest.json").string());
  return manifest;
}

}  // namespace factline
