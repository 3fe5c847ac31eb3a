#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "factline/pipeline.hpp"

namespace {

struct CliOptions {
  factline::PipelineConfig config;
  std::string k_spec = "auto";
  std::string bucket = "week";
};

void add_common_options(CLI::App* cmd, CliOptions& opt) {
  auto& c = opt.config;
  cmd->add_option("--input", c.stories_path, "Fact-check records (jsonl or csv)")
      ->required();
  cmd->add_option("--tweets", c.tweets_path, "Tweet records (jsonl or csv)");
  cmd->add_option("--embeddings", c.embeddings_path,
                  "Embedding table (jsonl of {id, vector})");
  cmd->add_option("--annotations", c.annotations_path,
                  "Story-type annotations (jsonl of {id, label, medium})");
  cmd->add_option("--lexicon", c.validity_lexicon_path,
                  "Validity lexicon json (defaults to the built-in table)");
  cmd->add_option("--type-lexicon", c.type_lexicon_path,
                  "Story-type keyword lexicon json");
  cmd->add_option("--stopwords", c.stopwords_path, "Stopword list, one per line");
  cmd->add_option("--gazetteer", c.gazetteer_path, "First-name gazetteer");
  cmd->add_option("--name-stoplist", c.name_stoplist_path,
                  "Capitalized non-name word list");
  cmd->add_option("--wiki-cache", c.wiki_cache_path,
                  "Page-existence cache file (FACTLINE_CACHE overrides)");
  cmd->add_option("--min-df", c.min_df, "Minimum document frequency");
  cmd->add_option("--pca-var", c.pca_variance,
                  "Variance fraction the PCA keeps")
      ->check(CLI::Range(1e-9, 1.0));
  cmd->add_option("--pca-components", c.pca_components,
                  "Fixed PCA component count (overrides --pca-var)");
  cmd->add_option("--k", opt.k_spec, "Cluster count or 'auto' for the elbow rule");
  cmd->add_option("--agree-threshold", c.agree_threshold,
                  "Cosine similarity floor for agreement neighbors");
  cmd->add_option("--agree-k", c.agree_k, "Neighbors per agreement query");
  cmd->add_flag("--agree-both", c.agree_both_directions,
                "Also emit reversed site pairs");
  cmd->add_flag("--agree-on-reduced", c.agree_on_reduced,
                "Compare agreement embeddings in PCA space");
  cmd->add_option("--split", c.split_ratio, "Train fraction of each split");
  cmd->add_option("--seed", c.seed, "Seed for every stochastic step");
  cmd->add_option("--restarts", c.restarts, "K-means restarts per k");
  cmd->add_option("--trials", c.baseline_trials,
                  "Monte-Carlo trials for the random baselines");
  cmd->add_flag("--keyword-first", c.keyword_first,
                "Scan keywords before the public-figure check");
  cmd->add_option("--bucket", opt.bucket, "Time-series bucket: week or day")
      ->check(CLI::IsMember({"week", "day"}));
  cmd->add_flag("--offline", c.offline, "Never touch the network");
  cmd->add_option("--out", c.out_dir, "Output directory")->required();
}

int run_with(const CliOptions& opt, const std::set<factline::Stage>& stages) {
  factline::PipelineConfig config = opt.config;
  config.bucket = opt.bucket;
  if (opt.k_spec != "auto") {
    try {
      const long k = std::stol(opt.k_spec);
      if (k <= 0) throw std::invalid_argument("k");
      config.k = static_cast<std::size_t>(k);
    } catch (const std::exception&) {
      std::cerr << "error: --k must be a positive integer or 'auto'\n";
      return 2;
    }
  }
  if (const char* env = std::getenv("FACTLINE_CACHE")) {
    if (*env) config.wiki_cache_path = env;
  }

  try {
    const factline::RunManifest manifest =
        factline::run_pipeline(config, stages);
    for (const auto& stage : manifest.stages) {
      std::cerr << "[" << stage.name << "] "
                << (stage.resumed ? "resumed" : "computed") << " in "
                << static_cast<long>(stage.millis) << " ms\n";
    }
    for (const auto& note : manifest.notes) std::cerr << "note: " << note << "\n";
    std::cout << "wrote " << manifest.outputs.size() << " files under "
              << config.out_dir.string() << "\n";
    return 0;
  } catch (const factline::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const factline::StageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fact-checked story analysis pipeline"};
  app.require_subcommand(1);

  using factline::Stage;
  const std::vector<std::pair<std::string, std::set<Stage>>> commands = {
      {"ingest", {Stage::Ingest}},
      {"represent", {Stage::Represent}},
      {"cluster", {Stage::Cluster}},
      {"validity", {Stage::Validity}},
      {"agreement", {Stage::Agreement}},
      {"storytype", {Stage::Storytype}},
      {"report", {Stage::Report}},
      {"run",
       {Stage::Validity, Stage::Agreement, Stage::Storytype, Stage::Report}},
  };

  std::vector<std::unique_ptr<CliOptions>> options;
  std::vector<std::pair<CLI::App*, const CliOptions*>> parsed;
  for (const auto& [name, stages] : commands) {
    CLI::App* cmd = app.add_subcommand(
        name, name == "run" ? "Run every stage end to end"
                            : "Run the " + name + " stage (and stale upstream stages)");
    options.push_back(std::make_unique<CliOptions>());
    add_common_options(cmd, *options.back());
    parsed.push_back({cmd, options.back().get()});
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  for (std::size_t i = 0; i < commands.size(); ++i) {
    if (parsed[i].first->parsed())
      return run_with(*parsed[i].second, commands[i].second);
  }
  return 2;
}
