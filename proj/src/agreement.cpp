#include "factline/agreement.hpp"

#include <algorithm>
#include <map>

#include "factline/csv.hpp"

namespace factline {

Validity mode_validity(std::span<const Validity> labels) {
  if (labels.empty())
    throw ConfigError("mode_validity needs at least one label");
  // counts indexed by the enum order, which is also the tie-break order
  std::size_t counts[kValidityCount] = {};
  for (const Validity v : labels) ++counts[static_cast<std::size_t>(v)];
  std::size_t best = 0;
  for (std::size_t i = 1; i < kValidityCount; ++i) {
    if (counts[i] > counts[best]) best = i;
  }
  return static_cast<Validity>(best);
}

AgreementSlice agreement_between_sites(std::span<const LabeledStory> site_a,
                                       std::span<const LabeledStory> site_b,
                                       const EmbeddingTable& embeddings,
                                       double threshold, int k) {
  if (k <= 0) throw ConfigError("agreement k must be positive");

  std::vector<std::string> missing;
  for (const auto& s : site_a) {
    if (!embeddings.contains(s.id)) missing.push_back(s.id);
  }
  for (const auto& s : site_b) {
    if (!embeddings.contains(s.id)) missing.push_back(s.id);
  }
  if (!missing.empty()) {
    std::string msg = "missing embeddings for:";
    for (const auto& id : missing) msg += " " + id;
    throw ConfigError(msg);
  }

  AgreementSlice slice;
  for (const auto& a : site_a) {
    NeighborEvidence ev;
    ev.story_id = a.id;
    const auto* va = embeddings.find(a.id);

    // (similarity, id, validity) for every b-story above the threshold,
    // ranked best-first with id as the deterministic tie-break
    struct Scored {
      double sim;
      const LabeledStory* story;
    };
    std::vector<Scored> scored;
    for (const auto& b : site_b) {
      const double sim = cosine_similarity(*va, *embeddings.find(b.id));
      if (sim >= threshold) scored.push_back({sim, &b});
    }
    std::sort(scored.begin(), scored.end(), [](const Scored& x, const Scored& y) {
      if (x.sim != y.sim) return x.sim > y.sim;
      return x.story->id < y.story->id;
    });
    if (scored.size() > static_cast<std::size_t>(k))
      scored.resize(static_cast<std::size_t>(k));

    if (!scored.empty()) {
      ev.candidate = true;
      std::vector<Validity> neighbor_labels;
      for (const auto& s : scored) {
        ev.neighbor_ids.push_back(s.story->id);
        ev.similarities.push_back(s.sim);
        neighbor_labels.push_back(s.story->validity);
      }
      ev.mode = mode_validity(neighbor_labels);
      ev.matched = (*ev.mode == a.validity);
      ++slice.candidates;
      if (ev.matched) ++slice.matches;
    }
    slice.evidence.push_back(std::move(ev));
  }

  if (slice.candidates == 0) {
    slice.zero_candidates = true;
    slice.agreement = 0.0;
  } else {
    slice.agreement = static_cast<double>(slice.matches) /
                      static_cast<double>(slice.candidates);
  }
  return slice;
}

std::vector<std::pair<Site, Site>> default_site_pairs() {
  const Site snopes{Site::Kind::Snopes, {}};
  const Site politifact{Site::Kind::PolitiFact, {}};
  const Site poynter{Site::Kind::Poynter, {}};
  return {{snopes, politifact}, {snopes, poynter}, {politifact, poynter}};
}

AgreementReport agreement_table(
    const std::vector<StoryRecord>& records, const std::vector<int>& clusters,
    const EmbeddingTable& embeddings,
    const std::vector<std::pair<Site, Site>>& site_pairs, double threshold,
    int k, bool both_directions) {
  if (records.size() != clusters.size())
    throw DimensionError("records and cluster assignments differ in length");

  std::vector<std::pair<Site, Site>> pairs = site_pairs;
  if (both_directions) {
    for (const auto& [a, b] : site_pairs) pairs.push_back({b, a});
  }

  // cluster -> site -> stories
  std::map<int, std::map<Site, std::vector<LabeledStory>>> grouped;
  for (std::size_t i = 0; i < records.size(); ++i) {
    grouped[clusters[i]][records[i].site].push_back(
        {records[i].id, records[i].validity});
  }

  AgreementReport report;
  for (const auto& [site_a, site_b] : pairs) {
    std::vector<double> cluster_agreements;
    std::size_t total_candidates = 0, total_matches = 0;
    bool all_zero = true;
    for (const auto& [cluster, by_site] : grouped) {
      const auto ia = by_site.find(site_a);
      const auto ib = by_site.find(site_b);
      static const std::vector<LabeledStory> kEmpty;
      const auto& stories_a = ia == by_site.end() ? kEmpty : ia->second;
      const auto& stories_b = ib == by_site.end() ? kEmpty : ib->second;

      AgreementSlice slice =
          agreement_between_sites(stories_a, stories_b, embeddings, threshold, k);
      AgreementRow row;
      row.cluster = std::to_string(cluster);
      row.site_a = site_a.str();
      row.site_b = site_b.str();
      row.candidates = slice.candidates;
      row.matches = slice.matches;
      row.agreement = slice.agreement;
      row.zero_candidates = slice.zero_candidates;
      report.rows.push_back(row);

      cluster_agreements.push_back(slice.agreement);
      total_candidates += slice.candidates;
      total_matches += slice.matches;
      all_zero = all_zero && slice.zero_candidates;
      for (auto& ev : slice.evidence)
        report.evidence.push_back({row.cluster, std::move(ev)});
    }

    AgreementRow avg;
    avg.cluster = "avg";
    avg.site_a = site_a.str();
    avg.site_b = site_b.str();
    avg.candidates = total_candidates;
    avg.matches = total_matches;
    double sum = 0.0;
    for (const double a : cluster_agreements) sum += a;
    avg.agreement = cluster_agreements.empty()
                        ? 0.0
                        : sum / static_cast<double>(cluster_agreements.size());
    avg.zero_candidates = all_zero;
    report.rows.push_back(avg);
  }
  return report;
}

std::vector<std::vector<std::string>> agreement_to_csv(
    const AgreementReport& report) {
  std::vector<std::vector<std::string>> rows;
  rows.push_back({"cluster", "site_a", "site_b", "candidates", "matches",
                  "agreement", "zero_candidate_flag"});
  for (const auto& r : report.rows) {
    rows.push_back({r.cluster, r.site_a, r.site_b,
                    std::to_string(r.candidates), std::to_string(r.matches),
                    csv::format_double(r.agreement),
                    r.zero_candidates ? "1" : "0"});
  }
  return rows;
}

}  // namespace factline
