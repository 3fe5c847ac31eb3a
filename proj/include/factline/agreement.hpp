#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "factline/corpus.hpp"
#include "factline/textrep.hpp"

namespace factline {

// Most frequent label; ties resolve through the fixed order
// True > PartiallyTrue > PartiallyFalse > False > Unknown.
Validity mode_validity(std::span<const Validity> labels);

struct LabeledStory {
  std::string id;
  Validity validity = Validity::Unknown;
};

struct NeighborEvidence {
  std::string story_id;
  std::vector<std::string> neighbor_ids;   // best-first
  std::vector<double> similarities;        // all >= threshold
  std::optional<Validity> mode;            // of the neighbors' labels
  bool candidate = false;
  bool matched = false;
};

struct AgreementSlice {
  std::size_t candidates = 0;
  std::size_t matches = 0;
  double agreement = 0.0;  // matches / candidates, 0 when no candidates
  bool zero_candidates = false;
  std::vector<NeighborEvidence> evidence;  // one entry per story in A
};

// Direction is A -> B: each story in A looks for its top-k most cosine-
// similar stories in B at or above the threshold; it matches when the
// neighbors' modal validity equals its own. Stories with no neighbor above
// the threshold are not candidates and do not enter the denominator.
AgreementSlice agreement_between_sites(std::span<const LabeledStory> site_a,
                                       std::span<const LabeledStory> site_b,
                                       const EmbeddingTable& embeddings,
                                       double threshold = 0.70, int k = 5);

struct AgreementRow {
  std::string cluster;  // cluster id or "avg"
  std::string site_a;
  std::string site_b;
  std::size_t candidates = 0;
  std::size_t matches = 0;
  double agreement = 0.0;
  bool zero_candidates = false;
};

struct AgreementReport {
  std::vector<AgreementRow> rows;
  std::vector<std::pair<std::string, NeighborEvidence>> evidence;  // cluster tag
};

// Per-cluster slices for every requested ordered site pair plus an
// unweighted "avg" row per pair. With both_directions the reversed pairs
// are appended.
AgreementReport agreement_table(
    const std::vector<StoryRecord>& records, const std::vector<int>& clusters,
    const EmbeddingTable& embeddings,
    const std::vector<std::pair<Site, Site>>& site_pairs,
    double threshold = 0.70, int k = 5, bool both_directions = false);

std::vector<std::pair<Site, Site>> default_site_pairs();

std::vector<std::vector<std::string>> agreement_to_csv(
    const AgreementReport& report);

}  // namespace factline
