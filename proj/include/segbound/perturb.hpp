#pragma once

#include <optional>
#include <string>
#include <vector>

#include "segbound/boundary.hpp"
#include "segbound/core.hpp"
#include "segbound/metrics.hpp"

namespace segbound {

/// Word-level boundary edits on a reconstructed candidate (Start pattern).
/// Shorten/Extend move one boundary of a surviving segment by one word;
/// Relabel swaps its label. Enumeration order below is also the tie-break
/// order for best_intermediate.
enum class PerturbationKind {
    ShortenLeft,  // drop the first word of segment i
    ShortenRight, // give segment i's last word to the following boundary
    ExtendLeft,   // absorb the word before segment i's start
    ExtendRight,  // absorb the first word after segment i's end
    Relabel,
};

const char* to_string(PerturbationKind k);

struct Perturbation {
    std::size_t segment_index = 0; // index into ReconstructionResult::segments
    PerturbationKind kind = PerturbationKind::ShortenLeft;
    std::string new_label; // Relabel only

    friend bool operator==(const Perturbation&, const Perturbation&) = default;
};

/// A scored rollout sample: parsed output, its reconstruction and reward.
struct Candidate {
    BoundaryOutput output;
    ReconstructionResult recon;
    RewardBreakdown score;
};

Candidate make_candidate(const Document& doc, const Segmentation& gold, BoundaryOutput out);

struct EditResult {
    BoundaryOutput output;
    ReconstructionResult recon;
};

/// Apply one edit without scoring. Returns nullopt when the edit is illegal
/// or cannot be realized. The mechanical word edit is tried first; when the
/// re-reconstruction deviates from the intended span layout (overlapping
/// sequences, duplicate text relocation) the affected sequences are
/// re-derived as shortest word prefixes of their intended spans, and the
/// perturbation is rejected if even that fails to realize the layout.
std::optional<EditResult> try_perturb(const Document& doc, const BoundaryOutput& out,
                                      const ReconstructionResult& recon,
                                      const Perturbation& p, const LabelSet& labels);

/// Edits that pass the structural rules only (word counts, document
/// boundaries, neighbor emptying, label constraints), before realizability
/// filtering. Candidate pool for randomized mutation.
std::vector<Perturbation> structural_perturbations(const Document& doc,
                                                   const ReconstructionResult& recon,
                                                   const LabelSet& labels);

/// All legal single edits: structurally legal and realizable. Requires a
/// Start-pattern candidate (other patterns have no defined edits).
std::vector<Perturbation> enumerate_perturbations(const Document& doc, const Candidate& cand,
                                                  const LabelSet& labels);

/// Apply + re-reconstruct + re-score. Throws IllegalPerturbation when p is
/// not a legal edit of cand.
Candidate apply_perturbation(const Document& doc, const Segmentation& gold,
                             const Candidate& cand, const Perturbation& p,
                             const LabelSet& labels);

struct BestIntermediate {
    Candidate candidate;
    double gain = 0.0; // candidate reward minus original reward
    bool pool_empty = false;
};

/// steps = 1: argmax over all legal single edits (ties: lowest segment
/// index, then kind order, then label-set order). steps = 2: greedy, the
/// best single edit followed by the best single edit of the result; gain is
/// always measured against the original. An empty pool returns the original
/// candidate with gain 0.
BestIntermediate best_intermediate(const Document& doc, const Segmentation& gold,
                                   const Candidate& cand, const LabelSet& labels,
                                   int steps = 1);

} // namespace segbound
