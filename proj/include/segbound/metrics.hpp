#pragma once

#include <cstddef>
#include <optional>

#include "segbound/boundary.hpp"
#include "segbound/core.hpp"

namespace segbound {

struct PrecisionRecallF1 {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

struct RewardBreakdown {
    double rho_rec = 0.0;
    double em_f1 = 0.0;
    double char_f1 = 0.0;
    double reward = 0.0; // rho_rec * (em_f1 + char_f1) / 2
};

struct EvalCounts {
    std::size_t predicted = 0;
    std::size_t gold = 0;
    std::size_t exact_matched = 0;
    std::size_t discarded = 0;
};

struct EvalReport {
    double rho_rec = 0.0;
    double em_f1 = 0.0;
    double char_f1 = 0.0;
    double pk = 0.0;
    double f1_lab = 0.0;
    EvalCounts counts;
};

/// Fraction of the document covered by surviving segments.
double reconstruction_ratio(const Document& doc, const Segmentation& pred);
double reconstruction_ratio(const Document& doc, const ReconstructionResult& pred);

/// Segment-level exact match: a predicted segment matches a gold segment iff
/// label and text content are both equal (offsets may differ). Precision is
/// the fraction of predicted segments with at least one match, recall the
/// fraction of gold segments with at least one match; empty prediction
/// scores (0, 0, 0) and f1 is 0 whenever precision + recall is 0.
PrecisionRecallF1 exact_match_f1(const Document& doc, const Segmentation& pred,
                                 const Segmentation& gold);

/// Character-level label F1: every character gets the label of its covering
/// segment, characters uncovered by the prediction get a reserved none-label
/// that is never part of the label set; per-label F1 is averaged weighted by
/// gold character support. Gold must be lossless (GoldNotLossless). The
/// result depends only on labels with gold support, so the label-set overload
/// exists for interface completeness.
double char_f1(const Document& doc, const Segmentation& pred, const Segmentation& gold);
double char_f1(const Document& doc, const Segmentation& pred, const Segmentation& gold,
               const LabelSet& labels);

/// Beeferman P_k. Default window: round(0.5 * |d| / n_gold), at least 1.
/// Probe pairs (i, i+window) for i in [0, |d| - window); the score is the
/// fraction of probes where prediction and gold disagree on whether both
/// characters fall in the same segment. Uncovered predicted characters
/// belong to one filler segment per gap. Gold must be lossless. Throws
/// WindowTooLarge when window >= |d|.
double pk(const Document& doc, const Segmentation& pred, const Segmentation& gold,
          std::optional<std::size_t> window = std::nullopt);

/// Label accuracy under max-overlap pairing: each predicted segment is
/// paired with the gold segment it overlaps most (ties: earliest gold);
/// micro-F1 of predicted vs paired labels, which equals pairing accuracy.
/// Empty prediction scores 0. Gold must be lossless.
double f1_label(const Document& doc, const Segmentation& pred, const Segmentation& gold);

/// Verifiable reward: rho_rec * (em_f1 + char_f1) / 2.
RewardBreakdown reward(const Document& doc, const ReconstructionResult& pred,
                       const Segmentation& gold);

/// Full metric suite for one document.
EvalReport evaluate(const Document& doc, const Segmentation& pred, std::size_t discarded,
                    const Segmentation& gold,
                    std::optional<std::size_t> window = std::nullopt);
EvalReport evaluate(const Document& doc, const ReconstructionResult& pred,
                    const Segmentation& gold,
                    std::optional<std::size_t> window = std::nullopt);

} // namespace segbound
