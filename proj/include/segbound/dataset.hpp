#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "segbound/core.hpp"

namespace segbound {

/// One document with its gold segmentation. Loading validates that the gold
/// is a valid, lossless segmentation (InvalidGold otherwise).
struct DatasetRecord {
    Document doc;
    Segmentation gold;

    friend bool operator==(const DatasetRecord&, const DatasetRecord&) = default;
};

/// JSONL, one record per line: {"id","text","segments":[{"label","start","end"}]}.
/// Offsets count code points. Files begin with a header line
/// {"offset_unit":"char"}; load tolerates its absence, save always writes it.
std::vector<DatasetRecord> load_dataset(const std::filesystem::path& path);
void save_dataset(const std::vector<DatasetRecord>& records, const std::filesystem::path& path);

/// Documents only; "segments" may be absent (reconstruction inputs).
std::vector<Document> load_documents(const std::filesystem::path& path);

/// Predicted segments for scoring: same record schema, segments must be
/// sorted and disjoint but need not be lossless or label-alternating.
/// Optional "discarded" field (count or list) feeds the report counts.
struct Prediction {
    std::string id;
    Segmentation segments;
    std::size_t discarded = 0;
};

std::vector<Prediction> load_predictions(const std::filesystem::path& path);

/// Distinct gold labels across all records, in first-appearance order.
/// Throws Error when fewer than two labels occur.
LabelSet labels_from_data(const std::vector<DatasetRecord>& data);

/// Synthetic corpus recipe. Weights pick the structural element each segment
/// is built from; every positive-weight kind appears in every document when
/// the segment count allows.
struct CorpusSpec {
    std::size_t n_docs = 20;
    std::size_t min_words = 60;   // per document, approximate
    std::size_t max_words = 300;
    std::size_t min_segments = 3;
    std::size_t max_segments = 8;
    LabelSet labels = LabelSet::default_taxonomy();
    double weight_placeholder = 1.0;
    double weight_code = 1.0;
    double weight_keyvalue = 1.0;
    double weight_prose = 2.0;
    std::uint64_t seed = 0;

    void validate() const; // throws SpecInfeasible
};

/// Deterministic generator. Every record passes validate_segmentation, is
/// lossless, has pairwise-distinct segment texts, and survives the
/// make_targets round-trip self-check for all three output patterns.
std::vector<DatasetRecord> generate_synthetic_corpus(const CorpusSpec& spec);

} // namespace segbound
