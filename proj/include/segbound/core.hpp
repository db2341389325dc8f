#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "segbound/errors.hpp"
#include "segbound/text.hpp"

namespace segbound {

/// A source document. Offsets everywhere in the library index code points
/// of `text`, never bytes.
struct Document {
    std::string id;
    std::u32string text;

    friend bool operator==(const Document&, const Document&) = default;
};

/// Ordered set of distinct segment labels. At least two labels are required
/// so label replacement always has an alternative.
class LabelSet {
public:
    explicit LabelSet(std::vector<std::string> names);

    static LabelSet default_taxonomy();

    bool contains(std::string_view name) const;
    std::size_t size() const { return names_.size(); }
    const std::vector<std::string>& names() const { return names_; }

    friend bool operator==(const LabelSet&, const LabelSet&) = default;

private:
    std::vector<std::string> names_;
};

/// Half-open character span [start, end). Empty spans are unrepresentable.
class Span {
public:
    Span(std::size_t start, std::size_t end);

    std::size_t start() const { return start_; }
    std::size_t end() const { return end_; }
    std::size_t size() const { return end_ - start_; }

    friend bool operator==(const Span&, const Span&) = default;

private:
    std::size_t start_;
    std::size_t end_;
};

struct Segment {
    std::string label;
    Span span;

    friend bool operator==(const Segment&, const Segment&) = default;
};

/// Ordered list of segments over one document. Invariants (checked by
/// validate_segmentation, not the constructor, since reconstruction results
/// reuse this type with weaker guarantees): spans sorted and pairwise
/// disjoint, adjacent labels differ.
struct Segmentation {
    std::vector<Segment> segments;

    bool empty() const { return segments.empty(); }
    std::size_t size() const { return segments.size(); }

    friend bool operator==(const Segmentation&, const Segmentation&) = default;
};

struct Violation {
    std::size_t index; // offending segment
    std::string message;
};

struct ValidationReport {
    bool ok = false;
    bool lossless = false; // spans tile [0, |text|) exactly
    std::vector<Violation> violations;
};

/// Check ordering, disjointness, bounds, adjacent-label distinctness and,
/// when `labels` is given, label membership. Violations are data, not errors.
ValidationReport validate_segmentation(const Document& doc, const Segmentation& seg,
                                       const LabelSet* labels = nullptr);

/// Slice of the document covered by one segment. Throws OutOfBounds.
std::u32string segment_text(const Document& doc, const Segment& seg);

struct Word {
    std::u32string text;
    Span span; // within the string words() was called on

    friend bool operator==(const Word&, const Word&) = default;
};

/// Maximal non-whitespace runs, in order. The word rule used everywhere
/// (target synthesis, perturbation, corpus generation) lives here.
std::vector<Word> words(std::u32string_view text);

} // namespace segbound
