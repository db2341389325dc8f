#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "segbound/core.hpp"
#include "segbound/rng.hpp"

namespace segbound {

enum class OutputPattern {
    Start,    // one starting sequence per segment
    End,      // one ending sequence per segment
    StartEnd, // both; gaps between segments stay uncovered
};

const char* to_string(OutputPattern p);
std::optional<OutputPattern> pattern_from_string(std::string_view s);

/// One generated item: a label plus the sequences the pattern requires.
struct BoundaryItem {
    std::string label;
    std::optional<std::u32string> start_seq;
    std::optional<std::u32string> end_seq;

    friend bool operator==(const BoundaryItem&, const BoundaryItem&) = default;
};

struct BoundaryOutput {
    OutputPattern pattern = OutputPattern::Start;
    std::vector<BoundaryItem> items;

    friend bool operator==(const BoundaryOutput&, const BoundaryOutput&) = default;
};

/// True when every item carries exactly the sequences its pattern requires,
/// each non-empty after whitespace trimming, and there is at least one item.
bool pattern_valid(const BoundaryOutput& out);

struct Discard {
    std::size_t item_index;
    std::string reason;

    friend bool operator==(const Discard&, const Discard&) = default;
};

/// Output of reconstruct(). `segments` holds the surviving segments in
/// order; `segment_items[i]` is the item that produced segments[i].
/// `locations[i]` is the resolved span of item i's located sequence(s), or
/// absent when it could not be located. Adjacent surviving segments may
/// carry equal labels and need not cover the document.
struct ReconstructionResult {
    Segmentation segments;
    std::vector<std::size_t> segment_items;
    std::vector<Discard> discarded;
    std::vector<std::optional<Span>> locations;
};

/// Locate every item's sequence(s) in the document and rebuild full spans.
/// Total: unlocatable sequences become per-item discards, never errors.
///
/// Start: item 1 at its leftmost occurrence, each later item at its leftmost
/// occurrence starting strictly after the previous located start; failures do
/// not advance the search. Segment i runs from its located start to item
/// i+1's located start (document end for the last item); it is discarded when
/// either side is unlocatable.
///
/// End: mirrored with ending sequences; each later match must start and end
/// strictly after the previous located match. Segment i runs from the end of
/// item i-1's match (document start for i = 1) to the end of item i's match.
///
/// StartEnd: start_seq searched at/after the previous surviving segment's
/// end, end_seq at/after the start_seq match start; the segment covers
/// [start match start, end match end) and gaps remain uncovered.
ReconstructionResult reconstruct(const Document& doc, const BoundaryOutput& out);

/// Per-segment boundary length chooser for make_targets; receives the
/// segment's word count. The default draws uniformly from [1, min(4, count)].
using LengthSampler = std::function<std::size_t(std::size_t word_count)>;

LengthSampler default_length_sampler(Rng& rng);

/// Synthesize training targets from a gold segmentation: the prefix of each
/// segment through its k-th word (Start), the suffix from its k-th-from-last
/// word (End), or both (StartEnd), deterministically extended word by word
/// until sequences are distinct within their family and reconstruct()
/// reproduces gold exactly. Throws TargetSynthesisFailure when impossible
/// (duplicate segment texts, word-less segments).
BoundaryOutput make_targets(const Document& doc, const Segmentation& gold,
                            OutputPattern pattern, const LengthSampler& sample_len);
BoundaryOutput make_targets(const Document& doc, const Segmentation& gold,
                            OutputPattern pattern, Rng& rng);

/// Wire format: one item per line, fields separated by TAB (0x09), lines by
/// LF (0x0A); `label<TAB>seq` or `label<TAB>start_seq<TAB>end_seq`.
/// Backslash, tab and newline inside fields are escaped as \\, \t, \n.
/// No trailing newline.
std::string serialize(const BoundaryOutput& out);

/// Same line format with each segment's full text in place of boundary
/// sequences; the compression baseline.
std::string serialize_full_segments(const Document& doc, const Segmentation& seg);

/// Strict parse. Splits fields on raw tabs, trims raw fields, then
/// unescapes. Throws MalformedLine / UnknownLabel / EmptyOutput.
BoundaryOutput parse(std::string_view text, const LabelSet& labels, OutputPattern pattern);

struct ParseDiagnostic {
    std::size_t line; // 1-based
    std::string reason;
};

struct LenientParse {
    BoundaryOutput output; // items may be empty when nothing parsed
    std::vector<ParseDiagnostic> dropped;
};

/// Lenient parse for raw policy output: bad lines are dropped into
/// diagnostics instead of failing.
LenientParse parse_lenient(std::string_view text, const LabelSet& labels, OutputPattern pattern);

/// Prefix of `raw` strictly before the first occurrence of `marker`;
/// `raw` unchanged when the marker is absent or empty.
std::string truncate_at_end_marker(std::string_view raw, std::string_view marker);

} // namespace segbound
