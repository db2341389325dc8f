#include "segbound/core.hpp"

#include <algorithm>
#include <set>

namespace segbound {

LabelSet::LabelSet(std::vector<std::string> names) : names_(std::move(names)) {
    if (names_.size() < 2)
        throw Error("label set needs at least two labels");
    std::set<std::string> seen;
    for (const auto& n : names_) {
        if (n.empty())
            throw Error("label names must be non-empty");
        if (n.find('\t') != std::string::npos || n.find('\n') != std::string::npos)
            throw Error("label names must not contain tabs or newlines");
        if (!seen.insert(n).second)
            throw Error("duplicate label name: " + n);
    }
}

LabelSet LabelSet::default_taxonomy() {
    return LabelSet({"instruction", "example", "context", "question", "output format"});
}

bool LabelSet::contains(std::string_view name) const {
    return std::find(names_.begin(), names_.end(), name) != names_.end();
}

Span::Span(std::size_t start, std::size_t end) : start_(start), end_(end) {
    if (start >= end)
        throw std::invalid_argument("span must be non-empty");
}

ValidationReport validate_segmentation(const Document& doc, const Segmentation& seg,
                                       const LabelSet* labels) {
    ValidationReport report;
    const std::size_t doc_len = doc.text.size();
    for (std::size_t i = 0; i < seg.segments.size(); ++i) {
        const Segment& s = seg.segments[i];
        if (s.span.end() > doc_len)
            report.violations.push_back({i, "span exceeds document length"});
        if (i > 0 && s.span.start() < seg.segments[i - 1].span.end())
            report.violations.push_back({i, "span overlaps or precedes the previous segment"});
        if (i > 0 && s.label == seg.segments[i - 1].label)
            report.violations.push_back({i, "label equals the previous segment's label"});
        if (labels != nullptr && !labels->contains(s.label))
            report.violations.push_back({i, "label not in label set: " + s.label});
    }
    report.ok = report.violations.empty();
    report.lossless = report.ok && !seg.segments.empty() &&
                      seg.segments.front().span.start() == 0 &&
                      seg.segments.back().span.end() == doc_len;
    if (report.lossless) {
        for (std::size_t i = 1; i < seg.segments.size(); ++i) {
            if (seg.segments[i].span.start() != seg.segments[i - 1].span.end()) {
                report.lossless = false;
                break;
            }
        }
    }
    return report;
}

std::u32string segment_text(const Document& doc, const Segment& seg) {
    if (seg.span.end() > doc.text.size())
        throw OutOfBounds("segment span exceeds document length");
    return doc.text.substr(seg.span.start(), seg.span.size());
}

std::vector<Word> words(std::u32string_view text) {
    std::vector<Word> out;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && is_space(text[i]))
            ++i;
        if (i >= text.size())
            break;
        std::size_t start = i;
        while (i < text.size() && !is_space(text[i]))
            ++i;
        out.push_back({std::u32string(text.substr(start, i - start)), Span(start, i)});
    }
    return out;
}

} // namespace segbound
