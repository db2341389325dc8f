#include "segbound/boundary.hpp"

#include <algorithm>
#include <numeric>

namespace segbound {

namespace {

std::optional<Span> find_from(const std::u32string& hay, const std::u32string& needle,
                              std::size_t from) {
    if (needle.empty() || from > hay.size())
        return std::nullopt;
    std::size_t pos = hay.find(needle, from);
    if (pos == std::u32string::npos)
        return std::nullopt;
    return Span(pos, pos + needle.size());
}

const std::u32string* usable_seq(const std::optional<std::u32string>& s) {
    if (!s.has_value() || s->empty())
        return nullptr;
    return &*s;
}

std::string escape_field(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
        case '\\': out += "\\\\"; break;
        case '\t': out += "\\t"; break;
        case '\n': out += "\\n"; break;
        default: out.push_back(c);
        }
    }
    return out;
}

// Unknown escapes are kept literally so raw model output never fails here.
std::string unescape_field(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '\\' && i + 1 < s.size()) {
            char c = s[i + 1];
            if (c == 'n') {
                out.push_back('\n');
                ++i;
                continue;
            }
            if (c == 't') {
                out.push_back('\t');
                ++i;
                continue;
            }
            if (c == '\\') {
                out.push_back('\\');
                ++i;
                continue;
            }
        }
        out.push_back(s[i]);
    }
    return out;
}

} // namespace

const char* to_string(OutputPattern p) {
    switch (p) {
    case OutputPattern::Start: return "start";
    case OutputPattern::End: return "end";
    case OutputPattern::StartEnd: return "startend";
    }
    return "start";
}

std::optional<OutputPattern> pattern_from_string(std::string_view s) {
    if (s == "start")
        return OutputPattern::Start;
    if (s == "end")
        return OutputPattern::End;
    if (s == "startend")
        return OutputPattern::StartEnd;
    return std::nullopt;
}

bool pattern_valid(const BoundaryOutput& out) {
    if (out.items.empty())
        return false;
    for (const BoundaryItem& item : out.items) {
        const bool want_start = out.pattern != OutputPattern::End;
        const bool want_end = out.pattern != OutputPattern::Start;
        if (want_start != item.start_seq.has_value())
            return false;
        if (want_end != item.end_seq.has_value())
            return false;
        if (item.start_seq && trim(std::u32string_view(*item.start_seq)).empty())
            return false;
        if (item.end_seq && trim(std::u32string_view(*item.end_seq)).empty())
            return false;
    }
    return true;
}

ReconstructionResult reconstruct(const Document& doc, const BoundaryOutput& out) {
    ReconstructionResult r;
    const std::size_t n = out.items.size();
    r.locations.assign(n, std::nullopt);
    std::vector<std::optional<std::string>> dropped(n);

    if (out.pattern == OutputPattern::Start) {
        bool have_prev = false;
        std::size_t prev_start = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const std::u32string* seq = usable_seq(out.items[i].start_seq);
            if (seq == nullptr) {
                dropped[i] = "missing sequence";
                continue;
            }
            auto loc = find_from(doc.text, *seq, have_prev ? prev_start + 1 : 0);
            if (!loc) {
                dropped[i] = "sequence not found";
                continue;
            }
            r.locations[i] = loc;
            prev_start = loc->start();
            have_prev = true;
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (dropped[i])
                continue;
            std::size_t right = 0;
            if (i + 1 == n) {
                right = doc.text.size(); // virtual document-end boundary
            } else if (r.locations[i + 1]) {
                right = r.locations[i + 1]->start();
            } else {
                dropped[i] = "right boundary unlocatable";
                continue;
            }
            r.segments.segments.push_back({out.items[i].label, Span(r.locations[i]->start(), right)});
            r.segment_items.push_back(i);
        }
    } else if (out.pattern == OutputPattern::End) {
        bool have_prev = false;
        std::size_t prev_start = 0;
        std::size_t prev_end = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const std::u32string* seq = usable_seq(out.items[i].end_seq);
            if (seq == nullptr) {
                dropped[i] = "missing sequence";
                continue;
            }
            auto loc = find_from(doc.text, *seq, have_prev ? prev_start + 1 : 0);
            while (loc && have_prev && loc->end() <= prev_end)
                loc = find_from(doc.text, *seq, loc->start() + 1);
            if (!loc) {
                dropped[i] = "sequence not found";
                continue;
            }
            r.locations[i] = loc;
            prev_start = loc->start();
            prev_end = loc->end();
            have_prev = true;
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (dropped[i])
                continue;
            std::size_t left = 0; // virtual document-start boundary
            if (i > 0) {
                if (!r.locations[i - 1]) {
                    dropped[i] = "left boundary unlocatable";
                    continue;
                }
                left = r.locations[i - 1]->end();
            }
            r.segments.segments.push_back({out.items[i].label, Span(left, r.locations[i]->end())});
            r.segment_items.push_back(i);
        }
    } else {
        std::size_t cursor = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const std::u32string* ss = usable_seq(out.items[i].start_seq);
            const std::u32string* es = usable_seq(out.items[i].end_seq);
            if (ss == nullptr || es == nullptr) {
                dropped[i] = "missing sequence";
                continue;
            }
            auto sloc = find_from(doc.text, *ss, cursor);
            if (!sloc) {
                dropped[i] = "start sequence not found";
                continue;
            }
            auto eloc = find_from(doc.text, *es, sloc->start());
            if (!eloc) {
                dropped[i] = "end sequence not found";
                continue;
            }
            Span span(sloc->start(), eloc->end());
            r.locations[i] = span;
            r.segments.segments.push_back({out.items[i].label, span});
            r.segment_items.push_back(i);
            cursor = eloc->end();
        }
    }

    for (std::size_t i = 0; i < n; ++i)
        if (dropped[i])
            r.discarded.push_back({i, *dropped[i]});
    return r;
}

LengthSampler default_length_sampler(Rng& rng) {
    return [&rng](std::size_t word_count) -> std::size_t {
        std::size_t hi = std::min<std::size_t>(4, word_count);
        return static_cast<std::size_t>(rng.uniform(1, hi));
    };
}

BoundaryOutput make_targets(const Document& doc, const Segmentation& gold,
                            OutputPattern pattern, const LengthSampler& sample_len) {
    ValidationReport rep = validate_segmentation(doc, gold);
    if (!rep.ok || !rep.lossless)
        throw TargetSynthesisFailure("gold must be a valid lossless segmentation");

    const std::size_t n = gold.size();
    std::vector<std::u32string> texts(n);
    std::vector<std::vector<Word>> segwords(n);
    std::size_t total_words = 0;
    for (std::size_t i = 0; i < n; ++i) {
        texts[i] = segment_text(doc, gold.segments[i]);
        segwords[i] = words(texts[i]);
        if (segwords[i].empty())
            throw TargetSynthesisFailure("segment " + std::to_string(i) + " has no words");
        total_words += segwords[i].size();
    }

    const bool use_start = pattern != OutputPattern::End;
    const bool use_end = pattern != OutputPattern::Start;
    std::vector<std::size_t> ks(n, 1);
    std::vector<std::size_t> ke(n, 1);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t k = sample_len(segwords[i].size());
        k = std::clamp<std::size_t>(k, 1, segwords[i].size());
        ks[i] = ke[i] = k;
    }

    auto start_seq_of = [&](std::size_t i) {
        // Prefix through the k-th word's end; leading whitespace stays so the
        // located boundary lands exactly on the gold boundary.
        return texts[i].substr(0, segwords[i][ks[i] - 1].span.end());
    };
    auto end_seq_of = [&](std::size_t i) {
        std::size_t wc = segwords[i].size();
        return texts[i].substr(segwords[i][wc - ke[i]].span.start());
    };
    auto build = [&] {
        BoundaryOutput out;
        out.pattern = pattern;
        for (std::size_t i = 0; i < n; ++i) {
            BoundaryItem item;
            item.label = gold.segments[i].label;
            if (use_start)
                item.start_seq = start_seq_of(i);
            if (use_end)
                item.end_seq = end_seq_of(i);
            out.items.push_back(std::move(item));
        }
        return out;
    };
    auto grow = [&](std::vector<std::size_t>& k, std::size_t i) {
        if (k[i] >= segwords[i].size())
            return false;
        ++k[i];
        return true;
    };
    auto grow_or_fail = [&](std::vector<std::size_t>& k, std::size_t i) {
        if (!grow(k, i))
            throw TargetSynthesisFailure("segment " + std::to_string(i) +
                                         " cannot be located unambiguously");
    };

    const std::size_t max_iter = 4 * total_words + 16;
    for (std::size_t iter = 0; iter < max_iter; ++iter) {
        BoundaryOutput out = build();

        // Uniqueness within each sequence family; grow the later twin first.
        bool grew = false;
        for (int family = 0; family < 2 && !grew; ++family) {
            if (family == 0 && !use_start)
                continue;
            if (family == 1 && !use_end)
                continue;
            auto& k = family == 0 ? ks : ke;
            auto seq = [&](std::size_t i) -> const std::u32string& {
                return family == 0 ? *out.items[i].start_seq : *out.items[i].end_seq;
            };
            for (std::size_t i = 0; i < n && !grew; ++i) {
                for (std::size_t j = i + 1; j < n && !grew; ++j) {
                    if (seq(i) != seq(j))
                        continue;
                    if (grow(k, j) || grow(k, i)) {
                        grew = true;
                    } else {
                        throw TargetSynthesisFailure(
                            "segments " + std::to_string(i) + " and " + std::to_string(j) +
                            " have identical texts");
                    }
                }
            }
        }
        if (grew)
            continue;

        ReconstructionResult recon = reconstruct(doc, out);
        if (recon.discarded.empty() && recon.segments == gold)
            return out;

        // First item whose location misses its gold boundary owns the fault;
        // everything before it already matches.
        bool fixed = false;
        for (std::size_t i = 0; i < n && !fixed; ++i) {
            const Span want = gold.segments[i].span;
            const std::optional<Span>& got = recon.locations[i];
            if (pattern == OutputPattern::Start) {
                if (!got || got->start() != want.start()) {
                    grow_or_fail(ks, i);
                    fixed = true;
                }
            } else if (pattern == OutputPattern::End) {
                if (!got || got->end() != want.end()) {
                    grow_or_fail(ke, i);
                    fixed = true;
                }
            } else {
                if (!got) {
                    std::string reason;
                    for (const Discard& d : recon.discarded)
                        if (d.item_index == i)
                            reason = d.reason;
                    if (reason == "start sequence not found")
                        grow_or_fail(ks, i);
                    else
                        grow_or_fail(ke, i);
                    fixed = true;
                } else if (got->start() != want.start()) {
                    grow_or_fail(ks, i);
                    fixed = true;
                } else if (got->end() != want.end()) {
                    grow_or_fail(ke, i);
                    fixed = true;
                }
            }
        }
        if (!fixed)
            throw TargetSynthesisFailure("round trip failed without a locatable culprit");
    }
    throw TargetSynthesisFailure("sequence extension did not converge");
}

BoundaryOutput make_targets(const Document& doc, const Segmentation& gold,
                            OutputPattern pattern, Rng& rng) {
    return make_targets(doc, gold, pattern, default_length_sampler(rng));
}

std::string serialize(const BoundaryOutput& out) {
    std::string text;
    const bool want_start = out.pattern != OutputPattern::End;
    const bool want_end = out.pattern != OutputPattern::Start;
    for (std::size_t i = 0; i < out.items.size(); ++i) {
        if (i > 0)
            text.push_back('\n');
        const BoundaryItem& item = out.items[i];
        text += escape_field(item.label);
        if (want_start) {
            text.push_back('\t');
            text += escape_field(utf8_encode(item.start_seq.value_or(U"")));
        }
        if (want_end) {
            text.push_back('\t');
            text += escape_field(utf8_encode(item.end_seq.value_or(U"")));
        }
    }
    return text;
}

std::string serialize_full_segments(const Document& doc, const Segmentation& seg) {
    std::string text;
    for (std::size_t i = 0; i < seg.segments.size(); ++i) {
        if (i > 0)
            text.push_back('\n');
        text += escape_field(seg.segments[i].label);
        text.push_back('\t');
        text += escape_field(utf8_encode(segment_text(doc, seg.segments[i])));
    }
    return text;
}

namespace {

LenientParse parse_impl(std::string_view text, const LabelSet& labels, OutputPattern pattern,
                        bool lenient) {
    LenientParse result;
    result.output.pattern = pattern;
    const std::size_t n_fields = pattern == OutputPattern::StartEnd ? 3 : 2;

    auto fail = [&](std::size_t line_no, const std::string& reason, const char* kind) {
        if (lenient) {
            result.dropped.push_back({line_no, reason});
            return;
        }
        std::string msg = "line " + std::to_string(line_no) + ": " + reason;
        if (kind == std::string_view("label"))
            throw UnknownLabel(msg);
        throw MalformedLine(msg);
    };

    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t eol = text.find('\n', pos);
        std::string_view line = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos
                                                                               : eol - pos);
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
        ++line_no;
        if (trim(line).empty())
            continue;

        std::vector<std::string_view> fields;
        std::size_t fpos = 0;
        while (true) {
            std::size_t tab = line.find('\t', fpos);
            if (tab == std::string_view::npos) {
                fields.push_back(line.substr(fpos));
                break;
            }
            fields.push_back(line.substr(fpos, tab - fpos));
            fpos = tab + 1;
        }
        if (fields.size() != n_fields) {
            fail(line_no, "expected " + std::to_string(n_fields) + " fields, got " +
                              std::to_string(fields.size()),
                 "line");
            continue;
        }

        BoundaryItem item;
        item.label = unescape_field(trim(fields[0]));
        if (!labels.contains(item.label)) {
            fail(line_no, "unknown label: " + item.label, "label");
            continue;
        }
        bool bad_seq = false;
        for (std::size_t f = 1; f < n_fields; ++f) {
            std::u32string seq = utf8_decode(unescape_field(trim(fields[f])));
            if (trim(std::u32string_view(seq)).empty()) {
                fail(line_no, "empty sequence field", "line");
                bad_seq = true;
                break;
            }
            if (pattern == OutputPattern::End || (pattern == OutputPattern::StartEnd && f == 2))
                item.end_seq = std::move(seq);
            else
                item.start_seq = std::move(seq);
        }
        if (bad_seq)
            continue;
        result.output.items.push_back(std::move(item));
    }

    if (!lenient && result.output.items.empty())
        throw EmptyOutput("no parseable items");
    return result;
}

} // namespace

BoundaryOutput parse(std::string_view text, const LabelSet& labels, OutputPattern pattern) {
    return parse_impl(text, labels, pattern, false).output;
}

LenientParse parse_lenient(std::string_view text, const LabelSet& labels, OutputPattern pattern) {
    return parse_impl(text, labels, pattern, true);
}

std::string truncate_at_end_marker(std::string_view raw, std::string_view marker) {
    if (marker.empty())
        return std::string(raw);
    std::size_t pos = raw.find(marker);
    if (pos == std::string_view::npos)
        return std::string(raw);
    return std::string(raw.substr(0, pos));
}

} // namespace segbound
