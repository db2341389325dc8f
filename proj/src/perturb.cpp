#include "segbound/perturb.hpp"

#include <algorithm>
#include <stdexcept>
#include <utility>

#include "segbound/errors.hpp"

namespace segbound {

namespace {

std::vector<Word> span_words(const Document& doc, const Span& s) {
    std::vector<Word> ws = words(std::u32string_view(doc.text).substr(s.start(), s.size()));
    std::vector<Word> out;
    out.reserve(ws.size());
    for (Word& w : ws)
        out.push_back({std::move(w.text), Span(w.span.start() + s.start(), w.span.end() + s.start())});
    return out;
}

// Start of the last word beginning strictly before pos, if any.
std::optional<std::size_t> prev_word_start(const std::u32string& text, std::size_t pos) {
    std::size_t i = std::min(pos, text.size());
    while (i > 0 && is_space(text[i - 1]))
        --i;
    if (i == 0)
        return std::nullopt;
    while (i > 0 && !is_space(text[i - 1]))
        --i;
    return i;
}

// The edit in span form: which item's sequence moves where, and the exact
// surviving layout the edited output must reconstruct to. nullopt when the
// structural rules reject the perturbation.
struct IntendedEdit {
    std::size_t edit_item = 0;
    std::size_t new_loc = 0;
    std::size_t region_end = 0; // cap for re-derived sequences
    bool label_only = false;
    std::vector<std::optional<Segment>> layout; // per item index
};

std::optional<IntendedEdit> compute_intended(const Document& doc,
                                             const ReconstructionResult& recon,
                                             const Perturbation& p, const LabelSet& labels) {
    const auto& segs = recon.segments.segments;
    const std::size_t m = segs.size();
    if (p.segment_index >= m)
        return std::nullopt;
    const std::size_t j = p.segment_index;
    const std::size_t t = recon.segment_items[j];
    const std::size_t n_items = recon.locations.size();
    const Span sp = segs[j].span;
    const std::size_t a = sp.start();
    const std::size_t b = sp.end();
    const bool prev_adj = j > 0 && recon.segment_items[j - 1] + 1 == t;
    const bool next_surv = j + 1 < m && recon.segment_items[j + 1] == t + 1;

    IntendedEdit e;
    e.layout.resize(n_items);
    for (std::size_t jj = 0; jj < m; ++jj)
        e.layout[recon.segment_items[jj]] = segs[jj];

    switch (p.kind) {
    case PerturbationKind::ShortenLeft: {
        std::vector<Word> w = span_words(doc, sp);
        if (w.size() < 2)
            return std::nullopt;
        const std::size_t a2 = w[1].span.start();
        e.edit_item = t;
        e.new_loc = a2;
        e.region_end = b;
        e.layout[t] = Segment{segs[j].label, Span(a2, b)};
        if (prev_adj)
            e.layout[t - 1] = Segment{segs[j - 1].label, Span(segs[j - 1].span.start(), a2)};
        return e;
    }
    case PerturbationKind::ShortenRight: {
        if (t + 1 >= n_items)
            return std::nullopt;
        std::vector<Word> w = span_words(doc, sp);
        if (w.size() < 2)
            return std::nullopt;
        const std::size_t b2 = w.back().span.start();
        e.edit_item = t + 1;
        e.new_loc = b2;
        e.layout[t] = Segment{segs[j].label, Span(a, b2)};
        if (next_surv) {
            e.layout[t + 1] = Segment{segs[j + 1].label, Span(b2, segs[j + 1].span.end())};
            e.region_end = segs[j + 1].span.end();
        } else {
            e.region_end = j + 1 < m ? segs[j + 1].span.start() : doc.text.size();
        }
        return e;
    }
    case PerturbationKind::ExtendLeft: {
        std::optional<std::size_t> a2 = prev_word_start(doc.text, a);
        if (!a2)
            return std::nullopt;
        if (j > 0) {
            if (prev_adj) {
                const std::size_t pa = segs[j - 1].span.start();
                if (*a2 <= pa)
                    return std::nullopt;
                if (span_words(doc, Span(pa, *a2)).empty())
                    return std::nullopt;
                e.layout[t - 1] = Segment{segs[j - 1].label, Span(pa, *a2)};
            } else if (*a2 < segs[j - 1].span.end()) {
                return std::nullopt;
            }
        }
        e.edit_item = t;
        e.new_loc = *a2;
        e.region_end = b;
        e.layout[t] = Segment{segs[j].label, Span(*a2, b)};
        return e;
    }
    case PerturbationKind::ExtendRight: {
        if (t + 1 >= n_items)
            return std::nullopt;
        const std::size_t hi = next_surv ? segs[j + 1].span.end()
                                         : (j + 1 < m ? segs[j + 1].span.start() : doc.text.size());
        if (b >= hi)
            return std::nullopt;
        std::vector<Word> w = span_words(doc, Span(b, hi));
        if (w.size() < 2)
            return std::nullopt;
        const std::size_t b2 = w[1].span.start();
        e.edit_item = t + 1;
        e.new_loc = b2;
        e.region_end = hi;
        e.layout[t] = Segment{segs[j].label, Span(a, b2)};
        if (next_surv)
            e.layout[t + 1] = Segment{segs[j + 1].label, Span(b2, segs[j + 1].span.end())};
        return e;
    }
    case PerturbationKind::Relabel: {
        if (!labels.contains(p.new_label) || p.new_label == segs[j].label)
            return std::nullopt;
        if (j > 0 && segs[j - 1].label == p.new_label)
            return std::nullopt;
        if (j + 1 < m && segs[j + 1].label == p.new_label)
            return std::nullopt;
        e.edit_item = t;
        e.label_only = true;
        e.layout[t] = Segment{p.new_label, sp};
        return e;
    }
    }
    return std::nullopt;
}

} // namespace

const char* to_string(PerturbationKind k) {
    switch (k) {
    case PerturbationKind::ShortenLeft: return "shorten_left";
    case PerturbationKind::ShortenRight: return "shorten_right";
    case PerturbationKind::ExtendLeft: return "extend_left";
    case PerturbationKind::ExtendRight: return "extend_right";
    case PerturbationKind::Relabel: return "relabel";
    }
    return "relabel";
}

Candidate make_candidate(const Document& doc, const Segmentation& gold, BoundaryOutput out) {
    Candidate c;
    c.recon = reconstruct(doc, out);
    c.output = std::move(out);
    c.score = reward(doc, c.recon, gold);
    return c;
}

std::optional<EditResult> try_perturb(const Document& doc, const BoundaryOutput& out,
                                      const ReconstructionResult& recon,
                                      const Perturbation& p, const LabelSet& labels) {
    if (out.pattern != OutputPattern::Start)
        return std::nullopt;
    if (recon.locations.size() != out.items.size())
        return std::nullopt;
    std::optional<IntendedEdit> intended = compute_intended(doc, recon, p, labels);
    if (!intended)
        return std::nullopt;

    const std::size_t n = out.items.size();
    auto matches = [&](const ReconstructionResult& r2) {
        std::vector<std::optional<Segment>> actual(n);
        for (std::size_t jj = 0; jj < r2.segments.segments.size(); ++jj)
            actual[r2.segment_items[jj]] = r2.segments.segments[jj];
        return actual == intended->layout;
    };

    if (intended->label_only) {
        BoundaryOutput out2 = out;
        out2.items[intended->edit_item].label = p.new_label;
        ReconstructionResult r2 = reconstruct(doc, out2);
        if (!matches(r2))
            return std::nullopt;
        return EditResult{std::move(out2), std::move(r2)};
    }

    if (!out.items[intended->edit_item].start_seq)
        return std::nullopt;
    const std::u32string& old_seq = *out.items[intended->edit_item].start_seq;

    std::vector<std::u32string> attempts;
    if (p.kind == PerturbationKind::ShortenLeft || p.kind == PerturbationKind::ExtendRight) {
        // the mechanical edit drops the sequence's first word
        std::vector<Word> sw = words(old_seq);
        if (sw.size() >= 2)
            attempts.push_back(old_seq.substr(sw[1].span.start()));
    } else {
        // the mechanical edit pulls the sequence's start back to the new
        // boundary, keeping its old tail
        const std::optional<Span>& old_loc = recon.locations[intended->edit_item];
        if (old_loc && old_loc->start() > intended->new_loc)
            attempts.push_back(doc.text.substr(intended->new_loc,
                                               old_loc->start() - intended->new_loc +
                                                   old_seq.size()));
    }
    // fallbacks: shortest word prefixes of the intended region
    if (intended->new_loc < intended->region_end) {
        std::vector<Word> rw =
            span_words(doc, Span(intended->new_loc, intended->region_end));
        for (const Word& w : rw)
            attempts.push_back(
                doc.text.substr(intended->new_loc, w.span.end() - intended->new_loc));
    }

    for (std::u32string& seq : attempts) {
        BoundaryOutput out2 = out;
        out2.items[intended->edit_item].start_seq = std::move(seq);
        ReconstructionResult r2 = reconstruct(doc, out2);
        if (matches(r2))
            return EditResult{std::move(out2), std::move(r2)};
    }
    return std::nullopt;
}

std::vector<Perturbation> structural_perturbations(const Document& doc,
                                                   const ReconstructionResult& recon,
                                                   const LabelSet& labels) {
    static constexpr PerturbationKind kMoves[] = {
        PerturbationKind::ShortenLeft,
        PerturbationKind::ShortenRight,
        PerturbationKind::ExtendLeft,
        PerturbationKind::ExtendRight,
    };
    std::vector<Perturbation> pool;
    for (std::size_t j = 0; j < recon.segments.segments.size(); ++j) {
        for (PerturbationKind kind : kMoves) {
            Perturbation p{j, kind, ""};
            if (compute_intended(doc, recon, p, labels))
                pool.push_back(std::move(p));
        }
        for (const std::string& name : labels.names()) {
            Perturbation p{j, PerturbationKind::Relabel, name};
            if (compute_intended(doc, recon, p, labels))
                pool.push_back(std::move(p));
        }
    }
    return pool;
}

std::vector<Perturbation> enumerate_perturbations(const Document& doc, const Candidate& cand,
                                                  const LabelSet& labels) {
    std::vector<Perturbation> pool;
    if (cand.output.pattern != OutputPattern::Start)
        return pool;
    for (Perturbation& p : structural_perturbations(doc, cand.recon, labels))
        if (try_perturb(doc, cand.output, cand.recon, p, labels))
            pool.push_back(std::move(p));
    return pool;
}

Candidate apply_perturbation(const Document& doc, const Segmentation& gold,
                             const Candidate& cand, const Perturbation& p,
                             const LabelSet& labels) {
    std::optional<EditResult> edited = try_perturb(doc, cand.output, cand.recon, p, labels);
    if (!edited)
        throw IllegalPerturbation(std::string(to_string(p.kind)) + " on segment " +
                                  std::to_string(p.segment_index) + " is not legal here");
    Candidate c;
    c.output = std::move(edited->output);
    c.recon = std::move(edited->recon);
    c.score = reward(doc, c.recon, gold);
    return c;
}

BestIntermediate best_intermediate(const Document& doc, const Segmentation& gold,
                                   const Candidate& cand, const LabelSet& labels, int steps) {
    if (steps != 1 && steps != 2)
        throw std::invalid_argument("steps must be 1 or 2");

    auto best_one = [&](const Candidate& base) -> std::optional<Candidate> {
        std::optional<Candidate> best;
        for (const Perturbation& p : structural_perturbations(doc, base.recon, labels)) {
            std::optional<EditResult> er = try_perturb(doc, base.output, base.recon, p, labels);
            if (!er)
                continue;
            Candidate c;
            c.output = std::move(er->output);
            c.recon = std::move(er->recon);
            c.score = reward(doc, c.recon, gold);
            if (!best || c.score.reward > best->score.reward)
                best = std::move(c);
        }
        return best;
    };

    BestIntermediate out;
    if (cand.output.pattern != OutputPattern::Start) {
        out.candidate = cand;
        out.pool_empty = true;
        return out;
    }
    std::optional<Candidate> b1 = best_one(cand);
    if (!b1) {
        out.candidate = cand;
        out.pool_empty = true;
        return out;
    }
    Candidate result = std::move(*b1);
    if (steps == 2) {
        std::optional<Candidate> b2 = best_one(result);
        if (b2)
            result = std::move(*b2);
    }
    out.gain = result.score.reward - cand.score.reward;
    out.candidate = std::move(result);
    return out;
}

} // namespace segbound
