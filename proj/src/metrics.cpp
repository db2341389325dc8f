#include "segbound/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <utility>

#include "segbound/errors.hpp"

namespace segbound {

namespace {

void require_lossless_gold(const Document& doc, const Segmentation& gold) {
    ValidationReport rep = validate_segmentation(doc, gold);
    if (!rep.ok || !rep.lossless)
        throw GoldNotLossless("gold segmentation of '" + doc.id + "' is not lossless");
}

// Region starts for a sorted disjoint segmentation, with every uncovered gap
// as its own region. Region index doubles as the region id.
std::vector<std::size_t> region_starts(const Segmentation& seg, std::size_t len) {
    std::vector<std::size_t> starts;
    std::size_t pos = 0;
    for (const Segment& s : seg.segments) {
        if (s.span.start() > pos)
            starts.push_back(pos);
        starts.push_back(s.span.start());
        pos = s.span.end();
    }
    if (pos < len || starts.empty())
        starts.push_back(pos);
    return starts;
}

struct ExactMatchCounts {
    std::size_t matched_pred = 0;
    std::size_t matched_gold = 0;
};

ExactMatchCounts exact_match_counts(const Document& doc, const Segmentation& pred,
                                    const Segmentation& gold) {
    using Key = std::pair<std::string, std::u32string>;
    std::set<Key> gold_keys;
    std::set<Key> pred_keys;
    for (const Segment& s : gold.segments)
        gold_keys.insert({s.label, segment_text(doc, s)});
    for (const Segment& s : pred.segments)
        pred_keys.insert({s.label, segment_text(doc, s)});

    ExactMatchCounts c;
    for (const Segment& s : pred.segments)
        if (gold_keys.count({s.label, segment_text(doc, s)}) > 0)
            ++c.matched_pred;
    for (const Segment& s : gold.segments)
        if (pred_keys.count({s.label, segment_text(doc, s)}) > 0)
            ++c.matched_gold;
    return c;
}

} // namespace

double reconstruction_ratio(const Document& doc, const Segmentation& pred) {
    if (doc.text.empty())
        return 0.0;
    std::size_t covered = 0;
    for (const Segment& s : pred.segments)
        covered += s.span.size();
    return static_cast<double>(covered) / static_cast<double>(doc.text.size());
}

double reconstruction_ratio(const Document& doc, const ReconstructionResult& pred) {
    return reconstruction_ratio(doc, pred.segments);
}

PrecisionRecallF1 exact_match_f1(const Document& doc, const Segmentation& pred,
                                 const Segmentation& gold) {
    PrecisionRecallF1 out;
    if (pred.empty())
        return out;
    ExactMatchCounts c = exact_match_counts(doc, pred, gold);
    out.precision = static_cast<double>(c.matched_pred) / static_cast<double>(pred.size());
    out.recall = gold.empty() ? 0.0
                              : static_cast<double>(c.matched_gold) /
                                    static_cast<double>(gold.size());
    if (out.precision + out.recall > 0.0)
        out.f1 = 2.0 * out.precision * out.recall / (out.precision + out.recall);
    return out;
}

double char_f1(const Document& doc, const Segmentation& pred, const Segmentation& gold) {
    require_lossless_gold(doc, gold);
    const std::size_t len = doc.text.size();

    // Characters the prediction leaves uncovered get a reserved none-label;
    // an empty string can never collide with real labels.
    const std::string none_label;
    std::map<std::string, std::size_t> tp;
    std::map<std::string, std::size_t> fp;
    std::map<std::string, std::size_t> fn;
    std::map<std::string, std::size_t> support;

    std::size_t gi = 0;
    std::size_t pi = 0;
    std::size_t pos = 0;
    const auto& gs = gold.segments;
    const auto& ps = pred.segments;
    while (pos < len) {
        while (gi < gs.size() && gs[gi].span.end() <= pos)
            ++gi;
        while (pi < ps.size() && ps[pi].span.end() <= pos)
            ++pi;
        const std::string& gl = gs[gi].label;
        bool in_pred = pi < ps.size() && ps[pi].span.start() <= pos;
        const std::string& pl = in_pred ? ps[pi].label : none_label;
        std::size_t next = gs[gi].span.end();
        if (in_pred)
            next = std::min(next, ps[pi].span.end());
        else if (pi < ps.size())
            next = std::min(next, ps[pi].span.start());
        std::size_t chunk = next - pos;
        if (pl == gl) {
            tp[gl] += chunk;
        } else {
            fp[pl] += chunk;
            fn[gl] += chunk;
        }
        support[gl] += chunk;
        pos = next;
    }

    double score = 0.0;
    for (const auto& [label, chars] : support) {
        double denom = 2.0 * static_cast<double>(tp[label]) + static_cast<double>(fp[label]) +
                       static_cast<double>(fn[label]);
        double f1 = denom > 0.0 ? 2.0 * static_cast<double>(tp[label]) / denom : 0.0;
        score += f1 * static_cast<double>(chars);
    }
    return len == 0 ? 0.0 : score / static_cast<double>(len);
}

double char_f1(const Document& doc, const Segmentation& pred, const Segmentation& gold,
               const LabelSet& labels) {
    (void)labels; // weighting by gold support makes unused labels irrelevant
    return char_f1(doc, pred, gold);
}

double pk(const Document& doc, const Segmentation& pred, const Segmentation& gold,
          std::optional<std::size_t> window) {
    require_lossless_gold(doc, gold);
    const std::size_t len = doc.text.size();
    std::size_t w = 0;
    if (window) {
        w = *window;
    } else {
        w = static_cast<std::size_t>(
            std::llround(0.5 * static_cast<double>(len) / static_cast<double>(gold.size())));
    }
    w = std::max<std::size_t>(w, 1);
    if (w >= len)
        throw WindowTooLarge("window " + std::to_string(w) + " >= document length " +
                             std::to_string(len));

    std::vector<std::size_t> gstarts = region_starts(gold, len);
    std::vector<std::size_t> pstarts = region_starts(pred, len);
    auto advance = [](const std::vector<std::size_t>& starts, std::size_t& idx, std::size_t pos) {
        while (idx + 1 < starts.size() && starts[idx + 1] <= pos)
            ++idx;
    };

    std::size_t ga = 0, gb = 0, pa = 0, pb = 0;
    std::size_t disagree = 0;
    const std::size_t probes = len - w;
    for (std::size_t i = 0; i < probes; ++i) {
        advance(gstarts, ga, i);
        advance(gstarts, gb, i + w);
        advance(pstarts, pa, i);
        advance(pstarts, pb, i + w);
        bool same_gold = ga == gb;
        bool same_pred = pa == pb;
        if (same_gold != same_pred)
            ++disagree;
    }
    return static_cast<double>(disagree) / static_cast<double>(probes);
}

double f1_label(const Document& doc, const Segmentation& pred, const Segmentation& gold) {
    require_lossless_gold(doc, gold);
    if (pred.empty())
        return 0.0;

    std::size_t correct = 0;
    std::size_t gi = 0;
    for (const Segment& p : pred.segments) {
        while (gi < gold.segments.size() && gold.segments[gi].span.end() <= p.span.start())
            ++gi;
        std::size_t best_overlap = 0;
        const std::string* best_label = nullptr;
        for (std::size_t gj = gi; gj < gold.segments.size(); ++gj) {
            const Span& g = gold.segments[gj].span;
            if (g.start() >= p.span.end())
                break;
            std::size_t lo = std::max(g.start(), p.span.start());
            std::size_t hi = std::min(g.end(), p.span.end());
            std::size_t overlap = hi > lo ? hi - lo : 0;
            if (overlap > best_overlap) {
                best_overlap = overlap;
                best_label = &gold.segments[gj].label;
            }
        }
        if (best_label != nullptr && *best_label == p.label)
            ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(pred.size());
}

RewardBreakdown reward(const Document& doc, const ReconstructionResult& pred,
                       const Segmentation& gold) {
    RewardBreakdown out;
    out.rho_rec = reconstruction_ratio(doc, pred);
    out.em_f1 = exact_match_f1(doc, pred.segments, gold).f1;
    out.char_f1 = segbound::char_f1(doc, pred.segments, gold);
    out.reward = out.rho_rec * (out.em_f1 + out.char_f1) / 2.0;
    return out;
}

EvalReport evaluate(const Document& doc, const Segmentation& pred, std::size_t discarded,
                    const Segmentation& gold, std::optional<std::size_t> window) {
    EvalReport rep;
    rep.rho_rec = reconstruction_ratio(doc, pred);
    rep.em_f1 = exact_match_f1(doc, pred, gold).f1;
    rep.char_f1 = char_f1(doc, pred, gold);
    rep.pk = pk(doc, pred, gold, window);
    rep.f1_lab = f1_label(doc, pred, gold);
    rep.counts.predicted = pred.size();
    rep.counts.gold = gold.size();
    rep.counts.exact_matched = pred.empty() ? 0 : exact_match_counts(doc, pred, gold).matched_pred;
    rep.counts.discarded = discarded;
    return rep;
}

EvalReport evaluate(const Document& doc, const ReconstructionResult& pred,
                    const Segmentation& gold, std::optional<std::size_t> window) {
    return evaluate(doc, pred.segments, pred.discarded.size(), gold, window);
}

} // namespace segbound
