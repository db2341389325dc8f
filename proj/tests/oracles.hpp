#pragma once

// Independent reference implementations of the metrics, written the slow,
// obvious way (per-character label arrays, quadratic matching). The library
// must agree with these on arbitrary inputs.

#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "segbound/core.hpp"

namespace segbound::oracle {

inline std::vector<std::string> char_labels(const Document& doc, const Segmentation& seg,
                                            const std::string& filler) {
    std::vector<std::string> labels(doc.text.size(), filler);
    for (const Segment& s : seg.segments)
        for (std::size_t i = s.span.start(); i < s.span.end(); ++i)
            labels[i] = s.label;
    return labels;
}

inline double rho(const Document& doc, const Segmentation& pred) {
    if (doc.text.empty())
        return 0.0;
    std::size_t covered = 0;
    for (const Segment& s : pred.segments)
        covered += s.span.size();
    return double(covered) / double(doc.text.size());
}

inline double char_f1(const Document& doc, const Segmentation& pred, const Segmentation& gold) {
    auto pl = char_labels(doc, pred, "\x01none");
    auto gl = char_labels(doc, gold, "\x01gold-gap");
    std::set<std::string> all(pl.begin(), pl.end());
    all.insert(gl.begin(), gl.end());
    double total = 0.0;
    for (const std::string& label : all) {
        std::size_t tp = 0, fp = 0, fn = 0, support = 0;
        for (std::size_t i = 0; i < pl.size(); ++i) {
            if (gl[i] == label)
                ++support;
            if (pl[i] == label && gl[i] == label)
                ++tp;
            if (pl[i] == label && gl[i] != label)
                ++fp;
            if (pl[i] != label && gl[i] == label)
                ++fn;
        }
        double denom = double(2 * tp + fp + fn);
        double f1 = denom > 0.0 ? 2.0 * double(tp) / denom : 0.0;
        total += f1 * double(support);
    }
    return pl.empty() ? 0.0 : total / double(pl.size());
}

// Region ids per character: covering segment index, or a unique id per
// uncovered gap run.
inline std::vector<std::size_t> region_ids(const Document& doc, const Segmentation& seg) {
    const std::size_t none = static_cast<std::size_t>(-1);
    std::vector<std::size_t> ids(doc.text.size(), none);
    for (std::size_t s = 0; s < seg.segments.size(); ++s)
        for (std::size_t i = seg.segments[s].span.start(); i < seg.segments[s].span.end(); ++i)
            ids[i] = s;
    std::size_t next_gap = seg.segments.size();
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (ids[i] != none)
            continue;
        std::size_t j = i;
        while (j < ids.size() && ids[j] == none)
            ids[j++] = next_gap;
        ++next_gap;
        i = j;
    }
    return ids;
}

inline double pk(const Document& doc, const Segmentation& pred, const Segmentation& gold,
                 std::size_t window) {
    auto pid = region_ids(doc, pred);
    auto gid = region_ids(doc, gold);
    std::size_t disagree = 0;
    std::size_t probes = doc.text.size() - window;
    for (std::size_t i = 0; i + window < doc.text.size(); ++i) {
        bool same_p = pid[i] == pid[i + window];
        bool same_g = gid[i] == gid[i + window];
        if (same_p != same_g)
            ++disagree;
    }
    return double(disagree) / double(probes);
}

inline std::size_t default_window(const Document& doc, const Segmentation& gold) {
    auto w = static_cast<std::size_t>(
        std::llround(0.5 * double(doc.text.size()) / double(gold.size())));
    return w < 1 ? 1 : w;
}

struct EmOracle {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

inline EmOracle em(const Document& doc, const Segmentation& pred, const Segmentation& gold) {
    EmOracle out;
    if (pred.segments.empty())
        return out;
    auto matches = [&](const Segment& x, const Segment& y) {
        return x.label == y.label && segment_text(doc, x) == segment_text(doc, y);
    };
    std::size_t mp = 0;
    for (const Segment& p : pred.segments)
        for (const Segment& g : gold.segments)
            if (matches(p, g)) {
                ++mp;
                break;
            }
    std::size_t mg = 0;
    for (const Segment& g : gold.segments)
        for (const Segment& p : pred.segments)
            if (matches(g, p)) {
                ++mg;
                break;
            }
    out.precision = double(mp) / double(pred.segments.size());
    out.recall = gold.segments.empty() ? 0.0 : double(mg) / double(gold.segments.size());
    if (out.precision + out.recall > 0.0)
        out.f1 = 2.0 * out.precision * out.recall / (out.precision + out.recall);
    return out;
}

inline double f1_label(const Document& doc, const Segmentation& pred, const Segmentation& gold) {
    (void)doc;
    if (pred.segments.empty())
        return 0.0;
    std::size_t correct = 0;
    for (const Segment& p : pred.segments) {
        std::size_t best_overlap = 0;
        std::string best;
        for (const Segment& g : gold.segments) {
            std::size_t lo = std::max(p.span.start(), g.span.start());
            std::size_t hi = std::min(p.span.end(), g.span.end());
            std::size_t overlap = hi > lo ? hi - lo : 0;
            if (overlap > best_overlap) {
                best_overlap = overlap;
                best = g.label;
            }
        }
        if (best_overlap > 0 && best == p.label)
            ++correct;
    }
    return double(correct) / double(pred.segments.size());
}

} // namespace segbound::oracle
