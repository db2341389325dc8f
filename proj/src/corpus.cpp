#include <algorithm>
#include <set>

#include "segbound/boundary.hpp"
#include "segbound/dataset.hpp"
#include "segbound/errors.hpp"
#include "segbound/rng.hpp"

namespace segbound {

namespace {

constexpr std::uint64_t kDocTag = 0x646f63ULL; // "doc"
constexpr std::uint64_t kPatTag = 0x706174ULL; // "pat"

const char* const kBank[] = {
    "signal", "window", "filter", "batch",    "tensor",  "margin", "review", "prompt",
    "token",  "ledger", "branch", "vector",   "sample",  "metric", "anchor", "buffer",
    "segment", "reward", "policy", "offset",  "parser",  "corpus", "label",  "probe",
    "café",   "naïve",  "gradient", "rollout", "schema", "marker",
};
constexpr std::size_t kBankSize = sizeof(kBank) / sizeof(kBank[0]);

const char* const kKeys[] = {"host", "port", "path", "mode", "level", "limit", "scale", "owner"};
constexpr std::size_t kKeySize = sizeof(kKeys) / sizeof(kKeys[0]);

enum class ElementKind { Placeholder, Code, KeyValue, Prose };

std::string pick_word(Rng& rng) {
    return kBank[rng.uniform(0, kBankSize - 1)];
}

std::string capitalized(std::string w) {
    if (!w.empty() && w[0] >= 'a' && w[0] <= 'z')
        w[0] = static_cast<char>(w[0] - 'a' + 'A');
    return w;
}

std::string gen_prose(Rng& rng, std::size_t w) {
    std::string s = capitalized(pick_word(rng));
    std::size_t since_break = 1;
    for (std::size_t i = 1; i < w; ++i) {
        if (since_break >= 7 && i + 1 < w && rng.uniform(0, 2) == 0) {
            s += ". " + capitalized(pick_word(rng));
            since_break = 1;
        } else {
            s += " " + pick_word(rng);
            ++since_break;
        }
    }
    s += ".";
    return s;
}

std::string gen_placeholder(Rng& rng, std::size_t w) {
    std::string s = capitalized(pick_word(rng)) + ":";
    for (std::size_t i = 1; i < w; ++i) {
        if (rng.uniform(0, 3) == 0)
            s += " {" + pick_word(rng) + "}";
        else
            s += " " + pick_word(rng);
    }
    return s;
}

std::string gen_code(Rng& rng, std::size_t w) {
    std::string s = "```";
    std::size_t remaining = w > 2 ? w - 2 : 1;
    while (remaining > 0) {
        std::size_t line_words = std::min<std::size_t>(remaining, 2 + rng.uniform(0, 1));
        s += "\n";
        for (std::size_t i = 0; i < line_words; ++i) {
            if (i > 0)
                s += " ";
            s += pick_word(rng);
        }
        s += ";";
        remaining -= line_words;
    }
    s += "\n```";
    return s;
}

std::string gen_keyvalue(Rng& rng, std::size_t w) {
    std::string s = pick_word(rng) + ":";
    std::size_t remaining = w > 1 ? w - 1 : 0;
    while (remaining >= 2) {
        s += "\n  ";
        s += kKeys[rng.uniform(0, kKeySize - 1)];
        s += ": " + pick_word(rng);
        remaining -= 2;
    }
    if (remaining == 1)
        s += " " + pick_word(rng);
    return s;
}

std::string gen_element(ElementKind kind, Rng& rng, std::size_t w) {
    switch (kind) {
    case ElementKind::Placeholder: return gen_placeholder(rng, w);
    case ElementKind::Code: return gen_code(rng, w);
    case ElementKind::KeyValue: return gen_keyvalue(rng, w);
    case ElementKind::Prose: return gen_prose(rng, w);
    }
    return gen_prose(rng, w);
}

std::vector<ElementKind> assign_kinds(const CorpusSpec& spec, std::size_t n_seg, Rng& rng) {
    std::vector<std::pair<ElementKind, double>> weighted;
    if (spec.weight_placeholder > 0.0)
        weighted.emplace_back(ElementKind::Placeholder, spec.weight_placeholder);
    if (spec.weight_code > 0.0)
        weighted.emplace_back(ElementKind::Code, spec.weight_code);
    if (spec.weight_keyvalue > 0.0)
        weighted.emplace_back(ElementKind::KeyValue, spec.weight_keyvalue);
    if (spec.weight_prose > 0.0)
        weighted.emplace_back(ElementKind::Prose, spec.weight_prose);

    double total = 0.0;
    for (const auto& [kind, weight] : weighted)
        total += weight;
    auto draw = [&] {
        double r = rng.uniform_real() * total;
        for (const auto& [kind, weight] : weighted) {
            r -= weight;
            if (r < 0.0)
                return kind;
        }
        return weighted.back().first;
    };

    std::vector<ElementKind> kinds;
    if (n_seg >= weighted.size())
        for (const auto& [kind, weight] : weighted)
            kinds.push_back(kind);
    while (kinds.size() < n_seg)
        kinds.push_back(draw());
    for (std::size_t i = kinds.size(); i > 1; --i)
        std::swap(kinds[i - 1], kinds[rng.uniform(0, i - 1)]);
    return kinds;
}

std::string padded(std::size_t v) {
    std::string s = std::to_string(v);
    return std::string(s.size() < 4 ? 4 - s.size() : 0, '0') + s;
}

std::optional<DatasetRecord> try_build_doc(const CorpusSpec& spec, std::size_t index,
                                           Rng& rng) {
    const std::size_t n_seg = rng.uniform(spec.min_segments, spec.max_segments);
    const std::size_t budget = rng.uniform(spec.min_words, spec.max_words);
    const std::size_t base = std::max<std::size_t>(3, budget / n_seg);

    std::vector<ElementKind> kinds = assign_kinds(spec, n_seg, rng);
    const auto& names = spec.labels.names();

    DatasetRecord rec;
    rec.doc.id = "doc-" + padded(index);
    std::set<std::u32string> seen;
    std::string prev_label;
    for (std::size_t i = 0; i < n_seg; ++i) {
        std::size_t jitter = base / 3;
        std::size_t w = base + rng.uniform(0, 2 * jitter) - jitter;
        w = std::max<std::size_t>(3, w);

        std::string text = gen_element(kinds[i], rng, w);
        if (i > 0)
            text = (rng.uniform(0, 2) == 0 ? "\n" : "\n\n") + text;
        std::u32string u32 = utf8_decode(text);
        if (!seen.insert(u32).second)
            return std::nullopt; // duplicate segment text, retry the doc

        std::string label;
        if (prev_label.empty()) {
            label = names[rng.uniform(0, names.size() - 1)];
        } else {
            std::size_t idx = rng.uniform(0, names.size() - 2);
            label = names[idx] == prev_label ? names[names.size() - 1] : names[idx];
        }
        prev_label = label;

        std::size_t start = rec.doc.text.size();
        rec.doc.text += u32;
        rec.gold.segments.push_back({std::move(label), Span(start, rec.doc.text.size())});
    }

    ValidationReport rep = validate_segmentation(rec.doc, rec.gold, &spec.labels);
    if (!rep.ok || !rep.lossless)
        return std::nullopt;

    // every output pattern must be able to express this document exactly
    for (OutputPattern pattern :
         {OutputPattern::Start, OutputPattern::End, OutputPattern::StartEnd}) {
        Rng pr = rng.fork(kPatTag, static_cast<std::uint64_t>(pattern));
        try {
            BoundaryOutput out = make_targets(rec.doc, rec.gold, pattern, pr);
            ReconstructionResult recon = reconstruct(rec.doc, out);
            if (!recon.discarded.empty() || !(recon.segments == rec.gold))
                return std::nullopt;
        } catch (const TargetSynthesisFailure&) {
            return std::nullopt;
        }
    }
    return rec;
}

} // namespace

void CorpusSpec::validate() const {
    if (n_docs < 1)
        throw SpecInfeasible("n_docs must be at least 1");
    if (min_words < 1 || min_words > max_words)
        throw SpecInfeasible("word bounds must satisfy 1 <= min_words <= max_words");
    if (min_segments < 1 || min_segments > max_segments)
        throw SpecInfeasible("segment bounds must satisfy 1 <= min_segments <= max_segments");
    if (min_words < 3 * max_segments)
        throw SpecInfeasible("word budget too small: need min_words >= 3 * max_segments");
    for (double w : {weight_placeholder, weight_code, weight_keyvalue, weight_prose})
        if (w < 0.0)
            throw SpecInfeasible("element weights must be non-negative");
    if (weight_placeholder + weight_code + weight_keyvalue + weight_prose <= 0.0)
        throw SpecInfeasible("at least one element weight must be positive");
}

std::vector<DatasetRecord> generate_synthetic_corpus(const CorpusSpec& spec) {
    spec.validate();
    Rng root(spec.seed);
    std::vector<DatasetRecord> out;
    out.reserve(spec.n_docs);
    for (std::size_t d = 0; d < spec.n_docs; ++d) {
        std::optional<DatasetRecord> rec;
        for (std::size_t attempt = 0; attempt < 64 && !rec; ++attempt) {
            Rng rng = root.fork(kDocTag, d * 64 + attempt);
            rec = try_build_doc(spec, d, rng);
        }
        if (!rec)
            throw SpecInfeasible("could not generate document " + std::to_string(d) +
                                 " after 64 attempts");
        out.push_back(std::move(*rec));
    }
    return out;
}

} // namespace segbound
