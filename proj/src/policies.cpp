#include "segbound/policies.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "segbound/errors.hpp"

namespace segbound {

namespace {

constexpr std::uint64_t kInitTag = 0x696e6974ULL; // "init"
constexpr std::uint64_t kGenTag = 0x67656eULL;    // "gen"

} // namespace

NoisyOraclePolicy::NoisyOraclePolicy(const std::vector<DatasetRecord>& data,
                                     const LabelSet& labels, OutputPattern pattern,
                                     double noise, std::uint64_t seed)
    : labels_(labels), pattern_(pattern), noise_(noise), seed_(seed) {
    if (noise < 0.0 || !std::isfinite(noise))
        throw Error("noise must be a finite non-negative number");
    if (noise > 0.0 && pattern != OutputPattern::Start)
        throw Error("noisy generation edits boundaries and needs the start pattern");
    for (const DatasetRecord& rec : data)
        records_[rec.doc.id] = &rec; // data must outlive the policy
}

std::vector<std::string> NoisyOraclePolicy::generate(const Document& doc, std::size_t m,
                                                     double temperature) {
    auto rit = records_.find(doc.id);
    if (rit == records_.end())
        throw Error("unknown document: " + doc.id);
    const DatasetRecord& rec = *rit->second;

    DocState& st = state_[doc.id];
    if (st.best.items.empty()) {
        Rng init_rng = Rng(seed_).fork(stable_hash(doc.id), kInitTag);
        st.best = make_targets(rec.doc, rec.gold, pattern_, init_rng);
        Candidate c = make_candidate(rec.doc, rec.gold, st.best);
        st.best_reward = c.score.reward;
    }

    std::uint64_t edit_hi = 1;
    if (noise_ > 0.0)
        edit_hi = std::max<std::uint64_t>(
            1, static_cast<std::uint64_t>(std::llround(noise_ * temperature)));

    std::vector<std::string> out;
    out.reserve(m);
    for (std::size_t c = 0; c < m; ++c) {
        Rng rng = Rng(seed_).fork(stable_hash(doc.id), st.calls).fork(kGenTag, c);
        BoundaryOutput cur = st.best;
        ReconstructionResult rec_cur = reconstruct(rec.doc, cur);
        std::uint64_t edits = noise_ > 0.0 ? rng.uniform(1, edit_hi) : 0;
        for (std::uint64_t e = 0; e < edits; ++e) {
            std::vector<Perturbation> pool =
                structural_perturbations(rec.doc, rec_cur, labels_);
            if (pool.empty())
                break;
            bool applied = false;
            for (int attempt = 0; attempt < 8 && !applied; ++attempt) {
                const Perturbation& p =
                    pool[static_cast<std::size_t>(rng.uniform(0, pool.size() - 1))];
                std::optional<EditResult> er = try_perturb(rec.doc, cur, rec_cur, p, labels_);
                if (er) {
                    cur = std::move(er->output);
                    rec_cur = std::move(er->recon);
                    applied = true;
                }
            }
            if (!applied)
                break;
        }
        out.push_back(serialize(cur));
    }
    ++st.calls;
    return out;
}

void NoisyOraclePolicy::update(const PolicyFeedback& feedback) {
    if (feedback.best_output.items.empty())
        return;
    DocState& st = state_[feedback.doc_id];
    if (feedback.best_reward > st.best_reward) {
        st.best = feedback.best_output;
        st.best_reward = feedback.best_reward;
    }
}

ReplayPolicy::ReplayPolicy(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw IoFailure("cannot open replay file: " + path.string());
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        nlohmann::json row;
        try {
            row = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw SchemaViolation("line " + std::to_string(line_no) + ": " + e.what());
        }
        if (!row.is_object() || !row.contains("id") || !row["id"].is_string() ||
            !row.contains("outputs") || !row["outputs"].is_array())
            throw SchemaViolation("line " + std::to_string(line_no) +
                                  ": expected {\"id\",\"outputs\"}");
        std::vector<std::string> outs;
        for (const auto& v : row["outputs"]) {
            if (!v.is_string())
                throw SchemaViolation("line " + std::to_string(line_no) +
                                      ": outputs must be strings");
            outs.push_back(v.get<std::string>());
        }
        outputs_[row["id"].get<std::string>()].push_back(std::move(outs));
    }
}

std::vector<std::string> ReplayPolicy::generate(const Document& doc, std::size_t m,
                                                double temperature) {
    (void)temperature;
    auto it = outputs_.find(doc.id);
    if (it == outputs_.end())
        throw Error("no replay outputs for document: " + doc.id);
    std::size_t& next = next_[doc.id];
    if (next >= it->second.size())
        throw Error("replay outputs exhausted for document: " + doc.id);
    const std::vector<std::string>& rec = it->second[next];
    if (rec.size() != m)
        throw Error("replay record for " + doc.id + " has " + std::to_string(rec.size()) +
                    " outputs, expected " + std::to_string(m));
    ++next;
    return rec;
}

StaticPolicy::StaticPolicy(std::map<std::string, std::vector<std::string>> outputs)
    : outputs_(std::move(outputs)) {}

std::vector<std::string> StaticPolicy::generate(const Document& doc, std::size_t m,
                                                double temperature) {
    (void)temperature;
    auto it = outputs_.find(doc.id);
    if (it == outputs_.end())
        throw Error("no outputs for document: " + doc.id);
    if (it->second.size() < m)
        throw Error("only " + std::to_string(it->second.size()) + " outputs for " + doc.id +
                    ", need " + std::to_string(m));
    return {it->second.begin(), it->second.begin() + static_cast<std::ptrdiff_t>(m)};
}

} // namespace segbound
