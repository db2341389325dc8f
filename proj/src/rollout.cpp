#include "segbound/rollout.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>

#include <json.hpp>

#include "segbound/errors.hpp"

namespace segbound {

namespace {

constexpr std::uint64_t kMediumTag = 0x6d656469756dULL; // "medium"
constexpr std::uint64_t kStepTag = 0x73746570ULL;       // "step"

void sort_group(CandidateGroup& g) {
    std::vector<std::size_t> order(g.candidates.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        if (g.candidates[x].score.reward != g.candidates[y].score.reward)
            return g.candidates[x].score.reward > g.candidates[y].score.reward;
        return g.rollout_index[x] < g.rollout_index[y];
    });
    CandidateGroup next;
    next.doc_id = std::move(g.doc_id);
    next.candidates.reserve(order.size());
    next.rollout_index.reserve(order.size());
    next.diagnostics.reserve(order.size());
    for (std::size_t idx : order) {
        next.candidates.push_back(std::move(g.candidates[idx]));
        next.rollout_index.push_back(g.rollout_index[idx]);
        next.diagnostics.push_back(std::move(g.diagnostics[idx]));
    }
    g = std::move(next);
}

} // namespace

void RolloutConfig::validate() const {
    if (m < 2)
        throw Error("group size must be at least 2");
    if (batch_size < 1)
        throw Error("batch size must be at least 1");
    if (!(temperature > 0.0))
        throw Error("temperature must be positive");
    if (perturb_steps != 1 && perturb_steps != 2)
        throw Error("perturb_steps must be 1 or 2");
    if (enable_intermediate && pattern != OutputPattern::Start)
        throw Error("intermediate candidates require the start pattern");
}

CandidateGroup build_group(const Document& doc, const Segmentation& gold,
                           const std::vector<std::string>& raw_outputs,
                           const LabelSet& labels, const RolloutConfig& config) {
    CandidateGroup g;
    g.doc_id = doc.id;
    for (std::size_t i = 0; i < raw_outputs.size(); ++i) {
        std::string trunc = truncate_at_end_marker(raw_outputs[i], config.end_marker);
        LenientParse lp = parse_lenient(trunc, labels, config.pattern);
        std::string diag;
        for (const ParseDiagnostic& d : lp.dropped) {
            if (!diag.empty())
                diag += "; ";
            diag += "line " + std::to_string(d.line) + ": " + d.reason;
        }
        g.candidates.push_back(make_candidate(doc, gold, std::move(lp.output)));
        g.rollout_index.push_back(i);
        g.diagnostics.push_back(std::move(diag));
    }
    sort_group(g);
    return g;
}

std::size_t select_medium(const CandidateGroup& group) {
    if (group.candidates.empty())
        return 0;
    return (group.candidates.size() - 1) / 2; // 1-based ceil(g/2)
}

std::size_t select_medium(const CandidateGroup& group, MediumMode mode, Rng& rng) {
    if (group.candidates.empty())
        return 0;
    if (mode == MediumMode::Random)
        return static_cast<std::size_t>(rng.uniform(0, group.candidates.size() - 1));
    return select_medium(group);
}

std::vector<ReplacementEvent> apply_selective_replacement(
    std::vector<CandidateGroup>& groups, const std::vector<const Document*>& docs,
    const std::vector<const Segmentation*>& golds, const LabelSet& labels,
    const RolloutConfig& config, const Rng& step_rng) {
    std::vector<ReplacementEvent> events;
    if (!config.enable_intermediate)
        return events;

    struct Pick {
        double gain = 0.0;
        std::size_t group = 0;
        std::size_t slot = 0;
        Candidate candidate;
    };
    std::vector<Pick> picks;
    for (std::size_t i = 0; i < groups.size(); ++i) {
        if (groups[i].candidates.empty())
            continue;
        Rng r = step_rng.fork(kMediumTag, i);
        std::size_t slot = select_medium(groups[i], config.medium_mode, r);
        BestIntermediate bi = best_intermediate(*docs[i], *golds[i],
                                                groups[i].candidates[slot], labels,
                                                config.perturb_steps);
        if (!bi.pool_empty && bi.gain > 0.0)
            picks.push_back({bi.gain, i, slot, std::move(bi.candidate)});
    }
    std::stable_sort(picks.begin(), picks.end(), [&](const Pick& x, const Pick& y) {
        if (x.gain != y.gain)
            return x.gain > y.gain;
        return groups[x.group].doc_id < groups[y.group].doc_id;
    });
    if (picks.size() > config.k)
        picks.resize(config.k);

    for (Pick& pick : picks) {
        CandidateGroup& g = groups[pick.group];
        ReplacementEvent ev;
        ev.doc_id = g.doc_id;
        ev.slot = pick.slot;
        ev.gain = pick.gain;
        ev.old_reward = g.candidates[pick.slot].score.reward;
        ev.new_reward = pick.candidate.score.reward;
        g.candidates[pick.slot] = std::move(pick.candidate);
        sort_group(g);
        events.push_back(std::move(ev));
    }
    return events;
}

std::vector<double> compute_advantages(const CandidateGroup& group) {
    std::vector<double> adv(group.candidates.size(), 0.0);
    if (group.candidates.empty())
        return adv;
    double mean = 0.0;
    for (const Candidate& c : group.candidates)
        mean += c.score.reward;
    mean /= static_cast<double>(group.candidates.size());
    for (std::size_t i = 0; i < group.candidates.size(); ++i)
        adv[i] = group.candidates[i].score.reward - mean;
    return adv;
}

std::string to_jsonl(const SimulationReport& report) {
    std::string out;
    for (const StepStats& s : report.steps) {
        nlohmann::ordered_json row;
        row["step"] = s.step;
        row["mean_reward"] = s.mean_reward;
        row["reward_std"] = s.reward_std;
        row["replacements"] = s.replacements;
        nlohmann::ordered_json best = nlohmann::ordered_json::object();
        for (const auto& [id, r] : s.doc_best)
            best[id] = r;
        row["doc_best"] = std::move(best);
        out += row.dump();
        out.push_back('\n');
    }
    nlohmann::ordered_json tail;
    tail["final_best_mean"] = report.final_best_mean;
    tail["total_replacements"] = report.total_replacements;
    nlohmann::ordered_json best = nlohmann::ordered_json::object();
    for (const auto& [id, r] : report.final_best)
        best[id] = r;
    tail["final_best"] = std::move(best);
    out += tail.dump();
    out.push_back('\n');
    return out;
}

SimulationReport simulate(const std::vector<DatasetRecord>& data, Policy& policy,
                          const RolloutConfig& config, std::size_t iterations,
                          const SimulateOptions& options) {
    config.validate();
    if (data.empty())
        throw Error("dataset is empty");

    const LabelSet labels = labels_from_data(data);
    const std::size_t n = data.size();
    const std::size_t per_step = std::min(config.batch_size, n);
    Rng root(config.seed);

    SimulationReport report;
    for (std::size_t step = 1; step <= iterations; ++step) {
        std::vector<const DatasetRecord*> batch(per_step);
        for (std::size_t i = 0; i < per_step; ++i)
            batch[i] = &data[((step - 1) * config.batch_size + i) % n];

        // generation is serial: policies may carry per-call state
        std::vector<std::vector<std::string>> raw(per_step);
        for (std::size_t i = 0; i < per_step; ++i)
            raw[i] = policy.generate(batch[i]->doc, config.m, config.temperature);

        std::vector<CandidateGroup> groups(per_step);
        if (options.parallel && per_step > 1) {
            std::vector<std::future<CandidateGroup>> futs;
            futs.reserve(per_step);
            for (std::size_t i = 0; i < per_step; ++i)
                futs.push_back(std::async(std::launch::async, [&, i] {
                    return build_group(batch[i]->doc, batch[i]->gold, raw[i], labels, config);
                }));
            for (std::size_t i = 0; i < per_step; ++i)
                groups[i] = futs[i].get();
        } else {
            for (std::size_t i = 0; i < per_step; ++i)
                groups[i] = build_group(batch[i]->doc, batch[i]->gold, raw[i], labels, config);
        }

        std::vector<const Document*> docs(per_step);
        std::vector<const Segmentation*> golds(per_step);
        for (std::size_t i = 0; i < per_step; ++i) {
            docs[i] = &batch[i]->doc;
            golds[i] = &batch[i]->gold;
        }
        Rng step_rng = root.fork(kStepTag, step);
        std::vector<ReplacementEvent> events =
            apply_selective_replacement(groups, docs, golds, labels, config, step_rng);

        StepStats stats;
        stats.step = step;
        stats.replacements = events.size();
        double sum = 0.0;
        std::size_t count = 0;
        double std_sum = 0.0;
        for (const CandidateGroup& g : groups) {
            double gsum = 0.0;
            for (const Candidate& c : g.candidates) {
                gsum += c.score.reward;
                sum += c.score.reward;
                ++count;
            }
            if (!g.candidates.empty()) {
                double gmean = gsum / static_cast<double>(g.candidates.size());
                double var = 0.0;
                for (const Candidate& c : g.candidates) {
                    double d = c.score.reward - gmean;
                    var += d * d;
                }
                std_sum += std::sqrt(var / static_cast<double>(g.candidates.size()));
            }
            double best = g.candidates.empty() ? 0.0 : g.candidates.front().score.reward;
            stats.doc_best.emplace_back(g.doc_id, best);
            auto it = report.final_best.find(g.doc_id);
            if (it == report.final_best.end())
                report.final_best[g.doc_id] = best;
            else
                it->second = std::max(it->second, best);
        }
        stats.mean_reward = count > 0 ? sum / static_cast<double>(count) : 0.0;
        stats.reward_std = std_sum / static_cast<double>(per_step);
        report.total_replacements += events.size();

        TrainingBatch tb;
        tb.step = step;
        tb.replacements = std::move(events);
        tb.groups.reserve(per_step);
        for (CandidateGroup& g : groups) {
            GroupTraining gt;
            gt.advantages = compute_advantages(g);
            gt.group = std::move(g);
            tb.groups.push_back(std::move(gt));
        }
        if (options.on_batch)
            options.on_batch(tb);
        for (const GroupTraining& gt : tb.groups) {
            if (gt.group.candidates.empty())
                continue;
            PolicyFeedback fb;
            fb.doc_id = gt.group.doc_id;
            fb.best_output = gt.group.candidates.front().output;
            fb.best_reward = gt.group.candidates.front().score.reward;
            policy.update(fb);
        }
        report.steps.push_back(std::move(stats));
    }

    double best_sum = 0.0;
    for (const auto& [id, r] : report.final_best)
        best_sum += r;
    report.final_best_mean =
        report.final_best.empty() ? 0.0 : best_sum / static_cast<double>(report.final_best.size());
    return report;
}

} // namespace segbound
