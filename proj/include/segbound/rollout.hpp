#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "segbound/dataset.hpp"
#include "segbound/perturb.hpp"
#include "segbound/rng.hpp"

namespace segbound {

/// Feedback handed to Policy::update after each step: the best candidate of
/// the document's group, post replacement.
struct PolicyFeedback {
    std::string doc_id;
    BoundaryOutput best_output;
    double best_reward = 0.0;
};

/// Candidate generation interface. generate() must return exactly m raw
/// texts and be deterministic given the policy's own seed state; instances
/// are invoked from one logical context at a time.
class Policy {
public:
    virtual ~Policy() = default;
    virtual std::vector<std::string> generate(const Document& doc, std::size_t m,
                                              double temperature) = 0;
    virtual void update(const PolicyFeedback&) {}
};

enum class MediumMode {
    Medium, // descending-sorted position m/2 (ceil(m/2) when odd), 1-based
    Random, // uniform draw; the no-middle ablation
};

struct RolloutConfig {
    std::size_t m = 4;        // group size
    double temperature = 1.2;
    std::size_t k = 2;        // max replacements per batch
    std::size_t batch_size = 6;
    bool enable_intermediate = true;
    int perturb_steps = 1;    // 1 or 2
    MediumMode medium_mode = MediumMode::Medium;
    std::string end_marker = "<eos>";
    OutputPattern pattern = OutputPattern::Start;
    std::uint64_t seed = 0;

    void validate() const; // throws Error on out-of-range fields
};

/// One document's scored candidates, sorted by non-increasing reward; ties
/// keep original rollout order. rollout_index[i] is candidates[i]'s position
/// in the raw generation; diagnostics records dropped lines per sample.
struct CandidateGroup {
    std::string doc_id;
    std::vector<Candidate> candidates;
    std::vector<std::size_t> rollout_index;
    std::vector<std::string> diagnostics;
};

/// Truncate at the end marker, parse leniently, reconstruct and score each
/// raw output. Samples with no parseable line become reward-0 placeholders
/// so the group keeps exactly one candidate per raw output.
CandidateGroup build_group(const Document& doc, const Segmentation& gold,
                           const std::vector<std::string>& raw_outputs,
                           const LabelSet& labels, const RolloutConfig& config);

/// Index of the medium candidate (group sorted descending).
std::size_t select_medium(const CandidateGroup& group);
/// Mode-aware variant; Random draws from rng.
std::size_t select_medium(const CandidateGroup& group, MediumMode mode, Rng& rng);

struct ReplacementEvent {
    std::string doc_id;
    std::size_t slot = 0; // sorted position that was replaced
    double gain = 0.0;
    double old_reward = 0.0;
    double new_reward = 0.0;
};

/// Build the best intermediate candidate from each group's medium candidate,
/// keep the top-k by gain among those with gain > 0 (ties: doc-id order),
/// swap them in and re-sort. Identity when enable_intermediate is false.
std::vector<ReplacementEvent> apply_selective_replacement(
    std::vector<CandidateGroup>& groups, const std::vector<const Document*>& docs,
    const std::vector<const Segmentation*>& golds, const LabelSet& labels,
    const RolloutConfig& config, const Rng& step_rng);

/// Group-relative advantages: reward minus group mean. No deviation scaling.
std::vector<double> compute_advantages(const CandidateGroup& group);

struct GroupTraining {
    CandidateGroup group;
    std::vector<double> advantages;
};

struct TrainingBatch {
    std::size_t step = 0; // 1-based
    std::vector<GroupTraining> groups;
    std::vector<ReplacementEvent> replacements;
};

struct StepStats {
    std::size_t step = 0;
    double mean_reward = 0.0;
    double reward_std = 0.0; // mean within-group population std
    std::size_t replacements = 0;
    std::vector<std::pair<std::string, double>> doc_best;
};

struct SimulationReport {
    std::vector<StepStats> steps;
    std::map<std::string, double> final_best; // running best per document
    double final_best_mean = 0.0;
    std::size_t total_replacements = 0;
};

/// Render the report as JSONL: one object per step plus a summary line.
std::string to_jsonl(const SimulationReport& report);

struct SimulateOptions {
    bool parallel = false; // group scoring fan-out; results are identical
    std::function<void(const TrainingBatch&)> on_batch;
};

/// Deterministic training-loop mock: batches cycle through the dataset;
/// each step generates m candidates per document, builds groups, optionally
/// swaps in intermediate candidates, computes advantages and feeds the best
/// candidate back to the policy. Reproducible from (config.seed, config)
/// regardless of scheduling.
SimulationReport simulate(const std::vector<DatasetRecord>& data, Policy& policy,
                          const RolloutConfig& config, std::size_t iterations,
                          const SimulateOptions& options = {});

} // namespace segbound
