#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "segbound/rollout.hpp"

namespace segbound {

/// Hill-climbing oracle surrogate: starts from synthesized targets for each
/// document's gold, emits the kept best-so-far candidate mutated by
/// j ~ uniform[1, max(1, round(noise * temperature))] random boundary edits
/// per sample (j = 0 when noise is 0, so every sample is exact), and
/// update() keeps the highest-reward candidate per document.
/// Start pattern only when noise > 0.
class NoisyOraclePolicy : public Policy {
public:
    NoisyOraclePolicy(const std::vector<DatasetRecord>& data, const LabelSet& labels,
                      OutputPattern pattern, double noise, std::uint64_t seed);

    std::vector<std::string> generate(const Document& doc, std::size_t m,
                                      double temperature) override;
    void update(const PolicyFeedback& feedback) override;

private:
    struct DocState {
        BoundaryOutput best;
        double best_reward = 0.0;
        std::uint64_t calls = 0;
    };

    std::map<std::string, const DatasetRecord*> records_;
    std::map<std::string, DocState> state_;
    LabelSet labels_;
    OutputPattern pattern_;
    double noise_;
    std::uint64_t seed_;
};

/// Replays recorded raw outputs. File format: JSONL {"id","outputs":[...]};
/// each generate() call consumes the next record for that document id.
class ReplayPolicy : public Policy {
public:
    explicit ReplayPolicy(const std::filesystem::path& path);

    std::vector<std::string> generate(const Document& doc, std::size_t m,
                                      double temperature) override;

private:
    std::map<std::string, std::vector<std::vector<std::string>>> outputs_;
    std::map<std::string, std::size_t> next_;
};

/// Emits the same fixed outputs for a document on every call.
class StaticPolicy : public Policy {
public:
    explicit StaticPolicy(std::map<std::string, std::vector<std::string>> outputs);

    std::vector<std::string> generate(const Document& doc, std::size_t m,
                                      double temperature) override;

private:
    std::map<std::string, std::vector<std::string>> outputs_;
};

} // namespace segbound
