#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "segbound/dataset.hpp"
#include "segbound/rollout.hpp"

namespace segbound {

/// Flat key-value config text: `key = value` lines, '#' comments, blank
/// lines ignored. Unknown keys are SchemaViolations so typos fail loudly.
std::map<std::string, std::string> parse_kv(std::string_view text);
std::map<std::string, std::string> load_kv_file(const std::filesystem::path& path);

/// Keys: m, temperature, k, batch_size, enable_intermediate, perturb_steps,
/// medium_mode (medium|random), end_marker, pattern (start|end|startend), seed.
RolloutConfig rollout_config_from_kv(const std::map<std::string, std::string>& kv);

/// Keys: n_docs, min_words, max_words, min_segments, max_segments,
/// labels (comma separated), weight_placeholder, weight_code,
/// weight_keyvalue, weight_prose, seed.
CorpusSpec corpus_spec_from_kv(const std::map<std::string, std::string>& kv);

} // namespace segbound
