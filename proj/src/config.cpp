#include "segbound/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "segbound/errors.hpp"

namespace segbound {

namespace {

std::string trim_bytes(std::string_view s) {
    std::string_view t = trim(s);
    return std::string(t);
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        unsigned long long v = std::stoull(value, &used);
        if (used != value.size())
            throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw SchemaViolation(key + ": expected a non-negative integer, got \"" + value + "\"");
    }
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        double v = std::stod(value, &used);
        if (used != value.size())
            throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw SchemaViolation(key + ": expected a number, got \"" + value + "\"");
    }
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes" || value == "on")
        return true;
    if (value == "false" || value == "0" || value == "no" || value == "off")
        return false;
    throw SchemaViolation(key + ": expected a boolean, got \"" + value + "\"");
}

void reject_unknown(const std::map<std::string, std::string>& kv,
                    const std::set<std::string>& known) {
    for (const auto& [key, value] : kv)
        if (known.count(key) == 0)
            throw SchemaViolation("unknown key: " + key);
}

} // namespace

std::map<std::string, std::string> parse_kv(std::string_view text) {
    std::map<std::string, std::string> kv;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t eol = text.find('\n', pos);
        std::string_view line =
            text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
        ++line_no;

        std::size_t hash = line.find('#');
        if (hash != std::string_view::npos)
            line = line.substr(0, hash);
        if (trim(line).empty())
            continue;
        std::size_t eq = line.find('=');
        if (eq == std::string_view::npos)
            throw SchemaViolation("line " + std::to_string(line_no) + ": expected key = value");
        std::string key = trim_bytes(line.substr(0, eq));
        std::string value = trim_bytes(line.substr(eq + 1));
        if (key.empty())
            throw SchemaViolation("line " + std::to_string(line_no) + ": empty key");
        if (!kv.emplace(key, value).second)
            throw SchemaViolation("line " + std::to_string(line_no) + ": duplicate key " + key);
    }
    return kv;
}

std::map<std::string, std::string> load_kv_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw IoFailure("cannot open: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_kv(buf.str());
}

RolloutConfig rollout_config_from_kv(const std::map<std::string, std::string>& kv) {
    static const std::set<std::string> known = {
        "m",          "temperature",    "k",           "batch_size", "enable_intermediate",
        "perturb_steps", "medium_mode", "end_marker",  "pattern",    "seed",
    };
    reject_unknown(kv, known);

    RolloutConfig cfg;
    if (auto it = kv.find("m"); it != kv.end())
        cfg.m = parse_u64(it->first, it->second);
    if (auto it = kv.find("temperature"); it != kv.end())
        cfg.temperature = parse_double(it->first, it->second);
    if (auto it = kv.find("k"); it != kv.end())
        cfg.k = parse_u64(it->first, it->second);
    if (auto it = kv.find("batch_size"); it != kv.end())
        cfg.batch_size = parse_u64(it->first, it->second);
    if (auto it = kv.find("enable_intermediate"); it != kv.end())
        cfg.enable_intermediate = parse_bool(it->first, it->second);
    if (auto it = kv.find("perturb_steps"); it != kv.end())
        cfg.perturb_steps = static_cast<int>(parse_u64(it->first, it->second));
    if (auto it = kv.find("medium_mode"); it != kv.end()) {
        if (it->second == "medium")
            cfg.medium_mode = MediumMode::Medium;
        else if (it->second == "random")
            cfg.medium_mode = MediumMode::Random;
        else
            throw SchemaViolation("medium_mode: expected medium or random, got \"" + it->second +
                                  "\"");
    }
    if (auto it = kv.find("end_marker"); it != kv.end())
        cfg.end_marker = it->second;
    if (auto it = kv.find("pattern"); it != kv.end()) {
        std::optional<OutputPattern> p = pattern_from_string(it->second);
        if (!p)
            throw SchemaViolation("pattern: expected start, end or startend, got \"" + it->second +
                                  "\"");
        cfg.pattern = *p;
    }
    if (auto it = kv.find("seed"); it != kv.end())
        cfg.seed = parse_u64(it->first, it->second);
    return cfg;
}

CorpusSpec corpus_spec_from_kv(const std::map<std::string, std::string>& kv) {
    static const std::set<std::string> known = {
        "n_docs",       "min_words",        "max_words",   "min_segments",
        "max_segments", "labels",           "weight_placeholder", "weight_code",
        "weight_keyvalue", "weight_prose",  "seed",
    };
    reject_unknown(kv, known);

    CorpusSpec spec;
    if (auto it = kv.find("n_docs"); it != kv.end())
        spec.n_docs = parse_u64(it->first, it->second);
    if (auto it = kv.find("min_words"); it != kv.end())
        spec.min_words = parse_u64(it->first, it->second);
    if (auto it = kv.find("max_words"); it != kv.end())
        spec.max_words = parse_u64(it->first, it->second);
    if (auto it = kv.find("min_segments"); it != kv.end())
        spec.min_segments = parse_u64(it->first, it->second);
    if (auto it = kv.find("max_segments"); it != kv.end())
        spec.max_segments = parse_u64(it->first, it->second);
    if (auto it = kv.find("labels"); it != kv.end()) {
        std::vector<std::string> names;
        std::string_view rest = it->second;
        while (!rest.empty()) {
            std::size_t comma = rest.find(',');
            names.push_back(trim_bytes(rest.substr(0, comma)));
            rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
        }
        spec.labels = LabelSet(std::move(names));
    }
    if (auto it = kv.find("weight_placeholder"); it != kv.end())
        spec.weight_placeholder = parse_double(it->first, it->second);
    if (auto it = kv.find("weight_code"); it != kv.end())
        spec.weight_code = parse_double(it->first, it->second);
    if (auto it = kv.find("weight_keyvalue"); it != kv.end())
        spec.weight_keyvalue = parse_double(it->first, it->second);
    if (auto it = kv.find("weight_prose"); it != kv.end())
        spec.weight_prose = parse_double(it->first, it->second);
    if (auto it = kv.find("seed"); it != kv.end())
        spec.seed = parse_u64(it->first, it->second);
    return spec;
}

} // namespace segbound
