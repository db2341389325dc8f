#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "segbound/config.hpp"
#include "segbound/dataset.hpp"
#include "segbound/errors.hpp"
#include "segbound/metrics.hpp"
#include "segbound/perturb.hpp"
#include "segbound/policies.hpp"
#include "segbound/rollout.hpp"
#include "segbound/text.hpp"

using nlohmann::json;
using nlohmann::ordered_json;
using namespace segbound;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoFailure("cannot open: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

LabelSet labels_from_csv(const std::string& csv) {
    std::vector<std::string> names;
    std::string_view rest = csv;
    while (!rest.empty()) {
        std::size_t comma = rest.find(',');
        names.push_back(std::string(trim(rest.substr(0, comma))));
        rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    }
    return LabelSet(std::move(names));
}

// table-style percentage with one decimal
double pct(double v) {
    return std::round(v * 1000.0) / 10.0;
}

OutputPattern pattern_of(const std::string& s) {
    std::optional<OutputPattern> p = pattern_from_string(s);
    if (!p)
        throw SchemaViolation("pattern: expected start, end or startend, got \"" + s + "\"");
    return *p;
}

ordered_json segments_json(const Segmentation& seg) {
    ordered_json arr = ordered_json::array();
    for (const Segment& s : seg.segments) {
        ordered_json el;
        el["label"] = s.label;
        el["start"] = s.span.start();
        el["end"] = s.span.end();
        arr.push_back(std::move(el));
    }
    return arr;
}

struct ReconstructArgs {
    std::string pattern;
    std::string doc_path;
    std::string boundaries_path;
    std::string labels_csv;
};

// A boundaries file is either raw wire text for a single document or JSONL
// rows {"id","output"} keyed to the document file.
bool looks_like_jsonl(const std::string& text) {
    std::size_t pos = text.find_first_not_of(" \t\r\n");
    if (pos == std::string::npos || text[pos] != '{')
        return false;
    std::size_t eol = text.find('\n', pos);
    std::string first = text.substr(pos, eol == std::string::npos ? std::string::npos : eol - pos);
    try {
        json row = json::parse(first);
        return row.is_object() && row.contains("id") && row.contains("output");
    } catch (const json::exception&) {
        return false;
    }
}

std::string run_reconstruct(const ReconstructArgs& args) {
    OutputPattern pattern = pattern_of(args.pattern);
    LabelSet labels =
        args.labels_csv.empty() ? LabelSet::default_taxonomy() : labels_from_csv(args.labels_csv);
    std::vector<Document> docs = load_documents(args.doc_path);
    std::string raw = read_file(args.boundaries_path);

    std::map<std::string, std::string> by_id;
    if (looks_like_jsonl(raw)) {
        std::istringstream in(raw);
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.find_first_not_of(" \t\r") == std::string::npos)
                continue;
            json row;
            try {
                row = json::parse(line);
            } catch (const json::exception& e) {
                throw SchemaViolation("line " + std::to_string(line_no) + ": " + e.what());
            }
            if (!row.is_object() || !row.contains("id") || !row["id"].is_string() ||
                !row.contains("output") || !row["output"].is_string())
                throw SchemaViolation("line " + std::to_string(line_no) +
                                      ": expected {\"id\",\"output\"}");
            if (!by_id.emplace(row["id"].get<std::string>(), row["output"].get<std::string>())
                     .second)
                throw SchemaViolation("line " + std::to_string(line_no) + ": duplicate id " +
                                      row["id"].get<std::string>());
        }
    } else {
        if (docs.size() != 1)
            throw SchemaViolation("raw boundary text needs a single-document file; give JSONL "
                                  "{\"id\",\"output\"} rows for " +
                                  std::to_string(docs.size()) + " documents");
        by_id[docs[0].id] = raw;
    }

    std::string out;
    for (const Document& doc : docs) {
        auto it = by_id.find(doc.id);
        if (it == by_id.end())
            throw SchemaViolation("no boundary output for document " + doc.id);
        BoundaryOutput parsed = parse(it->second, labels, pattern);
        ReconstructionResult recon = reconstruct(doc, parsed);
        ordered_json row;
        row["id"] = doc.id;
        row["segments"] = segments_json(recon.segments);
        ordered_json disc = ordered_json::array();
        for (const Discard& d : recon.discarded) {
            ordered_json el;
            el["item"] = d.item_index;
            el["reason"] = d.reason;
            disc.push_back(std::move(el));
        }
        row["discarded"] = std::move(disc);
        out += row.dump();
        out.push_back('\n');
        by_id.erase(it);
    }
    if (!by_id.empty())
        throw SchemaViolation("boundary output for unknown document " + by_id.begin()->first);
    return out;
}

struct ScoreArgs {
    std::string pred_path;
    std::string gold_path;
    std::optional<std::size_t> window;
    bool parallel = false;
};

std::string run_score(const ScoreArgs& args) {
    std::vector<DatasetRecord> golds = load_dataset(args.gold_path);
    std::vector<Prediction> preds = load_predictions(args.pred_path);

    std::map<std::string, const Prediction*> by_id;
    for (const Prediction& p : preds)
        by_id[p.id] = &p;
    std::vector<const Prediction*> matched(golds.size());
    for (std::size_t i = 0; i < golds.size(); ++i) {
        auto it = by_id.find(golds[i].doc.id);
        if (it == by_id.end())
            throw SchemaViolation("no prediction for document " + golds[i].doc.id);
        matched[i] = it->second;
        by_id.erase(it);
    }
    if (!by_id.empty())
        throw SchemaViolation("prediction for unknown document " + by_id.begin()->first);

    auto eval_one = [&](std::size_t i) {
        return evaluate(golds[i].doc, matched[i]->segments, matched[i]->discarded, golds[i].gold,
                        args.window);
    };
    std::vector<EvalReport> reports(golds.size());
    if (args.parallel && golds.size() > 1) {
        std::vector<std::future<EvalReport>> futs;
        futs.reserve(golds.size());
        for (std::size_t i = 0; i < golds.size(); ++i)
            futs.push_back(std::async(std::launch::async, eval_one, i));
        for (std::size_t i = 0; i < golds.size(); ++i)
            reports[i] = futs[i].get();
    } else {
        for (std::size_t i = 0; i < golds.size(); ++i)
            reports[i] = eval_one(i);
    }

    auto metrics_row = [](ordered_json& row, double rho, double em, double pk_v, double f1l,
                          double f1c) {
        row["rho_rec"] = pct(rho);
        row["em_f1"] = pct(em);
        row["p_k"] = pct(pk_v);
        row["f1_lab"] = pct(f1l);
        row["char_f1"] = pct(f1c);
    };

    std::string out;
    double rho = 0, em = 0, pk_sum = 0, f1l = 0, f1c = 0;
    EvalCounts totals;
    for (std::size_t i = 0; i < golds.size(); ++i) {
        const EvalReport& r = reports[i];
        ordered_json row;
        row["id"] = golds[i].doc.id;
        metrics_row(row, r.rho_rec, r.em_f1, r.pk, r.f1_lab, r.char_f1);
        row["predicted"] = r.counts.predicted;
        row["gold"] = r.counts.gold;
        row["exact_matched"] = r.counts.exact_matched;
        row["discarded"] = r.counts.discarded;
        out += row.dump();
        out.push_back('\n');
        rho += r.rho_rec;
        em += r.em_f1;
        pk_sum += r.pk;
        f1l += r.f1_lab;
        f1c += r.char_f1;
        totals.predicted += r.counts.predicted;
        totals.gold += r.counts.gold;
        totals.exact_matched += r.counts.exact_matched;
        totals.discarded += r.counts.discarded;
    }
    double n = static_cast<double>(golds.size());
    ordered_json mean;
    mean["id"] = "mean";
    metrics_row(mean, rho / n, em / n, pk_sum / n, f1l / n, f1c / n);
    mean["predicted"] = totals.predicted;
    mean["gold"] = totals.gold;
    mean["exact_matched"] = totals.exact_matched;
    mean["discarded"] = totals.discarded;
    out += mean.dump();
    out.push_back('\n');
    return out;
}

struct MakeTargetsArgs {
    std::string data_path;
    std::string pattern;
    std::uint64_t seed = 0;
};

std::string run_make_targets(const MakeTargetsArgs& args) {
    OutputPattern pattern = pattern_of(args.pattern);
    std::vector<DatasetRecord> data = load_dataset(args.data_path);
    Rng rng(args.seed);
    std::string out;
    for (const DatasetRecord& rec : data) {
        BoundaryOutput targets = make_targets(rec.doc, rec.gold, pattern, rng);
        ordered_json row;
        row["id"] = rec.doc.id;
        row["outputs"] = ordered_json::array({serialize(targets)});
        out += row.dump();
        out.push_back('\n');
    }
    return out;
}

struct PerturbArgs {
    std::string candidate_path;
    std::string gold_path;
    std::string labels_csv;
    int steps = 1;
};

std::string run_perturb(const PerturbArgs& args) {
    std::vector<DatasetRecord> data = load_dataset(args.gold_path);
    if (data.size() != 1)
        throw SchemaViolation("perturb expects exactly one gold record, got " +
                              std::to_string(data.size()));
    const DatasetRecord& rec = data[0];
    LabelSet labels =
        args.labels_csv.empty() ? LabelSet::default_taxonomy() : labels_from_csv(args.labels_csv);
    BoundaryOutput parsed = parse(read_file(args.candidate_path), labels, OutputPattern::Start);
    Candidate cand = make_candidate(rec.doc, rec.gold, parsed);

    std::string out;
    for (const Perturbation& p : enumerate_perturbations(rec.doc, cand, labels)) {
        Candidate applied = apply_perturbation(rec.doc, rec.gold, cand, p, labels);
        ordered_json row;
        row["segment"] = p.segment_index;
        row["kind"] = to_string(p.kind);
        if (p.kind == PerturbationKind::Relabel)
            row["new_label"] = p.new_label;
        row["reward"] = applied.score.reward;
        row["gain"] = applied.score.reward - cand.score.reward;
        out += row.dump();
        out.push_back('\n');
    }
    BestIntermediate best = best_intermediate(rec.doc, rec.gold, cand, labels, args.steps);
    ordered_json tail;
    tail["base_reward"] = cand.score.reward;
    tail["pool_empty"] = best.pool_empty;
    tail["chosen_reward"] = best.candidate.score.reward;
    tail["chosen_gain"] = best.gain;
    tail["chosen_output"] = serialize(best.candidate.output);
    out += tail.dump();
    out.push_back('\n');
    return out;
}

struct RolloutSimArgs {
    std::string data_path;
    std::string config_path;
    std::string policy;
    std::string replay_path;
    double noise = 2.0;
    std::size_t iterations = 1;
    bool parallel = false;
    std::map<std::string, std::string> overrides;
};

std::string run_rollout_sim(const RolloutSimArgs& args) {
    std::map<std::string, std::string> kv;
    if (!args.config_path.empty())
        kv = load_kv_file(args.config_path);
    for (const auto& [key, value] : args.overrides)
        kv[key] = value;
    RolloutConfig cfg = rollout_config_from_kv(kv);
    cfg.validate();

    std::vector<DatasetRecord> data = load_dataset(args.data_path);
    std::unique_ptr<Policy> policy;
    if (args.policy == "noisy-oracle") {
        policy = std::make_unique<NoisyOraclePolicy>(data, labels_from_data(data), cfg.pattern,
                                                     args.noise, cfg.seed);
    } else if (args.policy == "replay") {
        if (args.replay_path.empty())
            throw SchemaViolation("--policy replay needs --replay FILE");
        policy = std::make_unique<ReplayPolicy>(args.replay_path);
    } else {
        throw SchemaViolation("policy: expected noisy-oracle or replay, got \"" + args.policy +
                              "\"");
    }

    SimulateOptions opts;
    opts.parallel = args.parallel;
    SimulationReport report = simulate(data, *policy, cfg, args.iterations, opts);
    return to_jsonl(report);
}

struct GenCorpusArgs {
    std::string spec_path;
    std::string out_path;
};

std::string run_gen_corpus(const GenCorpusArgs& args) {
    CorpusSpec spec = corpus_spec_from_kv(
        args.spec_path.empty() ? std::map<std::string, std::string>{} : load_kv_file(args.spec_path));
    std::vector<DatasetRecord> data = generate_synthetic_corpus(spec);
    save_dataset(data, args.out_path);
    return {};
}

const char* error_name(const std::exception& e) {
    if (dynamic_cast<const MalformedLine*>(&e)) return "MalformedLine";
    if (dynamic_cast<const UnknownLabel*>(&e)) return "UnknownLabel";
    if (dynamic_cast<const EmptyOutput*>(&e)) return "EmptyOutput";
    if (dynamic_cast<const OutOfBounds*>(&e)) return "OutOfBounds";
    if (dynamic_cast<const TargetSynthesisFailure*>(&e)) return "TargetSynthesisFailure";
    if (dynamic_cast<const GoldNotLossless*>(&e)) return "GoldNotLossless";
    if (dynamic_cast<const WindowTooLarge*>(&e)) return "WindowTooLarge";
    if (dynamic_cast<const IllegalPerturbation*>(&e)) return "IllegalPerturbation";
    if (dynamic_cast<const SpecInfeasible*>(&e)) return "SpecInfeasible";
    if (dynamic_cast<const IoFailure*>(&e)) return "IoFailure";
    if (dynamic_cast<const SchemaViolation*>(&e)) return "SchemaViolation";
    if (dynamic_cast<const InvalidGold*>(&e)) return "InvalidGold";
    if (dynamic_cast<const Error*>(&e)) return "Error";
    return "Internal";
}

void emit_error(const std::string& name, const std::string& message) {
    ordered_json err;
    err["error"] = name;
    err["message"] = message;
    std::string line = err.dump();
    line.push_back('\n');
    std::fwrite(line.data(), 1, line.size(), stderr);
}

// input problems exit 2, broken internal invariants exit 3
int exit_code(const std::exception& e) {
    if (dynamic_cast<const IllegalPerturbation*>(&e) || dynamic_cast<const OutOfBounds*>(&e))
        return 3;
    if (dynamic_cast<const Error*>(&e))
        return 2;
    return 3;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"boundary-generation text segmentation toolkit"};
    app.require_subcommand(1);

    ReconstructArgs rc;
    CLI::App* rc_cmd = app.add_subcommand("reconstruct", "rebuild segments from boundary output");
    rc_cmd->add_option("--pattern", rc.pattern, "start|end|startend")->required();
    rc_cmd->add_option("--doc", rc.doc_path, "documents JSONL")->required();
    rc_cmd->add_option("--boundaries", rc.boundaries_path,
                       "wire text (single doc) or JSONL {\"id\",\"output\"}")
        ->required();
    rc_cmd->add_option("--labels", rc.labels_csv, "comma-separated label set");

    ScoreArgs sc;
    CLI::App* sc_cmd = app.add_subcommand("score", "evaluate predictions against gold");
    sc_cmd->add_option("--pred", sc.pred_path, "predictions JSONL")->required();
    sc_cmd->add_option("--gold", sc.gold_path, "gold dataset JSONL")->required();
    std::size_t window_value = 0;
    CLI::Option* window_opt =
        sc_cmd->add_option("--window", window_value, "P_k window (default: half mean segment)");
    sc_cmd->add_flag("--parallel", sc.parallel, "score documents concurrently");

    MakeTargetsArgs mt;
    CLI::App* mt_cmd = app.add_subcommand("make-targets", "synthesize boundary targets from gold");
    mt_cmd->add_option("--data", mt.data_path, "gold dataset JSONL")->required();
    mt_cmd->add_option("--pattern", mt.pattern, "start|end|startend")->required();
    mt_cmd->add_option("--seed", mt.seed, "length sampler seed");

    PerturbArgs pt;
    CLI::App* pt_cmd = app.add_subcommand("perturb", "enumerate boundary edits for one candidate");
    pt_cmd->add_option("--candidate", pt.candidate_path, "candidate wire text")->required();
    pt_cmd->add_option("--gold", pt.gold_path, "single-record gold dataset JSONL")->required();
    pt_cmd->add_option("--steps", pt.steps, "intermediate search depth")
        ->check(CLI::IsMember({1, 2}));
    pt_cmd->add_option("--labels", pt.labels_csv, "comma-separated label set");

    RolloutSimArgs rs;
    CLI::App* rs_cmd = app.add_subcommand("rollout-sim", "run the training-loop simulation");
    rs_cmd->add_option("--data", rs.data_path, "gold dataset JSONL")->required();
    rs_cmd->add_option("--config", rs.config_path, "key=value rollout config");
    rs_cmd->add_option("--policy", rs.policy, "noisy-oracle|replay")->required();
    rs_cmd->add_option("--replay", rs.replay_path, "replay outputs JSONL");
    rs_cmd->add_option("--noise", rs.noise, "noisy-oracle edit rate");
    rs_cmd->add_option("--iterations", rs.iterations, "training steps")->required();
    rs_cmd->add_flag("--parallel", rs.parallel, "score groups concurrently");
    // every rollout config key has a flag override
    std::map<std::string, std::string> override_values;
    std::vector<std::pair<std::string, std::string>> override_flags;
    for (const char* key : {"m", "temperature", "k", "batch_size", "enable_intermediate",
                            "perturb_steps", "medium_mode", "end_marker", "pattern", "seed"}) {
        std::string flag = "--" + std::string(key);
        for (char& c : flag)
            if (c == '_')
                c = '-';
        rs_cmd->add_option(flag, override_values[key], "override config key " + std::string(key));
        override_flags.emplace_back(key, flag);
    }

    GenCorpusArgs gc;
    CLI::App* gc_cmd = app.add_subcommand("gen-corpus", "write a synthetic dataset");
    gc_cmd->add_option("--spec", gc.spec_path, "key=value corpus spec");
    gc_cmd->add_option("--out", gc.out_path, "output dataset path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        std::fputs(app.help().c_str(), stdout);
        return 0;
    } catch (const CLI::ParseError& e) {
        emit_error("Usage", e.what());
        return 2;
    }

    try {
        std::string payload;
        if (rc_cmd->parsed()) {
            payload = run_reconstruct(rc);
        } else if (sc_cmd->parsed()) {
            if (window_opt->count() > 0)
                sc.window = window_value;
            payload = run_score(sc);
        } else if (mt_cmd->parsed()) {
            payload = run_make_targets(mt);
        } else if (pt_cmd->parsed()) {
            payload = run_perturb(pt);
        } else if (rs_cmd->parsed()) {
            for (const auto& [key, flag] : override_flags)
                if (rs_cmd->count(flag) > 0)
                    rs.overrides[key] = override_values[key];
            payload = run_rollout_sim(rs);
        } else if (gc_cmd->parsed()) {
            payload = run_gen_corpus(gc);
        }
        std::fwrite(payload.data(), 1, payload.size(), stdout);
        return 0;
    } catch (const std::exception& e) {
        emit_error(error_name(e), e.what());
        return exit_code(e);
    }
}
