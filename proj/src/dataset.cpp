#include "segbound/dataset.hpp"

#include <fstream>
#include <set>

#include <json.hpp>

#include "segbound/errors.hpp"

namespace segbound {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

bool blank(const std::string& line) {
    return line.find_first_not_of(" \t\r") == std::string::npos;
}

json parse_line(const std::string& line, std::size_t line_no) {
    try {
        return json::parse(line);
    } catch (const json::exception& e) {
        throw SchemaViolation("line " + std::to_string(line_no) + ": " + e.what());
    }
}

std::string require_string(const json& row, const char* key, std::size_t line_no) {
    if (!row.is_object() || !row.contains(key) || !row[key].is_string())
        throw SchemaViolation("line " + std::to_string(line_no) + ": missing string field \"" +
                              key + "\"");
    return row[key].get<std::string>();
}

Segmentation segments_from_json(const json& arr, std::size_t line_no) {
    if (!arr.is_array())
        throw SchemaViolation("line " + std::to_string(line_no) + ": \"segments\" must be an array");
    Segmentation seg;
    for (const json& el : arr) {
        if (!el.is_object() || !el.contains("label") || !el["label"].is_string() ||
            !el.contains("start") || !el["start"].is_number_unsigned() ||
            !el.contains("end") || !el["end"].is_number_unsigned())
            throw SchemaViolation("line " + std::to_string(line_no) +
                                  ": segment needs \"label\", \"start\", \"end\"");
        std::size_t start = el["start"].get<std::size_t>();
        std::size_t end = el["end"].get<std::size_t>();
        if (start >= end)
            throw SchemaViolation("line " + std::to_string(line_no) + ": empty span [" +
                                  std::to_string(start) + ", " + std::to_string(end) + ")");
        seg.segments.push_back({el["label"].get<std::string>(), Span(start, end)});
    }
    return seg;
}

std::u32string decode_text(const std::string& text, std::size_t line_no) {
    try {
        return utf8_decode(text);
    } catch (const std::exception& e) {
        throw SchemaViolation("line " + std::to_string(line_no) + ": " + e.what());
    }
}

// Shared line walk: skips blanks, validates the optional header, hands each
// record row to the sink.
template <typename Sink>
void walk_jsonl(const std::filesystem::path& path, Sink&& sink) {
    std::ifstream in(path);
    if (!in)
        throw IoFailure("cannot open: " + path.string());
    std::string line;
    std::size_t line_no = 0;
    bool seen_row = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (blank(line))
            continue;
        json row = parse_line(line, line_no);
        if (!seen_row && row.is_object() && row.contains("offset_unit")) {
            if (!row["offset_unit"].is_string() || row["offset_unit"] != "char")
                throw SchemaViolation("line " + std::to_string(line_no) +
                                      ": unsupported offset_unit");
            seen_row = true;
            continue;
        }
        seen_row = true;
        sink(row, line_no);
    }
}

} // namespace

std::vector<DatasetRecord> load_dataset(const std::filesystem::path& path) {
    std::vector<DatasetRecord> records;
    std::set<std::string> ids;
    walk_jsonl(path, [&](const json& row, std::size_t line_no) {
        DatasetRecord rec;
        rec.doc.id = require_string(row, "id", line_no);
        if (!ids.insert(rec.doc.id).second)
            throw SchemaViolation("line " + std::to_string(line_no) + ": duplicate id " +
                                  rec.doc.id);
        rec.doc.text = decode_text(require_string(row, "text", line_no), line_no);
        if (!row.contains("segments"))
            throw SchemaViolation("line " + std::to_string(line_no) + ": missing \"segments\"");
        rec.gold = segments_from_json(row["segments"], line_no);
        ValidationReport rep = validate_segmentation(rec.doc, rec.gold);
        if (!rep.ok)
            throw InvalidGold("line " + std::to_string(line_no) + ": " +
                              (rep.violations.empty() ? "invalid segmentation"
                                                      : rep.violations.front().message));
        if (!rep.lossless)
            throw InvalidGold("line " + std::to_string(line_no) +
                              ": gold segmentation is not lossless");
        records.push_back(std::move(rec));
    });
    return records;
}

void save_dataset(const std::vector<DatasetRecord>& records,
                  const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out)
        throw IoFailure("cannot write: " + path.string());
    ordered_json header;
    header["offset_unit"] = "char";
    out << header.dump() << '\n';
    for (const DatasetRecord& rec : records) {
        ordered_json row;
        row["id"] = rec.doc.id;
        row["text"] = utf8_encode(rec.doc.text);
        ordered_json segs = ordered_json::array();
        for (const Segment& s : rec.gold.segments) {
            ordered_json el;
            el["label"] = s.label;
            el["start"] = s.span.start();
            el["end"] = s.span.end();
            segs.push_back(std::move(el));
        }
        row["segments"] = std::move(segs);
        out << row.dump() << '\n';
    }
    if (!out)
        throw IoFailure("write failed: " + path.string());
}

std::vector<Document> load_documents(const std::filesystem::path& path) {
    std::vector<Document> docs;
    std::set<std::string> ids;
    walk_jsonl(path, [&](const json& row, std::size_t line_no) {
        Document doc;
        doc.id = require_string(row, "id", line_no);
        if (!ids.insert(doc.id).second)
            throw SchemaViolation("line " + std::to_string(line_no) + ": duplicate id " + doc.id);
        doc.text = decode_text(require_string(row, "text", line_no), line_no);
        docs.push_back(std::move(doc));
    });
    return docs;
}

std::vector<Prediction> load_predictions(const std::filesystem::path& path) {
    std::vector<Prediction> preds;
    std::set<std::string> ids;
    walk_jsonl(path, [&](const json& row, std::size_t line_no) {
        Prediction pred;
        pred.id = require_string(row, "id", line_no);
        if (!ids.insert(pred.id).second)
            throw SchemaViolation("line " + std::to_string(line_no) + ": duplicate id " + pred.id);
        if (row.contains("segments"))
            pred.segments = segments_from_json(row["segments"], line_no);
        for (std::size_t i = 1; i < pred.segments.size(); ++i)
            if (pred.segments.segments[i].span.start() <
                pred.segments.segments[i - 1].span.end())
                throw SchemaViolation("line " + std::to_string(line_no) +
                                      ": segments must be sorted and disjoint");
        if (row.contains("discarded")) {
            const json& d = row["discarded"];
            if (d.is_number_unsigned())
                pred.discarded = d.get<std::size_t>();
            else if (d.is_array())
                pred.discarded = d.size();
            else
                throw SchemaViolation("line " + std::to_string(line_no) +
                                      ": \"discarded\" must be a count or a list");
        }
        preds.push_back(std::move(pred));
    });
    return preds;
}

LabelSet labels_from_data(const std::vector<DatasetRecord>& data) {
    std::vector<std::string> names;
    std::set<std::string> seen;
    for (const DatasetRecord& rec : data)
        for (const Segment& s : rec.gold.segments)
            if (seen.insert(s.label).second)
                names.push_back(s.label);
    if (names.size() < 2)
        throw Error("dataset golds use fewer than two distinct labels");
    return LabelSet(std::move(names));
}

} // namespace segbound
