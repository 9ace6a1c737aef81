#include "zsplit/io.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "zsplit/errors.hpp"
#include "zsplit/json_out.hpp"

namespace zsplit {

namespace {

using nlohmann::json;

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open '" + path.string() + "': " + std::strerror(errno));
    }
    return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write '" + path.string() + "': " + std::strerror(errno));
    }
    return out;
}

[[noreturn]] void fail_at(const std::filesystem::path& path, std::size_t line,
                          const std::string& message) {
    throw validation_error(path.string() + ":" + std::to_string(line) + ": " + message);
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::string::size_type start = 0;
    for (;;) {
        auto comma = line.find(',', start);
        if (comma == std::string::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

/// Read one line, tolerating a trailing \r so CRLF input still parses.
bool get_line(std::istream& in, std::string& line) {
    if (!std::getline(in, line)) return false;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
}

constexpr const char* kAttrPrefix = "attr:";

ParsedDataset parse_dataset_csv(const std::filesystem::path& path) {
    auto in = open_input(path);
    std::string line;
    if (!get_line(in, line)) {
        throw validation_error(path.string() + ": empty file, expected a header");
    }
    auto header = split_fields(line);
    if (header.size() < 2 || header[0] != "image_id" || header[1] != "identity") {
        fail_at(path, 1, "header must start with 'image_id,identity'");
    }
    ParsedDataset parsed;
    for (std::size_t c = 2; c < header.size(); ++c) {
        const std::string& col = header[c];
        if (col.rfind(kAttrPrefix, 0) != 0) {
            fail_at(path, 1, "unknown column '" + col + "' (label columns use the 'attr:' prefix)");
        }
        parsed.dataset.catalog.names.push_back(col.substr(std::strlen(kAttrPrefix)));
    }
    const std::size_t m = parsed.dataset.catalog.size();

    std::size_t line_no = 1;
    while (get_line(in, line)) {
        ++line_no;
        if (line.empty() && in.peek() == EOF) break;  // trailing newline
        auto fields = split_fields(line);
        if (fields.size() != 2 + m) {
            fail_at(path, line_no,
                    "expected " + std::to_string(2 + m) + " fields, got " +
                        std::to_string(fields.size()));
        }
        Record record;
        record.image_id = fields[0];
        if (!fields[1].empty()) record.identity = fields[1];
        record.labels.reserve(m);
        for (std::size_t j = 0; j < m; ++j) {
            const std::string& cell = fields[2 + j];
            char* end = nullptr;
            errno = 0;
            const long value = std::strtol(cell.c_str(), &end, 10);
            if (cell.empty() || end != cell.c_str() + cell.size() || errno != 0 || value < 0 ||
                value > 255) {
                fail_at(path, line_no,
                        "label cell '" + cell + "' for attribute '" +
                            parsed.dataset.catalog.names[j] + "' is not a small integer");
            }
            record.labels.push_back(static_cast<std::uint8_t>(value));
        }
        parsed.dataset.records.push_back(std::move(record));
        parsed.line_numbers.push_back(line_no);
    }
    return parsed;
}

ParsedDataset parse_dataset_jsonl(const std::filesystem::path& path) {
    const auto sidecar = catalog_sidecar_path(path);
    auto cat_in = open_input(sidecar);
    json catalog_json;
    try {
        catalog_json = json::parse(cat_in);
    } catch (const json::parse_error& e) {
        throw validation_error(sidecar.string() + ": " + e.what());
    }
    if (!catalog_json.is_object() || !catalog_json.contains("attributes") ||
        !catalog_json["attributes"].is_array()) {
        throw validation_error(sidecar.string() + ": expected {\"attributes\": [names...]}");
    }
    ParsedDataset parsed;
    for (const auto& name : catalog_json["attributes"]) {
        if (!name.is_string()) {
            throw validation_error(sidecar.string() + ": attribute names must be strings");
        }
        parsed.dataset.catalog.names.push_back(name.get<std::string>());
    }
    const std::size_t m = parsed.dataset.catalog.size();

    auto in = open_input(path);
    std::string line;
    std::size_t line_no = 0;
    while (get_line(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json row;
        try {
            row = json::parse(line);
        } catch (const json::parse_error& e) {
            fail_at(path, line_no, e.what());
        }
        if (!row.is_object() || !row.contains("image_id") || !row["image_id"].is_string() ||
            !row.contains("labels") || !row["labels"].is_array()) {
            fail_at(path, line_no, "expected {\"image_id\", \"labels\"[, \"identity\"]}");
        }
        Record record;
        record.image_id = row["image_id"].get<std::string>();
        if (row.contains("identity")) {
            if (!row["identity"].is_string()) {
                fail_at(path, line_no, "identity must be a string when present");
            }
            record.identity = row["identity"].get<std::string>();
        }
        if (row["labels"].size() != m) {
            fail_at(path, line_no,
                    "expected " + std::to_string(m) + " labels, got " +
                        std::to_string(row["labels"].size()));
        }
        for (const auto& v : row["labels"]) {
            if (!v.is_number_integer() || v.get<std::int64_t>() < 0 || v.get<std::int64_t>() > 255) {
                fail_at(path, line_no, "label values must be small non-negative integers");
            }
            record.labels.push_back(static_cast<std::uint8_t>(v.get<std::int64_t>()));
        }
        parsed.dataset.records.push_back(std::move(record));
        parsed.line_numbers.push_back(line_no);
    }
    return parsed;
}

}  // namespace

FileFormat infer_format(const std::filesystem::path& path) {
    return path.extension() == ".jsonl" ? FileFormat::Jsonl : FileFormat::Csv;
}

std::filesystem::path catalog_sidecar_path(const std::filesystem::path& dataset_path) {
    std::filesystem::path sidecar = dataset_path;
    sidecar.replace_extension(".catalog.json");
    return sidecar;
}

ParsedDataset parse_dataset(const std::filesystem::path& path, FileFormat format) {
    return format == FileFormat::Csv ? parse_dataset_csv(path) : parse_dataset_jsonl(path);
}

Dataset load_dataset(const std::filesystem::path& path, FileFormat format) {
    ParsedDataset parsed = parse_dataset(path, format);
    ValidationResult validation = validate_dataset(parsed.dataset);
    if (!validation.ok()) {
        std::ostringstream os;
        os << path.string() << ": dataset invalid:";
        for (const auto& issue : validation.issues) {
            os << "\n  ";
            if (issue.record_index && *issue.record_index < parsed.line_numbers.size()) {
                os << "line " << parsed.line_numbers[*issue.record_index] << ": ";
            }
            if (!issue.image_id.empty()) os << "'" << issue.image_id << "': ";
            os << issue.message;
        }
        throw validation_error(os.str());
    }
    return parsed.dataset;
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& path, FileFormat format) {
    if (format == FileFormat::Csv) {
        auto out = open_output(path);
        out << "image_id,identity";
        for (const auto& name : dataset.catalog.names) out << ',' << kAttrPrefix << name;
        out << '\n';
        for (const Record& r : dataset.records) {
            out << r.image_id << ',' << (r.identity ? *r.identity : "");
            for (std::uint8_t v : r.labels) out << ',' << int(v);
            out << '\n';
        }
        return;
    }
    {
        auto cat_out = open_output(catalog_sidecar_path(path));
        ojson catalog;
        catalog["attributes"] = dataset.catalog.names;
        cat_out << catalog.dump() << '\n';
    }
    auto out = open_output(path);
    for (const Record& r : dataset.records) {
        ojson row;
        row["image_id"] = r.image_id;
        if (r.identity) row["identity"] = *r.identity;
        row["labels"] = r.labels;
        out << row.dump() << '\n';
    }
}

namespace {

std::array<std::vector<const std::string*>, 3> partition_lists(const SplitAssignment& assignment,
                                                               const Dataset& dataset) {
    require_total(dataset, assignment);
    std::array<std::vector<const std::string*>, 3> lists;
    for (const Record& r : dataset.records) {
        lists[static_cast<int>(assignment.at(r.image_id))].push_back(&r.image_id);
    }
    return lists;
}

ojson split_json(const SplitAssignment& assignment, const SplitReport& report,
                 const SplitConfig& config, const Dataset& dataset) {
    auto lists = partition_lists(assignment, dataset);
    for (Partition p : kPartitions) {
        if (lists[static_cast<int>(p)].empty()) {
            throw validation_error(std::string("degenerate split: empty ") + to_string(p) +
                                   " partition");
        }
    }
    ojson root;
    root["config"] = to_json(config);
    root["report"] = to_json(report);
    for (Partition p : kPartitions) {
        ojson ids = ojson::array();
        for (const std::string* id : lists[static_cast<int>(p)]) ids.push_back(*id);
        root[to_string(p)] = std::move(ids);
    }
    return root;
}

}  // namespace

std::string split_to_string(const SplitAssignment& assignment, const SplitReport& report,
                            const SplitConfig& config, const Dataset& dataset) {
    return split_json(assignment, report, config, dataset).dump(2) + "\n";
}

void write_split(const SplitAssignment& assignment, const SplitReport& report,
                 const SplitConfig& config, const Dataset& dataset,
                 const std::filesystem::path& path) {
    const std::string body = split_to_string(assignment, report, config, dataset);
    auto out = open_output(path);
    out << body;
    if (!out) {
        throw std::runtime_error("write failed for '" + path.string() + "'");
    }
}

SplitAssignment load_split(const std::filesystem::path& path, const Dataset& dataset) {
    auto in = open_input(path);
    json root;
    try {
        root = json::parse(in);
    } catch (const json::parse_error& e) {
        throw validation_error(path.string() + ": " + e.what());
    }
    if (!root.is_object()) {
        throw validation_error(path.string() + ": expected a JSON object");
    }
    auto ids = index_by_id(dataset);
    SplitAssignment assignment;
    for (Partition p : kPartitions) {
        const char* key = to_string(p);
        if (!root.contains(key) || !root[key].is_array()) {
            throw validation_error(path.string() + ": missing id list '" + key + "'");
        }
        if (root[key].empty()) {
            throw validation_error(path.string() + ": degenerate split: empty '" + std::string(key) +
                                   "' partition");
        }
        for (const auto& v : root[key]) {
            if (!v.is_string()) {
                throw validation_error(path.string() + ": ids in '" + key + "' must be strings");
            }
            const std::string id = v.get<std::string>();
            if (!ids.count(id)) {
                throw validation_error(path.string() + ": unknown id '" + id +
                                       "' not present in the dataset");
            }
            auto [it, inserted] = assignment.partition_of.emplace(id, p);
            if (!inserted) {
                throw validation_error(path.string() + ": duplicate assignment: id '" + id +
                                       "' appears in '" + to_string(it->second) + "' and '" + key +
                                       "'");
            }
        }
    }
    if (assignment.partition_of.size() != dataset.records.size()) {
        for (const Record& r : dataset.records) {
            if (!assignment.partition_of.count(r.image_id)) {
                throw validation_error(path.string() + ": incomplete split: dataset id '" +
                                       r.image_id + "' is missing from the file");
            }
        }
    }
    return assignment;
}

const char* to_string(ScoreKind k) { return k == ScoreKind::Probs ? "probs" : "logits"; }

const std::vector<double>& PredictionSet::row(const std::string& image_id) const {
    auto it = row_of.find(image_id);
    if (it == row_of.end()) {
        throw validation_error("no prediction for image id '" + image_id + "'");
    }
    return scores[it->second];
}

namespace {

void check_score(const std::filesystem::path& path, std::size_t line_no, ScoreKind kind,
                 double value, const std::string& attr) {
    if (!std::isfinite(value)) {
        fail_at(path, line_no, "score for attribute '" + attr + "' is not finite");
    }
    if (kind == ScoreKind::Probs && (value < 0.0 || value > 1.0)) {
        fail_at(path, line_no,
                "probability " + std::to_string(value) + " for attribute '" + attr +
                    "' outside [0,1]");
    }
}

void add_prediction_row(PredictionSet& set, const std::filesystem::path& path, std::size_t line_no,
                        std::string id, std::vector<double> row,
                        const std::unordered_map<std::string_view, std::size_t>& dataset_ids) {
    if (!dataset_ids.count(id)) {
        fail_at(path, line_no, "unknown id '" + id + "' not present in the dataset");
    }
    auto [it, inserted] = set.row_of.emplace(id, set.ids.size());
    if (!inserted) {
        fail_at(path, line_no, "duplicate prediction row for id '" + id + "'");
    }
    set.ids.push_back(std::move(id));
    set.scores.push_back(std::move(row));
}

}  // namespace

PredictionSet load_predictions(const std::filesystem::path& path, const Dataset& dataset,
                               ScoreKind kind, FileFormat format, double threshold) {
    const std::size_t m = dataset.attribute_count();
    const auto dataset_ids = index_by_id(dataset);
    PredictionSet set;
    set.kind = kind;
    set.threshold = threshold;

    auto parse_value = [&](const std::string& cell, std::size_t line_no, std::size_t j) {
        char* end = nullptr;
        errno = 0;
        const double value = std::strtod(cell.c_str(), &end);
        if (cell.empty() || end != cell.c_str() + cell.size()) {
            fail_at(path, line_no, "score cell '" + cell + "' is not a number");
        }
        check_score(path, line_no, kind, value, dataset.catalog.names[j]);
        return value;
    };

    if (format == FileFormat::Csv) {
        auto in = open_input(path);
        std::string line;
        if (!get_line(in, line)) {
            throw validation_error(path.string() + ": empty file, expected a header");
        }
        auto header = split_fields(line);
        if (header.size() != 1 + m || header[0] != "image_id" ||
            !std::equal(header.begin() + 1, header.end(), dataset.catalog.names.begin(),
                        dataset.catalog.names.end())) {
            fail_at(path, 1, "header must be 'image_id' followed by the dataset's attribute names");
        }
        std::size_t line_no = 1;
        while (get_line(in, line)) {
            ++line_no;
            if (line.empty() && in.peek() == EOF) break;
            auto fields = split_fields(line);
            if (fields.size() != 1 + m) {
                fail_at(path, line_no,
                        "expected " + std::to_string(1 + m) + " fields, got " +
                            std::to_string(fields.size()));
            }
            std::vector<double> row;
            row.reserve(m);
            for (std::size_t j = 0; j < m; ++j) row.push_back(parse_value(fields[1 + j], line_no, j));
            add_prediction_row(set, path, line_no, std::move(fields[0]), std::move(row), dataset_ids);
        }
    } else {
        auto in = open_input(path);
        std::string line;
        std::size_t line_no = 0;
        while (get_line(in, line)) {
            ++line_no;
            if (line.empty()) continue;
            json row_json;
            try {
                row_json = json::parse(line);
            } catch (const json::parse_error& e) {
                fail_at(path, line_no, e.what());
            }
            if (!row_json.is_object() || !row_json.contains("image_id") ||
                !row_json["image_id"].is_string() || !row_json.contains("scores") ||
                !row_json["scores"].is_array()) {
                fail_at(path, line_no, "expected {\"image_id\", \"scores\"}");
            }
            if (row_json["scores"].size() != m) {
                fail_at(path, line_no,
                        "expected " + std::to_string(m) + " scores, got " +
                            std::to_string(row_json["scores"].size()));
            }
            std::vector<double> row;
            row.reserve(m);
            std::size_t j = 0;
            for (const auto& v : row_json["scores"]) {
                if (!v.is_number()) fail_at(path, line_no, "scores must be numbers");
                const double value = v.get<double>();
                check_score(path, line_no, kind, value, dataset.catalog.names[j]);
                row.push_back(value);
                ++j;
            }
            add_prediction_row(set, path, line_no, row_json["image_id"].get<std::string>(),
                               std::move(row), dataset_ids);
        }
    }
    return set;
}

void save_predictions(const PredictionSet& predictions, const Dataset& dataset,
                      const std::filesystem::path& path, FileFormat format) {
    std::ostringstream cell;
    cell.precision(17);
    auto number = [&cell](double v) {
        cell.str("");
        cell << v;
        return cell.str();
    };
    if (format == FileFormat::Csv) {
        auto out = open_output(path);
        out << "image_id";
        for (const auto& name : dataset.catalog.names) out << ',' << name;
        out << '\n';
        for (std::size_t i = 0; i < predictions.ids.size(); ++i) {
            out << predictions.ids[i];
            for (double v : predictions.scores[i]) out << ',' << number(v);
            out << '\n';
        }
        return;
    }
    auto out = open_output(path);
    for (std::size_t i = 0; i < predictions.ids.size(); ++i) {
        ojson row;
        row["image_id"] = predictions.ids[i];
        row["scores"] = predictions.scores[i];
        out << row.dump() << '\n';
    }
}

}  // namespace zsplit
