#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "zsplit/core.hpp"

namespace zsplit {

enum class FileFormat { Csv, Jsonl };

/// Pick a format from the file extension: ".jsonl" -> Jsonl, else Csv.
FileFormat infer_format(const std::filesystem::path& path);

/// Sidecar catalog path for a JSONL dataset: the final extension replaced
/// by ".catalog.json" ("d.jsonl" -> "d.catalog.json").
std::filesystem::path catalog_sidecar_path(const std::filesystem::path& dataset_path);

/// Dataset parsed without enforcing invariants, for violation reporting.
/// line_numbers[i] is the 1-based input line of records[i].
struct ParsedDataset {
    Dataset dataset;
    std::vector<std::size_t> line_numbers;
};

/// Structural parse only: the schema must hold (header shape, integer label
/// cells, row arity) but dataset invariants (duplicate ids, 0/1 labels) are
/// left to validate_dataset. Throws validation_error with the line number
/// on malformed content.
ParsedDataset parse_dataset(const std::filesystem::path& path, FileFormat format);

/// Strict load: parse_dataset + validate_dataset, throwing validation_error
/// that itemizes every violation with its input line.
Dataset load_dataset(const std::filesystem::path& path, FileFormat format);

void save_dataset(const Dataset& dataset, const std::filesystem::path& path, FileFormat format);

/// Split file: {"config", "report", "train", "valid", "test"}, id lists in
/// dataset record order. Refuses to write a split with an empty partition.
void write_split(const SplitAssignment& assignment, const SplitReport& report,
                 const SplitConfig& config, const Dataset& dataset,
                 const std::filesystem::path& path);

/// Same content as write_split produces, as a string (byte-stable for
/// fixed inputs).
std::string split_to_string(const SplitAssignment& assignment, const SplitReport& report,
                            const SplitConfig& config, const Dataset& dataset);

/// Load the three id lists back into an assignment and check them against
/// the dataset: unknown, duplicated or missing ids and empty partitions are
/// validation errors.
SplitAssignment load_split(const std::filesystem::path& path, const Dataset& dataset);

enum class ScoreKind { Probs, Logits };

const char* to_string(ScoreKind k);

/// Real-valued scores per image, one value per catalog attribute.
/// Probabilities must lie in [0,1]; logits are unbounded. threshold is the
/// binarization cut applied to probabilities.
struct PredictionSet {
    ScoreKind kind = ScoreKind::Probs;
    double threshold = 0.5;
    std::vector<std::string> ids;  // file order
    std::vector<std::vector<double>> scores;
    std::unordered_map<std::string, std::size_t> row_of;

    bool covers(const std::string& image_id) const { return row_of.count(image_id) != 0; }
    const std::vector<double>& row(const std::string& image_id) const;
};

/// CSV header `image_id,<attr names...>` (names must match the catalog in
/// order) or JSONL lines {"image_id", "scores"}. Every id must exist in the
/// dataset; arity and probability range are enforced.
PredictionSet load_predictions(const std::filesystem::path& path, const Dataset& dataset,
                               ScoreKind kind, FileFormat format, double threshold = 0.5);

void save_predictions(const PredictionSet& predictions, const Dataset& dataset,
                      const std::filesystem::path& path, FileFormat format);

}  // namespace zsplit
