#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace zsplit {

enum class Partition : int { Train = 0, Valid = 1, Test = 2 };

inline constexpr std::array<Partition, 3> kPartitions{Partition::Train, Partition::Valid,
                                                      Partition::Test};

const char* to_string(Partition p);
std::optional<Partition> partition_from_string(std::string_view s);

/// Ordered list of attribute names. Order defines label vector layout.
struct AttributeCatalog {
    std::vector<std::string> names;

    std::size_t size() const { return names.size(); }
    bool operator==(const AttributeCatalog&) const = default;
};

/// One annotated image. identity is absent for images whose pedestrian
/// identity was never labeled; an empty string is not a valid identity.
struct Record {
    std::string image_id;
    std::optional<std::string> identity;
    std::vector<std::uint8_t> labels;  // one entry per catalog attribute, each 0 or 1

    bool operator==(const Record&) const = default;
};

struct Dataset {
    AttributeCatalog catalog;
    std::vector<Record> records;

    std::size_t attribute_count() const { return catalog.size(); }
    std::size_t size() const { return records.size(); }
    bool operator==(const Dataset&) const = default;
};

/// Maps every image id of a dataset to exactly one partition.
struct SplitAssignment {
    std::unordered_map<std::string, Partition> partition_of;

    /// Lookup with a diagnostic on unknown id.
    Partition at(const std::string& image_id) const;
};

/// Thresholds and search knobs for split construction and auditing.
/// t_id, t_img, t_attr are the criterion thresholds; ratio_targets the
/// identity-count proportions for train/valid/test.
struct SplitConfig {
    double t_id = 0.01;
    std::int64_t t_img = 300;
    double t_attr = 0.03;
    std::array<double, 3> ratio_targets{3.0, 1.0, 1.0};
    double ratio_tolerance = 0.10;
    std::uint64_t seed = 0;
    int max_restarts = 20;
    std::int64_t max_moves = 50000;
    /// When set, criterion 5 additionally requires the train/test attribute
    /// ratio gap to stay under t_attr (the criterion itself is defined on
    /// the valid/test pair).
    bool attr_check_train = false;

    void check() const;  // throws std::invalid_argument on out-of-range fields
};

/// Measured values and verdicts for the five split criteria.
/// All comparisons against t_id/t_img/t_attr are strict '<'; the ratio
/// check (C1) allows a relative tolerance around the target proportions.
struct SplitReport {
    std::array<std::size_t, 3> identity_counts{};  // indexed by Partition
    std::array<std::size_t, 3> image_counts{};

    // C1: identity-count proportions close to ratio_targets
    std::array<double, 3> identity_fractions{};
    double c1_max_deviation = 0.0;  // max over partitions of |frac - target| / target
    double c1_tolerance = 0.0;
    bool c1_pass = false;

    // C2: identity sets pairwise disjoint
    std::size_t c2_spanning_identities = 0;  // identities present in >= 2 partitions
    bool c2_pass = false;

    // C3: | |I_valid| - |I_test| | < |I_all| * t_id
    std::size_t c3_identity_diff = 0;
    double c3_threshold = 0.0;
    bool c3_pass = false;

    // C4: |N_valid - N_test| < t_img
    std::size_t c4_image_diff = 0;
    std::int64_t c4_threshold = 0;
    bool c4_pass = false;

    // C5: max over attributes of |R_valid,j - R_test,j| < t_attr
    double c5_max_ratio_diff = 0.0;
    std::string c5_worst_attribute;
    double c5_threshold = 0.0;
    std::optional<double> c5_train_test_diff;  // present iff attr_check_train
    std::optional<std::string> c5_train_test_worst;
    bool c5_pass = false;

    bool overall = false;

    bool operator==(const SplitReport&) const = default;
};

struct ValidationIssue {
    /// Index into Dataset::records for record-level issues; absent for
    /// catalog-level ones.
    std::optional<std::size_t> record_index;
    std::string image_id;
    std::string message;
};

struct ValidationResult {
    std::vector<ValidationIssue> issues;
    bool ok() const { return issues.empty(); }
};

/// Pure check of every Dataset/Record invariant: unique non-empty attribute
/// names, at least one attribute and one record, unique non-empty image ids,
/// label arity == attribute count, labels in {0,1}, no empty-string identity.
/// Violations are returned as data, never thrown.
ValidationResult validate_dataset(const Dataset& dataset);

/// image_id -> record index for the dataset. Assumes unique ids.
std::unordered_map<std::string_view, std::size_t> index_by_id(const Dataset& dataset);

/// Throws validation_error unless the assignment covers exactly the
/// dataset's image ids.
void require_total(const Dataset& dataset, const SplitAssignment& assignment);

}  // namespace zsplit
