#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "zsplit/core.hpp"
#include "zsplit/io.hpp"

namespace zsplit {

/// Dense row-major 0/1 matrix: one row per image, one column per attribute.
struct BinaryMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::uint8_t> values;

    static BinaryMatrix zeros(std::size_t rows, std::size_t cols) {
        return BinaryMatrix{rows, cols, std::vector<std::uint8_t>(rows * cols, 0)};
    }
    std::uint8_t at(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
    void set(std::size_t i, std::size_t j, std::uint8_t v) { values[i * cols + j] = v; }
};

struct ConfusionPerAttribute {
    std::string name;
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t tn = 0;
    std::size_t fn = 0;
};

struct AttributeMetric {
    std::string name;
    double tpr = 0.0;
    double tnr = 0.0;
    double accuracy = 0.0;  // (tpr + tnr) / 2

    bool operator==(const AttributeMetric&) const = default;
};

struct MeanAccuracyResult {
    double mean_accuracy = 0.0;
    std::vector<AttributeMetric> per_attribute;    // attributes with both rates defined
    std::vector<std::string> excluded;             // attributes lacking positives or negatives
    std::vector<ConfusionPerAttribute> confusion;  // every attribute, in catalog order
};

struct InstanceMetrics {
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;

    bool operator==(const InstanceMetrics&) const = default;
};

/// Full evaluation of one image subset. An empty subset (possible for the
/// common-identity slice of a leak-free split) is flagged rather than an
/// error; its metric fields are meaningless then.
struct MetricsReport {
    std::string subset;
    std::size_t image_count = 0;
    bool empty = false;
    double mean_accuracy = 0.0;
    std::vector<AttributeMetric> per_attribute;
    std::vector<std::string> excluded;
    InstanceMetrics instance;

    bool operator==(const MetricsReport&) const = default;
};

/// Threshold predictions into a 0/1 matrix, one row per requested id, in
/// order. Logit scores pass through the logistic function first; a score
/// exactly at the threshold binarizes to 1.
BinaryMatrix binarize(const PredictionSet& predictions, const std::vector<std::string>& ids);

/// Ground-truth label rows for the given ids, in order.
BinaryMatrix label_matrix(const Dataset& dataset, const std::vector<std::string>& ids);

/// Label-based metric: per attribute the mean of TPR and TNR, averaged over
/// attributes that have at least one positive and one negative. Attributes
/// with an undefined rate are excluded and listed, never imputed. Throws
/// validation_error when no attribute remains.
MeanAccuracyResult mean_accuracy(const BinaryMatrix& labels, const BinaryMatrix& predictions,
                                 const AttributeCatalog& catalog);

/// Example-based metrics over attribute sets per image. Conventions for
/// empty sets: both empty counts as full agreement (1.0); an empty side
/// against a non-empty one scores 0. F1 is the harmonic mean of the
/// aggregated precision and recall.
InstanceMetrics instance_metrics(const BinaryMatrix& labels, const BinaryMatrix& predictions);

/// All five metrics for an explicit id subset.
MetricsReport evaluate_subset(const Dataset& dataset, const std::vector<std::string>& ids,
                              const PredictionSet& predictions, const std::string& subset_name);

struct PartitionedEval {
    MetricsReport all;     // every TEST image
    MetricsReport common;  // TEST images whose identity also appears in TRAIN
    MetricsReport unique;  // the rest, identity-missing images included
};

/// Evaluate the TEST partition split by identity overlap with TRAIN.
/// Predictions must cover the whole TEST partition.
PartitionedEval partitioned_eval(const Dataset& dataset, const SplitAssignment& assignment,
                                 const PredictionSet& predictions);

}  // namespace zsplit
