#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "zsplit/core.hpp"

namespace zsplit {

/// Identity leakage between TRAIN and TEST. The image fraction counts
/// identity-missing test images in its denominator only, so whenever such
/// images exist the fraction is a lower bound and lower_bound_flag is set.
struct OverlapReport {
    std::size_t common_identity_count = 0;
    double common_image_fraction_test = 0.0;
    std::size_t test_image_count = 0;
    std::size_t common_image_count = 0;
    bool lower_bound_flag = false;
};

OverlapReport overlap_report(const Dataset& dataset, const SplitAssignment& assignment);

/// Per-attribute positive counts, positive ratio r in the chosen
/// partition, and the imbalance weight pair derived from r.
struct AttributeStat {
    std::string name;
    std::size_t positives = 0;
    double ratio = 0.0;
    double weight_positive = 0.0;  // applied when the label is 1
    double weight_negative = 0.0;  // applied when the label is 0
};

struct AttributeStats {
    Partition partition = Partition::Train;
    std::size_t image_count = 0;
    std::vector<AttributeStat> attributes;

    std::vector<double> ratios() const;
};

/// r_j = (#records in the partition with label j == 1) / (partition size).
/// Throws validation_error on an empty partition.
AttributeStats positive_ratios(const Dataset& dataset, const SplitAssignment& assignment,
                               Partition partition);

/// Imbalance weight for one attribute: e^(1-r) for a positive label,
/// e^r for a negative one. r must lie in [0,1].
double sample_weight(double positive_ratio, bool positive);

/// Per-identity share of a partition's images. Identity-missing images are
/// aggregated under missing_fraction rather than a reserved key, so they
/// can never collide with a real identity.
struct IdentityDistribution {
    Partition partition = Partition::Train;
    std::size_t image_count = 0;
    std::map<std::string, double> fraction_of;  // real identities only
    double missing_fraction = 0.0;
};

IdentityDistribution identity_distribution(const Dataset& dataset,
                                           const SplitAssignment& assignment, Partition partition);

}  // namespace zsplit
