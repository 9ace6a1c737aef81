#include "zsplit/stats.hpp"

#include <cmath>
#include <set>
#include <stdexcept>
#include <unordered_set>

#include "zsplit/errors.hpp"

namespace zsplit {

OverlapReport overlap_report(const Dataset& dataset, const SplitAssignment& assignment) {
    require_total(dataset, assignment);
    std::unordered_set<std::string_view> train_identities;
    for (const Record& r : dataset.records) {
        if (r.identity && assignment.at(r.image_id) == Partition::Train) {
            train_identities.insert(*r.identity);
        }
    }

    OverlapReport report;
    std::set<std::string_view> common;
    for (const Record& r : dataset.records) {
        if (assignment.at(r.image_id) != Partition::Test) continue;
        ++report.test_image_count;
        if (!r.identity) {
            // An unlabeled test image cannot be matched against TRAIN, so
            // the overlap below undercounts whenever such images exist.
            report.lower_bound_flag = true;
            continue;
        }
        if (train_identities.count(*r.identity)) {
            ++report.common_image_count;
            common.insert(*r.identity);
        }
    }
    report.common_identity_count = common.size();
    report.common_image_fraction_test =
        report.test_image_count > 0
            ? static_cast<double>(report.common_image_count) /
                  static_cast<double>(report.test_image_count)
            : 0.0;
    return report;
}

double sample_weight(double positive_ratio, bool positive) {
    if (!(positive_ratio >= 0.0 && positive_ratio <= 1.0)) {
        throw std::invalid_argument("positive ratio must lie in [0,1]");
    }
    return positive ? std::exp(1.0 - positive_ratio) : std::exp(positive_ratio);
}

AttributeStats positive_ratios(const Dataset& dataset, const SplitAssignment& assignment,
                               Partition partition) {
    require_total(dataset, assignment);
    const std::size_t m = dataset.attribute_count();
    AttributeStats stats;
    stats.partition = partition;
    std::vector<std::size_t> positives(m, 0);
    for (const Record& r : dataset.records) {
        if (assignment.at(r.image_id) != partition) continue;
        ++stats.image_count;
        for (std::size_t j = 0; j < m; ++j) positives[j] += r.labels[j];
    }
    if (stats.image_count == 0) {
        throw validation_error(std::string("partition '") + to_string(partition) +
                               "' has no images; positive ratios are undefined");
    }
    stats.attributes.reserve(m);
    for (std::size_t j = 0; j < m; ++j) {
        AttributeStat a;
        a.name = dataset.catalog.names[j];
        a.positives = positives[j];
        a.ratio = static_cast<double>(positives[j]) / static_cast<double>(stats.image_count);
        a.weight_positive = sample_weight(a.ratio, true);
        a.weight_negative = sample_weight(a.ratio, false);
        stats.attributes.push_back(std::move(a));
    }
    return stats;
}

std::vector<double> AttributeStats::ratios() const {
    std::vector<double> r;
    r.reserve(attributes.size());
    for (const AttributeStat& a : attributes) r.push_back(a.ratio);
    return r;
}

IdentityDistribution identity_distribution(const Dataset& dataset,
                                           const SplitAssignment& assignment,
                                           Partition partition) {
    require_total(dataset, assignment);
    IdentityDistribution distribution;
    distribution.partition = partition;
    std::map<std::string, std::size_t> counts;
    std::size_t missing = 0;
    for (const Record& r : dataset.records) {
        if (assignment.at(r.image_id) != partition) continue;
        ++distribution.image_count;
        if (r.identity) {
            ++counts[*r.identity];
        } else {
            ++missing;
        }
    }
    if (distribution.image_count == 0) return distribution;
    const double n = static_cast<double>(distribution.image_count);
    for (const auto& [identity, count] : counts) {
        distribution.fraction_of[identity] = static_cast<double>(count) / n;
    }
    distribution.missing_fraction = static_cast<double>(missing) / n;
    return distribution;
}

}  // namespace zsplit
