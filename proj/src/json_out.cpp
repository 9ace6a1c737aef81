#include "zsplit/json_out.hpp"

#include <stdexcept>

namespace zsplit {

namespace {

/// Read a numeric field if present, keeping the default otherwise.
template <typename T>
void read_field(const nlohmann::json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

ojson to_json(const SplitConfig& config) {
    ojson j;
    j["t_id"] = config.t_id;
    j["t_img"] = config.t_img;
    j["t_attr"] = config.t_attr;
    j["ratio_targets"] = config.ratio_targets;
    j["ratio_tolerance"] = config.ratio_tolerance;
    j["seed"] = config.seed;
    j["max_restarts"] = config.max_restarts;
    j["max_moves"] = config.max_moves;
    j["attr_check_train"] = config.attr_check_train;
    return j;
}

SplitConfig split_config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) {
        throw std::invalid_argument("split config must be a JSON object");
    }
    SplitConfig config;
    read_field(j, "t_id", config.t_id);
    read_field(j, "t_img", config.t_img);
    read_field(j, "t_attr", config.t_attr);
    if (j.contains("ratio_targets")) {
        const auto& targets = j.at("ratio_targets");
        if (!targets.is_array() || targets.size() != 3) {
            throw std::invalid_argument("ratio_targets must be an array of 3 numbers");
        }
        for (std::size_t i = 0; i < 3; ++i) config.ratio_targets[i] = targets[i].get<double>();
    }
    read_field(j, "ratio_tolerance", config.ratio_tolerance);
    read_field(j, "seed", config.seed);
    read_field(j, "max_restarts", config.max_restarts);
    read_field(j, "max_moves", config.max_moves);
    read_field(j, "attr_check_train", config.attr_check_train);
    config.check();
    return config;
}

ojson to_json(const SplitReport& report) {
    ojson j;
    j["identity_counts"] = {{"train", report.identity_counts[0]},
                            {"valid", report.identity_counts[1]},
                            {"test", report.identity_counts[2]}};
    j["image_counts"] = {{"train", report.image_counts[0]},
                         {"valid", report.image_counts[1]},
                         {"test", report.image_counts[2]}};
    ojson c1;
    c1["identity_fractions"] = report.identity_fractions;
    c1["max_deviation"] = report.c1_max_deviation;
    c1["tolerance"] = report.c1_tolerance;
    c1["pass"] = report.c1_pass;
    j["ratio"] = std::move(c1);

    ojson c2;
    c2["spanning_identities"] = report.c2_spanning_identities;
    c2["pass"] = report.c2_pass;
    j["disjoint"] = std::move(c2);

    ojson c3;
    c3["identity_diff"] = report.c3_identity_diff;
    c3["threshold"] = report.c3_threshold;
    c3["pass"] = report.c3_pass;
    j["identity_balance"] = std::move(c3);

    ojson c4;
    c4["image_diff"] = report.c4_image_diff;
    c4["threshold"] = report.c4_threshold;
    c4["pass"] = report.c4_pass;
    j["image_balance"] = std::move(c4);

    ojson c5;
    c5["max_ratio_diff"] = report.c5_max_ratio_diff;
    c5["worst_attribute"] = report.c5_worst_attribute;
    c5["threshold"] = report.c5_threshold;
    if (report.c5_train_test_diff) {
        c5["train_test_diff"] = *report.c5_train_test_diff;
        c5["train_test_worst"] = report.c5_train_test_worst.value_or("");
    }
    c5["pass"] = report.c5_pass;
    j["attribute_balance"] = std::move(c5);

    j["overall"] = report.overall;
    return j;
}

ojson to_json(const ValidationResult& result) {
    ojson j;
    j["ok"] = result.ok();
    ojson issues = ojson::array();
    for (const ValidationIssue& issue : result.issues) {
        ojson item;
        if (issue.record_index) item["record_index"] = *issue.record_index;
        if (!issue.image_id.empty()) item["image_id"] = issue.image_id;
        item["message"] = issue.message;
        issues.push_back(std::move(item));
    }
    j["issues"] = std::move(issues);
    return j;
}

ojson to_json(const OverlapReport& report) {
    ojson j;
    j["common_identity_count"] = report.common_identity_count;
    j["common_image_count"] = report.common_image_count;
    j["test_image_count"] = report.test_image_count;
    j["common_image_fraction_test"] = report.common_image_fraction_test;
    j["lower_bound"] = report.lower_bound_flag;
    return j;
}

ojson to_json(const AttributeStats& stats) {
    ojson j;
    j["partition"] = to_string(stats.partition);
    j["image_count"] = stats.image_count;
    ojson attrs = ojson::array();
    for (const AttributeStat& a : stats.attributes) {
        ojson item;
        item["name"] = a.name;
        item["positives"] = a.positives;
        item["ratio"] = a.ratio;
        item["weight_positive"] = a.weight_positive;
        item["weight_negative"] = a.weight_negative;
        attrs.push_back(std::move(item));
    }
    j["attributes"] = std::move(attrs);
    return j;
}

ojson to_json(const IdentityDistribution& distribution) {
    ojson j;
    j["partition"] = to_string(distribution.partition);
    j["image_count"] = distribution.image_count;
    ojson fractions;  // std::map input keeps key order sorted and stable
    for (const auto& [identity, fraction] : distribution.fraction_of) {
        fractions[identity] = fraction;
    }
    j["identity_fractions"] = std::move(fractions);
    j["missing_fraction"] = distribution.missing_fraction;
    return j;
}

ojson to_json(const MetricsReport& report) {
    ojson j;
    j["subset"] = report.subset;
    j["image_count"] = report.image_count;
    if (report.empty) {
        j["empty"] = true;
        return j;
    }
    j["mA"] = report.mean_accuracy;
    ojson per_attr = ojson::array();
    for (const AttributeMetric& a : report.per_attribute) {
        ojson item;
        item["name"] = a.name;
        item["tpr"] = a.tpr;
        item["tnr"] = a.tnr;
        item["acc"] = a.accuracy;
        per_attr.push_back(std::move(item));
    }
    j["per_attribute"] = std::move(per_attr);
    j["excluded"] = report.excluded;
    j["accuracy"] = report.instance.accuracy;
    j["precision"] = report.instance.precision;
    j["recall"] = report.instance.recall;
    j["f1"] = report.instance.f1;
    j["conventions"] = metric_conventions_json();
    return j;
}

ojson metric_conventions_json() {
    ojson j;
    j["mean_accuracy"] = "per attribute (TPR + TNR) / 2, averaged over attributes with at least one positive and one negative example; others are excluded and listed";
    j["instance"] = "set-based accuracy, precision, recall over positive attributes per image; both sets empty scores 1, one side empty scores 0; F1 is the harmonic mean of aggregated precision and recall";
    j["binarization"] = "probability >= threshold maps to 1; logits pass through the logistic function first";
    return j;
}

}  // namespace zsplit
