#include "zsplit/metrics.hpp"

#include <algorithm>
#include <unordered_set>

#include "zsplit/errors.hpp"
#include "zsplit/numeric.hpp"

namespace zsplit {

BinaryMatrix binarize(const PredictionSet& predictions, const std::vector<std::string>& ids) {
    const std::size_t cols = predictions.scores.empty() ? 0 : predictions.scores.front().size();
    BinaryMatrix out = BinaryMatrix::zeros(ids.size(), cols);
    for (std::size_t i = 0; i < ids.size(); ++i) {
        const std::vector<double>& row = predictions.row(ids[i]);
        for (std::size_t j = 0; j < row.size(); ++j) {
            const double p = predictions.kind == ScoreKind::Logits ? sigmoid(row[j]) : row[j];
            out.set(i, j, p >= predictions.threshold ? 1 : 0);
        }
    }
    return out;
}

BinaryMatrix label_matrix(const Dataset& dataset, const std::vector<std::string>& ids) {
    const auto index = index_by_id(dataset);
    BinaryMatrix out = BinaryMatrix::zeros(ids.size(), dataset.attribute_count());
    for (std::size_t i = 0; i < ids.size(); ++i) {
        auto it = index.find(ids[i]);
        if (it == index.end()) {
            throw validation_error("id '" + ids[i] + "' is not in the dataset");
        }
        const Record& r = dataset.records[it->second];
        for (std::size_t j = 0; j < r.labels.size(); ++j) out.set(i, j, r.labels[j]);
    }
    return out;
}

MeanAccuracyResult mean_accuracy(const BinaryMatrix& labels, const BinaryMatrix& predictions,
                                 const AttributeCatalog& catalog) {
    if (labels.rows != predictions.rows || labels.cols != predictions.cols ||
        labels.cols != catalog.size()) {
        throw std::invalid_argument("label and prediction matrices must share the catalog's shape");
    }
    MeanAccuracyResult result;
    std::vector<double> accuracies;
    for (std::size_t j = 0; j < labels.cols; ++j) {
        ConfusionPerAttribute c;
        c.name = catalog.names[j];
        for (std::size_t i = 0; i < labels.rows; ++i) {
            const bool y = labels.at(i, j) != 0;
            const bool p = predictions.at(i, j) != 0;
            if (y && p) ++c.tp;
            else if (y && !p) ++c.fn;
            else if (!y && p) ++c.fp;
            else ++c.tn;
        }
        result.confusion.push_back(c);
        if (c.tp + c.fn == 0 || c.tn + c.fp == 0) {
            result.excluded.push_back(c.name);
            continue;
        }
        AttributeMetric metric;
        metric.name = c.name;
        metric.tpr = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
        metric.tnr = static_cast<double>(c.tn) / static_cast<double>(c.tn + c.fp);
        metric.accuracy = (metric.tpr + metric.tnr) / 2.0;
        accuracies.push_back(metric.accuracy);
        result.per_attribute.push_back(std::move(metric));
    }
    if (accuracies.empty()) {
        throw validation_error("mA undefined: every attribute lacks positives or negatives");
    }
    result.mean_accuracy =
        pairwise_sum(accuracies) / static_cast<double>(accuracies.size());
    return result;
}

InstanceMetrics instance_metrics(const BinaryMatrix& labels, const BinaryMatrix& predictions) {
    if (labels.rows != predictions.rows || labels.cols != predictions.cols) {
        throw std::invalid_argument("label and prediction matrices must share a shape");
    }
    InstanceMetrics metrics;
    if (labels.rows == 0) return metrics;

    std::vector<double> acc, prec, rec;
    acc.reserve(labels.rows);
    prec.reserve(labels.rows);
    rec.reserve(labels.rows);
    for (std::size_t i = 0; i < labels.rows; ++i) {
        std::size_t y_size = 0, p_size = 0, inter = 0;
        for (std::size_t j = 0; j < labels.cols; ++j) {
            const bool y = labels.at(i, j) != 0;
            const bool p = predictions.at(i, j) != 0;
            y_size += y;
            p_size += p;
            inter += y && p;
        }
        const std::size_t uni = y_size + p_size - inter;
        acc.push_back(uni == 0 ? 1.0
                               : static_cast<double>(inter) / static_cast<double>(uni));
        prec.push_back(p_size == 0 ? (y_size == 0 ? 1.0 : 0.0)
                                   : static_cast<double>(inter) / static_cast<double>(p_size));
        rec.push_back(y_size == 0 ? (p_size == 0 ? 1.0 : 0.0)
                                  : static_cast<double>(inter) / static_cast<double>(y_size));
    }
    const double n = static_cast<double>(labels.rows);
    metrics.accuracy = pairwise_sum(acc) / n;
    metrics.precision = pairwise_sum(prec) / n;
    metrics.recall = pairwise_sum(rec) / n;
    const double pr = metrics.precision + metrics.recall;
    metrics.f1 = pr > 0.0 ? 2.0 * metrics.precision * metrics.recall / pr : 0.0;
    return metrics;
}

MetricsReport evaluate_subset(const Dataset& dataset, const std::vector<std::string>& ids,
                              const PredictionSet& predictions, const std::string& subset_name) {
    MetricsReport report;
    report.subset = subset_name;
    report.image_count = ids.size();
    if (ids.empty()) {
        report.empty = true;
        return report;
    }
    for (const std::string& id : ids) {
        if (!predictions.covers(id)) {
            throw validation_error("predictions do not cover image id '" + id + "'");
        }
    }
    const BinaryMatrix labels = label_matrix(dataset, ids);
    const BinaryMatrix preds = binarize(predictions, ids);
    MeanAccuracyResult ma = mean_accuracy(labels, preds, dataset.catalog);
    report.mean_accuracy = ma.mean_accuracy;
    report.per_attribute = std::move(ma.per_attribute);
    report.excluded = std::move(ma.excluded);
    report.instance = instance_metrics(labels, preds);
    return report;
}

PartitionedEval partitioned_eval(const Dataset& dataset, const SplitAssignment& assignment,
                                 const PredictionSet& predictions) {
    require_total(dataset, assignment);
    std::unordered_set<std::string_view> train_identities;
    for (const Record& r : dataset.records) {
        if (r.identity && assignment.at(r.image_id) == Partition::Train) {
            train_identities.insert(*r.identity);
        }
    }
    std::vector<std::string> all, common, unique;
    for (const Record& r : dataset.records) {
        if (assignment.at(r.image_id) != Partition::Test) continue;
        all.push_back(r.image_id);
        if (r.identity && train_identities.count(*r.identity)) {
            common.push_back(r.image_id);
        } else {
            unique.push_back(r.image_id);
        }
    }
    PartitionedEval eval;
    eval.all = evaluate_subset(dataset, all, predictions, "all");
    eval.common = evaluate_subset(dataset, common, predictions, "common-identity");
    eval.unique = evaluate_subset(dataset, unique, predictions, "unique-identity");
    return eval;
}

}  // namespace zsplit
