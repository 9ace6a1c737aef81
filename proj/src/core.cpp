#include "zsplit/core.hpp"

#include <set>
#include <sstream>
#include <stdexcept>

#include "zsplit/errors.hpp"

namespace zsplit {

const char* to_string(Partition p) {
    switch (p) {
        case Partition::Train: return "train";
        case Partition::Valid: return "valid";
        case Partition::Test: return "test";
    }
    return "?";
}

std::optional<Partition> partition_from_string(std::string_view s) {
    if (s == "train") return Partition::Train;
    if (s == "valid") return Partition::Valid;
    if (s == "test") return Partition::Test;
    return std::nullopt;
}

Partition SplitAssignment::at(const std::string& image_id) const {
    auto it = partition_of.find(image_id);
    if (it == partition_of.end()) {
        throw validation_error("assignment does not cover image id '" + image_id + "'");
    }
    return it->second;
}

void SplitConfig::check() const {
    if (!(t_id > 0.0 && t_id <= 1.0)) throw std::invalid_argument("t_id must be in (0,1]");
    if (!(t_attr > 0.0 && t_attr <= 1.0)) throw std::invalid_argument("t_attr must be in (0,1]");
    if (t_img < 0) throw std::invalid_argument("t_img must be >= 0");
    for (double t : ratio_targets) {
        if (!(t > 0.0)) throw std::invalid_argument("ratio targets must be strictly positive");
    }
    if (!(ratio_tolerance >= 0.0)) throw std::invalid_argument("ratio_tolerance must be >= 0");
    if (max_restarts < 1) throw std::invalid_argument("max_restarts must be >= 1");
    if (max_moves < 0) throw std::invalid_argument("max_moves must be >= 0");
}

ValidationResult validate_dataset(const Dataset& dataset) {
    ValidationResult result;
    auto add = [&result](std::optional<std::size_t> index, std::string id, std::string message) {
        result.issues.push_back({index, std::move(id), std::move(message)});
    };

    if (dataset.catalog.names.empty()) {
        add(std::nullopt, "", "catalog has no attributes");
    }
    std::set<std::string_view> seen_names;
    for (std::size_t j = 0; j < dataset.catalog.names.size(); ++j) {
        const std::string& name = dataset.catalog.names[j];
        if (name.empty()) {
            add(std::nullopt, "", "attribute " + std::to_string(j) + " has an empty name");
        } else if (!seen_names.insert(name).second) {
            add(std::nullopt, "", "duplicate attribute name '" + name + "'");
        }
    }

    if (dataset.records.empty()) {
        add(std::nullopt, "", "dataset has no records");
    }

    const std::size_t m = dataset.catalog.size();
    std::unordered_map<std::string_view, std::size_t> first_seen;
    for (std::size_t i = 0; i < dataset.records.size(); ++i) {
        const Record& r = dataset.records[i];
        if (r.image_id.empty()) {
            add(i, r.image_id, "empty image id");
        } else {
            auto [it, inserted] = first_seen.emplace(r.image_id, i);
            if (!inserted) {
                add(i, r.image_id,
                    "duplicate id (first seen at record " + std::to_string(it->second) + ")");
            }
        }
        if (r.identity && r.identity->empty()) {
            add(i, r.image_id, "identity is an empty string (use a missing identity instead)");
        }
        if (r.labels.size() != m) {
            add(i, r.image_id,
                "label arity " + std::to_string(r.labels.size()) + " does not match attribute count " +
                    std::to_string(m));
        } else {
            for (std::size_t j = 0; j < m; ++j) {
                if (r.labels[j] > 1) {
                    add(i, r.image_id,
                        "non-binary label " + std::to_string(int(r.labels[j])) + " for attribute '" +
                            dataset.catalog.names[j] + "'");
                }
            }
        }
    }
    return result;
}

std::unordered_map<std::string_view, std::size_t> index_by_id(const Dataset& dataset) {
    std::unordered_map<std::string_view, std::size_t> index;
    index.reserve(dataset.records.size());
    for (std::size_t i = 0; i < dataset.records.size(); ++i) {
        index.emplace(dataset.records[i].image_id, i);
    }
    return index;
}

void require_total(const Dataset& dataset, const SplitAssignment& assignment) {
    std::vector<std::string> missing;
    for (const Record& r : dataset.records) {
        if (!assignment.partition_of.count(r.image_id)) {
            missing.push_back(r.image_id);
            if (missing.size() >= 5) break;
        }
    }
    if (!missing.empty()) {
        std::ostringstream os;
        os << "assignment is not total over the dataset; missing";
        for (const auto& id : missing) os << " '" << id << "'";
        if (missing.size() >= 5) os << " ...";
        throw validation_error(os.str());
    }
    if (assignment.partition_of.size() != dataset.records.size()) {
        throw validation_error(
            "assignment covers " + std::to_string(assignment.partition_of.size()) +
            " ids but the dataset has " + std::to_string(dataset.records.size()) + " records");
    }
}

}  // namespace zsplit
