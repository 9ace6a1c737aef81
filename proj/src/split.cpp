#include "zsplit/split.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <numeric>
#include <sstream>
#include <thread>
#include <unordered_map>

#include "zsplit/errors.hpp"

namespace zsplit {

namespace {

std::array<double, 3> normalized_targets(const SplitConfig& config) {
    const double sum = config.ratio_targets[0] + config.ratio_targets[1] + config.ratio_targets[2];
    return {config.ratio_targets[0] / sum, config.ratio_targets[1] / sum,
            config.ratio_targets[2] / sum};
}

/// Integer counts an assignment exposes to the objective. c5_measured is
/// the largest attribute-ratio gap over the checked partition pairs.
struct CriterionInputs {
    std::array<std::int64_t, 3> identities{};
    std::int64_t identity_total = 0;
    std::array<std::int64_t, 3> images{};
    double c5_measured = 0.0;
};

/// Largest diff value still strictly below the threshold, for integer diffs.
std::int64_t strict_upper(double threshold) {
    const double f = std::floor(threshold);
    if (threshold == f) return static_cast<std::int64_t>(f) - 1;
    return static_cast<std::int64_t>(f);
}

/// The objective is zero exactly when criteria 1, 3, 4 and 5 are all
/// satisfied under the same comparisons criteria_evaluate applies, so a
/// search reaching total == 0 has found a passing split (criterion 2 holds
/// by group atomicity).
ViolationObjective objective_from(const CriterionInputs& in, const SplitConfig& config) {
    ViolationObjective obj;
    const auto targets = normalized_targets(config);

    double dev = 0.0;
    for (int p = 0; p < 3; ++p) {
        const double frac =
            in.identity_total > 0
                ? static_cast<double>(in.identities[p]) / static_cast<double>(in.identity_total)
                : 0.0;
        dev = std::max(dev, std::abs(frac - targets[p]) / targets[p]);
    }
    obj.c1 = std::max(0.0, (dev - config.ratio_tolerance) /
                               std::max(config.ratio_tolerance, 1e-12));

    const std::int64_t id_diff = std::abs(in.identities[1] - in.identities[2]);
    const double t3 = static_cast<double>(in.identity_total) * config.t_id;
    obj.c3 = std::max<double>(0.0, static_cast<double>(id_diff - strict_upper(t3))) /
             std::max(t3, 1.0);

    const std::int64_t img_diff = std::abs(in.images[1] - in.images[2]);
    obj.c4 = std::max<double>(0.0, static_cast<double>(img_diff - (config.t_img - 1))) /
             std::max<double>(static_cast<double>(config.t_img), 1.0);

    if (in.c5_measured < config.t_attr) {
        obj.c5 = 0.0;
    } else {
        // The epsilon floor keeps the measured == t_attr boundary (a strict
        // comparison failure with zero overshoot) visibly nonzero.
        obj.c5 = std::max((in.c5_measured - config.t_attr) / config.t_attr, 1e-12);
    }

    obj.total = obj.c1 + obj.c3 + obj.c4 + obj.c5;
    return obj;
}

/// Per-partition totals a group move can update in O(M).
struct Aggregates {
    std::array<std::int64_t, 3> groups{};
    std::array<std::int64_t, 3> images{};
    std::array<std::vector<std::int64_t>, 3> positives;  // one entry per attribute

    explicit Aggregates(std::size_t attribute_count) {
        for (auto& v : positives) v.assign(attribute_count, 0);
    }
};

double measured_ratio_gap(const Aggregates& agg, const SplitConfig& config) {
    const std::size_t m = agg.positives[0].size();
    auto ratio = [&agg](int p, std::size_t j) {
        return agg.images[p] > 0 ? static_cast<double>(agg.positives[p][j]) /
                                       static_cast<double>(agg.images[p])
                                 : 0.0;
    };
    double measured = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        measured = std::max(measured, std::abs(ratio(1, j) - ratio(2, j)));
        if (config.attr_check_train) {
            measured = std::max(measured, std::abs(ratio(0, j) - ratio(2, j)));
        }
    }
    return measured;
}

ViolationObjective objective_of(const Aggregates& agg, const SplitConfig& config) {
    CriterionInputs in;
    in.identities = agg.groups;
    in.identity_total = agg.groups[0] + agg.groups[1] + agg.groups[2];
    in.images = agg.images;
    in.c5_measured = measured_ratio_gap(agg, config);
    return objective_from(in, config);
}

/// Per-group label totals, flattened group-major.
struct GroupProfile {
    std::size_t attribute_count = 0;
    std::vector<std::int64_t> images;     // per group
    std::vector<std::int64_t> positives;  // group * attribute_count + j

    const std::int64_t* row(std::size_t g) const { return positives.data() + g * attribute_count; }
};

GroupProfile profile_groups(const Dataset& dataset, const std::vector<IdentityGroup>& groups) {
    GroupProfile profile;
    profile.attribute_count = dataset.attribute_count();
    profile.images.reserve(groups.size());
    profile.positives.assign(groups.size() * profile.attribute_count, 0);
    for (std::size_t g = 0; g < groups.size(); ++g) {
        profile.images.push_back(static_cast<std::int64_t>(groups[g].image_count()));
        std::int64_t* row = profile.positives.data() + g * profile.attribute_count;
        for (std::uint32_t i : groups[g].record_indices) {
            const Record& r = dataset.records[i];
            for (std::size_t j = 0; j < profile.attribute_count; ++j) row[j] += r.labels[j];
        }
    }
    return profile;
}

void apply_group(Aggregates& agg, const GroupProfile& profile, std::size_t g, int partition,
                 int sign) {
    agg.groups[partition] += sign;
    agg.images[partition] += sign * profile.images[g];
    const std::int64_t* row = profile.row(g);
    for (std::size_t j = 0; j < profile.attribute_count; ++j) {
        agg.positives[partition][j] += sign * row[j];
    }
}

SplitAssignment assignment_from_parts(const Dataset& dataset,
                                      const std::vector<IdentityGroup>& groups,
                                      const std::vector<int>& part_of_group) {
    SplitAssignment assignment;
    assignment.partition_of.reserve(dataset.size());
    for (std::size_t g = 0; g < groups.size(); ++g) {
        const auto p = static_cast<Partition>(part_of_group[g]);
        for (std::uint32_t i : groups[g].record_indices) {
            assignment.partition_of.emplace(dataset.records[i].image_id, p);
        }
    }
    return assignment;
}

}  // namespace

std::vector<IdentityGroup> identity_groups(const Dataset& dataset) {
    std::vector<IdentityGroup> groups;
    std::unordered_map<std::string_view, std::size_t> index_of;
    for (std::size_t i = 0; i < dataset.records.size(); ++i) {
        const Record& r = dataset.records[i];
        if (r.identity) {
            auto [it, inserted] = index_of.emplace(*r.identity, groups.size());
            if (inserted) groups.push_back({{false, *r.identity}, {}});
            groups[it->second].record_indices.push_back(static_cast<std::uint32_t>(i));
        } else {
            groups.push_back({{true, r.image_id}, {static_cast<std::uint32_t>(i)}});
        }
    }
    return groups;
}

SplitReport criteria_evaluate(const Dataset& dataset, const SplitAssignment& assignment,
                              const SplitConfig& config) {
    config.check();
    require_total(dataset, assignment);
    const std::size_t m = dataset.attribute_count();

    std::array<std::int64_t, 3> images{};
    std::array<std::vector<std::int64_t>, 3> positives;
    for (auto& v : positives) v.assign(m, 0);
    std::unordered_map<std::string_view, unsigned> identity_mask;
    std::array<std::int64_t, 3> missing{};

    for (const Record& r : dataset.records) {
        const int p = static_cast<int>(assignment.at(r.image_id));
        ++images[p];
        for (std::size_t j = 0; j < m; ++j) positives[p][j] += r.labels[j];
        if (r.identity) {
            identity_mask[*r.identity] |= 1u << p;
        } else {
            ++missing[p];
        }
    }

    SplitReport report;
    std::size_t spanning = 0;
    std::array<std::int64_t, 3> identities{};
    for (const auto& [identity, mask] : identity_mask) {
        int bits = 0;
        for (int p = 0; p < 3; ++p) {
            if (mask & (1u << p)) {
                ++identities[p];
                ++bits;
            }
        }
        if (bits >= 2) ++spanning;
    }
    for (int p = 0; p < 3; ++p) identities[p] += missing[p];
    const std::int64_t identity_total = static_cast<std::int64_t>(identity_mask.size()) +
                                        missing[0] + missing[1] + missing[2];

    for (int p = 0; p < 3; ++p) {
        report.identity_counts[p] = static_cast<std::size_t>(identities[p]);
        report.image_counts[p] = static_cast<std::size_t>(images[p]);
    }

    const auto targets = normalized_targets(config);
    double dev = 0.0;
    for (int p = 0; p < 3; ++p) {
        const double frac =
            identity_total > 0
                ? static_cast<double>(identities[p]) / static_cast<double>(identity_total)
                : 0.0;
        report.identity_fractions[p] = frac;
        dev = std::max(dev, std::abs(frac - targets[p]) / targets[p]);
    }
    report.c1_max_deviation = dev;
    report.c1_tolerance = config.ratio_tolerance;
    report.c1_pass = dev <= config.ratio_tolerance;

    report.c2_spanning_identities = spanning;
    report.c2_pass = spanning == 0;

    report.c3_identity_diff = static_cast<std::size_t>(std::abs(identities[1] - identities[2]));
    report.c3_threshold = static_cast<double>(identity_total) * config.t_id;
    report.c3_pass = static_cast<double>(report.c3_identity_diff) < report.c3_threshold;

    report.c4_image_diff = static_cast<std::size_t>(std::abs(images[1] - images[2]));
    report.c4_threshold = config.t_img;
    report.c4_pass = static_cast<std::int64_t>(report.c4_image_diff) < config.t_img;

    auto ratio = [&](int p, std::size_t j) {
        return images[p] > 0
                   ? static_cast<double>(positives[p][j]) / static_cast<double>(images[p])
                   : 0.0;
    };
    double vt_max = 0.0;
    std::size_t vt_arg = 0;
    double tt_max = 0.0;
    std::size_t tt_arg = 0;
    for (std::size_t j = 0; j < m; ++j) {
        const double vt = std::abs(ratio(1, j) - ratio(2, j));
        if (vt > vt_max) {
            vt_max = vt;
            vt_arg = j;
        }
        const double tt = std::abs(ratio(0, j) - ratio(2, j));
        if (tt > tt_max) {
            tt_max = tt;
            tt_arg = j;
        }
    }
    report.c5_max_ratio_diff = vt_max;
    report.c5_worst_attribute = m > 0 ? dataset.catalog.names[vt_arg] : "";
    report.c5_threshold = config.t_attr;
    report.c5_pass = vt_max < config.t_attr;
    if (config.attr_check_train) {
        report.c5_train_test_diff = tt_max;
        report.c5_train_test_worst = m > 0 ? dataset.catalog.names[tt_arg] : "";
        report.c5_pass = report.c5_pass && tt_max < config.t_attr;
    }

    report.overall = report.c1_pass && report.c2_pass && report.c3_pass && report.c4_pass &&
                     report.c5_pass;
    return report;
}

SplitAssignment initial_assignment(const Dataset& dataset, const std::vector<IdentityGroup>& groups,
                                   const SplitConfig& config, Rng& rng) {
    const std::size_t g = groups.size();
    if (g < 3) {
        throw infeasible_error("dataset has " + std::to_string(g) +
                               " identity groups; a three-way split needs at least 3");
    }
    std::vector<std::size_t> order(g);
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(order);

    const auto targets = normalized_targets(config);
    auto cut = [g](double fraction) {
        return static_cast<std::size_t>(std::llround(fraction * static_cast<double>(g)));
    };
    std::size_t cut1 = cut(targets[0]);
    std::size_t cut2 = cut(targets[0] + targets[1]);
    cut1 = std::clamp<std::size_t>(cut1, 1, g - 2);
    cut2 = std::clamp<std::size_t>(cut2, cut1 + 1, g - 1);

    std::vector<int> part_of_group(g, 0);
    for (std::size_t k = cut1; k < cut2; ++k) part_of_group[order[k]] = 1;
    for (std::size_t k = cut2; k < g; ++k) part_of_group[order[k]] = 2;
    return assignment_from_parts(dataset, groups, part_of_group);
}

std::pair<SplitAssignment, ViolationObjective> local_search(const Dataset& dataset,
                                                            SplitAssignment assignment,
                                                            const SplitConfig& config, Rng& rng) {
    config.check();
    require_total(dataset, assignment);
    const auto groups = identity_groups(dataset);
    const std::size_t g = groups.size();
    const GroupProfile profile = profile_groups(dataset, groups);

    std::vector<int> part_of_group(g, 0);
    for (std::size_t k = 0; k < g; ++k) {
        const int p = static_cast<int>(assignment.at(dataset.records[groups[k].record_indices[0]].image_id));
        for (std::uint32_t i : groups[k].record_indices) {
            const int q = static_cast<int>(assignment.at(dataset.records[i].image_id));
            if (q != p) {
                throw validation_error("identity '" + groups[k].key.value +
                                       "' spans multiple partitions; groups must stay whole");
            }
        }
        part_of_group[k] = p;
    }

    Aggregates agg(profile.attribute_count);
    for (std::size_t k = 0; k < g; ++k) apply_group(agg, profile, k, part_of_group[k], +1);

    // Membership lists give O(1) draws of a group from a chosen partition,
    // so swap proposals can target the valid/test pair criteria 4 and 5
    // actually constrain.
    std::array<std::vector<std::size_t>, 3> members;
    std::vector<std::size_t> slot(g, 0);
    for (std::size_t k = 0; k < g; ++k) {
        slot[k] = members[part_of_group[k]].size();
        members[part_of_group[k]].push_back(k);
    }
    auto move_member = [&](std::size_t k, int from, int to) {
        auto& src = members[from];
        const std::size_t at = slot[k];
        src[at] = src.back();
        slot[src[at]] = at;
        src.pop_back();
        slot[k] = members[to].size();
        members[to].push_back(k);
        part_of_group[k] = to;
    };

    ViolationObjective current = objective_of(agg, config);
    for (std::int64_t proposal = 0; proposal < config.max_moves && !current.satisfied();
         ++proposal) {
        if (rng.below(2) == 0) {
            // Relocate one group to another partition.
            const std::size_t k = rng.below(g);
            const int from = part_of_group[k];
            if (agg.groups[from] <= 1) continue;  // never empty a partition
            const int offset = static_cast<int>(rng.below(2));
            const int to = (from + 1 + offset) % 3;
            apply_group(agg, profile, k, from, -1);
            apply_group(agg, profile, k, to, +1);
            const ViolationObjective candidate = objective_of(agg, config);
            if (candidate.total < current.total) {
                move_member(k, from, to);
                current = candidate;
            } else {
                apply_group(agg, profile, k, to, -1);
                apply_group(agg, profile, k, from, +1);
            }
        } else {
            // Swap two groups across partitions; group counts are unchanged.
            // Most swaps are drawn valid/test since only that pair can repair
            // the image-count and attribute-ratio balance.
            std::size_t a, b;
            if (rng.below(10) < 7 && !members[1].empty() && !members[2].empty()) {
                a = members[1][rng.below(members[1].size())];
                b = members[2][rng.below(members[2].size())];
            } else {
                a = rng.below(g);
                b = rng.below(g);
            }
            const int pa = part_of_group[a];
            const int pb = part_of_group[b];
            if (a == b || pa == pb) continue;
            apply_group(agg, profile, a, pa, -1);
            apply_group(agg, profile, b, pb, -1);
            apply_group(agg, profile, a, pb, +1);
            apply_group(agg, profile, b, pa, +1);
            const ViolationObjective candidate = objective_of(agg, config);
            if (candidate.total < current.total) {
                move_member(a, pa, pb);
                move_member(b, pb, pa);
                current = candidate;
            } else {
                apply_group(agg, profile, a, pb, -1);
                apply_group(agg, profile, b, pa, -1);
                apply_group(agg, profile, a, pa, +1);
                apply_group(agg, profile, b, pb, +1);
            }
        }
    }
    return {assignment_from_parts(dataset, groups, part_of_group), current};
}

SplitResult build_zero_shot_split(const Dataset& dataset, const SplitConfig& config,
                                  unsigned workers) {
    config.check();
    {
        const ValidationResult validation = validate_dataset(dataset);
        if (!validation.ok()) {
            throw validation_error("dataset invalid: " + validation.issues.front().message +
                                   (validation.issues.size() > 1
                                        ? " (and " + std::to_string(validation.issues.size() - 1) +
                                              " more issues)"
                                        : ""));
        }
    }
    const auto groups = identity_groups(dataset);

    struct RestartResult {
        bool computed = false;
        bool passing = false;
        SplitAssignment assignment;
        SplitReport report;
        ViolationObjective objective;
    };
    const int rounds = config.max_restarts;
    std::vector<RestartResult> results(static_cast<std::size_t>(rounds));

    auto run_restart = [&](int r) {
        RestartResult out;
        Rng rng(Rng::derive(config.seed, static_cast<std::uint64_t>(r)));
        SplitAssignment init = initial_assignment(dataset, groups, config, rng);
        auto [searched, objective] = local_search(dataset, std::move(init), config, rng);
        out.report = criteria_evaluate(dataset, searched, config);
        out.assignment = std::move(searched);
        out.objective = objective;
        out.passing = objective.satisfied() && out.report.overall;
        out.computed = true;
        return out;
    };

    const unsigned thread_count =
        std::min<unsigned>(std::max(1u, workers), static_cast<unsigned>(rounds));
    if (thread_count <= 1) {
        for (int r = 0; r < rounds; ++r) {
            results[r] = run_restart(r);
            if (results[r].passing) break;  // lowest passing index, same as parallel
        }
    } else {
        std::atomic<int> next{0};
        std::atomic<int> winner{rounds};
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(thread_count);
        for (unsigned w = 0; w < thread_count; ++w) {
            pool.emplace_back([&, w] {
                try {
                    for (;;) {
                        const int r = next.fetch_add(1);
                        // Indices are claimed in order, so every index below
                        // the winner is owned by some worker and will finish.
                        if (r >= rounds || r > winner.load()) break;
                        results[r] = run_restart(r);
                        if (results[r].passing) {
                            int expected = winner.load();
                            while (r < expected && !winner.compare_exchange_weak(expected, r)) {
                            }
                        }
                    }
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
        for (auto& t : pool) t.join();
        for (const auto& e : errors) {
            if (e) std::rethrow_exception(e);
        }
    }

    for (auto& result : results) {
        if (result.computed && result.passing) {
            return SplitResult{std::move(result.assignment), std::move(result.report)};
        }
    }

    const RestartResult* best = nullptr;
    for (const auto& result : results) {
        if (result.computed && (!best || result.objective.total < best->objective.total)) {
            best = &result;
        }
    }
    std::ostringstream os;
    os << "no feasible split found in " << rounds << " restart" << (rounds == 1 ? "" : "s");
    if (best) {
        os << "; best attempt left objective " << best->objective.total << " (ratio "
           << best->objective.c1 << ", identity balance " << best->objective.c3
           << ", image balance " << best->objective.c4 << ", attribute balance "
           << best->objective.c5 << ")";
        throw infeasible_error(os.str(), best->report, best->objective);
    }
    throw infeasible_error(os.str());
}

}  // namespace zsplit
