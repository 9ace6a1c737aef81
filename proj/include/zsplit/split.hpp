#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "zsplit/core.hpp"
#include "zsplit/rng.hpp"

namespace zsplit {

/// Key of an identity group. Images without an identity label get a
/// synthetic singleton key; the kind flag keeps synthetic keys from ever
/// colliding with a real identity string.
struct IdentityKey {
    bool synthetic = false;
    std::string value;

    auto operator<=>(const IdentityKey&) const = default;
};

/// All images sharing one identity. Groups are the atomic unit of split
/// construction: a group is never divided across partitions.
struct IdentityGroup {
    IdentityKey key;
    std::vector<std::uint32_t> record_indices;  // into Dataset::records

    std::size_t image_count() const { return record_indices.size(); }
};

/// One group per distinct identity, plus a singleton group per
/// identity-missing image. Groups are ordered by first occurrence in the
/// dataset, so the result is deterministic.
std::vector<IdentityGroup> identity_groups(const Dataset& dataset);

/// Per-criterion violation magnitudes, each normalized by its threshold so
/// the terms are commensurate; 0 exactly when the criterion is satisfied.
/// Criterion 2 never appears here: group-atomic search preserves it by
/// construction.
struct ViolationObjective {
    double c1 = 0.0;
    double c3 = 0.0;
    double c4 = 0.0;
    double c5 = 0.0;
    double total = 0.0;

    bool satisfied() const { return total == 0.0; }
};

/// Split construction failed; carries the best attempt seen so far when
/// any restart completed.
struct infeasible_error : std::runtime_error {
    explicit infeasible_error(const std::string& message) : std::runtime_error(message) {}
    infeasible_error(const std::string& message, SplitReport report, ViolationObjective objective)
        : std::runtime_error(message),
          best_report(std::move(report)),
          best_objective(objective) {}

    std::optional<SplitReport> best_report;
    std::optional<ViolationObjective> best_objective;
};

/// Measure an assignment against the five criteria. Failing criteria are
/// report content, not errors. The assignment must be total.
SplitReport criteria_evaluate(const Dataset& dataset, const SplitAssignment& assignment,
                              const SplitConfig& config);

/// Seeded starting point: shuffle the groups, then cut the shuffled order
/// at the cumulative identity-count proportions closest to ratio_targets.
/// Whole groups only. Throws infeasible_error with fewer than 3 groups.
SplitAssignment initial_assignment(const Dataset& dataset, const std::vector<IdentityGroup>& groups,
                                   const SplitConfig& config, Rng& rng);

/// First-improvement hill climbing over group moves and pairwise group
/// swaps. A proposal is accepted only if it strictly decreases the
/// objective total; stops at total == 0 or after max_moves proposals.
/// Group atomicity holds at every step. May return a non-zero objective;
/// callers restart with a fresh seed.
std::pair<SplitAssignment, ViolationObjective> local_search(const Dataset& dataset,
                                                            SplitAssignment assignment,
                                                            const SplitConfig& config, Rng& rng);

struct SplitResult {
    SplitAssignment assignment;
    SplitReport report;
};

/// Restarted search: up to max_restarts rounds of initial_assignment +
/// local_search on sub-seeds derived from config.seed. Returns the result
/// of the lowest restart index whose report passes every criterion, so the
/// outcome is identical whether restarts run on 1 worker or many. Throws
/// infeasible_error carrying the best report when every restart fails.
SplitResult build_zero_shot_split(const Dataset& dataset, const SplitConfig& config,
                                  unsigned workers = 1);

}  // namespace zsplit
