#pragma once

#include "snb/model.hpp"

#include <cstdint>
#include <vector>

namespace snb {

struct GenConfig {
    std::uint64_t seed = 42;
    int num_persons = 1000;
    SimInstant simulation_start = default_simulation_start();
    SimInstant simulation_end = default_simulation_end();
    double cutoff_fraction = 0.97;
    SimDuration t_safe = SimDuration::seconds(10);
    double degree_exponent = 2.0;
    double homophily_weight = 0.5;
    int flashmob_count = 2;
    double person_deletion_rate = 0.05;
    /// Probability that a knows/likes/membership/message/forum is deleted on its own.
    double content_deletion_rate = 0.004;
    /// Mean posts per forum membership, before per-person activity scaling.
    double posts_per_membership = 1.5;
    ModeratorDeletionPolicy moderator_policy = ModeratorDeletionPolicy::DeleteForum;

    /// Throws ConfigInvalid naming the offending field.
    void validate() const;
    bool operator==(const GenConfig&) const = default;
};

TemporalGraph generate_temporal_graph(const GenConfig& config);

struct SnapshotAndStream {
    SimInstant cutoff;
    TemporalGraph snapshot; ///< state at the cutoff; lifecycles carry no deletions
    std::vector<UpdateOperation> stream;
    /// Entities created and deleted before the cutoff (in neither snapshot nor stream).
    std::size_t deleted_before_cutoff = 0;

    bool operator==(const SnapshotAndStream&) const = default;
};

/// start + fraction * (end - start), truncated to the day.
SimInstant cutoff_instant(const GenConfig& config);

SnapshotAndStream split_at_cutoff(const TemporalGraph& graph, const GenConfig& config);

/// Shifts ops so that scheduled_time - dependency_time >= t_safe, then stable re-sorts.
/// Throws UnsatisfiableDependency when a shift would pass simulation_end.
std::vector<UpdateOperation> enforce_t_safe(std::vector<UpdateOperation> stream, SimDuration t_safe,
                                            SimInstant simulation_end);

/// Ids of every entity an op references (payload endpoints), used for dependency auditing.
std::vector<EntityId> referenced_entities(const UpdateOperation& op);

} // namespace snb
