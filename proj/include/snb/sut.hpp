#pragma once

#include "snb/model.hpp"
#include "snb/query.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace snb {

/// What one committed update removed, root included.
struct CascadeSummary {
    std::size_t persons = 0;
    std::size_t knows = 0;
    std::size_t forums = 0;
    std::size_t memberships = 0;
    std::size_t messages = 0;
    std::size_t likes = 0;
    std::vector<EntityId> deleted_messages;

    std::size_t total() const { return persons + knows + forums + memberships + messages + likes; }
    CascadeSummary& operator+=(const CascadeSummary& o);
};

struct CommitInfo {
    std::uint64_t version = 0;
    CascadeSummary cascade;
};

/// In-process system under test, as driven by the benchmark driver.
class SystemUnderTest {
public:
    virtual ~SystemUnderTest() = default;
    virtual std::string name() const = 0;
    /// Loads the initial snapshot into an empty store. Throws IntegrityError on dangling references.
    virtual void bulk_load(const TemporalGraph& snapshot) = 0;
    virtual QueryResult execute_query(const QueryInstance& query) = 0;
    /// Applies one INS/DEL operation atomically.
    virtual CommitInfo execute_update(const UpdateOperation& op) = 0;
    virtual std::uint64_t current_commit_version() const = 0;
    /// The live state at the latest commit, lifecycles without deletions.
    virtual TemporalGraph materialize() const = 0;
};

/// Reads DIR/snapshot/*.csv (or DIR itself when it holds the CSVs) and bulk-loads it.
void bulk_load_dir(SystemUnderTest& sut, const std::filesystem::path& dir);

/// Orders a snapshot's entities as insert operations whose dependencies precede them
/// (persons, forums, memberships, knows, posts, comments parent-first, likes).
/// Throws IntegrityError when a reference cannot be resolved or replies form a cycle.
std::vector<UpdateOperation> snapshot_as_inserts(const TemporalGraph& snapshot);

} // namespace snb
