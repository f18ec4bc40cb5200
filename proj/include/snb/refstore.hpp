#pragma once

#include "snb/sut.hpp"

#include <functional>
#include <memory>
#include <optional>

namespace snb {

/// Deliberate defects, used only by the isolation checks to prove they can fail.
struct StoreFaults {
    bool read_latest = false;   ///< read transactions ignore their pinned version
    bool split_cascade = false; ///< message deletions publish the root before its descendants
};

/// Multi-version in-memory graph store. One writer at a time (commit lock); readers pin the
/// latest committed version and never take a lock.
class ReferenceStore : public SystemUnderTest {
public:
    explicit ReferenceStore(ModeratorDeletionPolicy policy = ModeratorDeletionPolicy::DeleteForum,
                            StoreFaults faults = {});
    ~ReferenceStore() override;
    ReferenceStore(const ReferenceStore&) = delete;
    ReferenceStore& operator=(const ReferenceStore&) = delete;

    std::string name() const override { return "reference"; }
    void bulk_load(const TemporalGraph& snapshot) override;
    QueryResult execute_query(const QueryInstance& query) override;
    CommitInfo execute_update(const UpdateOperation& op) override;
    std::uint64_t current_commit_version() const override;
    TemporalGraph materialize() const override;

    /// Applies all operations as one transaction: either every op becomes visible at the same
    /// version or, when one throws, none does.
    CommitInfo commit(std::span<const UpdateOperation> ops);

    /// Called by the writer, under the commit lock, each time a new version becomes visible.
    void set_publish_hook(std::function<void(std::uint64_t version)> hook);

    struct State;

    /// A read-only view pinned to one commit version.
    class ReadTxn {
    public:
        std::uint64_t version() const { return version_; }

        std::vector<Cr3Row> cr3(const Cr3Params& p) const;
        PathLength cr13(const PathParams& p) const;
        CheapestPath cr14(const PathParams& p) const;
        std::vector<Sr2Row> sr2(const PersonParam& p) const;
        Sr6Result sr6(const MessageParam& p) const;
        QueryResult run(const QueryInstance& q) const;

        bool person_visible(EntityId id) const;
        bool message_visible(EntityId id) const;
        bool knows_visible(EntityId a, EntityId b) const;
        /// Live friends, ascending.
        std::vector<EntityId> friends(EntityId person) const;
        /// Direct replies that are visible, ascending.
        std::vector<EntityId> replies(EntityId message) const;
        std::int64_t interactions(EntityId a, EntityId b) const;
        TemporalGraph materialize() const;

    private:
        friend class ReferenceStore;
        ReadTxn(const State* s, std::uint64_t v) : state_(s), version_(v) {}
        std::uint64_t at() const;
        const State* state_;
        std::uint64_t version_;
    };

    ReadTxn begin_read() const;

private:
    std::unique_ptr<State> state_;
};

} // namespace snb
