#pragma once

#include "snb/sut.hpp"

#include <mutex>
#include <unordered_map>

namespace snb {

/// Brute-force store: flat entity lists, full scans for every query, fixpoint cascades.
/// Slow and obviously correct; used as the oracle for the reference store.
class NaiveStore : public SystemUnderTest {
public:
    explicit NaiveStore(ModeratorDeletionPolicy policy = ModeratorDeletionPolicy::DeleteForum) : policy_(policy) {}

    std::string name() const override { return "naive"; }
    void bulk_load(const TemporalGraph& snapshot) override;
    QueryResult execute_query(const QueryInstance& query) override;
    CommitInfo execute_update(const UpdateOperation& op) override;
    std::uint64_t current_commit_version() const override;
    TemporalGraph materialize() const override;

private:
    template <typename T>
    struct Slot {
        T value;
        bool alive = true;
    };

    void insert(const UpdateOperation& op);
    CascadeSummary remove(const UpdateOperation& op);
    CascadeSummary cascade();

    bool person_alive(EntityId id) const;
    bool forum_alive(EntityId id) const;
    const Message* message_alive(EntityId id) const;

    std::vector<Cr3Row> cr3(const Cr3Params& q) const;
    PathLength cr13(const PathParams& q) const;
    CheapestPath cr14(const PathParams& q) const;
    std::vector<Sr2Row> sr2(const PersonParam& q) const;
    Sr6Result sr6(const MessageParam& q) const;

    ModeratorDeletionPolicy policy_;
    mutable std::mutex mu_;
    std::uint64_t version_ = 0;
    std::vector<Slot<Person>> persons_;
    std::vector<Slot<KnowsEdge>> knows_;
    std::vector<Slot<Forum>> forums_;
    std::vector<Slot<HasMemberEdge>> members_;
    std::vector<Slot<Message>> messages_;
    std::vector<Slot<LikesEdge>> likes_;
    std::unordered_map<EntityId, std::size_t> person_at_, forum_at_, message_at_;
};

} // namespace snb
