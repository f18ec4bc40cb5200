#pragma once

#include "snb/time.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

namespace snb {

using EntityId = std::int64_t;

/// Half-open existence interval: alive on [creation, deletion).
struct Lifecycle {
    SimInstant creation;
    std::optional<SimInstant> deletion;

    bool operator==(const Lifecycle&) const = default;
};

bool is_alive(const Lifecycle& entity, SimInstant t);

/// True iff the entity is alive at every instant of [from, to).
bool alive_throughout(const Lifecycle& entity, SimInstant from, SimInstant to);

struct Person {
    EntityId id = 0;
    std::string first_name;
    std::string last_name;
    EntityId country_id = 0;
    std::optional<EntityId> university_id;
    std::vector<EntityId> tag_interests;
    Lifecycle lifecycle;

    bool operator==(const Person&) const = default;
};

/// Undirected friendship, stored with person1_id < person2_id.
struct KnowsEdge {
    EntityId person1_id = 0;
    EntityId person2_id = 0;
    Lifecycle lifecycle;

    bool operator==(const KnowsEdge&) const = default;
};

KnowsEdge make_knows(EntityId a, EntityId b, Lifecycle lifecycle);

struct Forum {
    EntityId id = 0;
    EntityId moderator_person_id = 0;
    Lifecycle lifecycle;

    bool operator==(const Forum&) const = default;
};

enum class MessageKind : std::uint8_t { Post, Comment };

struct Message {
    EntityId id = 0;
    MessageKind kind = MessageKind::Post;
    EntityId creator_person_id = 0;
    std::optional<EntityId> container_forum_id; ///< Posts only.
    std::optional<EntityId> reply_to_message_id; ///< Comments only.
    EntityId country_id = 0;
    std::vector<EntityId> tag_ids;
    Lifecycle lifecycle;
    EntityId root_post_id = 0;

    bool operator==(const Message&) const = default;
    bool is_post() const { return kind == MessageKind::Post; }
};

struct LikesEdge {
    EntityId person_id = 0;
    EntityId message_id = 0;
    Lifecycle lifecycle;

    bool operator==(const LikesEdge&) const = default;
};

struct HasMemberEdge {
    EntityId forum_id = 0;
    EntityId person_id = 0;
    Lifecycle lifecycle;

    bool operator==(const HasMemberEdge&) const = default;
};

/// What happens to a Forum whose moderator is deleted.
enum class ModeratorDeletionPolicy : std::uint8_t {
    DeleteForum, ///< forum, memberships and posts are deleted with the moderator
    Reassign,    ///< smallest-id remaining live member becomes moderator; none left -> no moderator
};

std::string_view to_string(ModeratorDeletionPolicy p);
ModeratorDeletionPolicy parse_moderator_policy(std::string_view text);

// INS1 person, INS2 like post, INS3 like comment, INS4 forum, INS5 membership, INS6 post,
// INS7 comment, INS8 knows; DEL1..DEL8 remove the same entity kinds.
enum class OpType : std::uint8_t {
    Ins1 = 1, Ins2, Ins3, Ins4, Ins5, Ins6, Ins7, Ins8,
    Del1, Del2, Del3, Del4, Del5, Del6, Del7, Del8,
};

constexpr bool is_insert(OpType t) { return t <= OpType::Ins8; }
constexpr bool is_delete(OpType t) { return t >= OpType::Del1; }
/// 1..8 within its family.
constexpr int op_number(OpType t) {
    const int v = static_cast<int>(t);
    return v <= 8 ? v : v - 8;
}
std::string op_name(OpType t);
OpType parse_op_name(std::string_view text);

using Payload = std::variant<Person, Forum, Message, KnowsEdge, LikesEdge, HasMemberEdge>;

struct UpdateOperation {
    OpType type = OpType::Ins1;
    SimInstant scheduled_time;
    SimInstant dependency_time;
    Payload payload;

    bool operator==(const UpdateOperation&) const = default;
};

/// Checks that the payload alternative matches the operation type (e.g. INS6 carries a Post).
bool payload_matches(OpType type, const Payload& payload);

/// An explicitly requested deletion; everything else deleted at the same instant is its cascade.
struct DeletionRoot {
    OpType type = OpType::Del1;
    EntityId first = 0;  ///< node id, or first endpoint of an edge
    EntityId second = 0; ///< second endpoint for edges, 0 for nodes
    SimInstant at;

    bool operator==(const DeletionRoot&) const = default;
};

/// The full history: every entity that exists at some point of the simulation.
struct TemporalGraph {
    std::vector<Person> persons;
    std::vector<KnowsEdge> knows;
    std::vector<Forum> forums;
    std::vector<HasMemberEdge> memberships;
    std::vector<Message> messages;
    std::vector<LikesEdge> likes;
    std::vector<DeletionRoot> deletion_roots;

    bool operator==(const TemporalGraph&) const = default;
    std::size_t entity_count() const {
        return persons.size() + knows.size() + forums.size() + memberships.size() +
               messages.size() + likes.size();
    }
};

using MessageIndex = std::unordered_map<EntityId, const Message*>;
MessageIndex index_messages(const std::vector<Message>& messages);

/// Follows reply_to links up to the thread's Post. Throws CycleDetected on a loop and
/// UnknownEntity when a link points nowhere.
EntityId root_post_of(EntityId message_id, const MessageIndex& messages);

/// Full temporal scan of the structural invariants (dangling edges, lifecycle containment,
/// thread trees, id uniqueness, stored root posts). Returns one line per violation.
std::vector<std::string> check_temporal_invariants(const TemporalGraph& graph,
                                                   ModeratorDeletionPolicy policy);

} // namespace snb
