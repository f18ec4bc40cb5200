#include "snb/model.hpp"

#include "snb/errors.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <unordered_set>

namespace snb {

bool is_alive(const Lifecycle& entity, SimInstant t) {
    return entity.creation <= t && (!entity.deletion || t < *entity.deletion);
}

bool alive_throughout(const Lifecycle& entity, SimInstant from, SimInstant to) {
    return entity.creation <= from && (!entity.deletion || *entity.deletion >= to);
}

KnowsEdge make_knows(EntityId a, EntityId b, Lifecycle lifecycle) {
    return KnowsEdge{std::min(a, b), std::max(a, b), lifecycle};
}

std::string_view to_string(ModeratorDeletionPolicy p) {
    return p == ModeratorDeletionPolicy::DeleteForum ? "delete-forum" : "reassign";
}

ModeratorDeletionPolicy parse_moderator_policy(std::string_view text) {
    if (text == "delete-forum") return ModeratorDeletionPolicy::DeleteForum;
    if (text == "reassign") return ModeratorDeletionPolicy::Reassign;
    throw ConfigInvalid("unknown moderator deletion policy '" + std::string(text) + "'");
}

std::string op_name(OpType t) {
    return (is_insert(t) ? "INS" : "DEL") + std::to_string(op_number(t));
}

OpType parse_op_name(std::string_view text) {
    if (text.size() == 4 && (text.starts_with("INS") || text.starts_with("DEL"))) {
        const int n = text[3] - '0';
        if (n >= 1 && n <= 8) return static_cast<OpType>(text.starts_with("INS") ? n : n + 8);
    }
    throw std::invalid_argument("unknown operation type '" + std::string(text) + "'");
}

bool payload_matches(OpType type, const Payload& payload) {
    switch (op_number(type)) {
    case 1: return std::holds_alternative<Person>(payload);
    case 2:
    case 3: return std::holds_alternative<LikesEdge>(payload);
    case 4: return std::holds_alternative<Forum>(payload);
    case 5: return std::holds_alternative<HasMemberEdge>(payload);
    case 6: {
        auto* m = std::get_if<Message>(&payload);
        return m != nullptr && m->is_post();
    }
    case 7: {
        auto* m = std::get_if<Message>(&payload);
        return m != nullptr && !m->is_post();
    }
    case 8: return std::holds_alternative<KnowsEdge>(payload);
    }
    return false;
}

MessageIndex index_messages(const std::vector<Message>& messages) {
    MessageIndex index;
    index.reserve(messages.size());
    for (const auto& m : messages) index.emplace(m.id, &m);
    return index;
}

EntityId root_post_of(EntityId message_id, const MessageIndex& messages) {
    std::unordered_set<EntityId> seen;
    EntityId current = message_id;
    for (;;) {
        auto it = messages.find(current);
        if (it == messages.end())
            throw UnknownEntity("message " + std::to_string(current) + " not found");
        const Message& m = *it->second;
        if (m.is_post()) return m.id;
        if (!seen.insert(current).second)
            throw CycleDetected("reply chain of message " + std::to_string(message_id) + " loops");
        if (!m.reply_to_message_id)
            throw IntegrityError("comment " + std::to_string(m.id) + " has no parent");
        current = *m.reply_to_message_id;
    }
}

namespace {

bool contained(const Lifecycle& child, const Lifecycle& parent) {
    if (child.creation < parent.creation) return false;
    if (!parent.deletion) return true;
    return child.deletion && *child.deletion <= *parent.deletion;
}

std::string describe(std::string_view kind, EntityId a, EntityId b = 0) {
    std::string s(kind);
    s += " " + std::to_string(a);
    if (b != 0) s += "-" + std::to_string(b);
    return s;
}

} // namespace

std::vector<std::string> check_temporal_invariants(const TemporalGraph& g,
                                                   ModeratorDeletionPolicy policy) {
    std::vector<std::string> out;
    auto lifecycle_ok = [&](const Lifecycle& l, const std::string& what) {
        if (l.deletion && *l.deletion <= l.creation) out.push_back(what + ": deletion not after creation");
    };

    std::unordered_map<EntityId, const Person*> persons;
    for (const auto& p : g.persons) {
        if (!persons.emplace(p.id, &p).second) out.push_back(describe("person", p.id) + ": duplicate id");
        lifecycle_ok(p.lifecycle, describe("person", p.id));
    }
    std::unordered_map<EntityId, const Forum*> forums;
    for (const auto& f : g.forums) {
        if (!forums.emplace(f.id, &f).second) out.push_back(describe("forum", f.id) + ": duplicate id");
        lifecycle_ok(f.lifecycle, describe("forum", f.id));
        auto mod = persons.find(f.moderator_person_id);
        if (mod == persons.end() || !is_alive(mod->second->lifecycle, f.lifecycle.creation))
            out.push_back(describe("forum", f.id) + ": moderator not alive at creation");
        else if (policy == ModeratorDeletionPolicy::DeleteForum &&
                 !contained(f.lifecycle, mod->second->lifecycle))
            out.push_back(describe("forum", f.id) + ": outlives its moderator");
    }
    MessageIndex messages;
    for (const auto& m : g.messages) {
        if (!messages.emplace(m.id, &m).second) out.push_back(describe("message", m.id) + ": duplicate id");
        lifecycle_ok(m.lifecycle, describe("message", m.id));
    }
    {
        std::unordered_set<EntityId> all;
        for (const auto& p : g.persons) all.insert(p.id);
        for (const auto& f : g.forums)
            if (!all.insert(f.id).second) out.push_back(describe("forum", f.id) + ": id reused");
        for (const auto& m : g.messages)
            if (!all.insert(m.id).second) out.push_back(describe("message", m.id) + ": id reused");
    }

    auto person_contains = [&](EntityId pid, const Lifecycle& child, const std::string& what) {
        auto it = persons.find(pid);
        if (it == persons.end()) out.push_back(what + ": unknown person " + std::to_string(pid));
        else if (!contained(child, it->second->lifecycle))
            out.push_back(what + ": dangling at person " + std::to_string(pid));
    };

    std::map<std::pair<EntityId, EntityId>, std::vector<Lifecycle>> knows_by_pair;
    for (const auto& k : g.knows) {
        const auto what = describe("knows", k.person1_id, k.person2_id);
        lifecycle_ok(k.lifecycle, what);
        if (k.person1_id >= k.person2_id) out.push_back(what + ": not canonical");
        person_contains(k.person1_id, k.lifecycle, what);
        person_contains(k.person2_id, k.lifecycle, what);
        knows_by_pair[{k.person1_id, k.person2_id}].push_back(k.lifecycle);
    }
    for (auto& [pair, lives] : knows_by_pair) {
        std::sort(lives.begin(), lives.end(),
                  [](const Lifecycle& a, const Lifecycle& b) { return a.creation < b.creation; });
        for (std::size_t i = 1; i < lives.size(); ++i)
            if (!lives[i - 1].deletion || *lives[i - 1].deletion > lives[i].creation)
                out.push_back(describe("knows", pair.first, pair.second) + ": overlapping live edges");
    }

    std::set<std::pair<EntityId, EntityId>> member_pairs;
    for (const auto& hm : g.memberships) {
        const auto what = describe("membership", hm.forum_id, hm.person_id);
        lifecycle_ok(hm.lifecycle, what);
        person_contains(hm.person_id, hm.lifecycle, what);
        auto f = forums.find(hm.forum_id);
        if (f == forums.end() || !contained(hm.lifecycle, f->second->lifecycle))
            out.push_back(what + ": dangling at forum");
        if (!member_pairs.insert({hm.forum_id, hm.person_id}).second)
            out.push_back(what + ": duplicate membership");
    }

    for (const auto& m : g.messages) {
        const auto what = describe("message", m.id);
        person_contains(m.creator_person_id, m.lifecycle, what);
        if (m.is_post()) {
            if (!m.container_forum_id || m.reply_to_message_id) {
                out.push_back(what + ": malformed post");
                continue;
            }
            auto f = forums.find(*m.container_forum_id);
            if (f == forums.end() || !contained(m.lifecycle, f->second->lifecycle))
                out.push_back(what + ": dangling at forum");
            if (m.root_post_id != m.id) out.push_back(what + ": post root is not itself");
            continue;
        }
        if (m.container_forum_id || !m.reply_to_message_id) {
            out.push_back(what + ": malformed comment");
            continue;
        }
        auto parent = messages.find(*m.reply_to_message_id);
        if (parent == messages.end()) {
            out.push_back(what + ": unknown parent");
            continue;
        }
        if (!contained(m.lifecycle, parent->second->lifecycle)) out.push_back(what + ": outlives its parent");
        try {
            const EntityId root = root_post_of(m.id, messages);
            if (root != m.root_post_id) out.push_back(what + ": stale root post id");
            if (!contained(m.lifecycle, messages.at(root)->lifecycle))
                out.push_back(what + ": outlives its root post");
        } catch (const Error& e) {
            out.push_back(what + ": " + e.what());
        }
    }

    for (const auto& l : g.likes) {
        const auto what = describe("likes", l.person_id, l.message_id);
        lifecycle_ok(l.lifecycle, what);
        person_contains(l.person_id, l.lifecycle, what);
        auto m = messages.find(l.message_id);
        if (m == messages.end() || !contained(l.lifecycle, m->second->lifecycle))
            out.push_back(what + ": dangling at message");
    }
    return out;
}

} // namespace snb
