#include "snb/naive_store.hpp"

#include "snb/errors.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <set>

namespace snb {

bool NaiveStore::person_alive(EntityId id) const {
    auto it = person_at_.find(id);
    return it != person_at_.end() && persons_[it->second].alive;
}

bool NaiveStore::forum_alive(EntityId id) const {
    auto it = forum_at_.find(id);
    return it != forum_at_.end() && forums_[it->second].alive;
}

const Message* NaiveStore::message_alive(EntityId id) const {
    auto it = message_at_.find(id);
    return it != message_at_.end() && messages_[it->second].alive ? &messages_[it->second].value : nullptr;
}

void NaiveStore::bulk_load(const TemporalGraph& snapshot) {
    std::lock_guard lock(mu_);
    if (version_ != 0) throw Error("bulk_load into a non-empty store");
    // scanning inserts would be quadratic; the snapshot is checked as a whole instead
    std::set<EntityId> persons, forums, messages;
    for (const auto& p : snapshot.persons) persons.insert(p.id);
    for (const auto& f : snapshot.forums) forums.insert(f.id);
    for (const auto& m : snapshot.messages) messages.insert(m.id);
    auto need = [](const std::set<EntityId>& s, EntityId id, const char* what) {
        if (!s.count(id)) throw IntegrityError(std::string("snapshot references missing ") + what + " " + std::to_string(id));
    };
    for (const auto& f : snapshot.forums) need(persons, f.moderator_person_id, "person");
    for (const auto& k : snapshot.knows) {
        need(persons, k.person1_id, "person");
        need(persons, k.person2_id, "person");
    }
    for (const auto& hm : snapshot.memberships) {
        need(forums, hm.forum_id, "forum");
        need(persons, hm.person_id, "person");
    }
    for (const auto& m : snapshot.messages) {
        need(persons, m.creator_person_id, "person");
        if (m.is_post()) need(forums, m.container_forum_id.value_or(-1), "forum");
        else need(messages, m.reply_to_message_id.value_or(-1), "message");
    }
    for (const auto& l : snapshot.likes) {
        need(persons, l.person_id, "person");
        need(messages, l.message_id, "message");
    }
    // recompute thread roots; also rejects reply cycles
    const auto ops = snapshot_as_inserts(snapshot);
    for (const auto& p : snapshot.persons) {
        person_at_[p.id] = persons_.size();
        persons_.push_back({p});
    }
    for (const auto& k : snapshot.knows) knows_.push_back({make_knows(k.person1_id, k.person2_id, k.lifecycle)});
    for (const auto& f : snapshot.forums) {
        forum_at_[f.id] = forums_.size();
        forums_.push_back({f});
    }
    for (const auto& hm : snapshot.memberships) members_.push_back({hm});
    for (const auto& l : snapshot.likes) likes_.push_back({l});
    std::map<EntityId, EntityId> root;
    for (const auto& op : ops) {
        if (op.type != OpType::Ins6 && op.type != OpType::Ins7) continue;
        Message m = std::get<Message>(op.payload);
        m.root_post_id = m.is_post() ? m.id : root.at(*m.reply_to_message_id);
        root[m.id] = m.root_post_id;
        message_at_[m.id] = messages_.size();
        messages_.push_back({m});
    }
    version_ = 1;
}

void NaiveStore::insert(const UpdateOperation& op) {
    auto need_person = [&](EntityId id) {
        if (!person_alive(id)) throw DependencyMissing("person " + std::to_string(id) + " does not exist");
    };
    std::visit(
        [&](const auto& e) {
            using T = std::decay_t<decltype(e)>;
            if constexpr (std::is_same_v<T, Person>) {
                if (person_at_.count(e.id)) throw IntegrityError("duplicate person " + std::to_string(e.id));
                person_at_[e.id] = persons_.size();
                persons_.push_back({e});
            } else if constexpr (std::is_same_v<T, Forum>) {
                need_person(e.moderator_person_id);
                forum_at_[e.id] = forums_.size();
                forums_.push_back({e});
            } else if constexpr (std::is_same_v<T, HasMemberEdge>) {
                if (!forum_alive(e.forum_id)) throw DependencyMissing("forum " + std::to_string(e.forum_id) + " does not exist");
                need_person(e.person_id);
                members_.push_back({e});
            } else if constexpr (std::is_same_v<T, KnowsEdge>) {
                need_person(e.person1_id);
                need_person(e.person2_id);
                knows_.push_back({make_knows(e.person1_id, e.person2_id, e.lifecycle)});
            } else if constexpr (std::is_same_v<T, Message>) {
                need_person(e.creator_person_id);
                Message m = e;
                if (m.is_post()) {
                    if (!m.container_forum_id || !forum_alive(*m.container_forum_id))
                        throw DependencyMissing("forum of post " + std::to_string(m.id) + " does not exist");
                    m.root_post_id = m.id;
                } else {
                    const Message* parent = m.reply_to_message_id ? message_alive(*m.reply_to_message_id) : nullptr;
                    if (!parent) throw DependencyMissing("parent of comment " + std::to_string(m.id) + " does not exist");
                    m.root_post_id = parent->root_post_id;
                }
                message_at_[m.id] = messages_.size();
                messages_.push_back({m});
            } else {
                need_person(e.person_id);
                if (!message_alive(e.message_id)) throw DependencyMissing("message " + std::to_string(e.message_id) + " does not exist");
                likes_.push_back({e});
            }
        },
        op.payload);
}

CascadeSummary NaiveStore::cascade() {
    CascadeSummary s;
    for (bool changed = true; changed;) {
        changed = false;
        auto kill = [&](auto& slot, std::size_t& counter) {
            slot.alive = false;
            ++counter;
            changed = true;
        };
        for (auto& k : knows_)
            if (k.alive && (!person_alive(k.value.person1_id) || !person_alive(k.value.person2_id))) kill(k, s.knows);
        for (auto& hm : members_)
            if (hm.alive && (!forum_alive(hm.value.forum_id) || !person_alive(hm.value.person_id))) kill(hm, s.memberships);
        for (auto& f : forums_) {
            if (!f.alive || f.value.moderator_person_id == 0 || person_alive(f.value.moderator_person_id)) continue;
            if (policy_ == ModeratorDeletionPolicy::DeleteForum) {
                kill(f, s.forums);
                continue;
            }
            EntityId next = 0;
            for (const auto& hm : members_)
                if (hm.alive && hm.value.forum_id == f.value.id && person_alive(hm.value.person_id) &&
                    (next == 0 || hm.value.person_id < next))
                    next = hm.value.person_id;
            f.value.moderator_person_id = next;
            changed = true;
        }
        for (auto& m : messages_) {
            if (!m.alive) continue;
            const bool orphan = !person_alive(m.value.creator_person_id) ||
                                (m.value.is_post() ? !forum_alive(*m.value.container_forum_id)
                                                   : !message_alive(*m.value.reply_to_message_id));
            if (orphan) {
                kill(m, s.messages);
                s.deleted_messages.push_back(m.value.id);
            }
        }
        for (auto& l : likes_)
            if (l.alive && (!person_alive(l.value.person_id) || !message_alive(l.value.message_id))) kill(l, s.likes);
    }
    return s;
}

CascadeSummary NaiveStore::remove(const UpdateOperation& op) {
    CascadeSummary root;
    auto kill_first = [&](auto& slots, auto pred, std::size_t& counter, const std::string& what) -> void {
        for (auto& s : slots)
            if (s.alive && pred(s.value)) {
                s.alive = false;
                ++counter;
                return;
            }
        throw UnknownEntity(what + " does not exist");
    };
    std::visit(
        [&](const auto& e) {
            using T = std::decay_t<decltype(e)>;
            if constexpr (std::is_same_v<T, Person>) {
                if (!person_alive(e.id)) throw UnknownPerson("person " + std::to_string(e.id) + " does not exist");
                kill_first(persons_, [&](const Person& p) { return p.id == e.id; }, root.persons, "person");
            } else if constexpr (std::is_same_v<T, Forum>) {
                kill_first(forums_, [&](const Forum& f) { return f.id == e.id; }, root.forums, "forum " + std::to_string(e.id));
            } else if constexpr (std::is_same_v<T, HasMemberEdge>) {
                kill_first(members_, [&](const HasMemberEdge& hm) { return hm.forum_id == e.forum_id && hm.person_id == e.person_id; },
                           root.memberships, "membership");
            } else if constexpr (std::is_same_v<T, KnowsEdge>) {
                const auto k = make_knows(e.person1_id, e.person2_id, {});
                kill_first(knows_, [&](const KnowsEdge& x) { return x.person1_id == k.person1_id && x.person2_id == k.person2_id; },
                           root.knows, "knows");
            } else if constexpr (std::is_same_v<T, Message>) {
                if (!message_alive(e.id)) throw UnknownMessage("message " + std::to_string(e.id) + " does not exist");
                kill_first(messages_, [&](const Message& m) { return m.id == e.id; }, root.messages, "message");
                root.deleted_messages.push_back(e.id);
            } else {
                kill_first(likes_, [&](const LikesEdge& l) { return l.person_id == e.person_id && l.message_id == e.message_id; },
                           root.likes, "like");
            }
        },
        op.payload);
    root += cascade();
    return root;
}

CommitInfo NaiveStore::execute_update(const UpdateOperation& op) {
    std::lock_guard lock(mu_);
    if (!payload_matches(op.type, op.payload)) throw IntegrityError(op_name(op.type) + " with a mismatched payload");
    CommitInfo info;
    if (is_insert(op.type)) insert(op);
    else info.cascade = remove(op);
    info.version = ++version_;
    return info;
}

std::uint64_t NaiveStore::current_commit_version() const {
    std::lock_guard lock(mu_);
    return version_;
}

TemporalGraph NaiveStore::materialize() const {
    std::lock_guard lock(mu_);
    TemporalGraph g;
    auto copy = [](const auto& slots, auto& out) {
        for (const auto& s : slots)
            if (s.alive) out.push_back(s.value);
    };
    copy(persons_, g.persons);
    copy(knows_, g.knows);
    copy(forums_, g.forums);
    copy(members_, g.memberships);
    copy(messages_, g.messages);
    copy(likes_, g.likes);
    return g;
}

// ---- queries ---------------------------------------------------------------------------------

QueryResult NaiveStore::execute_query(const QueryInstance& q) {
    std::lock_guard lock(mu_);
    switch (q.variant) {
    case QueryVariant::CR3a:
    case QueryVariant::CR3b: return cr3(std::get<Cr3Params>(q.params));
    case QueryVariant::CR13a:
    case QueryVariant::CR13b: return cr13(std::get<PathParams>(q.params));
    case QueryVariant::CR14a:
    case QueryVariant::CR14b: return cr14(std::get<PathParams>(q.params));
    case QueryVariant::SR2: return sr2(std::get<PersonParam>(q.params));
    case QueryVariant::SR6: return sr6(std::get<MessageParam>(q.params));
    }
    throw std::logic_error("unhandled query variant");
}

std::vector<Cr3Row> NaiveStore::cr3(const Cr3Params& q) const {
    if (!person_alive(q.person)) throw UnknownPerson("person " + std::to_string(q.person) + " does not exist");
    std::set<EntityId> one, two;
    for (const auto& k : knows_) {
        if (!k.alive) continue;
        if (k.value.person1_id == q.person) one.insert(k.value.person2_id);
        if (k.value.person2_id == q.person) one.insert(k.value.person1_id);
    }
    two = one;
    for (const auto& k : knows_) {
        if (!k.alive) continue;
        if (one.count(k.value.person1_id)) two.insert(k.value.person2_id);
        if (one.count(k.value.person2_id)) two.insert(k.value.person1_id);
    }
    two.erase(q.person);
    const SimInstant end = q.start_date + SimDuration::days(q.duration_days);
    std::vector<Cr3Row> rows;
    for (EntityId id : two) {
        const Person* p = &persons_[person_at_.at(id)].value;
        if (p->country_id == q.country_x || p->country_id == q.country_y) continue;
        Cr3Row row{id, 0, 0};
        for (const auto& m : messages_) {
            if (!m.alive || m.value.creator_person_id != id) continue;
            const SimInstant t = m.value.lifecycle.creation;
            if (t < q.start_date || t >= end) continue;
            row.x_count += m.value.country_id == q.country_x;
            row.y_count += m.value.country_id == q.country_y;
        }
        if (row.x_count && row.y_count) rows.push_back(row);
    }
    std::sort(rows.begin(), rows.end(), [](const Cr3Row& a, const Cr3Row& b) {
        return std::pair{-(a.x_count + a.y_count), a.person} < std::pair{-(b.x_count + b.y_count), b.person};
    });
    return rows;
}

PathLength NaiveStore::cr13(const PathParams& q) const {
    for (EntityId id : {q.person1, q.person2})
        if (!person_alive(id)) throw UnknownPerson("person " + std::to_string(id) + " does not exist");
    std::map<EntityId, int> dist{{q.person1, 0}};
    for (int d = 1;; ++d) {
        bool grew = false;
        for (const auto& k : knows_) {
            if (!k.alive) continue;
            const EntityId a = k.value.person1_id, b = k.value.person2_id;
            for (auto [from, to] : {std::pair{a, b}, std::pair{b, a}}) {
                auto it = dist.find(from);
                if (it != dist.end() && it->second == d - 1 && !dist.count(to)) {
                    dist[to] = d;
                    grew = true;
                }
            }
        }
        if (!grew) break;
    }
    auto it = dist.find(q.person2);
    return {it == dist.end() ? -1 : it->second};
}

CheapestPath NaiveStore::cr14(const PathParams& q) const {
    for (EntityId id : {q.person1, q.person2})
        if (!person_alive(id)) throw UnknownPerson("person " + std::to_string(id) + " does not exist");
    std::map<std::pair<EntityId, EntityId>, std::int64_t> count;
    for (const auto& c : messages_) {
        if (!c.alive || c.value.is_post()) continue;
        const Message* parent = message_alive(*c.value.reply_to_message_id);
        if (!parent) continue;
        const EntityId a = c.value.creator_person_id, b = parent->creator_person_id;
        if (a != b) ++count[{std::min(a, b), std::max(a, b)}];
    }
    // Bellman-Ford
    std::map<EntityId, std::int64_t> dist{{q.person1, 0}};
    std::map<EntityId, EntityId> pred;
    for (bool changed = true; changed;) {
        changed = false;
        for (const auto& k : knows_) {
            if (!k.alive) continue;
            auto it = count.find({k.value.person1_id, k.value.person2_id});
            if (it == count.end() || it->second < 1) continue;
            const std::int64_t w = interaction_weight(it->second);
            for (auto [from, to] : {std::pair{k.value.person1_id, k.value.person2_id},
                                    std::pair{k.value.person2_id, k.value.person1_id}}) {
                auto f = dist.find(from);
                if (f == dist.end()) continue;
                auto t = dist.find(to);
                if (t == dist.end() || f->second + w < t->second) {
                    dist[to] = f->second + w;
                    pred[to] = from;
                    changed = true;
                }
            }
        }
    }
    auto it = dist.find(q.person2);
    if (it == dist.end()) return {};
    CheapestPath out{{q.person2}, it->second};
    while (out.nodes.back() != q.person1) out.nodes.push_back(pred.at(out.nodes.back()));
    std::reverse(out.nodes.begin(), out.nodes.end());
    return out;
}

std::vector<Sr2Row> NaiveStore::sr2(const PersonParam& q) const {
    if (!person_alive(q.person)) throw UnknownPerson("person " + std::to_string(q.person) + " does not exist");
    std::vector<const Message*> mine;
    for (const auto& m : messages_)
        if (m.alive && m.value.creator_person_id == q.person) mine.push_back(&m.value);
    std::sort(mine.begin(), mine.end(), [](const Message* a, const Message* b) {
        return std::pair{a->lifecycle.creation, a->id} > std::pair{b->lifecycle.creation, b->id};
    });
    if (mine.size() > 10) mine.resize(10);
    std::vector<Sr2Row> rows;
    for (const Message* m : mine) {
        const Message* root = m;
        while (!root->is_post()) root = message_alive(*root->reply_to_message_id);
        rows.push_back({m->id, m->lifecycle.creation, root->id, root->creator_person_id});
    }
    return rows;
}

Sr6Result NaiveStore::sr6(const MessageParam& q) const {
    const Message* m = message_alive(q.message);
    if (!m) throw UnknownMessage("message " + std::to_string(q.message) + " does not exist");
    while (!m->is_post()) m = message_alive(*m->reply_to_message_id);
    const Forum* f = &forums_[forum_at_.at(*m->container_forum_id)].value;
    Sr6Result r{f->id, std::nullopt};
    if (f->moderator_person_id != 0) r.moderator = f->moderator_person_id;
    return r;
}

} // namespace snb
