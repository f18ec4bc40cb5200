#include "snb/refstore.hpp"

#include "snb/errors.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <bit>
#include <functional>
#include <map>
#include <mutex>
#include <queue>
#include <set>
#include <thread>
#include <unordered_map>
#include <unordered_set>

namespace snb {

namespace {

constexpr std::uint64_t kNever = UINT64_MAX;

struct Versions {
    std::atomic<std::uint64_t> created{kNever};
    std::atomic<std::uint64_t> deleted{kNever};

    bool visible(std::uint64_t v) const {
        return created.load(std::memory_order_relaxed) <= v && v < deleted.load(std::memory_order_relaxed);
    }
    /// Writer view: includes changes of the transaction in progress.
    bool live() const {
        return created.load(std::memory_order_relaxed) != kNever && deleted.load(std::memory_order_relaxed) == kNever;
    }
};

/// Append-only list for one writer and any number of readers. Chunks double in size and are
/// never moved, so readers only need the published size.
template <typename T>
class AppendList {
public:
    AppendList() = default;
    AppendList(const AppendList&) = delete;
    AppendList& operator=(const AppendList&) = delete;
    ~AppendList() {
        for (auto& c : chunks_) delete[] c.load(std::memory_order_relaxed);
    }

    void push_back(T value) {
        const std::size_t n = size_.load(std::memory_order_relaxed);
        const auto [k, off] = locate(n);
        T* chunk = chunks_[k].load(std::memory_order_relaxed);
        if (!chunk) {
            chunk = new T[kBase << k]();
            chunks_[k].store(chunk, std::memory_order_release);
        }
        chunk[off] = value;
        size_.store(n + 1, std::memory_order_release);
    }

    std::size_t size() const { return size_.load(std::memory_order_acquire); }

    template <typename F>
    void for_each(F&& f) const {
        const std::size_t n = size();
        for (std::size_t i = 0; i < n; ++i) {
            const auto [k, off] = locate(i);
            f(chunks_[k].load(std::memory_order_acquire)[off]);
        }
    }

private:
    static constexpr std::size_t kBase = 4;
    static std::pair<std::size_t, std::size_t> locate(std::size_t i) {
        const std::size_t k = std::bit_width(i / kBase + 1) - 1;
        return {k, i - kBase * ((std::size_t{1} << k) - 1)};
    }
    std::array<std::atomic<T*>, 56> chunks_{};
    std::atomic<std::size_t> size_{0};
};

/// id -> record, lock-free for readers. Segments are allocated on first use.
template <typename R>
class IdIndex {
public:
    IdIndex() : segs_(new std::atomic<std::atomic<R*>*>[kSegs]()) {}
    ~IdIndex() {
        for (std::size_t i = 0; i < kSegs; ++i) delete[] segs_[i].load(std::memory_order_relaxed);
    }

    R* get(EntityId id) const {
        if (id < 0 || static_cast<std::uint64_t>(id) >= kSeg * kSegs) return nullptr;
        const auto* seg = segs_[static_cast<std::size_t>(id) / kSeg].load(std::memory_order_acquire);
        return seg ? seg[static_cast<std::size_t>(id) % kSeg].load(std::memory_order_acquire) : nullptr;
    }

    void set(EntityId id, R* rec) {
        if (id < 0 || static_cast<std::uint64_t>(id) >= kSeg * kSegs)
            throw IntegrityError("entity id " + std::to_string(id) + " out of supported range");
        auto& slot = segs_[static_cast<std::size_t>(id) / kSeg];
        auto* seg = slot.load(std::memory_order_relaxed);
        if (!seg) {
            seg = new std::atomic<R*>[kSeg]();
            slot.store(seg, std::memory_order_release);
        }
        seg[static_cast<std::size_t>(id) % kSeg].store(rec, std::memory_order_release);
    }

private:
    static constexpr std::size_t kSeg = 4096;
    static constexpr std::size_t kSegs = std::size_t{1} << 18;
    std::unique_ptr<std::atomic<std::atomic<R*>*>[]> segs_;
};

/// Value history, newest first. Writes must come in non-decreasing version order.
template <typename T>
class Versioned {
public:
    Versioned() = default;
    Versioned(const Versioned&) = delete;
    Versioned& operator=(const Versioned&) = delete;
    ~Versioned() {
        for (Node* n = head_.load(std::memory_order_relaxed); n;) {
            Node* next = n->next;
            delete n;
            n = next;
        }
    }

    T read(std::uint64_t v, T fallback) const {
        for (const Node* n = head_.load(std::memory_order_acquire); n; n = n->next)
            if (n->version <= v) return n->value;
        return fallback;
    }

    T latest(T fallback) const {
        const Node* n = head_.load(std::memory_order_relaxed);
        return n ? n->value : fallback;
    }

    void write(std::uint64_t v, T value) {
        Node* h = head_.load(std::memory_order_relaxed);
        // nobody reads version v before it is published, so the head can be overwritten
        if (h && h->version == v) {
            h->value = value;
            return;
        }
        head_.store(new Node{v, value, h}, std::memory_order_release);
    }

private:
    struct Node {
        std::uint64_t version;
        T value;
        Node* next;
    };
    std::atomic<Node*> head_{nullptr};
};

struct Interaction {
    Versioned<std::int64_t> count;
    std::int64_t current = 0;
};

struct KnowsRec;
struct MessageRec;
struct LikeRec;
struct MemberRec;
struct ForumRec;

struct PersonRec {
    Person data;
    Versions ver;
    AppendList<KnowsRec*> knows;
    AppendList<MessageRec*> messages;
    // writer only
    std::vector<LikeRec*> likes;
    std::vector<MemberRec*> memberships;
    std::vector<ForumRec*> moderated;
};

struct KnowsRec {
    KnowsEdge data;
    Versions ver;
    PersonRec* p1 = nullptr;
    PersonRec* p2 = nullptr;
    Interaction* inter = nullptr;

    PersonRec* other(const PersonRec* p) const { return p == p1 ? p2 : p1; }
};

struct ForumRec {
    Forum data;
    Versions ver;
    Versioned<EntityId> moderator; // 0: none
    std::vector<MemberRec*> members;
    std::vector<MessageRec*> posts;
};

struct MessageRec {
    Message data;
    Versions ver;
    MessageRec* parent = nullptr;
    AppendList<MessageRec*> children;
    std::vector<LikeRec*> likes;
};

struct LikeRec {
    LikesEdge data;
    Versions ver;
};

struct MemberRec {
    HasMemberEdge data;
    Versions ver;
};

using Pair = std::pair<EntityId, EntityId>;
struct PairHash {
    std::size_t operator()(const Pair& p) const noexcept {
        return std::hash<std::uint64_t>{}(static_cast<std::uint64_t>(p.first) * 0x9e3779b97f4a7c15ULL ^
                                          static_cast<std::uint64_t>(p.second));
    }
};

Pair canonical(EntityId a, EntityId b) { return a < b ? Pair{a, b} : Pair{b, a}; }

std::string ids(EntityId a, EntityId b) { return std::to_string(a) + "-" + std::to_string(b); }

} // namespace

CascadeSummary& CascadeSummary::operator+=(const CascadeSummary& o) {
    persons += o.persons;
    knows += o.knows;
    forums += o.forums;
    memberships += o.memberships;
    messages += o.messages;
    likes += o.likes;
    deleted_messages.insert(deleted_messages.end(), o.deleted_messages.begin(), o.deleted_messages.end());
    return *this;
}

struct ReferenceStore::State {
    ModeratorDeletionPolicy policy;
    StoreFaults faults;
    std::function<void(std::uint64_t)> publish_hook;
    std::atomic<std::uint64_t> committed{0};
    std::mutex commit_mu;

    IdIndex<PersonRec> persons;
    IdIndex<ForumRec> forums;
    IdIndex<MessageRec> messages;

    AppendList<PersonRec*> all_persons;
    AppendList<KnowsRec*> all_knows;
    AppendList<ForumRec*> all_forums;
    AppendList<MemberRec*> all_members;
    AppendList<MessageRec*> all_messages;
    AppendList<LikeRec*> all_likes;

    // writer only
    std::vector<std::unique_ptr<PersonRec>> person_arena;
    std::vector<std::unique_ptr<KnowsRec>> knows_arena;
    std::vector<std::unique_ptr<ForumRec>> forum_arena;
    std::vector<std::unique_ptr<MemberRec>> member_arena;
    std::vector<std::unique_ptr<MessageRec>> message_arena;
    std::vector<std::unique_ptr<LikeRec>> like_arena;
    std::unordered_map<Pair, KnowsRec*, PairHash> knows_by_pair;
    std::unordered_map<Pair, LikeRec*, PairHash> likes_by_pair;
    std::unordered_map<Pair, MemberRec*, PairHash> members_by_pair;
    std::unordered_map<Pair, std::unique_ptr<Interaction>, PairHash> interactions;

    struct Tx {
        std::uint64_t v;
        std::uint64_t descendant_v; // differs from v only under the split-cascade fault
        CascadeSummary summary;
        std::vector<std::function<void()>> undo;
    };

    State(ModeratorDeletionPolicy p, StoreFaults f) : policy(p), faults(f) {}

    // ---- helpers ------------------------------------------------------------------------

    static void born(Versions& ver, Tx& tx) {
        ver.created.store(tx.v, std::memory_order_relaxed);
        tx.undo.push_back([&ver] { ver.created.store(kNever, std::memory_order_relaxed); });
    }

    static void kill(Versions& ver, std::uint64_t at, Tx& tx) {
        ver.deleted.store(at, std::memory_order_relaxed);
        tx.undo.push_back([&ver] { ver.deleted.store(kNever, std::memory_order_relaxed); });
    }

    template <typename Map, typename Rec>
    static void set_pair(Map& map, const Pair& key, Rec* rec, Tx& tx) {
        auto it = map.find(key);
        Rec* old = it == map.end() ? nullptr : it->second;
        map[key] = rec;
        tx.undo.push_back([&map, key, old] {
            if (old) map[key] = old;
            else map.erase(key);
        });
    }

    template <typename Rec>
    static void set_id(IdIndex<Rec>& index, EntityId id, Rec* rec, Tx& tx) {
        index.set(id, rec);
        tx.undo.push_back([&index, id] { index.set(id, nullptr); });
    }

    template <typename T>
    static void write_versioned(Versioned<T>& value, std::uint64_t at, T next, Tx& tx) {
        const T prev = value.latest(T{});
        value.write(at, next);
        tx.undo.push_back([&value, at, prev] { value.write(at, prev); });
    }

    PersonRec* live_person(EntityId id, const char* role) const {
        PersonRec* p = persons.get(id);
        if (!p || !p->ver.live()) throw DependencyMissing(std::string(role) + " person " + std::to_string(id) + " does not exist");
        return p;
    }
    ForumRec* live_forum(EntityId id) const {
        ForumRec* f = forums.get(id);
        if (!f || !f->ver.live()) throw DependencyMissing("forum " + std::to_string(id) + " does not exist");
        return f;
    }
    MessageRec* live_message(EntityId id) const {
        MessageRec* m = messages.get(id);
        if (!m || !m->ver.live()) throw DependencyMissing("message " + std::to_string(id) + " does not exist");
        return m;
    }

    Interaction* interaction(EntityId a, EntityId b) {
        auto& slot = interactions[canonical(a, b)];
        if (!slot) slot = std::make_unique<Interaction>();
        return slot.get();
    }

    void bump_interaction(const MessageRec& comment, std::int64_t delta, std::uint64_t at, Tx& tx) {
        if (!comment.parent) return;
        const EntityId a = comment.data.creator_person_id, b = comment.parent->data.creator_person_id;
        if (a == b) return;
        Interaction* in = interaction(a, b);
        const std::int64_t old = in->current;
        in->current += delta;
        in->count.write(at, in->current);
        tx.undo.push_back([in, at, old] {
            in->current = old;
            in->count.write(at, old);
        });
    }

    // ---- inserts ------------------------------------------------------------------------

    void insert(const UpdateOperation& op, Tx& tx) {
        std::visit([&](const auto& e) { insert_entity(op.type, e, tx); }, op.payload);
    }

    void insert_entity(OpType, const Person& p, Tx& tx) {
        if (persons.get(p.id)) throw IntegrityError("duplicate person " + std::to_string(p.id));
        auto rec = std::make_unique<PersonRec>();
        rec->data = p;
        born(rec->ver, tx);
        set_id(persons, p.id, rec.get(), tx);
        all_persons.push_back(rec.get());
        person_arena.push_back(std::move(rec));
    }

    void insert_entity(OpType, const Forum& f, Tx& tx) {
        if (forums.get(f.id)) throw IntegrityError("duplicate forum " + std::to_string(f.id));
        PersonRec* mod = live_person(f.moderator_person_id, "moderator");
        auto rec = std::make_unique<ForumRec>();
        rec->data = f;
        rec->moderator.write(tx.v, f.moderator_person_id);
        born(rec->ver, tx);
        set_id(forums, f.id, rec.get(), tx);
        mod->moderated.push_back(rec.get());
        all_forums.push_back(rec.get());
        forum_arena.push_back(std::move(rec));
    }

    void insert_entity(OpType, const HasMemberEdge& hm, Tx& tx) {
        ForumRec* f = live_forum(hm.forum_id);
        PersonRec* p = live_person(hm.person_id, "member");
        const Pair key{hm.forum_id, hm.person_id};
        if (auto it = members_by_pair.find(key); it != members_by_pair.end() && it->second->ver.live())
            throw IntegrityError("duplicate membership " + ids(key.first, key.second));
        auto rec = std::make_unique<MemberRec>();
        rec->data = hm;
        born(rec->ver, tx);
        f->members.push_back(rec.get());
        p->memberships.push_back(rec.get());
        set_pair(members_by_pair, key, rec.get(), tx);
        all_members.push_back(rec.get());
        member_arena.push_back(std::move(rec));
    }

    void insert_entity(OpType, const KnowsEdge& k, Tx& tx) {
        if (k.person1_id == k.person2_id) throw IntegrityError("knows edge from a person to itself");
        PersonRec* a = live_person(k.person1_id, "knows");
        PersonRec* b = live_person(k.person2_id, "knows");
        const Pair key = canonical(k.person1_id, k.person2_id);
        if (auto it = knows_by_pair.find(key); it != knows_by_pair.end() && it->second->ver.live())
            throw IntegrityError("duplicate knows " + ids(key.first, key.second));
        auto rec = std::make_unique<KnowsRec>();
        rec->data = make_knows(k.person1_id, k.person2_id, k.lifecycle);
        rec->p1 = a;
        rec->p2 = b;
        rec->inter = interaction(key.first, key.second);
        born(rec->ver, tx);
        a->knows.push_back(rec.get());
        b->knows.push_back(rec.get());
        set_pair(knows_by_pair, key, rec.get(), tx);
        all_knows.push_back(rec.get());
        knows_arena.push_back(std::move(rec));
    }

    void insert_entity(OpType type, const Message& m, Tx& tx) {
        if (messages.get(m.id)) throw IntegrityError("duplicate message " + std::to_string(m.id));
        if (m.is_post() != (type == OpType::Ins6)) throw IntegrityError(op_name(type) + " carries the wrong message kind");
        PersonRec* author = live_person(m.creator_person_id, "creator");
        auto rec = std::make_unique<MessageRec>();
        rec->data = m;
        ForumRec* forum = nullptr;
        if (m.is_post()) {
            if (!m.container_forum_id) throw IntegrityError("post " + std::to_string(m.id) + " without forum");
            forum = live_forum(*m.container_forum_id);
            rec->data.root_post_id = m.id;
        } else {
            if (!m.reply_to_message_id) throw IntegrityError("comment " + std::to_string(m.id) + " without parent");
            rec->parent = live_message(*m.reply_to_message_id);
            rec->data.root_post_id = rec->parent->data.root_post_id;
        }
        born(rec->ver, tx);
        set_id(messages, m.id, rec.get(), tx);
        if (forum) forum->posts.push_back(rec.get());
        if (rec->parent) rec->parent->children.push_back(rec.get());
        author->messages.push_back(rec.get());
        bump_interaction(*rec, +1, tx.v, tx);
        all_messages.push_back(rec.get());
        message_arena.push_back(std::move(rec));
    }

    void insert_entity(OpType type, const LikesEdge& l, Tx& tx) {
        PersonRec* p = live_person(l.person_id, "liking");
        MessageRec* m = live_message(l.message_id);
        if (m->data.is_post() != (type == OpType::Ins2)) throw IntegrityError(op_name(type) + " targets the wrong message kind");
        const Pair key{l.person_id, l.message_id};
        if (auto it = likes_by_pair.find(key); it != likes_by_pair.end() && it->second->ver.live())
            throw IntegrityError("duplicate like " + ids(key.first, key.second));
        auto rec = std::make_unique<LikeRec>();
        rec->data = l;
        born(rec->ver, tx);
        p->likes.push_back(rec.get());
        m->likes.push_back(rec.get());
        set_pair(likes_by_pair, key, rec.get(), tx);
        all_likes.push_back(rec.get());
        like_arena.push_back(std::move(rec));
    }

    // ---- deletes ------------------------------------------------------------------------

    void del_like(LikeRec* l, std::uint64_t at, Tx& tx) {
        if (!l->ver.live()) return;
        kill(l->ver, at, tx);
        ++tx.summary.likes;
    }

    void del_member(MemberRec* m, std::uint64_t at, Tx& tx) {
        if (!m->ver.live()) return;
        kill(m->ver, at, tx);
        ++tx.summary.memberships;
    }

    void del_knows(KnowsRec* k, std::uint64_t at, Tx& tx) {
        if (!k->ver.live()) return;
        kill(k->ver, at, tx);
        ++tx.summary.knows;
    }

    void del_message(MessageRec* m, std::uint64_t at, Tx& tx) {
        if (!m->ver.live()) return;
        kill(m->ver, at, tx);
        ++tx.summary.messages;
        tx.summary.deleted_messages.push_back(m->data.id);
        bump_interaction(*m, -1, at, tx);
        for (auto* l : m->likes) del_like(l, at, tx);
        m->children.for_each([&](MessageRec* c) { del_message(c, tx.descendant_v, tx); });
    }

    void del_forum(ForumRec* f, Tx& tx) {
        if (!f->ver.live()) return;
        kill(f->ver, tx.v, tx);
        ++tx.summary.forums;
        for (auto* m : f->members) del_member(m, tx.v, tx);
        for (auto* p : f->posts) del_message(p, tx.v, tx);
    }

    void del_person(PersonRec* p, Tx& tx) {
        kill(p->ver, tx.v, tx);
        ++tx.summary.persons;
        p->knows.for_each([&](KnowsRec* k) { del_knows(k, tx.v, tx); });
        for (auto* l : p->likes) del_like(l, tx.v, tx);
        for (auto* m : p->memberships) del_member(m, tx.v, tx);
        p->messages.for_each([&](MessageRec* m) { del_message(m, tx.v, tx); });
        for (auto* f : p->moderated) {
            if (!f->ver.live()) continue;
            if (policy == ModeratorDeletionPolicy::DeleteForum) {
                del_forum(f, tx);
                continue;
            }
            if (f->moderator.latest(0) != p->data.id) continue;
            EntityId next = 0;
            for (auto* m : f->members)
                if (m->ver.live() && (next == 0 || m->data.person_id < next)) next = m->data.person_id;
            write_versioned<EntityId>(f->moderator, tx.v, next, tx);
            if (next != 0) persons.get(next)->moderated.push_back(f);
        }
    }

    template <typename Map>
    auto* live_edge(Map& map, const Pair& key, const char* what) {
        auto it = map.find(key);
        if (it == map.end() || !it->second->ver.live())
            throw UnknownEntity(std::string(what) + " " + ids(key.first, key.second) + " does not exist");
        return it->second;
    }

    void remove(const UpdateOperation& op, Tx& tx) {
        std::visit(
            [&](const auto& e) {
                using T = std::decay_t<decltype(e)>;
                if constexpr (std::is_same_v<T, Person>) {
                    PersonRec* p = persons.get(e.id);
                    if (!p || !p->ver.live()) throw UnknownPerson("person " + std::to_string(e.id) + " does not exist");
                    del_person(p, tx);
                } else if constexpr (std::is_same_v<T, Forum>) {
                    ForumRec* f = forums.get(e.id);
                    if (!f || !f->ver.live()) throw UnknownEntity("forum " + std::to_string(e.id) + " does not exist");
                    del_forum(f, tx);
                } else if constexpr (std::is_same_v<T, Message>) {
                    MessageRec* m = messages.get(e.id);
                    if (!m || !m->ver.live()) throw UnknownMessage("message " + std::to_string(e.id) + " does not exist");
                    del_message(m, tx.v, tx);
                } else if constexpr (std::is_same_v<T, KnowsEdge>) {
                    del_knows(live_edge(knows_by_pair, canonical(e.person1_id, e.person2_id), "knows"), tx.v, tx);
                } else if constexpr (std::is_same_v<T, LikesEdge>) {
                    del_like(live_edge(likes_by_pair, Pair{e.person_id, e.message_id}, "like"), tx.v, tx);
                } else {
                    del_member(live_edge(members_by_pair, Pair{e.forum_id, e.person_id}, "membership"), tx.v, tx);
                }
            },
            op.payload);
    }

    CommitInfo commit(std::span<const UpdateOperation> ops) {
        std::lock_guard lock(commit_mu);
        const std::uint64_t v = committed.load(std::memory_order_relaxed) + 1;
        Tx tx{v, faults.split_cascade ? v + 1 : v, {}, {}};
        try {
            for (const auto& op : ops) {
                if (!payload_matches(op.type, op.payload))
                    throw IntegrityError(op_name(op.type) + " with a mismatched payload");
                if (is_insert(op.type)) insert(op, tx);
                else remove(op, tx);
            }
        } catch (...) {
            for (auto it = tx.undo.rbegin(); it != tx.undo.rend(); ++it) (*it)();
            throw;
        }
        committed.store(v, std::memory_order_release);
        if (publish_hook) publish_hook(v);
        if (tx.descendant_v != v) {
            // the broken variant: descendants become invisible one version later
            std::this_thread::yield();
            committed.store(tx.descendant_v, std::memory_order_release);
            if (publish_hook) publish_hook(tx.descendant_v);
            return {tx.descendant_v, std::move(tx.summary)};
        }
        return {v, std::move(tx.summary)};
    }
};

// ---- ReferenceStore --------------------------------------------------------------------------

ReferenceStore::ReferenceStore(ModeratorDeletionPolicy policy, StoreFaults faults)
    : state_(std::make_unique<State>(policy, faults)) {}

ReferenceStore::~ReferenceStore() = default;

void ReferenceStore::bulk_load(const TemporalGraph& snapshot) {
    if (state_->committed.load() != 0) throw Error("bulk_load into a non-empty store");
    const auto ops = snapshot_as_inserts(snapshot);
    try {
        commit(ops);
    } catch (const DependencyMissing& e) {
        throw IntegrityError(std::string("snapshot: ") + e.what());
    }
}

CommitInfo ReferenceStore::commit(std::span<const UpdateOperation> ops) { return state_->commit(ops); }

void ReferenceStore::set_publish_hook(std::function<void(std::uint64_t)> hook) {
    std::lock_guard lock(state_->commit_mu);
    state_->publish_hook = std::move(hook);
}

CommitInfo ReferenceStore::execute_update(const UpdateOperation& op) { return state_->commit({&op, 1}); }

std::uint64_t ReferenceStore::current_commit_version() const {
    return state_->committed.load(std::memory_order_acquire);
}

ReferenceStore::ReadTxn ReferenceStore::begin_read() const {
    return ReadTxn(state_.get(), state_->committed.load(std::memory_order_acquire));
}

QueryResult ReferenceStore::execute_query(const QueryInstance& query) { return begin_read().run(query); }

TemporalGraph ReferenceStore::materialize() const { return begin_read().materialize(); }

// ---- reads -----------------------------------------------------------------------------------

std::uint64_t ReferenceStore::ReadTxn::at() const {
    return state_->faults.read_latest ? state_->committed.load(std::memory_order_acquire) : version_;
}

namespace {

const PersonRec* visible_person(const ReferenceStore::State& s, EntityId id, std::uint64_t v) {
    const PersonRec* p = s.persons.get(id);
    return p && p->ver.visible(v) ? p : nullptr;
}

const PersonRec* require_person(const ReferenceStore::State& s, EntityId id, std::uint64_t v) {
    const PersonRec* p = visible_person(s, id, v);
    if (!p) throw UnknownPerson("person " + std::to_string(id) + " does not exist");
    return p;
}

template <typename F>
void for_each_friend(const PersonRec* p, std::uint64_t v, F&& f) {
    p->knows.for_each([&](const KnowsRec* k) {
        if (k->ver.visible(v)) f(k->other(p), k);
    });
}

} // namespace

bool ReferenceStore::ReadTxn::person_visible(EntityId id) const { return visible_person(*state_, id, at()) != nullptr; }

bool ReferenceStore::ReadTxn::message_visible(EntityId id) const {
    const MessageRec* m = state_->messages.get(id);
    return m && m->ver.visible(at());
}

bool ReferenceStore::ReadTxn::knows_visible(EntityId a, EntityId b) const {
    const auto v = at();
    const PersonRec* p = visible_person(*state_, a, v);
    bool found = false;
    if (p) for_each_friend(p, v, [&](const PersonRec* o, const KnowsRec*) { found = found || o->data.id == b; });
    return found;
}

std::vector<EntityId> ReferenceStore::ReadTxn::friends(EntityId person) const {
    const auto v = at();
    std::vector<EntityId> out;
    if (const PersonRec* p = visible_person(*state_, person, v))
        for_each_friend(p, v, [&](const PersonRec* o, const KnowsRec*) { out.push_back(o->data.id); });
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<EntityId> ReferenceStore::ReadTxn::replies(EntityId message) const {
    const auto v = at();
    std::vector<EntityId> out;
    const MessageRec* m = state_->messages.get(message);
    if (m && m->ver.visible(v))
        m->children.for_each([&](const MessageRec* c) {
            if (c->ver.visible(v)) out.push_back(c->data.id);
        });
    std::sort(out.begin(), out.end());
    return out;
}

std::int64_t ReferenceStore::ReadTxn::interactions(EntityId a, EntityId b) const {
    const auto v = at();
    const PersonRec* p = visible_person(*state_, a, v);
    std::int64_t n = 0;
    if (p)
        for_each_friend(p, v, [&](const PersonRec* o, const KnowsRec* k) {
            if (o->data.id == b) n = k->inter->count.read(v, 0);
        });
    return n;
}

std::vector<Cr3Row> ReferenceStore::ReadTxn::cr3(const Cr3Params& q) const {
    const auto v = at();
    const PersonRec* start = require_person(*state_, q.person, v);
    std::unordered_set<const PersonRec*> reach;
    std::vector<const PersonRec*> first;
    for_each_friend(start, v, [&](const PersonRec* f, const KnowsRec*) {
        if (reach.insert(f).second) first.push_back(f);
    });
    for (const PersonRec* f : first)
        for_each_friend(f, v, [&](const PersonRec* ff, const KnowsRec*) { reach.insert(ff); });
    reach.erase(start);

    const SimInstant end = q.start_date + SimDuration::days(q.duration_days);
    std::vector<Cr3Row> rows;
    for (const PersonRec* p : reach) {
        if (p->data.country_id == q.country_x || p->data.country_id == q.country_y) continue;
        Cr3Row row{p->data.id, 0, 0};
        p->messages.for_each([&](const MessageRec* m) {
            if (!m->ver.visible(v)) return;
            const SimInstant t = m->data.lifecycle.creation;
            if (t < q.start_date || !(t < end)) return;
            if (m->data.country_id == q.country_x) ++row.x_count;
            else if (m->data.country_id == q.country_y) ++row.y_count;
        });
        if (row.x_count > 0 && row.y_count > 0) rows.push_back(row);
    }
    std::sort(rows.begin(), rows.end(), [](const Cr3Row& a, const Cr3Row& b) {
        const auto sa = a.x_count + a.y_count, sb = b.x_count + b.y_count;
        return sa != sb ? sa > sb : a.person < b.person;
    });
    return rows;
}

PathLength ReferenceStore::ReadTxn::cr13(const PathParams& q) const {
    const auto v = at();
    const PersonRec* src = require_person(*state_, q.person1, v);
    const PersonRec* dst = require_person(*state_, q.person2, v);
    if (src == dst) return {0};
    std::unordered_map<const PersonRec*, int> dist{{src, 0}};
    std::vector<const PersonRec*> frontier{src}, next;
    for (int d = 1; !frontier.empty(); ++d) {
        next.clear();
        for (const PersonRec* u : frontier) {
            bool hit = false;
            for_each_friend(u, v, [&](const PersonRec* w, const KnowsRec*) {
                if (dist.emplace(w, d).second) {
                    next.push_back(w);
                    hit = hit || w == dst;
                }
            });
            if (hit) return {d};
        }
        frontier.swap(next);
    }
    return {-1};
}

CheapestPath ReferenceStore::ReadTxn::cr14(const PathParams& q) const {
    const auto v = at();
    const PersonRec* src = require_person(*state_, q.person1, v);
    const PersonRec* dst = require_person(*state_, q.person2, v);
    if (src == dst) return {{src->data.id}, 0};

    struct Entry {
        std::int64_t dist;
        EntityId id;
        const PersonRec* p;
        bool operator>(const Entry& o) const { return std::tie(dist, id) > std::tie(o.dist, o.id); }
    };
    std::unordered_map<const PersonRec*, std::int64_t> dist{{src, 0}};
    std::unordered_map<const PersonRec*, const PersonRec*> prev;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> pq;
    pq.push({0, src->data.id, src});
    while (!pq.empty()) {
        const Entry e = pq.top();
        pq.pop();
        if (e.dist != dist[e.p]) continue;
        if (e.p == dst) break;
        for_each_friend(e.p, v, [&](const PersonRec* w, const KnowsRec* k) {
            const std::int64_t n = k->inter->count.read(v, 0);
            if (n < 1) return;
            const std::int64_t nd = e.dist + interaction_weight(n);
            auto it = dist.find(w);
            if (it == dist.end() || nd < it->second) {
                dist[w] = nd;
                prev[w] = e.p;
                pq.push({nd, w->data.id, w});
            }
        });
    }
    auto it = dist.find(dst);
    if (it == dist.end()) return {};
    CheapestPath out{{}, it->second};
    for (const PersonRec* p = dst; p; p = p == src ? nullptr : prev.at(p)) out.nodes.push_back(p->data.id);
    std::reverse(out.nodes.begin(), out.nodes.end());
    return out;
}

std::vector<Sr2Row> ReferenceStore::ReadTxn::sr2(const PersonParam& q) const {
    const auto v = at();
    const PersonRec* p = require_person(*state_, q.person, v);
    std::vector<const MessageRec*> mine;
    p->messages.for_each([&](const MessageRec* m) {
        if (m->ver.visible(v)) mine.push_back(m);
    });
    const auto newer = [](const MessageRec* a, const MessageRec* b) {
        return std::tie(a->data.lifecycle.creation, a->data.id) > std::tie(b->data.lifecycle.creation, b->data.id);
    };
    const std::size_t n = std::min<std::size_t>(10, mine.size());
    std::partial_sort(mine.begin(), mine.begin() + static_cast<std::ptrdiff_t>(n), mine.end(), newer);
    std::vector<Sr2Row> rows;
    for (std::size_t i = 0; i < n; ++i) {
        const MessageRec* m = mine[i];
        const MessageRec* root = state_->messages.get(m->data.root_post_id);
        rows.push_back({m->data.id, m->data.lifecycle.creation, m->data.root_post_id,
                        root ? root->data.creator_person_id : 0});
    }
    return rows;
}

Sr6Result ReferenceStore::ReadTxn::sr6(const MessageParam& q) const {
    const auto v = at();
    const MessageRec* m = state_->messages.get(q.message);
    if (!m || !m->ver.visible(v)) throw UnknownMessage("message " + std::to_string(q.message) + " does not exist");
    const MessageRec* root = state_->messages.get(m->data.root_post_id);
    const ForumRec* f = state_->forums.get(*root->data.container_forum_id);
    Sr6Result r{f->data.id, std::nullopt};
    if (const EntityId mod = f->moderator.read(v, 0); mod != 0) r.moderator = mod;
    return r;
}

QueryResult ReferenceStore::ReadTxn::run(const QueryInstance& q) const {
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

TemporalGraph ReferenceStore::ReadTxn::materialize() const {
    const auto v = at();
    const State& s = *state_;
    TemporalGraph g;
    s.all_persons.for_each([&](const PersonRec* r) {
        if (r->ver.visible(v)) g.persons.push_back(r->data);
    });
    s.all_knows.for_each([&](const KnowsRec* r) {
        if (r->ver.visible(v)) g.knows.push_back(r->data);
    });
    s.all_forums.for_each([&](const ForumRec* r) {
        if (!r->ver.visible(v)) return;
        Forum f = r->data;
        f.moderator_person_id = r->moderator.read(v, 0);
        g.forums.push_back(f);
    });
    s.all_members.for_each([&](const MemberRec* r) {
        if (r->ver.visible(v)) g.memberships.push_back(r->data);
    });
    s.all_messages.for_each([&](const MessageRec* r) {
        if (r->ver.visible(v)) g.messages.push_back(r->data);
    });
    s.all_likes.for_each([&](const LikeRec* r) {
        if (r->ver.visible(v)) g.likes.push_back(r->data);
    });
    return g;
}

} // namespace snb
