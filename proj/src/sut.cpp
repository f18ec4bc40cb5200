#include "snb/sut.hpp"

#include "snb/errors.hpp"
#include "snb/serialize.hpp"

#include <unordered_map>

namespace snb {

std::vector<UpdateOperation> snapshot_as_inserts(const TemporalGraph& g) {
    std::vector<UpdateOperation> ops;
    ops.reserve(g.entity_count());
    auto add = [&](OpType t, const auto& e) { ops.push_back({t, e.lifecycle.creation, e.lifecycle.creation, Payload{e}}); };
    for (const auto& p : g.persons) add(OpType::Ins1, p);
    for (const auto& f : g.forums) add(OpType::Ins4, f);
    for (const auto& hm : g.memberships) add(OpType::Ins5, hm);
    for (const auto& k : g.knows) add(OpType::Ins8, k);

    std::unordered_map<EntityId, const Message*> by_id;
    for (const auto& m : g.messages)
        if (!by_id.emplace(m.id, &m).second) throw IntegrityError("duplicate message " + std::to_string(m.id));

    // parent-first order; 0 = unvisited, 1 = on the current chain, 2 = emitted
    std::unordered_map<EntityId, int> state;
    std::vector<const Message*> chain;
    for (const auto& m : g.messages) {
        chain.clear();
        for (const Message* cur = &m; cur;) {
            int& st = state[cur->id];
            if (st == 2) break;
            if (st == 1) throw IntegrityError("reply cycle through message " + std::to_string(cur->id));
            st = 1;
            chain.push_back(cur);
            if (cur->is_post()) break;
            if (!cur->reply_to_message_id) throw IntegrityError("comment " + std::to_string(cur->id) + " without parent");
            auto it = by_id.find(*cur->reply_to_message_id);
            if (it == by_id.end())
                throw IntegrityError("comment " + std::to_string(cur->id) + " replies to missing message " +
                                     std::to_string(*cur->reply_to_message_id));
            cur = it->second;
        }
        for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
            state[(*it)->id] = 2;
            add((*it)->is_post() ? OpType::Ins6 : OpType::Ins7, **it);
        }
    }

    std::unordered_map<EntityId, bool> is_post;
    for (const auto& m : g.messages) is_post.emplace(m.id, m.is_post());
    for (const auto& l : g.likes) {
        auto it = is_post.find(l.message_id);
        if (it == is_post.end())
            throw IntegrityError("like of missing message " + std::to_string(l.message_id));
        add(it->second ? OpType::Ins2 : OpType::Ins3, l);
    }
    return ops;
}

void bulk_load_dir(SystemUnderTest& sut, const std::filesystem::path& dir) {
    const auto snap = std::filesystem::exists(dir / "snapshot") ? dir / "snapshot" : dir;
    sut.bulk_load(read_entity_csvs(snap, false));
}

} // namespace snb
