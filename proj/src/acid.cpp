#include "snb/acid.hpp"

#include "snb/errors.hpp"
#include "snb/random.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <optional>
#include <thread>

namespace snb {

std::string_view to_string(AcidStore store) {
    switch (store) {
    case AcidStore::Reference: return "reference";
    case AcidStore::ReadLatest: return "read-latest";
    case AcidStore::SplitCascade: return "split-cascade";
    }
    return "reference";
}

AcidStore parse_acid_store(std::string_view text) {
    if (text == "reference") return AcidStore::Reference;
    if (text == "read-latest") return AcidStore::ReadLatest;
    if (text == "split-cascade") return AcidStore::SplitCascade;
    throw ConfigInvalid("store: expected reference, read-latest or split-cascade, got '" + std::string(text) + "'");
}

std::unique_ptr<ReferenceStore> make_acid_store(AcidStore store) {
    StoreFaults f;
    f.read_latest = store == AcidStore::ReadLatest;
    f.split_cascade = store == AcidStore::SplitCascade;
    return std::make_unique<ReferenceStore>(ModeratorDeletionPolicy::DeleteForum, f);
}

// ---- sequencer ------------------------------------------------------------------------------

StepSequencer::StepSequencer(std::vector<int> order, std::chrono::milliseconds stall)
    : order_(std::move(order)), stall_(stall) {}

bool StepSequencer::wait_turn(int actor) {
    std::unique_lock lock(mu_);
    const bool ok = cv_.wait_for(lock, stall_, [&] { return aborted_ || (pos_ < order_.size() && order_[pos_] == actor); });
    if (!ok) {
        aborted_ = true;
        cv_.notify_all();
    }
    return !aborted_;
}

void StepSequencer::done() {
    {
        std::lock_guard lock(mu_);
        ++pos_;
    }
    cv_.notify_all();
}

std::size_t StepSequencer::remaining(int actor) const {
    std::lock_guard lock(mu_);
    if (pos_ >= order_.size()) return 0;
    return static_cast<std::size_t>(std::count(order_.begin() + static_cast<std::ptrdiff_t>(pos_), order_.end(), actor));
}

void StepSequencer::abort() {
    {
        std::lock_guard lock(mu_);
        aborted_ = true;
    }
    cv_.notify_all();
}

bool StepSequencer::aborted() const {
    std::lock_guard lock(mu_);
    return aborted_;
}

// ---- scenarios ------------------------------------------------------------------------------

namespace {

const SimInstant kT0 = default_simulation_start() + SimDuration::days(1);

UpdateOperation op(OpType t, Payload p) { return {t, kT0, kT0, std::move(p)}; }

Person person(EntityId id) {
    Person p;
    p.id = id;
    p.first_name = "p" + std::to_string(id);
    p.last_name = "acid";
    p.country_id = 1;
    p.lifecycle.creation = kT0;
    return p;
}

UpdateOperation knows(EntityId a, EntityId b) { return op(OpType::Ins8, make_knows(a, b, Lifecycle{kT0, std::nullopt})); }

Message message(EntityId id, EntityId creator, std::optional<EntityId> parent, EntityId root) {
    Message m;
    m.id = id;
    m.kind = parent ? MessageKind::Comment : MessageKind::Post;
    m.creator_person_id = creator;
    if (!parent) m.container_forum_id = 10;
    m.reply_to_message_id = parent;
    m.country_id = 1;
    m.lifecycle.creation = kT0;
    m.root_post_id = root;
    return m;
}

/// Collects forbidden observations from any thread.
class Findings {
public:
    void add(std::string what) {
        std::lock_guard lock(mu_);
        if (first_.empty()) first_ = std::move(what);
    }
    std::string first() const {
        std::lock_guard lock(mu_);
        return first_;
    }

private:
    mutable std::mutex mu_;
    std::string first_;
};

std::string ids(const std::vector<EntityId>& v) {
    std::string s = "{";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s + "}";
}

/// Runs one thread per actor; each executes `step(actor, k)` on its k-th turn.
template <typename Step>
void run_actors(StepSequencer& seq, int actors, const std::vector<int>& order, Step step, Findings& findings) {
    std::vector<std::jthread> threads;
    for (int a = 0; a < actors; ++a) {
        const auto turns = static_cast<std::size_t>(std::count(order.begin(), order.end(), a));
        threads.emplace_back([&, a, turns] {
            for (std::size_t k = 0; k < turns; ++k) {
                if (!seq.wait_turn(a)) return;
                try {
                    step(a, k);
                } catch (const std::exception& e) {
                    findings.add(std::string("step raised: ") + e.what());
                }
                seq.done();
            }
        });
    }
    threads.clear();
    if (seq.aborted()) findings.add("interleaving stalled");
}

} // namespace

InterleavingOutcome run_traversal_anomaly(ReferenceStore& store, std::uint64_t seed) {
    enum Actor { Ta = 0, Tb = 1, Tc = 2 };
    std::vector<UpdateOperation> setup;
    for (EntityId id = 1; id <= 4; ++id) setup.push_back(op(OpType::Ins1, person(id)));
    setup.push_back(knows(1, 2));
    setup.push_back(knows(2, 3));
    setup.push_back(knows(3, 4));
    store.commit(setup);

    // Ta begins first and finishes last; Tb and Tc land anywhere between, Tb before Tc
    Rng rng(seed);
    std::vector<int> middle(6, Ta);
    const auto i = rng.index(5);
    const auto j = i + 1 + rng.index(5 - i);
    middle[i] = Tb;
    middle[j] = Tc;
    std::vector<int> order{Ta};
    order.insert(order.end(), middle.begin(), middle.end());
    order.push_back(Ta);

    const std::map<EntityId, std::vector<EntityId>> expected{{1, {2}}, {2, {1, 3}}, {3, {2, 4}}, {4, {3}}};
    Findings findings;
    std::optional<ReferenceStore::ReadTxn> txn;
    std::deque<EntityId> queue;
    std::map<EntityId, int> dist;

    auto step = [&](int actor, std::size_t k) {
        if (actor == Tb) {
            store.execute_update(op(OpType::Del1, person(2)));
            return;
        }
        if (actor == Tc) {
            const std::vector<UpdateOperation> batch{op(OpType::Ins1, person(5)), knows(3, 5), knows(5, 4)};
            store.commit(batch);
            return;
        }
        if (k == 0) {
            txn.emplace(store.begin_read());
            queue = {1};
            dist = {{1, 0}};
            return;
        }
        if (k <= 4) {
            if (queue.empty()) return;
            const EntityId cur = queue.front();
            queue.pop_front();
            const auto fr = txn->friends(cur);
            if (fr != expected.at(cur))
                findings.add("Ta read friends(n" + std::to_string(cur) + ") = " + ids(fr) + ", snapshot has " +
                             ids(expected.at(cur)));
            for (EntityId f : fr) {
                if (f == 5) findings.add("Ta observed n5 through n" + std::to_string(cur));
                if (dist.emplace(f, dist[cur] + 1).second) queue.push_back(f);
            }
            return;
        }
        if (txn->person_visible(5)) findings.add("Ta observed n5 as a live person");
        if (txn->knows_visible(3, 5) || txn->knows_visible(5, 4)) findings.add("Ta observed an edge to n5");
        if (!txn->person_visible(2)) findings.add("Ta lost n2, deleted after its snapshot");
        const auto hops = txn->cr13({1, 4}).hops;
        if (hops != 3) findings.add("Ta computed dist(n1, n4) = " + std::to_string(hops) + ", snapshot has 3");
        if (!dist.count(4) || dist[4] != 3) findings.add("Ta's walk did not reach n4 at distance 3");
    };

    StepSequencer seq(order);
    run_actors(seq, 3, order, step, findings);

    InterleavingOutcome out;
    out.seed = seed;
    std::map<int, int> turn;
    for (int a : order) {
        const int k = turn[a]++;
        if (a == Tb) out.order.push_back("Tb:delete-n2");
        else if (a == Tc) out.order.push_back("Tc:insert-n5");
        else out.order.push_back(k == 0 ? "Ta:begin" : k <= 4 ? "Ta:expand" : "Ta:final");
    }
    out.detail = findings.first();
    out.pass = out.detail.empty();
    return out;
}

InterleavingOutcome run_cascade_atomicity(ReferenceStore& store, std::uint64_t seed) {
    // post 100: 101 -> 102 -> 103 and 104 -> 105; post 200 with 201 must survive
    const std::map<EntityId, EntityId> parent{{101, 100}, {102, 101}, {103, 102}, {104, 100}, {105, 104}};
    std::vector<UpdateOperation> setup{op(OpType::Ins1, person(1)), op(OpType::Ins1, person(2))};
    setup.push_back(op(OpType::Ins4, Forum{10, 1, Lifecycle{kT0, std::nullopt}}));
    setup.push_back(op(OpType::Ins5, HasMemberEdge{10, 2, Lifecycle{kT0, std::nullopt}}));
    setup.push_back(op(OpType::Ins6, message(100, 1, std::nullopt, 100)));
    for (const auto& [c, p] : parent) setup.push_back(op(OpType::Ins7, message(c, c % 2 ? 2 : 1, p, 100)));
    setup.push_back(op(OpType::Ins3, LikesEdge{2, 102, Lifecycle{kT0, std::nullopt}}));
    setup.push_back(op(OpType::Ins6, message(200, 2, std::nullopt, 200)));
    setup.push_back(op(OpType::Ins7, message(201, 1, 200, 200)));
    store.commit(setup);

    Rng rng(seed);
    const int readers = 2 + static_cast<int>(rng.index(2));
    const int checks = 3 + static_cast<int>(rng.index(3));
    std::vector<int> reader_turns;
    for (int r = 1; r <= readers; ++r) reader_turns.insert(reader_turns.end(), static_cast<std::size_t>(checks), r);
    rng.shuffle(reader_turns);
    // three writer turns with at least one reader check between consecutive ones
    const std::size_t K = reader_turns.size();
    const std::size_t p1 = rng.index(K - 1);
    const std::size_t p2 = p1 + 1 + rng.index(K - 1 - p1);
    const std::size_t p3 = p2 + 1 + rng.index(K - p2);
    std::vector<int> order;
    for (std::size_t i = 0; i <= K; ++i) {
        if (i == p1 || i == p2 || i == p3) order.push_back(0);
        if (i < K) order.push_back(reader_turns[i]);
    }

    Findings findings;
    StepSequencer seq(order);
    bool deleting = false; // writer thread only
    store.set_publish_hook([&](std::uint64_t) {
        // hand the turn to the readers at every publish, keeping one writer turn for the return
        if (deleting && seq.remaining(0) >= 2) {
            seq.done();
            if (!seq.wait_turn(0)) return;
        }
    });

    auto check = [&](int reader) {
        const auto txn = store.begin_read();
        const std::string at = " (reader " + std::to_string(reader) + ", version " + std::to_string(txn.version()) + ")";
        std::map<EntityId, bool> vis;
        for (EntityId m : {100, 101, 102, 103, 104, 105, 200, 201}) vis[m] = txn.message_visible(m);
        for (const auto& [c, p] : parent) {
            if (vis[c] && !vis[p])
                findings.add("comment " + std::to_string(c) + " visible while its parent " + std::to_string(p) +
                             " is deleted" + at);
            if (vis[c] && !vis[100]) findings.add("comment " + std::to_string(c) + " visible without post 100" + at);
        }
        if (!vis[200] || !vis[201]) findings.add("unrelated thread 200 lost" + at);
        for (EntityId person : {1, 2})
            for (const auto& row : txn.sr2({person}))
                if (!txn.message_visible(row.root_post))
                    findings.add("SR2 of person " + std::to_string(person) + " lists message " +
                                 std::to_string(row.message) + " whose post " + std::to_string(row.root_post) +
                                 " is deleted" + at);
        for (const auto& [c, p] : parent)
            if (vis[c]) {
                const auto r = txn.sr6({c});
                if (r.forum != 10) findings.add("SR6 of comment " + std::to_string(c) + " lost its forum" + at);
            }
    };

    // the writer's first turn spans the publishes, handing over to readers from the hook
    std::vector<std::jthread> threads;
    threads.emplace_back([&] {
        if (!seq.wait_turn(0)) return;
        deleting = true;
        try {
            store.execute_update(op(OpType::Del6, message(100, 1, std::nullopt, 100)));
        } catch (const std::exception& e) {
            findings.add(std::string("writer raised: ") + e.what());
        }
        deleting = false;
        seq.done();
        while (seq.remaining(0) > 0) {
            if (!seq.wait_turn(0)) return;
            seq.done();
        }
    });
    for (int r = 1; r <= readers; ++r)
        threads.emplace_back([&, r] {
            for (int k = 0; k < checks; ++k) {
                if (!seq.wait_turn(r)) return;
                try {
                    check(r);
                } catch (const std::exception& e) {
                    findings.add(std::string("reader raised: ") + e.what());
                }
                seq.done();
            }
        });
    threads.clear();
    store.set_publish_hook({});
    if (seq.aborted()) findings.add("interleaving stalled");

    const auto final_txn = store.begin_read();
    for (EntityId m : {100, 101, 102, 103, 104, 105})
        if (final_txn.message_visible(m)) findings.add("message " + std::to_string(m) + " survived DEL6");

    InterleavingOutcome out;
    out.seed = seed;
    int w = 0;
    for (int a : order)
        out.order.push_back(a == 0 ? (w++ == 0 ? "W:delete-post" : "W:resume") : "R" + std::to_string(a) + ":check");
    out.detail = findings.first();
    out.pass = out.detail.empty();
    return out;
}

std::vector<std::string> acid_scenario_names() { return {"traversal-anomaly", "cascade-atomicity"}; }

namespace {

std::uint64_t interleaving_seed(std::uint64_t seed, std::uint64_t i) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (i + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace

bool AcidReport::pass() const {
    return !scenarios.empty() && std::all_of(scenarios.begin(), scenarios.end(), [](const auto& s) { return s.pass(); });
}

nlohmann::json AcidReport::to_json() const {
    nlohmann::json list = nlohmann::json::array();
    for (const auto& s : scenarios) {
        nlohmann::json failures = nlohmann::json::array();
        for (const auto& f : s.failures)
            failures.push_back({{"seed", f.seed}, {"detail", f.detail}, {"order", f.order}});
        list.push_back({{"name", s.name}, {"runs", s.runs}, {"passed", s.passed}, {"pass", s.pass()},
                        {"failures", failures}});
    }
    return {{"store", std::string(snb::to_string(store))},
            {"seed", seed},
            {"interleavings", interleavings},
            {"scenarios", list},
            {"pass", pass()}};
}

AcidReport run_acid(AcidStore store, const std::string& scenario, std::uint64_t seed, std::size_t interleavings) {
    const auto names = acid_scenario_names();
    std::vector<std::string> selected;
    if (scenario == "all") selected = names;
    else if (std::find(names.begin(), names.end(), scenario) != names.end()) selected = {scenario};
    else throw ConfigInvalid("scenario: unknown '" + scenario + "', expected all, traversal-anomaly or cascade-atomicity");
    if (interleavings == 0) throw ConfigInvalid("interleavings: must be at least 1");

    AcidReport report{store, seed, interleavings, {}};
    for (const auto& name : selected) {
        ScenarioReport sr{name, 0, 0, {}};
        for (std::size_t i = 0; i < interleavings; ++i) {
            auto s = make_acid_store(store);
            const auto iseed = interleaving_seed(seed, i);
            const auto outcome =
                name == "traversal-anomaly" ? run_traversal_anomaly(*s, iseed) : run_cascade_atomicity(*s, iseed);
            ++sr.runs;
            if (outcome.pass) ++sr.passed;
            else if (sr.failures.size() < 5) sr.failures.push_back(outcome);
        }
        report.scenarios.push_back(std::move(sr));
    }
    return report;
}

} // namespace snb
