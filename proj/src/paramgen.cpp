#include "snb/paramgen.hpp"

#include "snb/errors.hpp"
#include "snb/random.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <functional>
#include <mutex>
#include <set>
#include <numeric>
#include <thread>

namespace snb {

namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    // splitmix64 finaliser over the combined words
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (a + 1) + 0xbf58476d1ce4e5b9ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

FactorTable make_table(std::string name, std::vector<std::string> columns,
                       const std::map<FactorKey, std::int64_t>& counts) {
    FactorTable t{std::move(name), std::move(columns), {}};
    t.rows.reserve(counts.size());
    for (const auto& [k, f] : counts) t.rows.push_back({k, f});
    return t;
}

/// Alive on the whole day, using the same strict bounds as g1.
bool alive_all_day(const Lifecycle& l, SimDay day) {
    return l.creation < day.start() && (!l.deletion || *l.deletion > day.end());
}

bool touches_day(const Lifecycle& l, SimDay day) {
    return l.creation < day.end() && (!l.deletion || *l.deletion > day.start());
}

std::vector<const FactorTable::Row*> sorted_by_frequency(const FactorTable& table) {
    std::vector<const FactorTable::Row*> rows;
    rows.reserve(table.rows.size());
    for (const auto& r : table.rows) rows.push_back(&r);
    std::sort(rows.begin(), rows.end(), [](const auto* a, const auto* b) {
        return std::tie(a->frequency, a->key) < std::tie(b->frequency, b->key);
    });
    return rows;
}

} // namespace

std::optional<std::int64_t> FactorTable::frequency_of(const FactorKey& key) const {
    auto it = std::lower_bound(rows.begin(), rows.end(), key, [](const Row& r, const FactorKey& k) { return r.key < k; });
    if (it == rows.end() || it->key != key) return std::nullopt;
    return it->frequency;
}

FactorTables build_factor_tables(const TemporalGraph& graph) {
    std::unordered_map<EntityId, EntityId> country;
    std::map<FactorKey, std::int64_t> friends, messages, pairs, per_day;
    for (const auto& p : graph.persons) {
        country[p.id] = p.country_id;
        friends[{p.id}] = 0;
        messages[{p.id}] = 0;
    }
    for (const auto& k : graph.knows) {
        ++friends[{k.person1_id}];
        ++friends[{k.person2_id}];
        const EntityId a = country.at(k.person1_id), b = country.at(k.person2_id);
        if (a != b) ++pairs[{std::min(a, b), std::max(a, b)}];
    }
    for (const auto& m : graph.messages) {
        ++messages[{m.creator_person_id}];
        ++per_day[{day_of(m.lifecycle.creation).days_since_epoch}];
    }
    FactorTables out;
    out["countryPairsNumFriends"] = make_table("countryPairsNumFriends", {"country1Id", "country2Id"}, pairs);
    out["personNumFriends"] = make_table("personNumFriends", {"personId"}, friends);
    out["personNumMessages"] = make_table("personNumMessages", {"personId"}, messages);
    out["messageCountPerDay"] = make_table("messageCountPerDay", {"day"}, per_day);
    return out;
}

std::vector<FactorKey> select_window(const FactorTable& table, std::size_t min_group_size) {
    const auto rows = sorted_by_frequency(table);
    const std::size_t n = rows.size();
    if (n == 0 || min_group_size == 0 || n < min_group_size)
        throw NoQualifyingGroup("no group of at least " + std::to_string(min_group_size) + " rows in " + table.name);

    const std::int64_t range = rows.back()->frequency - rows.front()->frequency;
    // gap > 5% of range splits; compare 20*gap > range to stay in integers
    std::vector<std::size_t> bounds{0};
    for (std::size_t i = 1; i < n; ++i)
        if (20 * (rows[i]->frequency - rows[i - 1]->frequency) > range) bounds.push_back(i);
    bounds.push_back(n);

    std::vector<__int128> sum(n + 1, 0), sq(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) {
        const __int128 f = rows[i]->frequency;
        sum[i + 1] = sum[i] + f;
        sq[i + 1] = sq[i] + f * f;
    }

    struct Best {
        bool set = false;
        __int128 spread = 0; // len*sumsq - sum^2 = len^2 * variance
        std::size_t len = 0, start = 0;
        std::int64_t median2 = 0;
    } best;

    for (std::size_t g = 0; g + 1 < bounds.size(); ++g) {
        const std::size_t lo = bounds[g], hi = bounds[g + 1];
        if (hi - lo < min_group_size) continue;
        for (std::size_t s = lo; s + min_group_size <= hi; ++s) {
            for (std::size_t e = s + min_group_size; e <= hi; ++e) {
                const std::size_t len = e - s;
                const __int128 tot = sum[e] - sum[s];
                const __int128 spread = static_cast<__int128>(len) * (sq[e] - sq[s]) - tot * tot;
                const std::int64_t median2 = rows[s + (len - 1) / 2]->frequency + rows[s + len / 2]->frequency;
                bool better = false;
                if (!best.set) {
                    better = true;
                } else {
                    // variance a/len^2 vs b/best.len^2
                    const __int128 lhs = spread * static_cast<__int128>(best.len) * best.len;
                    const __int128 rhs = best.spread * static_cast<__int128>(len) * len;
                    if (lhs != rhs) better = lhs < rhs;
                    else if (len != best.len) better = len > best.len;
                    else if (median2 != best.median2) better = median2 < best.median2;
                    else better = s < best.start;
                }
                if (better) best = {true, spread, len, s, median2};
            }
        }
    }
    if (!best.set)
        throw NoQualifyingGroup("no group of at least " + std::to_string(min_group_size) + " rows in " + table.name);

    std::vector<FactorKey> keys;
    keys.reserve(best.len);
    for (std::size_t i = best.start; i < best.start + best.len; ++i) keys.push_back(rows[i]->key);
    return keys;
}

std::vector<FactorKey> select_percentile(const FactorTable& table, double p, std::size_t count) {
    const auto rows = sorted_by_frequency(table);
    const auto n = static_cast<std::int64_t>(rows.size());
    if (n == 0) return {};
    auto rank = static_cast<std::int64_t>(std::ceil(p * static_cast<double>(n)));
    rank = std::clamp<std::int64_t>(rank, 1, n);
    const std::int64_t centre = rank - 1;

    std::vector<FactorKey> keys;
    // walk outwards from the centre, lower index first on equal distance
    for (std::int64_t d = 0; static_cast<std::size_t>(keys.size()) < count && (centre - d >= 0 || centre + d < n); ++d) {
        if (centre - d >= 0) keys.push_back(rows[centre - d]->key);
        if (d > 0 && centre + d < n && keys.size() < count) keys.push_back(rows[centre + d]->key);
    }
    return keys;
}

// ---- bound graphs ---------------------------------------------------------------------------

std::size_t BoundGraphs::g1_edge_count() const {
    std::size_t n = 0;
    for (const auto& a : g1) n += a.size();
    return n / 2;
}

std::size_t BoundGraphs::g2_edge_count() const {
    std::size_t n = 0;
    for (const auto& a : g2) n += a.size();
    return n / 2;
}

BoundGraphs build_bound_graphs(const TemporalGraph& graph, SimDay day) {
    BoundGraphs b;
    b.day = day;
    for (const auto& p : graph.persons) {
        if (!touches_day(p.lifecycle, day)) continue;
        b.index.emplace(p.id, static_cast<std::uint32_t>(b.persons.size()));
        b.persons.push_back(p.id);
        b.in_g1.push_back(alive_all_day(p.lifecycle, day) ? 1 : 0);
    }
    b.g1.resize(b.persons.size());
    b.g2.resize(b.persons.size());
    for (const auto& k : graph.knows) {
        const auto& l = k.lifecycle;
        const bool e2 = l.creation < day.end() && (!l.deletion || *l.deletion > day.start());
        if (!e2) continue;
        const bool e1 = l.creation < day.start() && (!l.deletion || *l.deletion > day.end());
        const auto ia = b.index.find(k.person1_id), ib = b.index.find(k.person2_id);
        if (ia == b.index.end() || ib == b.index.end()) continue;
        b.g2[ia->second].push_back(ib->second);
        b.g2[ib->second].push_back(ia->second);
        if (e1) {
            b.g1[ia->second].push_back(ib->second);
            b.g1[ib->second].push_back(ia->second);
        }
    }
    return b;
}

namespace {

/// Depth-limited BFS reusing its buffers; dist[v] valid only where stamp[v] == epoch.
class Bfs {
public:
    explicit Bfs(std::size_t n) : dist_(n), stamp_(n, 0) {}

    void run(const std::vector<std::vector<std::uint32_t>>& adj, std::uint32_t src, int limit) {
        ++epoch_;
        queue_.clear();
        visit(src, 0);
        for (std::size_t head = 0; head < queue_.size(); ++head) {
            const auto u = queue_[head];
            if (dist_[u] == limit) continue;
            for (auto v : adj[u])
                if (stamp_[v] != epoch_) visit(v, dist_[u] + 1);
        }
    }
    int dist(std::uint32_t v) const { return stamp_[v] == epoch_ ? dist_[v] : -1; }
    const std::vector<std::uint32_t>& reached() const { return queue_; }

private:
    void visit(std::uint32_t v, int d) {
        stamp_[v] = epoch_;
        dist_[v] = d;
        queue_.push_back(v);
    }
    std::vector<int> dist_;
    std::vector<std::uint32_t> stamp_;
    std::vector<std::uint32_t> queue_;
    std::uint32_t epoch_ = 0;
};

} // namespace

std::vector<PersonPair> reachable_candidates(const BoundGraphs& bound, int k) {
    const std::size_t n = bound.persons.size();
    Bfs b1(n), b2(n);
    std::vector<PersonPair> out;
    for (std::uint32_t s = 0; s < n; ++s) {
        if (!bound.in_g1[s]) continue;
        b2.run(bound.g2, s, k);
        bool any = false;
        for (auto v : b2.reached())
            if (b2.dist(v) == k && bound.in_g1[v] && bound.persons[s] < bound.persons[v]) any = true;
        if (!any) continue;
        // g1 distances are never shorter, so d1 == k iff reached within k
        b1.run(bound.g1, s, k);
        for (auto v : b2.reached()) {
            if (b2.dist(v) != k || !bound.in_g1[v] || bound.persons[s] >= bound.persons[v]) continue;
            if (b1.dist(v) == k) out.emplace_back(bound.persons[s], bound.persons[v]);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<PersonPair> curate_reachable_pairs(const BoundGraphs& bound, int k, std::size_t count,
                                               std::uint64_t seed) {
    auto candidates = reachable_candidates(bound, k);
    if (candidates.size() < count)
        throw InsufficientPairs("only " + std::to_string(candidates.size()) + " pairs at distance " +
                                std::to_string(k) + " on " + to_iso_date(bound.day));
    Rng rng(seed);
    // partial Fisher-Yates
    for (std::size_t i = 0; i < count; ++i) std::swap(candidates[i], candidates[i + rng.index(candidates.size() - i)]);
    candidates.resize(count);
    return candidates;
}

std::vector<PersonPair> curate_unreachable_pairs(const BoundGraphs& bound, std::size_t count, std::uint64_t seed) {
    const std::size_t n = bound.persons.size();
    std::vector<std::uint32_t> comp(n, UINT32_MAX);
    std::uint32_t ncomp = 0;
    std::vector<std::uint32_t> stack;
    for (std::uint32_t s = 0; s < n; ++s) {
        if (comp[s] != UINT32_MAX) continue;
        comp[s] = ncomp;
        stack.assign(1, s);
        while (!stack.empty()) {
            const auto u = stack.back();
            stack.pop_back();
            for (auto v : bound.g2[u])
                if (comp[v] == UINT32_MAX) {
                    comp[v] = ncomp;
                    stack.push_back(v);
                }
        }
        ++ncomp;
    }

    std::vector<std::uint32_t> alive;
    std::vector<std::uint64_t> per_comp(ncomp, 0);
    for (std::uint32_t v = 0; v < n; ++v)
        if (bound.in_g1[v]) {
            alive.push_back(v);
            ++per_comp[comp[v]];
        }
    const std::uint64_t m = alive.size();
    std::uint64_t same = 0;
    for (auto c : per_comp) same += c * c;
    const std::uint64_t total = (m * m - same) / 2;
    if (total < count)
        throw InsufficientPairs("only " + std::to_string(total) + " cross-component pairs on " + to_iso_date(bound.day));

    auto ordered = [&](std::uint32_t a, std::uint32_t b) {
        EntityId x = bound.persons[a], y = bound.persons[b];
        return x < y ? PersonPair{x, y} : PersonPair{y, x};
    };
    Rng rng(seed);
    std::vector<PersonPair> out;
    if (total <= 4 * count + 1024) {
        std::vector<PersonPair> all;
        for (std::size_t i = 0; i < alive.size(); ++i)
            for (std::size_t j = i + 1; j < alive.size(); ++j)
                if (comp[alive[i]] != comp[alive[j]]) all.push_back(ordered(alive[i], alive[j]));
        std::sort(all.begin(), all.end());
        for (std::size_t i = 0; i < count; ++i) std::swap(all[i], all[i + rng.index(all.size() - i)]);
        all.resize(count);
        return all;
    }
    // rejection sampling: at least 1024 valid pairs exist, so acceptance stays reasonable
    std::set<PersonPair> seen;
    while (out.size() < count) {
        const auto a = alive[rng.index(alive.size())], b = alive[rng.index(alive.size())];
        if (comp[a] == comp[b]) continue;
        const auto p = ordered(a, b);
        if (seen.insert(p).second) out.push_back(p);
    }
    return out;
}

// ---- per-day buckets ------------------------------------------------------------------------

namespace {

struct Shared {
    const TemporalGraph& graph;
    const ParamGenOptions& options;
    FactorTables tables;
    std::unordered_map<EntityId, const Person*> persons;
};

FactorTable filter_rows(const FactorTable& t, const std::function<bool(const FactorKey&, std::int64_t)>& keep) {
    FactorTable out{t.name, t.key_columns, {}};
    for (const auto& r : t.rows)
        if (keep(r.key, r.frequency)) out.rows.push_back(r);
    return out;
}

/// Up to `count` keys from a window, seeded sample when the window is larger.
std::vector<FactorKey> sample_keys(std::vector<FactorKey> keys, std::size_t count, Rng& rng) {
    if (keys.size() > count) {
        for (std::size_t i = 0; i < count; ++i) std::swap(keys[i], keys[i + rng.index(keys.size() - i)]);
        keys.resize(count);
    }
    return keys;
}

ParameterBucket make_bucket(const Shared& sh, SimDay day) {
    const auto& opt = sh.options;
    ParameterBucket bucket;
    bucket.day = day;
    for (auto v : kAllVariants) bucket.per_query[v];
    auto warn = [&](std::string w) {
        bucket.partial = true;
        bucket.warnings.push_back(std::move(w));
    };
    auto seed_for = [&](QueryVariant v) {
        return mix_seed(opt.seed, static_cast<std::uint64_t>(day.days_since_epoch), static_cast<std::uint64_t>(v));
    };
    auto person_alive = [&](const FactorKey& k, std::int64_t freq) {
        auto it = sh.persons.find(k.at(0));
        return freq > 0 && it != sh.persons.end() && alive_all_day(it->second->lifecycle, day);
    };

    // CR3: country pairs by percentile, person and start date by window
    {
        const auto& pairs = sh.tables.at("countryPairsNumFriends");
        const std::size_t n = std::min(opt.per_day, std::max<std::size_t>(1, pairs.rows.size() / 2));
        std::vector<FactorKey> persons, dates;
        try {
            Rng rng(seed_for(QueryVariant::CR3a));
            persons = sample_keys(select_window(filter_rows(sh.tables.at("personNumFriends"), person_alive),
                                                opt.min_group_size),
                                  opt.per_day, rng);
        } catch (const NoQualifyingGroup& e) {
            warn(std::string("CR3 person: ") + e.what());
        }
        const auto last_start = day.days_since_epoch - opt.cr3_duration_days;
        try {
            Rng rng(seed_for(QueryVariant::CR3b));
            dates = sample_keys(select_window(filter_rows(sh.tables.at("messageCountPerDay"),
                                                          [&](const FactorKey& k, std::int64_t) { return k.at(0) <= last_start; }),
                                              opt.min_group_size),
                                opt.per_day, rng);
        } catch (const NoQualifyingGroup& e) {
            warn(std::string("CR3 start date: ") + e.what());
        }
        if (pairs.rows.empty()) warn("CR3: no cross-country friendships");
        if (!pairs.rows.empty() && !persons.empty() && !dates.empty()) {
            for (auto [variant, p] : {std::pair{QueryVariant::CR3a, 1.0}, std::pair{QueryVariant::CR3b, 0.01}}) {
                const auto countries = select_percentile(pairs, p, n);
                auto& out = bucket.per_query[variant];
                for (std::size_t i = 0; i < opt.per_day; ++i) {
                    const auto& c = countries[i % countries.size()];
                    out.push_back(Cr3Params{persons[i % persons.size()].at(0), c.at(0), c.at(1),
                                            SimDay{dates[i % dates.size()].at(0)}.start(), opt.cr3_duration_days});
                }
            }
        }
    }

    // CR13 / CR14 pairs
    {
        const auto bound = build_bound_graphs(sh.graph, day);
        auto fill = [&](QueryVariant v, auto&& curate) {
            try {
                for (const auto& [a, b] : curate(seed_for(v))) bucket.per_query[v].push_back(PathParams{a, b});
            } catch (const InsufficientPairs& e) {
                warn(std::string(variant_name(v)) + ": " + e.what());
            }
        };
        fill(QueryVariant::CR13a, [&](std::uint64_t s) { return curate_unreachable_pairs(bound, opt.per_day, s); });
        fill(QueryVariant::CR14a, [&](std::uint64_t s) { return curate_unreachable_pairs(bound, opt.per_day, s); });
        std::vector<PersonPair> reachable;
        bool have_reachable = false;
        auto reach = [&](std::uint64_t s) {
            if (!have_reachable) {
                reachable = reachable_candidates(bound, opt.k);
                have_reachable = true;
            }
            if (reachable.size() < opt.per_day)
                throw InsufficientPairs("only " + std::to_string(reachable.size()) + " pairs at distance " +
                                        std::to_string(opt.k) + " on " + to_iso_date(day));
            auto c = reachable;
            Rng rng(s);
            for (std::size_t i = 0; i < opt.per_day; ++i) std::swap(c[i], c[i + rng.index(c.size() - i)]);
            c.resize(opt.per_day);
            return c;
        };
        fill(QueryVariant::CR13b, reach);
        fill(QueryVariant::CR14b, reach);
    }

    // SR2 persons by message-count window
    try {
        Rng rng(seed_for(QueryVariant::SR2));
        for (const auto& k : sample_keys(select_window(filter_rows(sh.tables.at("personNumMessages"), person_alive),
                                                       opt.min_group_size),
                                         opt.per_day, rng))
            bucket.per_query[QueryVariant::SR2].push_back(PersonParam{k.at(0)});
    } catch (const NoQualifyingGroup& e) {
        warn(std::string("SR2: ") + e.what());
    }

    // SR6 messages
    {
        std::vector<EntityId> ids;
        for (const auto& m : sh.graph.messages)
            if (alive_all_day(m.lifecycle, day)) ids.push_back(m.id);
        if (ids.size() < opt.per_day) warn("SR6: only " + std::to_string(ids.size()) + " messages alive all day");
        Rng rng(seed_for(QueryVariant::SR6));
        const std::size_t n = std::min(ids.size(), opt.per_day);
        for (std::size_t i = 0; i < n; ++i) {
            std::swap(ids[i], ids[i + rng.index(ids.size() - i)]);
            bucket.per_query[QueryVariant::SR6].push_back(MessageParam{ids[i]});
        }
    }
    return bucket;
}

} // namespace

std::vector<ParameterBucket> generate_parameters(const TemporalGraph& graph, SimDay first_day, SimDay last_day,
                                                 const ParamGenOptions& options) {
    if (options.k < 1) throw ConfigInvalid("k must be at least 1");
    if (options.per_day == 0) throw ConfigInvalid("per_day must be positive");
    if (last_day < first_day) return {};

    Shared sh{graph, options, build_factor_tables(graph), {}};
    for (const auto& p : graph.persons) sh.persons.emplace(p.id, &p);

    const auto days = static_cast<std::size_t>(last_day.days_since_epoch - first_day.days_since_epoch + 1);
    std::vector<ParameterBucket> buckets(days);
    unsigned threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(days));

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mu;
    auto work = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < days;) {
            try {
                buckets[i] = make_bucket(sh, SimDay{first_day.days_since_epoch + static_cast<std::int64_t>(i)});
            } catch (...) {
                std::lock_guard lock(failure_mu);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    if (threads <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work);
    }
    if (failure) std::rethrow_exception(failure);
    return buckets;
}

// ---- files ----------------------------------------------------------------------------------

void write_parameter_buckets(const std::vector<ParameterBucket>& buckets, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
    nlohmann::json index = {{"days", nlohmann::json::array()}};
    for (const auto& b : buckets) {
        const auto name = to_iso_date(b.day);
        std::ofstream out(dir / (name + ".ldjson"));
        if (!out) throw IoError("cannot write " + (dir / (name + ".ldjson")).string());
        for (const auto& [variant, list] : b.per_query)
            for (const auto& p : list)
                out << nlohmann::json{{"variant", variant_name(variant)}, {"params", to_json(p)}}.dump() << '\n';
        index["days"].push_back({{"day", name}, {"partial", b.partial}, {"warnings", b.warnings}});
    }
    std::ofstream out(dir / "index.json");
    if (!out) throw IoError("cannot write " + (dir / "index.json").string());
    out << index.dump(2) << '\n';
}

std::vector<ParameterBucket> read_parameter_buckets(const std::filesystem::path& dir) {
    std::ifstream in(dir / "index.json");
    if (!in) throw IoError("cannot read " + (dir / "index.json").string());
    nlohmann::json index;
    try {
        index = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError((dir / "index.json").string(), 1, e.what());
    }
    std::vector<ParameterBucket> buckets;
    for (const auto& d : index.at("days")) {
        ParameterBucket b;
        const auto name = d.at("day").get<std::string>();
        b.day = parse_iso_date(name);
        b.partial = d.value("partial", false);
        b.warnings = d.value("warnings", std::vector<std::string>{});
        for (auto v : kAllVariants) b.per_query[v];
        const auto file = dir / (name + ".ldjson");
        std::ifstream lines(file);
        if (!lines) throw IoError("cannot read " + file.string());
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(lines, line)) {
            ++lineno;
            if (line.empty()) continue;
            try {
                const auto j = nlohmann::json::parse(line);
                const auto variant = parse_variant(j.at("variant").get<std::string>());
                b.per_query[variant].push_back(params_from_json(variant, j.at("params")));
            } catch (const std::exception& e) {
                throw ParseError(file.string(), lineno, e.what());
            }
        }
        buckets.push_back(std::move(b));
    }
    return buckets;
}

} // namespace snb
