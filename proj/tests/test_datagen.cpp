#include "builders.hpp"
#include "oracles.hpp"

#include "snb/datagen.hpp"
#include "snb/errors.hpp"
#include "snb/random.hpp"
#include "snb/serialize.hpp"

#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

using namespace snb;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::map<std::string, std::string> tree_bytes(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(dir))
        if (e.is_regular_file()) out[fs::relative(e.path(), dir).string()] = slurp(e.path());
    return out;
}

double shared_country_fraction(const TemporalGraph& g) {
    std::map<EntityId, EntityId> country;
    for (const auto& p : g.persons) country[p.id] = p.country_id;
    std::size_t same = 0;
    for (const auto& k : g.knows) same += country.at(k.person1_id) == country.at(k.person2_id);
    return g.knows.empty() ? 0.0 : static_cast<double>(same) / static_cast<double>(g.knows.size());
}

/// Least-squares slope of log(density) against log(degree) over logarithmic bins.
double log_binned_slope(const std::vector<std::int64_t>& degrees) {
    std::map<int, std::size_t> bins;
    for (auto d : degrees)
        if (d > 0) ++bins[static_cast<int>(std::floor(std::log2(static_cast<double>(d))))];
    std::vector<double> xs, ys;
    for (const auto& [b, n] : bins) {
        const double lo = std::pow(2.0, b), width = lo; // [2^b, 2^(b+1))
        xs.push_back(std::log(lo * std::sqrt(2.0)));
        ys.push_back(std::log(static_cast<double>(n) / width));
    }
    const double n = static_cast<double>(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

} // namespace

TEST_SUITE("datagen") {

TEST_CASE("config validation names the field") {
    GenConfig c;
    c.cutoff_fraction = 1.5;
    CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("cutoff_fraction"), ConfigInvalid);
    c = {};
    c.num_persons = -1;
    CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("num_persons"), ConfigInvalid);
    c = {};
    c.homophily_weight = 2;
    CHECK_THROWS_AS(c.validate(), ConfigInvalid);
}

TEST_CASE("zero persons gives an empty graph") {
    GenConfig c;
    c.num_persons = 0;
    const auto g = generate_temporal_graph(c);
    CHECK(g.entity_count() == 0);
    CHECK(g.deletion_roots.empty());
}

TEST_CASE("same seed, same bytes") {
    GenConfig c;
    c.num_persons = 120;
    c.seed = 9;
    build::TempDir a("det-a"), b("det-b");
    for (const auto* dir : {&a.path, &b.path}) {
        const auto g = generate_temporal_graph(c);
        serialize(split_at_cutoff(g, c), c, *dir);
        write_temporal_graph(g, *dir / "temporal");
    }
    const auto ta = tree_bytes(a.path), tb = tree_bytes(b.path);
    CHECK(ta.size() >= 13);
    CHECK(ta == tb);

    auto other = c;
    other.seed = 10;
    CHECK_FALSE(generate_temporal_graph(c) == generate_temporal_graph(other));
}

TEST_CASE("knows degree follows the power law exponent") {
    GenConfig c;
    c.num_persons = 1000;
    const auto g = generate_temporal_graph(c);
    std::map<EntityId, std::int64_t> deg;
    for (const auto& p : g.persons) deg[p.id] = 0;
    for (const auto& k : g.knows) {
        ++deg[k.person1_id];
        ++deg[k.person2_id];
    }
    std::vector<std::int64_t> d;
    for (const auto& [id, n] : deg) d.push_back(n);
    const double slope = log_binned_slope(d);
    MESSAGE("log-binned slope " << slope);
    CHECK(std::abs(slope + c.degree_exponent) <= 0.3);
}

TEST_CASE("homophily raises the share of same-country friendships") {
    GenConfig lo, hi;
    lo.num_persons = hi.num_persons = 1000;
    lo.homophily_weight = 0.0;
    hi.homophily_weight = 0.8;
    const double f_lo = shared_country_fraction(generate_temporal_graph(lo));
    const double f_hi = shared_country_fraction(generate_temporal_graph(hi));
    MESSAGE("same-country share " << f_lo << " -> " << f_hi);
    CHECK(f_hi > f_lo);
}

TEST_CASE("cutoff date") {
    GenConfig c;
    CHECK(to_iso(cutoff_instant(c)) == "2012-11-29T00:00:00.000Z");
    c.cutoff_fraction = 1.0;
    CHECK(cutoff_instant(c) <= c.simulation_end);
}

TEST_CASE("entity created and deleted after the cutoff yields INS then DEL") {
    GenConfig c;
    c.num_persons = 0;
    const auto cut = cutoff_instant(c);
    TemporalGraph g;
    g.persons.push_back(build::person(1, 1, c.simulation_start));
    auto late = build::person(2, 1, cut + SimDuration::days(1));
    late.lifecycle.deletion = cut + SimDuration::days(2);
    g.persons.push_back(late);
    g.deletion_roots.push_back({OpType::Del1, 2, 0, *late.lifecycle.deletion});
    auto at_cut = build::person(3, 1, cut);
    g.persons.push_back(at_cut);

    const auto s = split_at_cutoff(g, c);
    REQUIRE(s.snapshot.persons.size() == 1);
    CHECK(s.snapshot.persons[0].id == 1);
    REQUIRE(s.stream.size() == 3);
    // ties at the cutoff go to the stream
    CHECK(s.stream[0].type == OpType::Ins1);
    CHECK(std::get<Person>(s.stream[0].payload).id == 3);
    CHECK(s.stream[1].type == OpType::Ins1);
    CHECK(std::get<Person>(s.stream[1].payload).id == 2);
    CHECK(s.stream[2].type == OpType::Del1);
    CHECK(s.stream[1].scheduled_time < s.stream[2].scheduled_time);
}

TEST_CASE("enforce_t_safe") {
    const auto end = default_simulation_end();
    const SimInstant t = make_instant(2012, 12, 1);
    const auto ten = SimDuration::seconds(10);

    SUBCASE("boundary is kept") {
        UpdateOperation op = build::op(OpType::Ins8, make_knows(1, 2, build::life()), t);
        op.dependency_time = t - ten;
        CHECK(enforce_t_safe({op}, ten, end)[0] == op);
    }
    SUBCASE("short separation is shifted") {
        UpdateOperation op = build::op(OpType::Ins8, make_knows(1, 2, build::life()), t);
        op.dependency_time = t - SimDuration::seconds(1);
        const auto out = enforce_t_safe({op}, ten, end);
        CHECK(out[0].scheduled_time == op.dependency_time + ten);
    }
    SUBCASE("past the end") {
        UpdateOperation op = build::op(OpType::Ins8, make_knows(1, 2, build::life()), end);
        CHECK_THROWS_AS(enforce_t_safe({op}, ten, end), UnsatisfiableDependency);
    }
    SUBCASE("random streams") {
        Rng rng(11);
        std::vector<UpdateOperation> stream;
        for (int i = 0; i < 10'000; ++i) {
            const SimInstant s{t.millis + rng.uniform_int(0, 86'400'000)};
            UpdateOperation op = build::op(OpType::Ins8, make_knows(i, i + 1, build::life()), s);
            op.dependency_time = s - SimDuration{rng.uniform_int(0, 30'000)};
            stream.push_back(op);
        }
        const auto out = enforce_t_safe(stream, ten, end);
        CHECK(out.size() == stream.size());
        std::size_t bad = 0;
        for (std::size_t i = 0; i < out.size(); ++i) {
            bad += out[i].scheduled_time - out[i].dependency_time < ten;
            if (i) bad += out[i].scheduled_time < out[i - 1].scheduled_time;
        }
        CHECK(bad == 0);
    }
}

TEST_CASE("split invariants on a generated graph") {
    const auto& d = oracle::dataset(500);
    const auto& g = d.graph;
    const auto& s = d.split;

    SUBCASE("conservation") {
        std::size_t ins = 0;
        for (const auto& op : s.stream) ins += is_insert(op.type);
        CHECK(s.snapshot.entity_count() + ins + s.deleted_before_cutoff == g.entity_count());
    }
    SUBCASE("stream after cutoff, sorted, separated") {
        for (std::size_t i = 0; i < s.stream.size(); ++i) {
            const auto& op = s.stream[i];
            CHECK(op.scheduled_time >= s.cutoff);
            CHECK(op.scheduled_time - op.dependency_time >= d.config.t_safe);
            CHECK(payload_matches(op.type, op.payload));
            if (i) CHECK(s.stream[i - 1].scheduled_time <= op.scheduled_time);
        }
    }
    SUBCASE("insert dependency is the latest creation it references") {
        std::map<EntityId, SimInstant> created;
        for (const auto& p : g.persons) created[p.id] = p.lifecycle.creation;
        for (const auto& f : g.forums) created[f.id] = f.lifecycle.creation;
        for (const auto& m : g.messages) created[m.id] = m.lifecycle.creation;
        std::size_t bad = 0;
        for (const auto& op : s.stream) {
            if (!is_insert(op.type)) continue;
            SimInstant latest = d.config.simulation_start;
            for (auto id : referenced_entities(op)) latest = std::max(latest, created.at(id));
            bad += op.dependency_time != latest;
        }
        CHECK(bad == 0);
    }
    SUBCASE("no op references an entity inserted later") {
        std::set<EntityId> known;
        for (const auto& p : s.snapshot.persons) known.insert(p.id);
        for (const auto& f : s.snapshot.forums) known.insert(f.id);
        for (const auto& m : s.snapshot.messages) known.insert(m.id);
        std::size_t bad = 0;
        for (const auto& op : s.stream) {
            for (auto id : referenced_entities(op)) bad += !known.count(id);
            if (is_insert(op.type))
                std::visit(
                    [&](const auto& e) {
                        using T = std::decay_t<decltype(e)>;
                        if constexpr (std::is_same_v<T, Person> || std::is_same_v<T, Forum> || std::is_same_v<T, Message>)
                            known.insert(e.id);
                    },
                    op.payload);
        }
        CHECK(bad == 0);
    }
    SUBCASE("a deleted person's messages go no later than the person") {
        std::map<EntityId, SimInstant> person_del;
        for (const auto& p : g.persons)
            if (p.lifecycle.deletion) person_del[p.id] = *p.lifecycle.deletion;
        CHECK(!person_del.empty());
        std::size_t bad = 0;
        for (const auto& m : g.messages) {
            auto it = person_del.find(m.creator_person_id);
            if (it == person_del.end()) continue;
            bad += !m.lifecycle.deletion || *m.lifecycle.deletion > it->second;
        }
        CHECK(bad == 0);
    }
    SUBCASE("one DEL op per cascade root") {
        std::size_t dels = 0, roots = 0;
        for (const auto& op : s.stream) dels += is_delete(op.type);
        for (const auto& r : g.deletion_roots) roots += r.at >= s.cutoff;
        CHECK(dels == roots);
        CHECK(dels > 0);
    }
}

TEST_CASE("flashmobs show up as insertion spikes") {
    const auto& g = oracle::dataset(1000).graph;
    std::map<std::int64_t, std::size_t> per_hour;
    for (const auto& m : g.messages) ++per_hour[m.lifecycle.creation.millis / 3'600'000];
    std::vector<std::size_t> counts;
    for (const auto& [h, n] : per_hour) counts.push_back(n);
    std::sort(counts.begin(), counts.end());
    // median over hours with any message, stricter than over all hours
    const auto median = counts[counts.size() / 2];
    MESSAGE("max hourly insertions " << counts.back() << ", median " << median);
    CHECK(counts.back() > 5 * median);
}

} // TEST_SUITE
