#include "builders.hpp"
#include "oracles.hpp"

#include "snb/driver.hpp"
#include "snb/errors.hpp"
#include "snb/naive_store.hpp"
#include "snb/refstore.hpp"

#include "doctest.h"

#include <algorithm>
#include <fstream>
#include <thread>

using namespace snb;
using namespace std::chrono_literals;

namespace {

const SimInstant kAnchor = make_instant(2012, 11, 29);

/// n INS1 ops one sim-minute apart starting at the anchor, with a bucket per day they touch.
struct Synthetic {
    std::vector<UpdateOperation> stream;
    std::vector<ParameterBucket> buckets;

    explicit Synthetic(std::size_t n, SimDuration step = SimDuration::minutes(1)) {
        for (std::size_t i = 0; i < n; ++i) {
            const SimInstant t = kAnchor + step * static_cast<std::int64_t>(i);
            stream.push_back({OpType::Ins1, t, default_simulation_start(),
                              build::person(static_cast<EntityId>(i + 1), 1, t)});
        }
        const SimDay last = n ? day_of(stream.back().scheduled_time) : day_of(kAnchor);
        for (SimDay d = day_of(kAnchor); d <= last; d = d.next()) {
            ParameterBucket b;
            b.day = d;
            for (auto v : kAllVariants) b.per_query[v];
            b.per_query[QueryVariant::CR13b] = {PathParams{1, 2}, PathParams{2, 3}};
            b.per_query[QueryVariant::CR14b] = {PathParams{1, 3}};
            b.per_query[QueryVariant::SR2] = {PersonParam{1}};
            buckets.push_back(b);
        }
    }
};

/// Answers everything after a fixed delay.
class StubSut : public SystemUnderTest {
public:
    explicit StubSut(WallDuration latency, bool wrong_shape = false) : latency_(latency), wrong_shape_(wrong_shape) {}
    std::string name() const override { return "stub"; }
    void bulk_load(const TemporalGraph&) override {}
    QueryResult execute_query(const QueryInstance& q) override {
        std::this_thread::sleep_for(latency_);
        if (wrong_shape_) return PathLength{1};
        switch (q.variant) {
        case QueryVariant::SR2: return std::vector<Sr2Row>{};
        case QueryVariant::SR6: return Sr6Result{};
        case QueryVariant::CR14a:
        case QueryVariant::CR14b: return CheapestPath{};
        case QueryVariant::CR3a:
        case QueryVariant::CR3b: return std::vector<Cr3Row>{};
        default: return PathLength{1};
        }
    }
    CommitInfo execute_update(const UpdateOperation&) override {
        std::this_thread::sleep_for(latency_);
        return {++version_, {}};
    }
    std::uint64_t current_commit_version() const override { return version_; }
    TemporalGraph materialize() const override { return {}; }

private:
    WallDuration latency_;
    bool wrong_shape_;
    std::atomic<std::uint64_t> version_{0};
};

/// Reference store whose CR13 answers are one hop too long.
class OffByOne : public ReferenceStore {
public:
    using ReferenceStore::ReferenceStore;
    QueryResult execute_query(const QueryInstance& q) override {
        auto r = ReferenceStore::execute_query(q);
        if (q.variant == QueryVariant::CR13a || q.variant == QueryVariant::CR13b) {
            auto& p = std::get<PathLength>(r);
            if (p.hops >= 0) ++p.hops;
        }
        return r;
    }
};

WallDuration ms(std::int64_t n) { return std::chrono::milliseconds(n); }

} // namespace

TEST_SUITE("driver") {

TEST_CASE("tcr parsing and scaling") {
    const auto t = TcrRatio::parse("0.02");
    CHECK(t.ppb() == 20'000'000);
    CHECK(t.scale(SimDuration::seconds(1000)) == 20s);
    CHECK(t.scale(SimDuration::seconds(1)) == 20ms);
    CHECK(TcrRatio::parse("1e-5").ppb() == 10'000);
    CHECK(TcrRatio::parse("2.5E-3").ppb() == 2'500'000);
    CHECK(TcrRatio::parse(t.to_string()) == t);
    for (const char* bad : {"0", "-1", "abc", "1e", "", "1e-12"}) CHECK_THROWS_AS(TcrRatio::parse(bad), ConfigInvalid);

    // halving the ratio halves every offset
    const auto half = TcrRatio::from_ppb(t.ppb() / 2);
    Rng rng(3);
    for (int i = 0; i < 1000; ++i) {
        const SimDuration d{rng.uniform_int(0, 1'000'000'000) * 2};
        CHECK(half.scale(d) * 2 == t.scale(d));
    }
}

TEST_CASE("config validation") {
    DriverConfig c;
    c.read_threads = 0;
    CHECK_THROWS_AS(c.validate(), ConfigInvalid);
    c = {};
    c.frequencies[QueryVariant::CR3a] = 0;
    CHECK_THROWS_AS(c.validate(), ConfigInvalid);
    c = {};
    c.on_time_ppm_required = 2'000'000;
    CHECK_THROWS_AS(c.validate(), ConfigInvalid);
    CHECK(parse_driver_mode(to_string(DriverMode::CrossValidation)) == DriverMode::CrossValidation);
    CHECK_THROWS_AS(parse_driver_mode("fast"), ConfigInvalid);
}

TEST_CASE("default frequencies weigh CR14 less") {
    const auto f = DriverConfig::default_frequencies();
    CHECK(f.size() == 6);
    CHECK(f.at(QueryVariant::CR14a) > f.at(QueryVariant::CR13a));
    CHECK(f.at(QueryVariant::CR3a) == f.at(QueryVariant::CR3b));
}

TEST_CASE("schedule interleaves by frequency") {
    const Synthetic s(3000);
    DriverConfig c;
    c.frequencies = {{QueryVariant::CR13b, 10}, {QueryVariant::CR14b, 30}};
    const auto sched = build_schedule(s.stream, s.buckets, c, kAnchor);
    std::map<std::string, std::size_t> n;
    for (const auto& e : sched.entries) ++n[operation_name(e)];
    CHECK(n["CR13b"] == 300);
    CHECK(n["CR14b"] == 100);
    CHECK(n["INS1"] == 3000);
    CHECK(sched.update_times.size() == 3000);
    for (std::size_t i = 1; i < sched.entries.size(); ++i)
        CHECK(sched.entries[i - 1].scheduled_wall <= sched.entries[i].scheduled_wall);
    // parameters cycle through the bucket
    std::vector<QueryParams> cr13;
    for (const auto& e : sched.entries)
        if (!e.is_update() && std::get<QueryInstance>(e.operation).variant == QueryVariant::CR13b)
            cr13.push_back(std::get<QueryInstance>(e.operation).params);
    CHECK(cr13[0] == QueryParams{PathParams{1, 2}});
    CHECK(cr13[1] == QueryParams{PathParams{2, 3}});
}

TEST_CASE("schedule wall offsets follow the tcr") {
    const Synthetic s(50);
    DriverConfig c;
    c.tcr = TcrRatio::parse("0.02");
    const auto a = build_schedule(s.stream, s.buckets, c, kAnchor);
    c.tcr = TcrRatio::parse("0.01");
    const auto b = build_schedule(s.stream, s.buckets, c, kAnchor);
    REQUIRE(a.entries.size() == b.entries.size());
    for (std::size_t i = 0; i < a.entries.size(); ++i) CHECK(a.entries[i].scheduled_wall == b.entries[i].scheduled_wall * 2);
    CHECK(a.entries[1].scheduled_wall == 1200ms); // one sim-minute at 0.02
}

TEST_CASE("missing bucket") {
    Synthetic s(40);
    s.buckets.clear();
    CHECK_THROWS_AS(build_schedule(s.stream, s.buckets, DriverConfig{}, kAnchor), MissingBucket);
}

TEST_CASE("global clock and gate") {
    const SimInstant t1 = kAnchor, t2 = kAnchor + SimDuration::seconds(5), t3 = kAnchor + SimDuration::seconds(9);
    GlobalClock clock({t1, t2, t3});
    CHECK(clock.confirmed() == t1 - SimDuration{1});
    clock.complete(1);
    CHECK(clock.confirmed() == t1 - SimDuration{1});
    clock.complete(0);
    CHECK(clock.confirmed() == t3 - SimDuration{1});

    UpdateOperation op{OpType::Ins8, t3, t3 - SimDuration{2}, make_knows(1, 2, build::life())};
    CHECK(dependency_gate(op, clock) == GateDecision::Execute);
    op.dependency_time = t3;
    CHECK(dependency_gate(op, clock) == GateDecision::Defer);
    CHECK_FALSE(clock.wait_until_confirmed(t3, 1ms));
    clock.complete(2);
    CHECK(dependency_gate(op, clock) == GateDecision::Execute);
    CHECK(clock.wait_until_confirmed(t3, 1ms));
}

TEST_CASE("gate at one millisecond either side of the clock") {
    const SimInstant c = kAnchor + SimDuration::hours(1);
    GlobalClock clock({kAnchor, c + SimDuration{1}});
    clock.complete(0);
    REQUIRE(clock.confirmed() == c);
    UpdateOperation op{OpType::Ins1, c, c - SimDuration{1}, build::person(1)};
    CHECK(dependency_gate(op, clock) == GateDecision::Execute);
    op.dependency_time = c + SimDuration{1};
    CHECK(dependency_gate(op, clock) == GateDecision::Defer);
}

TEST_CASE("global clock is monotonic under concurrent completion") {
    const std::size_t n = 20'000;
    std::vector<SimInstant> times;
    for (std::size_t i = 0; i < n; ++i) times.push_back(kAnchor + SimDuration{static_cast<std::int64_t>(i / 3)});
    GlobalClock clock(times);
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    Rng rng(8);
    rng.shuffle(order);
    std::atomic<bool> stop{false};
    std::size_t regressions = 0;
    std::jthread watcher([&] {
        SimInstant last = clock.confirmed();
        while (!stop) {
            const auto now = clock.confirmed();
            regressions += now < last;
            last = now;
        }
    });
    {
        std::vector<std::jthread> workers;
        for (unsigned w = 0; w < 4; ++w)
            workers.emplace_back([&, w] {
                for (std::size_t i = w; i < n; i += 4) clock.complete(order[i]);
            });
    }
    stop = true;
    watcher.join();
    CHECK(regressions == 0);
    CHECK(clock.confirmed() == SimInstant::max());
}

TEST_CASE("on-time rule") {
    CHECK(record_on_time(0ms, 900ms, 1s));
    CHECK(record_on_time(0ms, 1000ms, 1s));
    CHECK_FALSE(record_on_time(0ms, 1100ms, 1s));
    CHECK(record_on_time(5s, 4s, 1s)); // early starts are on time

    std::vector<WallDuration> delays(95, 0s);
    delays.insert(delays.end(), 5, 2s);
    auto s = summarize_on_time(delays, 1s, 950'000);
    CHECK(s.total == 100);
    CHECK(s.on_time == 95);
    CHECK(s.ratio == doctest::Approx(0.95));
    CHECK(s.valid);
    delays.back() = 0s;
    delays.front() = 2s;
    delays[1] = 2s;
    CHECK_FALSE(summarize_on_time(delays, 1s, 950'000).valid);
    const auto empty = summarize_on_time({}, 1s, 950'000);
    CHECK(empty.ratio == 1.0);
    CHECK(empty.valid);
}

TEST_CASE("latency statistics") {
    CHECK_FALSE(compute_stats({}).has_value());
    const auto one = *compute_stats({ms(10)});
    for (double v : {one.min_ms, one.max_ms, one.mean_ms, one.p50_ms, one.p90_ms, one.p95_ms, one.p99_ms})
        CHECK(v == 10.0);
    CHECK(one.count == 1);

    std::vector<WallDuration> seq;
    for (int i = 100; i >= 1; --i) seq.push_back(ms(i));
    const auto s = *compute_stats(seq);
    CHECK(s.p50_ms == 50.0);
    CHECK(s.p90_ms == 90.0);
    CHECK(s.p99_ms == 99.0);
    CHECK(s.max_ms == 100.0);
    CHECK(s.mean_ms == doctest::Approx(50.5));

    Rng rng(17);
    for (int round = 0; round < 50; ++round) {
        std::vector<WallDuration> v;
        const auto n = rng.uniform_int(1, 400);
        for (int i = 0; i < n; ++i) v.push_back(WallDuration{rng.uniform_int(1, 5'000'000'000)});
        auto sorted = v;
        std::sort(sorted.begin(), sorted.end());
        auto rank = [&](double pct) {
            const auto k = static_cast<std::size_t>(std::ceil(pct / 100.0 * static_cast<double>(sorted.size())));
            return static_cast<double>(sorted[std::max<std::size_t>(k, 1) - 1].count()) / 1e6;
        };
        const auto st = *compute_stats(v);
        CHECK(st.p50_ms == doctest::Approx(rank(50)));
        CHECK(st.p95_ms == doctest::Approx(rank(95)));
        CHECK(st.p99_ms == doctest::Approx(rank(99)));
        CHECK(st.min_ms == doctest::Approx(rank(0)));
    }
}

TEST_CASE("throughput") {
    CHECK(throughput(7200, 3600s) == doctest::Approx(2.0));
    CHECK(throughput(0, 10s) == 0.0);
    CHECK(throughput(5, 0s) == 0.0);
}

TEST_CASE("report counts only the measurement window") {
    DriverConfig c;
    c.warmup = 1s;
    c.window = 2s;
    std::vector<OpRecord> recs{
        {"INS1", "INS", 500ms, 500ms, 1ms, false},   // warm-up
        {"INS1", "INS", 1s, 1s, 1ms, false},          // first in window
        {"CR13b", "CR", 2s, 3500ms, 2ms, false},      // late
        {"SR2", "SR", 2999ms, 3s, 1ms, true},         // error
        {"DEL1", "DEL", 3s, 3s, 1ms, false},          // past the window
    };
    const auto r = build_report(recs, c, 2s);
    CHECK(r.total_ops == 3);
    CHECK(r.ops_per_class.at("INS") == 1);
    CHECK(r.ops_per_class.at("CR") == 1);
    CHECK(r.ops_per_class.at("SR") == 1);
    CHECK(r.ops_per_class.at("DEL") == 0);
    CHECK(r.late_ops == 1);
    CHECK_FALSE(r.valid);
    CHECK(r.errors == 1);
    CHECK(r.errors_per_operation.at("SR2") == 1);
    CHECK(r.throughput == doctest::Approx(1.5));
    std::uint64_t sum = 0;
    for (const auto& [k, v] : r.ops_per_class) sum += v;
    CHECK(sum == r.total_ops);
    const auto back = report_from_json(r.to_json());
    CHECK(back.to_json() == r.to_json());
}

TEST_CASE("empty schedule") {
    StubSut sut(0ms);
    DriverConfig c;
    c.warmup = 0s;
    c.window = 1s;
    const auto r = run_benchmark(Schedule{}, sut, c);
    CHECK(r.report.total_ops == 0);
    CHECK(r.report.throughput == 0.0);
    CHECK(r.report.on_time_ratio == 1.0);
    CHECK(r.report.valid);
    CHECK(r.audit.empty());
}

TEST_CASE("1 ms stub with a generous tcr is always on time") {
    const Synthetic s(300);
    StubSut sut(1ms);
    DriverConfig c;
    c.tcr = TcrRatio::parse("1e-4"); // 6 ms per update
    c.warmup = 0s;
    c.window = 30s;
    c.read_threads = 1;
    c.write_threads = 1;
    c.frequencies = {{QueryVariant::CR13b, 5}};
    const auto sched = build_schedule(s.stream, s.buckets, c, kAnchor);
    const auto r = run_benchmark(sched, sut, c);
    CHECK(r.report.on_time_ratio == 1.0);
    CHECK(r.report.valid);
    CHECK(r.report.schedule_exhausted);
    CHECK(r.report.ops_per_class.at("INS") == 300);
    CHECK(r.report.ops_per_class.at("CR") == 60);
    CHECK(r.report.per_operation.at("INS1").min_ms >= 1.0);
    CHECK(audit_dependencies(r.audit, sched.update_times).empty());
}

TEST_CASE("a result of the wrong shape is an error, not a crash") {
    const Synthetic s(50);
    StubSut sut(0ms, true);
    DriverConfig c;
    c.tcr = TcrRatio::parse("1e-5");
    c.warmup = 0s;
    c.window = 30s;
    c.frequencies = {{QueryVariant::CR14b, 10}};
    const auto r = run_benchmark(build_schedule(s.stream, s.buckets, c, kAnchor), sut, c);
    CHECK(r.report.errors_per_operation.at("CR14b") == 5);
    CHECK(r.report.errors_per_operation.count("SR2") == 0);
    CHECK(r.report.ops_per_class.at("INS") == 50);
}

TEST_CASE("audit flags an update that ran before its dependency committed") {
    const std::vector<SimInstant> times{kAnchor, kAnchor + SimDuration::seconds(20)};
    std::vector<AuditRecord> audit(2);
    audit[0] = {0, OpType::Ins1, times[0], default_simulation_start(), times[0], 0, 1, true};
    audit[1] = {1, OpType::Ins8, times[1], times[0], times[0], 0, 0, true}; // read the counter before #0 committed
    CHECK(audit_dependencies(audit, times) == std::vector<std::size_t>{1});
    audit[1].start_seq = 2;
    audit[1].commit_seq = 2;
    CHECK(audit_dependencies(audit, times).empty());
}

TEST_CASE("benchmark on the reference store keeps dependencies") {
    const auto& d = oracle::dataset(200);
    DriverConfig c;
    c.tcr = TcrRatio::parse("1e-6");
    c.warmup = 0s;
    c.window = 600s;
    c.write_threads = 3;
    const auto sched = build_schedule(d.split.stream, d.buckets, c, d.split.cutoff);
    ReferenceStore store(d.config.moderator_policy);
    store.bulk_load(d.split.snapshot);
    const auto r = run_benchmark(sched, store, c);
    CHECK(r.audit.size() == d.split.stream.size());
    CHECK(audit_dependencies(r.audit, sched.update_times).empty());
    std::uint64_t update_errors = 0;
    for (const auto& [op, n] : r.report.errors_per_operation)
        if (op.rfind("INS", 0) == 0 || op.rfind("DEL", 0) == 0) update_errors += n;
    CHECK(update_errors == 0);
    build::TempDir dir("audit");
    write_audit_log(r.audit, dir.path / "audit.ldjson");
    std::ifstream in(dir.path / "audit.ldjson");
    std::size_t lines = 0;
    for (std::string l; std::getline(in, l);) ++lines;
    CHECK(lines == r.audit.size());
}

TEST_CASE("short read triggers") {
    ShortReadConfig c;
    Rng rng(1);
    const QueryInstance cr3{QueryVariant::CR3a, Cr3Params{1, 2, 3, kAnchor, 30}};
    const std::vector<Cr3Row> rows{{11, 1, 1}, {12, 1, 1}, {13, 1, 1}, {14, 1, 1}};
    auto t = triggered_short_reads(cr3, rows, 0, c, rng);
    REQUIRE(t.size() == 3);
    for (const auto& [q, depth] : t) {
        CHECK(q.variant == QueryVariant::SR2);
        CHECK(depth == 1);
    }
    const QueryInstance sr2{QueryVariant::SR2, PersonParam{11}};
    const std::vector<Sr2Row> msgs{{100, kAnchor, 100, 11}, {101, kAnchor, 100, 11}, {102, kAnchor, 100, 11}};
    std::size_t sr6 = 0;
    for (const auto& [q, depth] : triggered_short_reads(sr2, msgs, c.max_depth, c, rng)) {
        CHECK(q.variant == QueryVariant::SR6);
        ++sr6;
    }
    CHECK(sr6 == 2);
    const QueryInstance cr13{QueryVariant::CR13b, PathParams{5, 6}};
    auto ends = triggered_short_reads(cr13, PathLength{4}, 0, c, rng);
    REQUIRE(ends.size() == 2);
    CHECK(ends[0].first.params == QueryParams{PersonParam{5}});
    CHECK(ends[1].first.params == QueryParams{PersonParam{6}});
}

TEST_CASE("cross validation") {
    const auto& d = oracle::dataset(200);
    DriverConfig c;
    c.mode = DriverMode::CrossValidation;
    const auto sched = build_schedule(d.split.stream, d.buckets, c, d.split.cutoff);

    SUBCASE("same implementation twice") {
        ReferenceStore a(d.config.moderator_policy), b(d.config.moderator_policy);
        a.bulk_load(d.split.snapshot);
        b.bulk_load(d.split.snapshot);
        const auto v = cross_validate(sched, a, b, c);
        CHECK(v.diffs == 0);
        CHECK(v.updates == d.split.stream.size());
        CHECK(v.queries > 0);
    }
    SUBCASE("reference against naive") {
        ReferenceStore a(d.config.moderator_policy);
        NaiveStore b(d.config.moderator_policy);
        a.bulk_load(d.split.snapshot);
        b.bulk_load(d.split.snapshot);
        CHECK(cross_validate(sched, a, b, c).diffs == 0);
    }
    SUBCASE("injected CR13 fault") {
        ReferenceStore a(d.config.moderator_policy);
        OffByOne b(d.config.moderator_policy);
        a.bulk_load(d.split.snapshot);
        b.bulk_load(d.split.snapshot);
        const auto v = cross_validate(sched, a, b, c);
        CHECK(v.diffs > 0);
        REQUIRE(!v.first_per_operation.empty());
        std::size_t first_cr13 = SIZE_MAX;
        for (std::size_t i = 0; i < sched.entries.size() && first_cr13 == SIZE_MAX; ++i) {
            const auto name = operation_name(sched.entries[i]);
            if (name == "CR13b") first_cr13 = i; // CR13a answers -1 and stays equal
        }
        bool found = false;
        for (const auto& div : v.first_per_operation) {
            CHECK(div.operation.rfind("CR13", 0) == 0);
            if (div.operation == "CR13b") {
                found = true;
                CHECK(div.entry == first_cr13);
                CHECK(div.result_b["shortestPathLength"].get<int>() == div.result_a["shortestPathLength"].get<int>() + 1);
            }
        }
        CHECK(found);
        CHECK(v.to_json()["diffs"] == v.diffs);
        CHECK(std::string(ValidationFailed(v).what()).find("CR13") != std::string::npos);
    }
}

} // TEST_SUITE
