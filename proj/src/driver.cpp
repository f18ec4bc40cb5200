#include "snb/driver.hpp"

#include "snb/serialize.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <deque>
#include <fstream>
#include <set>
#include <thread>

namespace snb {

using Clock = std::chrono::steady_clock;

// ---- TCR ------------------------------------------------------------------------------------

TcrRatio TcrRatio::parse(std::string_view text) {
    auto fail = [&](const std::string& why) -> TcrRatio {
        throw ConfigInvalid("tcr: '" + std::string(text) + "' " + why);
    };
    std::string digits;
    int exponent = 0;
    std::size_t i = 0;
    bool dot = false;
    for (; i < text.size() && text[i] != 'e' && text[i] != 'E'; ++i) {
        const char c = text[i];
        if (c == '.' && !dot) dot = true;
        else if (std::isdigit(static_cast<unsigned char>(c))) {
            digits += c;
            if (dot) --exponent;
        } else return fail("is not a decimal number");
    }
    if (digits.empty()) return fail("is not a decimal number");
    if (i < text.size()) {
        const auto e = text.substr(i + 1);
        if (e.empty()) return fail("has an empty exponent");
        try {
            std::size_t used = 0;
            exponent += std::stoi(std::string(e), &used);
            if (used != e.size()) return fail("has a malformed exponent");
        } catch (const std::exception&) {
            return fail("has a malformed exponent");
        }
    }
    // value = digits * 10^exponent; ppb = digits * 10^(exponent + 9)
    while (digits.size() > 1 && digits.front() == '0') digits.erase(0, 1);
    int shift = exponent + 9;
    while (shift < 0 && !digits.empty() && digits.back() == '0') {
        digits.pop_back();
        ++shift;
    }
    if (digits.empty() || digits == "0") return fail("must be greater than zero");
    if (shift < 0) return fail("has more than 9 decimal places");
    if (digits.size() + static_cast<std::size_t>(shift) > 18) return fail("is too large");
    std::int64_t ppb = std::stoll(digits);
    for (int k = 0; k < shift; ++k) ppb *= 10;
    return from_ppb(ppb);
}

TcrRatio TcrRatio::from_ppb(std::int64_t ppb) {
    if (ppb <= 0) throw ConfigInvalid("tcr: must be greater than zero");
    TcrRatio r;
    r.ppb_ = ppb;
    return r;
}

WallDuration TcrRatio::scale(SimDuration offset) const {
    // ms * ppb = picoseconds
    const __int128 ps = static_cast<__int128>(offset.millis) * ppb_;
    __int128 ns = ps / 1000;
    if (ps < 0 && ps % 1000 != 0) --ns;
    return WallDuration{static_cast<std::int64_t>(ns)};
}

std::string TcrRatio::to_string() const {
    std::string s = std::to_string(ppb_ / 1'000'000'000);
    std::string frac = std::to_string(ppb_ % 1'000'000'000);
    frac.insert(0, 9 - frac.size(), '0');
    while (!frac.empty() && frac.back() == '0') frac.pop_back();
    return frac.empty() ? s : s + "." + frac;
}

std::string_view to_string(DriverMode mode) { return mode == DriverMode::Benchmark ? "benchmark" : "validate"; }

DriverMode parse_driver_mode(std::string_view text) {
    if (text == "benchmark") return DriverMode::Benchmark;
    if (text == "validate" || text == "cross-validation") return DriverMode::CrossValidation;
    throw ConfigInvalid("mode: expected benchmark or validate, got '" + std::string(text) + "'");
}

std::map<QueryVariant, int> DriverConfig::default_frequencies() {
    return {{QueryVariant::CR3a, 12},  {QueryVariant::CR3b, 12},  {QueryVariant::CR13a, 12},
            {QueryVariant::CR13b, 12}, {QueryVariant::CR14a, 24}, {QueryVariant::CR14b, 24}};
}

void DriverConfig::validate() const {
    if (tcr.ppb() <= 0) throw ConfigInvalid("tcr: must be greater than zero");
    if (warmup.count() < 0) throw ConfigInvalid("warmup: must not be negative");
    if (window.count() < 0) throw ConfigInvalid("window: must not be negative");
    if (read_threads == 0) throw ConfigInvalid("read_threads: must be at least 1");
    if (write_threads == 0) throw ConfigInvalid("write_threads: must be at least 1");
    if (t_safe.millis <= 0) throw ConfigInvalid("t_safe: must be positive");
    for (const auto& [v, f] : frequencies) {
        if (!is_complex(v)) throw ConfigInvalid("frequencies: " + std::string(variant_name(v)) + " is not a complex read");
        if (f <= 0) throw ConfigInvalid("frequencies: " + std::string(variant_name(v)) + " must be positive");
    }
    if (on_time_threshold.count() < 0) throw ConfigInvalid("on_time_threshold: must not be negative");
    if (on_time_ppm_required < 0 || on_time_ppm_required > 1'000'000)
        throw ConfigInvalid("on_time_ratio_required: must be within [0, 1]");
    if (deadlock_cadences <= 0) throw ConfigInvalid("deadlock_cadences: must be positive");
    if (short_reads.self_trigger_probability < 0 || short_reads.self_trigger_probability > 1)
        throw ConfigInvalid("short_reads.self_trigger_probability: must be within [0, 1]");
}

// ---- schedule -------------------------------------------------------------------------------

Schedule build_schedule(const std::vector<UpdateOperation>& stream, const std::vector<ParameterBucket>& buckets,
                        const DriverConfig& config, SimInstant anchor) {
    Schedule s{anchor, config.tcr, {}, {}};
    s.update_times.reserve(stream.size());
    std::map<std::int64_t, const ParameterBucket*> by_day;
    for (const auto& b : buckets) by_day[b.day.days_since_epoch] = &b;
    std::map<QueryVariant, std::size_t> next_param;

    for (std::size_t i = 0; i < stream.size(); ++i) {
        const auto& op = stream[i];
        if (i > 0 && op.scheduled_time < stream[i - 1].scheduled_time)
            throw ConfigInvalid("stream: not sorted by scheduled time at position " + std::to_string(i));
        s.update_times.push_back(op.scheduled_time);
        const WallDuration wall = config.tcr.scale(op.scheduled_time - anchor);
        s.entries.push_back({op, op.scheduled_time, wall, config.tcr.scale(op.dependency_time - anchor), i});

        for (const auto& [variant, freq] : config.frequencies) {
            if ((i + 1) % static_cast<std::size_t>(freq) != 0) continue;
            const SimDay day = day_of(op.scheduled_time);
            auto it = by_day.find(day.days_since_epoch);
            if (it == by_day.end()) throw MissingBucket("no parameter bucket for " + to_iso_date(day));
            auto list = it->second->per_query.find(variant);
            if (list == it->second->per_query.end() || list->second.empty()) continue; // partial bucket
            const auto& params = list->second[next_param[variant]++ % list->second.size()];
            s.entries.push_back({QueryInstance{variant, params}, op.scheduled_time, wall, WallDuration{0}, SIZE_MAX});
        }
    }
    return s;
}

// ---- clock and gate -------------------------------------------------------------------------

GlobalClock::GlobalClock(std::vector<SimInstant> update_times)
    : times_(std::move(update_times)), done_(times_.size(), 0),
      confirmed_(times_.empty() ? SimInstant::max() : times_.front() - SimDuration{1}) {}

void GlobalClock::complete(std::size_t update_index) {
    {
        std::lock_guard lock(mu_);
        done_.at(update_index) = 1;
        while (frontier_ < done_.size() && done_[frontier_]) ++frontier_;
        const SimInstant next = frontier_ < times_.size() ? times_[frontier_] - SimDuration{1} : SimInstant::max();
        if (next > confirmed_.load(std::memory_order_relaxed)) confirmed_.store(next, std::memory_order_release);
    }
    cv_.notify_all();
}

bool GlobalClock::wait_until_confirmed(SimInstant t, WallDuration timeout) const {
    std::unique_lock lock(mu_);
    return cv_.wait_for(lock, timeout, [&] { return confirmed() >= t; });
}

GateDecision dependency_gate(const UpdateOperation& op, const GlobalClock& clock) {
    return clock.confirmed() >= op.dependency_time ? GateDecision::Execute : GateDecision::Defer;
}

WallDuration gate_cadence(const DriverConfig& config) {
    return std::max<WallDuration>(config.tcr.scale(config.t_safe), std::chrono::microseconds(50));
}

// ---- on-time and stats ----------------------------------------------------------------------

bool record_on_time(WallDuration scheduled, WallDuration actual_start, WallDuration threshold) {
    return actual_start - scheduled <= threshold;
}

OnTimeSummary summarize_on_time(const std::vector<WallDuration>& start_delays, WallDuration threshold,
                                std::int64_t ppm_required) {
    OnTimeSummary s;
    s.total = start_delays.size();
    for (auto d : start_delays) s.on_time += d <= threshold;
    if (s.total > 0) s.ratio = static_cast<double>(s.on_time) / static_cast<double>(s.total);
    s.valid = static_cast<__int128>(s.on_time) * 1'000'000 >= static_cast<__int128>(ppm_required) * s.total;
    return s;
}

WallDuration nearest_rank(const std::vector<WallDuration>& sorted, int pct) {
    const auto n = static_cast<std::int64_t>(sorted.size());
    std::int64_t rank = (pct * n + 99) / 100;
    rank = std::clamp<std::int64_t>(rank, 1, n);
    return sorted[static_cast<std::size_t>(rank - 1)];
}

std::optional<LatencyStats> compute_stats(std::vector<WallDuration> latencies) {
    if (latencies.empty()) return std::nullopt;
    std::sort(latencies.begin(), latencies.end());
    auto ms = [](WallDuration d) { return static_cast<double>(d.count()) / 1e6; };
    LatencyStats s;
    s.count = latencies.size();
    s.min_ms = ms(latencies.front());
    s.max_ms = ms(latencies.back());
    __int128 total = 0;
    for (auto d : latencies) total += d.count();
    s.mean_ms = static_cast<double>(total) / static_cast<double>(latencies.size()) / 1e6;
    s.p50_ms = ms(nearest_rank(latencies, 50));
    s.p90_ms = ms(nearest_rank(latencies, 90));
    s.p95_ms = ms(nearest_rank(latencies, 95));
    s.p99_ms = ms(nearest_rank(latencies, 99));
    return s;
}

double throughput(std::uint64_t ops, WallDuration elapsed) {
    if (elapsed.count() <= 0) return 0.0;
    return static_cast<double>(ops) / (static_cast<double>(elapsed.count()) / 1e9);
}

std::string operation_name(const ScheduleEntry& entry) {
    if (const auto* op = std::get_if<UpdateOperation>(&entry.operation)) return op_name(op->type);
    return std::string(variant_name(std::get<QueryInstance>(entry.operation).variant));
}

std::string operation_class(const std::string& operation) {
    if (operation.rfind("CR", 0) == 0) return "CR";
    if (operation.rfind("SR", 0) == 0) return "SR";
    if (operation.rfind("INS", 0) == 0) return "INS";
    return "DEL";
}

RunReport build_report(const std::vector<OpRecord>& records, const DriverConfig& config, WallDuration measured) {
    RunReport r;
    r.tcr = config.tcr.value();
    r.measured_seconds = static_cast<double>(measured.count()) / 1e9;
    const WallDuration lo = config.warmup, hi = config.warmup + config.window;
    std::map<std::string, std::vector<WallDuration>> latencies;
    std::vector<WallDuration> delays;
    for (const auto& rec : records) {
        if (rec.scheduled < lo || rec.scheduled >= hi) continue;
        ++r.total_ops;
        ++r.ops_per_class[rec.klass];
        delays.push_back(rec.started - rec.scheduled);
        if (rec.error) {
            ++r.errors;
            ++r.errors_per_operation[rec.op];
        } else {
            latencies[rec.op].push_back(rec.latency);
        }
    }
    for (const char* k : {"CR", "SR", "INS", "DEL"}) r.ops_per_class.try_emplace(k, 0);
    const auto on_time = summarize_on_time(delays, config.on_time_threshold, config.on_time_ppm_required);
    r.on_time_ratio = on_time.ratio;
    r.late_ops = on_time.total - on_time.on_time;
    r.valid = on_time.valid;
    for (auto& [op, series] : latencies)
        if (auto s = compute_stats(std::move(series))) r.per_operation[op] = *s;
    r.throughput = throughput(r.total_ops, measured);
    return r;
}

nlohmann::json RunReport::to_json() const {
    nlohmann::json per_op = nlohmann::json::object();
    for (const auto& [op, s] : per_operation)
        per_op[op] = {{"count", s.count}, {"min_ms", s.min_ms}, {"max_ms", s.max_ms}, {"mean_ms", s.mean_ms},
                      {"p50_ms", s.p50_ms}, {"p90_ms", s.p90_ms}, {"p95_ms", s.p95_ms}, {"p99_ms", s.p99_ms}};
    return {{"throughput", throughput},
            {"total_ops", total_ops},
            {"ops_per_class", ops_per_class},
            {"on_time_ratio", on_time_ratio},
            {"late_ops", late_ops},
            {"valid", valid},
            {"per_operation", per_op},
            {"errors", errors},
            {"errors_per_operation", errors_per_operation},
            {"measured_seconds", measured_seconds},
            {"schedule_exhausted", schedule_exhausted},
            {"tcr", tcr}};
}

RunReport report_from_json(const nlohmann::json& j) {
    RunReport r;
    r.throughput = j.at("throughput").get<double>();
    r.total_ops = j.at("total_ops").get<std::uint64_t>();
    r.ops_per_class = j.at("ops_per_class").get<std::map<std::string, std::uint64_t>>();
    r.on_time_ratio = j.at("on_time_ratio").get<double>();
    r.late_ops = j.at("late_ops").get<std::uint64_t>();
    r.valid = j.at("valid").get<bool>();
    for (const auto& [op, s] : j.at("per_operation").items())
        r.per_operation[op] = {s.at("count").get<std::uint64_t>(), s.at("min_ms").get<double>(),
                               s.at("max_ms").get<double>(),       s.at("mean_ms").get<double>(),
                               s.at("p50_ms").get<double>(),       s.at("p90_ms").get<double>(),
                               s.at("p95_ms").get<double>(),       s.at("p99_ms").get<double>()};
    r.errors = j.at("errors").get<std::uint64_t>();
    r.errors_per_operation = j.at("errors_per_operation").get<std::map<std::string, std::uint64_t>>();
    r.measured_seconds = j.at("measured_seconds").get<double>();
    r.schedule_exhausted = j.at("schedule_exhausted").get<bool>();
    r.tcr = j.at("tcr").get<double>();
    return r;
}

// ---- short reads ----------------------------------------------------------------------------

std::vector<std::pair<QueryInstance, int>> triggered_short_reads(const QueryInstance& query, const QueryResult& result,
                                                                 int depth, const ShortReadConfig& cfg, Rng& rng) {
    std::vector<std::pair<QueryInstance, int>> out;
    auto sr2 = [&](EntityId person) { out.push_back({{QueryVariant::SR2, PersonParam{person}}, depth + 1}); };
    switch (query.variant) {
    case QueryVariant::CR3a:
    case QueryVariant::CR3b:
        for (const auto& row : std::get<std::vector<Cr3Row>>(result)) {
            if (out.size() >= cfg.persons_per_query) break;
            sr2(row.person);
        }
        break;
    case QueryVariant::CR14a:
    case QueryVariant::CR14b:
        for (EntityId id : std::get<CheapestPath>(result).nodes) {
            if (out.size() >= cfg.persons_per_query) break;
            sr2(id);
        }
        break;
    case QueryVariant::CR13b: {
        const auto& p = std::get<PathParams>(query.params);
        sr2(p.person1);
        sr2(p.person2);
        break;
    }
    case QueryVariant::SR2: {
        const auto& rows = std::get<std::vector<Sr2Row>>(result);
        for (std::size_t i = 0; i < rows.size() && i < cfg.messages_per_sr2; ++i)
            out.push_back({{QueryVariant::SR6, MessageParam{rows[i].message}}, depth + 1});
        if (depth < cfg.max_depth && !rows.empty()) {
            const double p = std::pow(cfg.self_trigger_probability, depth);
            const EntityId self = std::get<PersonParam>(query.params).person;
            if (rng.bernoulli(p)) {
                for (const auto& row : rows)
                    if (row.root_author != self) {
                        sr2(row.root_author);
                        break;
                    }
            }
        }
        break;
    }
    default: break;
    }
    return out;
}

// ---- benchmark ------------------------------------------------------------------------------

namespace {

struct Task {
    const ScheduleEntry* entry = nullptr; // null for triggered short reads
    QueryInstance query;
    int depth = 0;
    WallDuration scheduled{};
};

/// FIFO with close-on-drain: closes once the producer is done and every pushed task finished.
class TaskQueue {
public:
    void push(Task t) {
        {
            std::lock_guard lock(mu_);
            ++pending_;
            q_.push_back(std::move(t));
        }
        cv_.notify_one();
    }
    std::optional<Task> pop() {
        std::unique_lock lock(mu_);
        cv_.wait(lock, [&] { return !q_.empty() || closed_; });
        if (q_.empty()) return std::nullopt;
        Task t = std::move(q_.front());
        q_.pop_front();
        return t;
    }
    void finish_one() {
        std::lock_guard lock(mu_);
        --pending_;
        maybe_close();
    }
    void producer_done() {
        std::lock_guard lock(mu_);
        producing_ = false;
        maybe_close();
    }

private:
    void maybe_close() {
        if (!producing_ && pending_ == 0 && !closed_) {
            closed_ = true;
            cv_.notify_all();
        }
    }
    std::mutex mu_;
    std::condition_variable cv_;
    std::deque<Task> q_;
    std::size_t pending_ = 0;
    bool producing_ = true;
    bool closed_ = false;
};

std::uint64_t mix(std::uint64_t seed, std::uint64_t k) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (k + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace

RunResult run_benchmark(const Schedule& schedule, SystemUnderTest& sut, const DriverConfig& config) {
    config.validate();
    GlobalClock clock(schedule.update_times);
    TaskQueue reads, writes;
    std::atomic<std::uint64_t> commit_counter{0};
    std::atomic<bool> abort{false};
    std::mutex failure_mu;
    std::exception_ptr failure;

    std::vector<AuditRecord> audit(schedule.update_times.size());
    std::vector<char> executed(schedule.update_times.size(), 0);
    const unsigned workers = config.read_threads + config.write_threads;
    std::vector<std::vector<OpRecord>> records(workers);

    const auto run_start = Clock::now() + std::chrono::milliseconds(1);
    const WallDuration end_offset = config.warmup + config.window;
    auto offset_now = [&] { return std::chrono::duration_cast<WallDuration>(Clock::now() - run_start); };

    const WallDuration cadence = gate_cadence(config);
    const WallDuration deadlock_limit = std::max(cadence * config.deadlock_cadences, config.deadlock_floor);

    auto write_worker = [&](unsigned w) {
        while (auto task = writes.pop()) {
            const auto& entry = *task->entry;
            const auto& op = std::get<UpdateOperation>(entry.operation);
            const auto deferred_at = Clock::now();
            bool give_up = false;
            while (dependency_gate(op, clock) == GateDecision::Defer) {
                if (abort.load()) {
                    give_up = true;
                    break;
                }
                clock.wait_until_confirmed(op.dependency_time, cadence);
                if (dependency_gate(op, clock) == GateDecision::Execute) break;
                if (Clock::now() - deferred_at > deadlock_limit) {
                    std::lock_guard lock(failure_mu);
                    if (!failure)
                        failure = std::make_exception_ptr(DeadlockSuspected(
                            op_name(op.type) + " scheduled at " + to_iso(op.scheduled_time) + " waited for " +
                            to_iso(op.dependency_time) + " beyond the deadlock limit; clock at " +
                            to_iso(clock.confirmed())));
                    abort = true;
                    give_up = true;
                    break;
                }
            }
            if (give_up) {
                writes.finish_one();
                continue;
            }
            AuditRecord& a = audit[entry.update_index];
            a.update_index = entry.update_index;
            a.type = op.type;
            a.scheduled_time = op.scheduled_time;
            a.dependency_time = op.dependency_time;
            a.clock_at_gate = clock.confirmed();
            a.start_seq = commit_counter.load(std::memory_order_acquire);
            OpRecord rec{op_name(op.type), is_insert(op.type) ? "INS" : "DEL", entry.scheduled_wall, offset_now(), {}, false};
            const auto t0 = Clock::now();
            try {
                sut.execute_update(op);
                a.committed = true;
            } catch (const std::exception&) {
                rec.error = true;
            }
            rec.latency = std::chrono::duration_cast<WallDuration>(Clock::now() - t0);
            a.commit_seq = commit_counter.fetch_add(1, std::memory_order_acq_rel);
            executed[entry.update_index] = 1;
            clock.complete(entry.update_index);
            records[w].push_back(std::move(rec));
            writes.finish_one();
        }
    };

    auto read_worker = [&](unsigned w) {
        Rng rng(mix(config.seed, w));
        while (auto task = reads.pop()) {
            const QueryInstance& q = task->entry ? std::get<QueryInstance>(task->entry->operation) : task->query;
            const std::string name(variant_name(q.variant));
            OpRecord rec{name, is_complex(q.variant) ? "CR" : "SR", task->scheduled, offset_now(), {}, false};
            const auto t0 = Clock::now();
            std::optional<QueryResult> result;
            try {
                result = sut.execute_query(q);
            } catch (const std::exception&) {
                rec.error = true;
            }
            rec.latency = std::chrono::duration_cast<WallDuration>(Clock::now() - t0);
            if (result && !abort.load()) {
                const WallDuration now = offset_now();
                if (now < end_offset) {
                    try {
                        for (auto& [sr, depth] : triggered_short_reads(q, *result, task->depth, config.short_reads, rng))
                            reads.push({nullptr, std::move(sr), depth, now});
                    } catch (const std::exception&) {
                        rec.error = true; // result of the wrong shape
                    }
                }
            }
            records[w].push_back(std::move(rec));
            reads.finish_one();
        }
    };

    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < config.write_threads; ++w) pool.emplace_back(write_worker, w);
    for (unsigned w = 0; w < config.read_threads; ++w) pool.emplace_back(read_worker, config.write_threads + w);

    bool exhausted = true;
    for (const auto& entry : schedule.entries) {
        if (entry.scheduled_wall >= end_offset) {
            exhausted = false;
            break;
        }
        if (abort.load()) break;
        std::this_thread::sleep_until(run_start + entry.scheduled_wall);
        if (entry.is_update()) writes.push({&entry, {}, 0, entry.scheduled_wall});
        else reads.push({&entry, {}, 0, entry.scheduled_wall});
    }
    writes.producer_done();
    reads.producer_done();
    pool.clear(); // joins

    if (failure) std::rethrow_exception(failure);

    std::vector<OpRecord> all;
    WallDuration last_done{0};
    for (auto& rs : records)
        for (auto& r : rs) {
            last_done = std::max(last_done, r.started + r.latency);
            all.push_back(std::move(r));
        }
    WallDuration measured = config.window;
    if (exhausted) measured = std::clamp(last_done - config.warmup, WallDuration{0}, config.window);

    RunResult out;
    out.report = build_report(all, config, measured);
    out.report.schedule_exhausted = exhausted;
    for (std::size_t i = 0; i < audit.size(); ++i)
        if (executed[i]) out.audit.push_back(audit[i]);
    return out;
}

std::vector<std::size_t> audit_dependencies(const std::vector<AuditRecord>& audit,
                                            const std::vector<SimInstant>& update_times) {
    constexpr std::uint64_t kNotCommitted = UINT64_MAX;
    std::vector<std::uint64_t> seq(update_times.size(), kNotCommitted);
    for (const auto& a : audit) seq.at(a.update_index) = a.commit_seq;
    // prefix_max[i] = latest commit among updates [0, i)
    std::vector<std::uint64_t> prefix_max(update_times.size() + 1, 0);
    std::vector<char> prefix_missing(update_times.size() + 1, 0);
    for (std::size_t i = 0; i < update_times.size(); ++i) {
        prefix_missing[i + 1] = prefix_missing[i] || seq[i] == kNotCommitted;
        prefix_max[i + 1] = std::max(prefix_max[i], seq[i] == kNotCommitted ? 0 : seq[i]);
    }
    std::vector<std::size_t> violations;
    for (const auto& a : audit) {
        const auto need = static_cast<std::size_t>(
            std::upper_bound(update_times.begin(), update_times.end(), a.dependency_time) - update_times.begin());
        if (need == 0) continue;
        if (prefix_missing[need] || prefix_max[need] >= a.start_seq) violations.push_back(a.update_index);
    }
    return violations;
}

void write_audit_log(const std::vector<AuditRecord>& audit, const std::filesystem::path& file) {
    std::ofstream out(file);
    if (!out) throw IoError("cannot write " + file.string());
    for (const auto& a : audit)
        out << nlohmann::json{{"updateIndex", a.update_index},
                              {"op", op_name(a.type)},
                              {"scheduledTime", to_iso(a.scheduled_time)},
                              {"dependencyTime", to_iso(a.dependency_time)},
                              {"clockAtGate", to_iso(a.clock_at_gate)},
                              {"startSeq", a.start_seq},
                              {"commitSeq", a.commit_seq},
                              {"committed", a.committed}}
                   .dump()
            << '\n';
}

// ---- cross validation -----------------------------------------------------------------------

namespace {

std::string error_kind(const std::exception_ptr& e) {
    try {
        std::rethrow_exception(e);
    } catch (const UnknownPerson&) {
        return "UnknownPerson";
    } catch (const UnknownMessage&) {
        return "UnknownMessage";
    } catch (const UnknownEntity&) {
        return "UnknownEntity";
    } catch (const DependencyMissing&) {
        return "DependencyMissing";
    } catch (const IntegrityError&) {
        return "IntegrityError";
    } catch (const std::exception&) {
        return "Error";
    }
}

struct QueryOutcome {
    std::optional<QueryResult> result;
    std::string error;
    nlohmann::json json() const { return result ? to_json(*result) : nlohmann::json{{"error", error}}; }
};

QueryOutcome run_query(SystemUnderTest& sut, const QueryInstance& q) {
    try {
        return {sut.execute_query(q), {}};
    } catch (...) {
        return {std::nullopt, error_kind(std::current_exception())};
    }
}

nlohmann::json run_update(SystemUnderTest& sut, const UpdateOperation& op) {
    try {
        const auto info = sut.execute_update(op);
        return {{"cascade", info.cascade.total()}};
    } catch (...) {
        return {{"error", error_kind(std::current_exception())}};
    }
}

} // namespace

nlohmann::json ValidationReport::to_json() const {
    nlohmann::json d = nlohmann::json::array();
    for (const auto& x : first_per_operation)
        d.push_back({{"entry", x.entry}, {"operation", x.operation}, {"params", x.params},
                     {"resultA", x.result_a}, {"resultB", x.result_b}});
    return {{"updates", updates}, {"queries", queries}, {"diffs", diffs}, {"firstDivergences", d}};
}

ValidationFailed::ValidationFailed(ValidationReport report)
    : Error("cross validation found " + std::to_string(report.diffs) + " diverging operations" +
            (report.first_per_operation.empty() ? std::string()
                                                : ", first at entry " + std::to_string(report.first_per_operation.front().entry) +
                                                      " (" + report.first_per_operation.front().operation + ")")),
      report_(std::move(report)) {}

ValidationReport cross_validate(const Schedule& schedule, SystemUnderTest& a, SystemUnderTest& b,
                                const DriverConfig& config) {
    ValidationReport report;
    std::set<std::string> seen;
    Rng rng(config.seed);
    auto diverged = [&](std::size_t entry, const std::string& op, nlohmann::json params, nlohmann::json ra,
                        nlohmann::json rb) {
        ++report.diffs;
        if (seen.insert(op).second)
            report.first_per_operation.push_back({entry, op, std::move(params), std::move(ra), std::move(rb)});
    };

    for (std::size_t i = 0; i < schedule.entries.size(); ++i) {
        const auto& entry = schedule.entries[i];
        if (const auto* op = std::get_if<UpdateOperation>(&entry.operation)) {
            ++report.updates;
            auto ra = run_update(a, *op);
            auto rb = run_update(b, *op);
            if (ra != rb) diverged(i, op_name(op->type), to_json(*op), ra, rb);
            continue;
        }
        std::deque<std::pair<QueryInstance, int>> pending{{std::get<QueryInstance>(entry.operation), 0}};
        while (!pending.empty()) {
            auto [q, depth] = std::move(pending.front());
            pending.pop_front();
            ++report.queries;
            const auto ra = run_query(a, q);
            const auto rb = run_query(b, q);
            const bool same = ra.result && rb.result ? results_equivalent(q.variant, *ra.result, *rb.result)
                                                     : (!ra.result && !rb.result && ra.error == rb.error);
            if (!same) diverged(i, std::string(variant_name(q.variant)), to_json(q.params), ra.json(), rb.json());
            if (ra.result)
                for (auto& t : triggered_short_reads(q, *ra.result, depth, config.short_reads, rng))
                    pending.push_back(std::move(t));
        }
    }
    return report;
}

} // namespace snb
