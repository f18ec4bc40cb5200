#pragma once

#include "snb/errors.hpp"
#include "snb/paramgen.hpp"
#include "snb/random.hpp"
#include "snb/sut.hpp"

#include "json.hpp"

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace snb {

using WallDuration = std::chrono::nanoseconds;

/// Total compression ratio held exactly as parts per billion.
class TcrRatio {
public:
    TcrRatio() = default;
    /// Decimal text such as "0.02" or "1e-5"; at most 9 significant fractional digits. Must be > 0.
    static TcrRatio parse(std::string_view text);
    static TcrRatio from_ppb(std::int64_t ppb);

    std::int64_t ppb() const { return ppb_; }
    double value() const { return static_cast<double>(ppb_) / 1e9; }
    /// tcr * offset, floored to the nanosecond. Exact whenever tcr has at most 6 decimals.
    WallDuration scale(SimDuration offset) const;
    std::string to_string() const;
    bool operator==(const TcrRatio&) const = default;

private:
    std::int64_t ppb_ = 10'000; // 1e-5
};

enum class DriverMode : std::uint8_t { Benchmark, CrossValidation };

std::string_view to_string(DriverMode mode);
DriverMode parse_driver_mode(std::string_view text);

/// Which short reads a finished query triggers.
struct ShortReadConfig {
    std::size_t persons_per_query = 3;   ///< SR2 per CR3/CR14 result
    double self_trigger_probability = 0.5; ///< SR2 -> SR2, multiplied by itself at each hop
    int max_depth = 3;
    std::size_t messages_per_sr2 = 2;    ///< SR6 per SR2 result
};

struct DriverConfig {
    TcrRatio tcr;
    WallDuration warmup = std::chrono::seconds(30);
    WallDuration window = std::chrono::seconds(300);
    unsigned read_threads = 2;
    unsigned write_threads = 2;
    SimDuration t_safe = SimDuration::seconds(10);
    DriverMode mode = DriverMode::Benchmark;
    /// One instance of a CR variant every `frequency` update operations.
    std::map<QueryVariant, int> frequencies = default_frequencies();
    WallDuration on_time_threshold = std::chrono::seconds(1);
    /// Required on-time share in parts per million (950000 = 0.95).
    std::int64_t on_time_ppm_required = 950'000;
    ShortReadConfig short_reads;
    /// DeadlockSuspected once a deferred op waits longer than this many gate cadences,
    /// but never before deadlock_floor has passed.
    std::int64_t deadlock_cadences = 1000;
    WallDuration deadlock_floor = std::chrono::seconds(10);
    std::uint64_t seed = 1;

    static std::map<QueryVariant, int> default_frequencies();
    /// Throws ConfigInvalid naming the field.
    void validate() const;
};

struct ScheduleEntry {
    std::variant<UpdateOperation, QueryInstance> operation;
    SimInstant sim_time;
    WallDuration scheduled_wall;  ///< offset from run start
    WallDuration dependency_wall; ///< updates only
    std::size_t update_index = SIZE_MAX; ///< position in the update stream, updates only

    bool is_update() const { return operation.index() == 0; }
};

struct Schedule {
    SimInstant anchor;
    TcrRatio tcr;
    std::vector<ScheduleEntry> entries;
    std::vector<SimInstant> update_times; ///< scheduled sim time per update, stream order
};

/// Updates mapped to wall offsets tcr * (t - anchor); each CR variant is interleaved after every
/// `frequency`-th update with parameters from the bucket of that update's day.
/// Throws MissingBucket when that day has no bucket.
Schedule build_schedule(const std::vector<UpdateOperation>& stream, const std::vector<ParameterBucket>& buckets,
                        const DriverConfig& config, SimInstant anchor);

/// Sim time up to which every update has committed: the contiguous completed prefix of the
/// (sorted) stream. Never decreases.
class GlobalClock {
public:
    explicit GlobalClock(std::vector<SimInstant> update_times);
    SimInstant confirmed() const { return confirmed_.load(std::memory_order_acquire); }
    void complete(std::size_t update_index);
    /// Waits until confirmed() >= t or the timeout passes; returns confirmed() >= t.
    bool wait_until_confirmed(SimInstant t, WallDuration timeout) const;

private:
    std::vector<SimInstant> times_;
    std::vector<char> done_;
    std::size_t frontier_ = 0;
    std::atomic<SimInstant> confirmed_;
    mutable std::mutex mu_;
    mutable std::condition_variable cv_;
};

enum class GateDecision : std::uint8_t { Execute, Defer };
GateDecision dependency_gate(const UpdateOperation& op, const GlobalClock& clock);

/// Wall cadence at which a deferred update re-checks the clock: tcr * t_safe, at least 50 us.
WallDuration gate_cadence(const DriverConfig& config);

bool record_on_time(WallDuration scheduled, WallDuration actual_start, WallDuration threshold);

struct OnTimeSummary {
    std::uint64_t total = 0;
    std::uint64_t on_time = 0;
    double ratio = 1.0; ///< 1.0 when total == 0
    bool valid = true;
};
OnTimeSummary summarize_on_time(const std::vector<WallDuration>& start_delays, WallDuration threshold,
                                std::int64_t ppm_required);

struct LatencyStats {
    std::uint64_t count = 0;
    double min_ms = 0, max_ms = 0, mean_ms = 0, p50_ms = 0, p90_ms = 0, p95_ms = 0, p99_ms = 0;
};
/// Nearest-rank percentiles; nullopt for an empty series.
std::optional<LatencyStats> compute_stats(std::vector<WallDuration> latencies);
/// Nearest rank: element ceil(pct/100 * N) of the sorted series, pct an integer in [1, 100].
WallDuration nearest_rank(const std::vector<WallDuration>& sorted, int pct);

double throughput(std::uint64_t ops, WallDuration elapsed);

/// One executed operation as seen by a worker.
struct OpRecord {
    std::string op;      ///< e.g. CR13b, SR2, INS6, DEL1
    std::string klass;   ///< CR, SR, INS, DEL
    WallDuration scheduled{};
    WallDuration started{};
    WallDuration latency{};
    bool error = false;
};

struct RunReport {
    double throughput = 0;
    std::uint64_t total_ops = 0;
    std::map<std::string, std::uint64_t> ops_per_class;
    double on_time_ratio = 1.0;
    std::uint64_t late_ops = 0;
    bool valid = true;
    std::map<std::string, LatencyStats> per_operation;
    std::uint64_t errors = 0;
    std::map<std::string, std::uint64_t> errors_per_operation;
    double measured_seconds = 0;
    bool schedule_exhausted = false;
    double tcr = 0;

    nlohmann::json to_json() const;
};
RunReport report_from_json(const nlohmann::json& j);

/// Report over the ops whose scheduled wall offset falls in [warmup, warmup + window).
RunReport build_report(const std::vector<OpRecord>& records, const DriverConfig& config, WallDuration measured);

/// Commit audit entry for one executed update.
struct AuditRecord {
    std::size_t update_index = 0;
    OpType type = OpType::Ins1;
    SimInstant scheduled_time;
    SimInstant dependency_time;
    SimInstant clock_at_gate;
    std::uint64_t start_seq = 0;  ///< commit counter read just before executing
    std::uint64_t commit_seq = 0; ///< position in the commit order
    bool committed = false;
};

struct RunResult {
    RunReport report;
    std::vector<AuditRecord> audit; ///< ordered by update_index
};

/// Replays the schedule against the SUT with read/write worker pools. Throws DeadlockSuspected
/// when an update can never pass its gate.
RunResult run_benchmark(const Schedule& schedule, SystemUnderTest& sut, const DriverConfig& config);

/// Stream indexes of updates that started before every update scheduled at or before their
/// dependency time had committed. Empty for a compliant run.
std::vector<std::size_t> audit_dependencies(const std::vector<AuditRecord>& audit,
                                            const std::vector<SimInstant>& update_times);

void write_audit_log(const std::vector<AuditRecord>& audit, const std::filesystem::path& file);

// ---- cross validation ---------------------------------------------------------------------------

struct Divergence {
    std::size_t entry = 0;
    std::string operation;
    nlohmann::json params;
    nlohmann::json result_a;
    nlohmann::json result_b;
};

struct ValidationReport {
    std::size_t updates = 0;
    std::size_t queries = 0;
    std::size_t diffs = 0;
    std::vector<Divergence> first_per_operation;

    nlohmann::json to_json() const;
};

class ValidationFailed : public Error {
public:
    explicit ValidationFailed(ValidationReport report);
    const ValidationReport& report() const { return report_; }

private:
    ValidationReport report_;
};

/// Runs the schedule strictly sequentially on both SUTs (with the same short-read chain) and
/// compares every query result and update outcome.
ValidationReport cross_validate(const Schedule& schedule, SystemUnderTest& a, SystemUnderTest& b,
                                const DriverConfig& config);

/// Short reads triggered by a finished query. depth is that query's depth (0 for a CR).
std::vector<std::pair<QueryInstance, int>> triggered_short_reads(const QueryInstance& query, const QueryResult& result,
                                                                 int depth, const ShortReadConfig& config, Rng& rng);

std::string operation_name(const ScheduleEntry& entry);
std::string operation_class(const std::string& operation);

} // namespace snb
