#include "snb/pipeline.hpp"

#include "snb/errors.hpp"
#include "snb/naive_store.hpp"
#include "snb/refstore.hpp"
#include "snb/serialize.hpp"

#include <sys/utsname.h>

#include <chrono>
#include <fstream>
#include <sstream>
#include <thread>

namespace snb {

namespace fs = std::filesystem;

// ---- statistics -----------------------------------------------------------------------------

DatasetStats dataset_stats(const TemporalGraph& g, const std::vector<UpdateOperation>& stream) {
    DatasetStats s;
    s.persons = g.persons.size();
    s.knows = g.knows.size();
    s.forums = g.forums.size();
    s.memberships = g.memberships.size();
    s.messages = g.messages.size();
    s.likes = g.likes.size();
    s.nodes = s.persons + s.forums + s.messages;
    // hasModerator per forum, hasCreator per message, containerOf/replyOf per message
    s.edges = s.knows + s.memberships + s.likes + s.forums + 2 * s.messages;
    for (int t = 1; t <= 16; ++t) s.ops_per_type[op_name(static_cast<OpType>(t))] = 0;
    for (const auto& op : stream) {
        ++s.ops_per_type[op_name(op.type)];
        if (is_insert(op.type)) ++s.insert_ops;
        else ++s.delete_ops;
    }
    if (s.insert_ops > 0) s.delete_insert_ratio = static_cast<double>(s.delete_ops) / static_cast<double>(s.insert_ops);
    return s;
}

DatasetStats emit_stats(const fs::path& dir) {
    return dataset_stats(read_entity_csvs(dir / "snapshot", false), read_stream(dir / "stream.ldjson"));
}

nlohmann::json DatasetStats::to_json() const {
    return {{"nodes", nodes},
            {"edges", edges},
            {"persons", persons},
            {"knows", knows},
            {"forums", forums},
            {"memberships", memberships},
            {"messages", messages},
            {"likes", likes},
            {"insertOps", insert_ops},
            {"deleteOps", delete_ops},
            {"opsPerType", ops_per_type},
            {"deleteInsertRatio", delete_insert_ratio}};
}

void write_dataset(const TemporalGraph& graph, const SnapshotAndStream& split, const GenConfig& config,
                   const fs::path& dir) {
    serialize(split, config, dir);
    write_temporal_graph(graph, dir / "temporal");
}

std::pair<SimDay, SimDay> stream_days(const GenConfig& config) {
    return {day_of(cutoff_instant(config)), day_of(config.simulation_end)};
}

// ---- config ---------------------------------------------------------------------------------

void PipelineConfig::validate() const {
    gen.validate();
    driver.validate();
    if (paramgen.k < 1) throw ConfigInvalid("paramgen.k: must be at least 1");
    if (paramgen.per_day == 0) throw ConfigInvalid("paramgen.per_day: must be at least 1");
    if (gen.t_safe != driver.t_safe)
        throw ConfigInvalid("driver.t_safe: must equal the generator's t_safe (" + std::to_string(gen.t_safe.millis) +
                            " ms)");
    if (out_dir.empty()) throw ConfigInvalid("out: must not be empty");
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec || !fs::is_directory(out_dir))
        throw ConfigInvalid("out: cannot create directory '" + out_dir.string() + "'" +
                            (ec ? ": " + ec.message() : std::string()));
}

nlohmann::json PipelineConfig::to_json() const {
    nlohmann::json freq = nlohmann::json::object();
    for (const auto& [v, f] : driver.frequencies) freq[std::string(variant_name(v))] = f;
    return {{"datagen", snb::to_json(gen)},
            {"paramgen",
             {{"k", paramgen.k},
              {"perDay", paramgen.per_day},
              {"minGroupSize", paramgen.min_group_size},
              {"cr3DurationDays", paramgen.cr3_duration_days},
              {"seed", paramgen.seed}}},
            {"driver",
             {{"mode", std::string(snb::to_string(driver.mode))},
              {"tcr", driver.tcr.to_string()},
              {"warmupSeconds", static_cast<double>(driver.warmup.count()) / 1e9},
              {"windowSeconds", static_cast<double>(driver.window.count()) / 1e9},
              {"readThreads", driver.read_threads},
              {"writeThreads", driver.write_threads},
              {"tSafeMillis", driver.t_safe.millis},
              {"frequencies", freq},
              {"onTimeThresholdMillis", driver.on_time_threshold.count() / 1'000'000},
              {"onTimeRatioRequired", static_cast<double>(driver.on_time_ppm_required) / 1e6},
              {"seed", driver.seed}}},
            {"out", out_dir.string()}};
}

// ---- report ---------------------------------------------------------------------------------

Environment Environment::current() {
    Environment e;
#if defined(__clang__)
    e.compiler = "clang " __clang_version__;
#elif defined(__GNUC__)
    e.compiler = "gcc " __VERSION__;
#else
    e.compiler = "unknown";
#endif
#ifdef NDEBUG
    e.build_type = "optimized";
#else
    e.build_type = "debug";
#endif
    utsname u{};
    if (uname(&u) == 0) e.os = std::string(u.sysname) + " " + u.release + " " + u.machine;
    e.hardware_threads = std::thread::hardware_concurrency();
    return e;
}

nlohmann::json Environment::to_json() const {
    return {{"compiler", compiler}, {"buildType", build_type}, {"os", os}, {"hardwareThreads", hardware_threads}};
}

nlohmann::json FdrReport::to_json() const {
    return {{"config", config},
            {"statistics", stats.to_json()},
            {"run", run ? run->to_json() : nlohmann::json()},
            {"auditViolations", audit_violations},
            {"validation", validation ? validation->to_json() : nlohmann::json()},
            {"stageSeconds", stage_seconds},
            {"environment", environment.to_json()}};
}

std::string FdrReport::summary() const {
    std::ostringstream o;
    o << "data set: " << stats.persons << " persons, " << stats.nodes << " nodes, " << stats.edges << " edges\n";
    o << "update stream: " << stats.insert_ops << " inserts, " << stats.delete_ops << " deletes (ratio "
      << stats.delete_insert_ratio << ")\n";
    if (run) {
        o << "benchmark: " << run->total_ops << " ops in " << run->measured_seconds << " s, throughput "
          << run->throughput << " ops/s\n";
        o << "on time: " << run->on_time_ratio << " (" << run->late_ops << " late), "
          << (run->valid ? "valid" : "INVALID") << "\n";
        o << "errors: " << run->errors << ", dependency audit violations: " << audit_violations << "\n";
        for (const auto& [op, s] : run->per_operation)
            o << "  " << op << ": n=" << s.count << " mean=" << s.mean_ms << "ms p95=" << s.p95_ms
              << "ms p99=" << s.p99_ms << "ms\n";
    }
    if (validation)
        o << "validation: " << validation->updates << " updates, " << validation->queries << " queries, "
          << validation->diffs << " diffs\n";
    for (const auto& [stage, secs] : stage_seconds) o << "stage " << stage << ": " << secs << " s\n";
    return o.str();
}

// ---- pipeline -------------------------------------------------------------------------------

namespace {

template <typename F>
auto stage(FdrReport& report, const std::string& name, F&& body) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
        if constexpr (std::is_void_v<decltype(body())>) {
            body();
            report.stage_seconds[name] += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        } else {
            auto out = body();
            report.stage_seconds[name] += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            return out;
        }
    } catch (const StageFailed&) {
        throw;
    } catch (const std::exception& e) {
        throw StageFailed(name, e.what());
    }
}

void write_text(const fs::path& file, const std::string& text) {
    std::ofstream out(file);
    if (!out) throw IoError("cannot write " + file.string());
    out << text;
}

} // namespace

FdrReport run_pipeline(const PipelineConfig& config) {
    FdrReport report;
    stage(report, "config", [&] { config.validate(); });
    report.config = config.to_json();
    report.environment = Environment::current();
    const fs::path data = config.out_dir / "data", params = config.out_dir / "params";

    const auto graph = stage(report, "datagen", [&] { return generate_temporal_graph(config.gen); });
    const auto split = stage(report, "datagen", [&] {
        auto s = split_at_cutoff(graph, config.gen);
        fs::remove_all(data);
        write_dataset(graph, s, config.gen, data);
        return s;
    });
    report.stats = dataset_stats(split.snapshot, split.stream);

    const auto buckets = stage(report, "paramgen", [&] {
        const auto [first, last] = stream_days(config.gen);
        auto b = generate_parameters(graph, first, last, config.paramgen);
        fs::remove_all(params);
        write_parameter_buckets(b, params);
        return b;
    });

    const auto schedule =
        stage(report, "schedule", [&] { return build_schedule(split.stream, buckets, config.driver, split.cutoff); });

    if (config.driver.mode == DriverMode::CrossValidation) {
        ReferenceStore ref(config.gen.moderator_policy);
        NaiveStore naive(config.gen.moderator_policy);
        stage(report, "load", [&] {
            ref.bulk_load(split.snapshot);
            naive.bulk_load(split.snapshot);
        });
        report.validation = stage(report, "validate", [&] { return cross_validate(schedule, ref, naive, config.driver); });
    } else {
        ReferenceStore ref(config.gen.moderator_policy);
        stage(report, "load", [&] { ref.bulk_load(split.snapshot); });
        const auto result = stage(report, "benchmark", [&] { return run_benchmark(schedule, ref, config.driver); });
        report.run = result.report;
        report.audit_violations = audit_dependencies(result.audit, schedule.update_times).size();
        stage(report, "report", [&] { write_audit_log(result.audit, config.out_dir / "audit.ldjson"); });
    }

    stage(report, "report", [&] {
        write_text(config.out_dir / "fdr.json", report.to_json().dump(2) + "\n");
        write_text(config.out_dir / "summary.txt", report.summary());
    });
    return report;
}

} // namespace snb
