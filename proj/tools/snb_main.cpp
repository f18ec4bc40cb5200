#include "snb/acid.hpp"
#include "snb/driver.hpp"
#include "snb/errors.hpp"
#include "snb/naive_store.hpp"
#include "snb/paramgen.hpp"
#include "snb/pipeline.hpp"
#include "snb/refstore.hpp"
#include "snb/serialize.hpp"

#include "CLI11.hpp"

#include <cmath>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace snb;

namespace {

WallDuration seconds(double s) { return WallDuration{static_cast<std::int64_t>(std::llround(s * 1e9))}; }

SimDuration sim_seconds(double s) { return SimDuration{static_cast<std::int64_t>(std::llround(s * 1000.0))}; }

void write_json(const nlohmann::json& j, const std::string& file) {
    if (file.empty() || file == "-") {
        std::cout << j.dump(2) << "\n";
        return;
    }
    std::ofstream out(file);
    if (!out) throw IoError("cannot write " + file);
    out << j.dump(2) << "\n";
}

ModeratorDeletionPolicy parse_policy(const std::string& s) {
    if (s == "delete") return ModeratorDeletionPolicy::DeleteForum;
    if (s == "reassign") return ModeratorDeletionPolicy::Reassign;
    throw ConfigInvalid("moderator-policy: expected delete or reassign, got '" + s + "'");
}

struct DatagenArgs {
    std::uint64_t seed = 42;
    int persons = 1000;
    std::string out;
    double cutoff_fraction = 0.97;
    double t_safe_secs = 10;
    std::string policy = "delete";
};

struct ParamgenArgs {
    std::string graph, out;
    int k = 4;
    std::size_t per_day = 10;
    std::size_t min_group_size = 10;
    std::uint64_t seed = 7;
    unsigned threads = 0;
};

struct DriverArgs {
    std::string mode = "benchmark";
    std::string tcr = "1e-5";
    std::string stream, params, report, audit;
    double warmup_secs = 30, window_secs = 300;
    unsigned read_threads = 2, write_threads = 2;
    double on_time_threshold_secs = 1;
    std::uint64_t seed = 1;
};

struct AcidArgs {
    std::string store = "reference";
    std::string scenario = "all";
    std::uint64_t seed = 1;
    std::size_t interleavings = 100;
    std::string report;
};

void add_driver_options(CLI::App* cmd, DriverArgs& a) {
    cmd->add_option("--mode", a.mode, "benchmark or validate")->capture_default_str();
    cmd->add_option("--tcr", a.tcr, "total compression ratio, wall time per simulation time")->capture_default_str();
    cmd->add_option("--warmup-secs", a.warmup_secs, "wall seconds excluded from measurement")->capture_default_str();
    cmd->add_option("--window-secs", a.window_secs, "measurement window in wall seconds")->capture_default_str();
    cmd->add_option("--read-threads", a.read_threads)->capture_default_str();
    cmd->add_option("--write-threads", a.write_threads)->capture_default_str();
    cmd->add_option("--on-time-threshold-secs", a.on_time_threshold_secs)->capture_default_str();
    cmd->add_option("--driver-seed", a.seed, "seed for triggered short reads")->capture_default_str();
}

DriverConfig driver_config(const DriverArgs& a, SimDuration t_safe) {
    DriverConfig c;
    c.mode = parse_driver_mode(a.mode);
    c.tcr = TcrRatio::parse(a.tcr);
    c.warmup = seconds(a.warmup_secs);
    c.window = seconds(a.window_secs);
    c.read_threads = a.read_threads;
    c.write_threads = a.write_threads;
    c.on_time_threshold = seconds(a.on_time_threshold_secs);
    c.t_safe = t_safe;
    c.seed = a.seed;
    c.validate();
    return c;
}

int run_datagen(const DatagenArgs& a) {
    GenConfig c;
    c.seed = a.seed;
    c.num_persons = a.persons;
    c.cutoff_fraction = a.cutoff_fraction;
    c.t_safe = sim_seconds(a.t_safe_secs);
    c.moderator_policy = parse_policy(a.policy);
    c.validate();
    const auto graph = generate_temporal_graph(c);
    const auto split = split_at_cutoff(graph, c);
    write_dataset(graph, split, c, a.out);
    auto j = dataset_stats(split.snapshot, split.stream).to_json();
    j["cutoff"] = to_iso(split.cutoff);
    std::cout << j.dump(2) << "\n";
    return 0;
}

int run_paramgen(const ParamgenArgs& a) {
    const fs::path dir(a.graph);
    const auto config = read_gen_config(dir);
    const auto graph = read_temporal_graph(fs::exists(dir / "temporal") ? dir / "temporal" : dir);
    ParamGenOptions o;
    o.k = a.k;
    o.per_day = a.per_day;
    o.min_group_size = a.min_group_size;
    o.seed = a.seed;
    o.threads = a.threads;
    const auto [first, last] = stream_days(config);
    const auto buckets = generate_parameters(graph, first, last, o);
    write_parameter_buckets(buckets, a.out);
    std::size_t partial = 0;
    for (const auto& b : buckets) partial += b.partial;
    std::cout << "wrote " << buckets.size() << " daily buckets (" << partial << " partial) to " << a.out << "\n";
    return 0;
}

int run_driver(const DriverArgs& a) {
    const fs::path data(a.stream);
    const auto gen = read_gen_config(data);
    const auto config = driver_config(a, gen.t_safe);
    const auto snapshot = read_entity_csvs(data / "snapshot", false);
    const auto stream = read_stream(data / "stream.ldjson");
    const auto buckets = read_parameter_buckets(a.params);
    const auto schedule = build_schedule(stream, buckets, config, cutoff_instant(gen));

    if (config.mode == DriverMode::CrossValidation) {
        ReferenceStore ref(gen.moderator_policy);
        NaiveStore naive(gen.moderator_policy);
        ref.bulk_load(snapshot);
        naive.bulk_load(snapshot);
        const auto v = cross_validate(schedule, ref, naive, config);
        write_json(v.to_json(), a.report);
        if (v.diffs > 0) {
            std::cerr << ValidationFailed(v).what() << "\n";
            return 2;
        }
        return 0;
    }
    ReferenceStore ref(gen.moderator_policy);
    ref.bulk_load(snapshot);
    const auto result = run_benchmark(schedule, ref, config);
    const auto violations = audit_dependencies(result.audit, schedule.update_times);
    if (!a.audit.empty()) write_audit_log(result.audit, a.audit);
    auto j = result.report.to_json();
    j["auditViolations"] = violations.size();
    write_json(j, a.report);
    return violations.empty() ? 0 : 2;
}

int run_acid_cmd(const AcidArgs& a) {
    const auto report = run_acid(parse_acid_store(a.store), a.scenario, a.seed, a.interleavings);
    write_json(report.to_json(), a.report);
    if (!a.report.empty() && a.report != "-")
        for (const auto& s : report.scenarios)
            std::cout << s.name << ": " << s.passed << "/" << s.runs << (s.pass() ? " PASS" : " FAIL") << "\n";
    return report.pass() ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Transactional social-network benchmark: generator, parameter curation, driver, reference store"};
    app.set_config("--config", "", "config file (TOML/INI, one [subcommand] section each); flags override it");
    app.require_subcommand(1);

    DatagenArgs dg;
    auto* datagen = app.add_subcommand("datagen", "generate a temporal graph, split it into snapshot and stream");
    datagen->add_option("--seed", dg.seed)->capture_default_str();
    datagen->add_option("--persons", dg.persons)->capture_default_str();
    datagen->add_option("--out", dg.out, "output directory")->required();
    datagen->add_option("--cutoff-fraction", dg.cutoff_fraction)->capture_default_str();
    datagen->add_option("--t-safe-secs", dg.t_safe_secs)->capture_default_str();
    datagen->add_option("--moderator-policy", dg.policy, "delete or reassign")->capture_default_str();

    ParamgenArgs pg;
    auto* paramgen = app.add_subcommand("paramgen", "curate per-day query parameters");
    paramgen->add_option("--graph", pg.graph, "data set directory written by datagen")->required();
    paramgen->add_option("--out", pg.out, "output directory")->required();
    paramgen->add_option("--k", pg.k, "distance of reachable path pairs")->capture_default_str();
    paramgen->add_option("--per-day", pg.per_day)->capture_default_str();
    paramgen->add_option("--min-group-size", pg.min_group_size)->capture_default_str();
    paramgen->add_option("--seed", pg.seed)->capture_default_str();
    paramgen->add_option("--threads", pg.threads, "0 = hardware concurrency")->capture_default_str();

    DriverArgs dr;
    auto* driver = app.add_subcommand("driver", "replay the stream with interleaved queries");
    add_driver_options(driver, dr);
    driver->add_option("--stream", dr.stream, "data set directory written by datagen")->required();
    driver->add_option("--params", dr.params, "parameter directory written by paramgen")->required();
    driver->add_option("--report", dr.report, "report file, stdout when omitted");
    driver->add_option("--audit", dr.audit, "commit audit log (benchmark mode)");

    AcidArgs ac;
    auto* acid = app.add_subcommand("acid", "isolation checks");
    acid->add_option("--store", ac.store, "reference, read-latest or split-cascade")->capture_default_str();
    acid->add_option("--scenario", ac.scenario, "all, traversal-anomaly or cascade-atomicity")->capture_default_str();
    acid->add_option("--seed", ac.seed)->capture_default_str();
    acid->add_option("--interleavings", ac.interleavings)->capture_default_str();
    acid->add_option("--report", ac.report, "report file, stdout when omitted");

    DatagenArgs pdg;
    pdg.persons = 200;
    ParamgenArgs ppg;
    DriverArgs pdr;
    pdr.warmup_secs = 0;
    std::string out = "snb-out";
    auto* pipeline = app.add_subcommand("pipeline", "datagen, paramgen, load, benchmark or validate, report");
    pipeline->add_option("--seed", pdg.seed)->capture_default_str();
    pipeline->add_option("--persons", pdg.persons)->capture_default_str();
    pipeline->add_option("--cutoff-fraction", pdg.cutoff_fraction)->capture_default_str();
    pipeline->add_option("--t-safe-secs", pdg.t_safe_secs)->capture_default_str();
    pipeline->add_option("--moderator-policy", pdg.policy)->capture_default_str();
    pipeline->add_option("--k", ppg.k)->capture_default_str();
    pipeline->add_option("--per-day", ppg.per_day)->capture_default_str();
    pipeline->add_option("--param-seed", ppg.seed)->capture_default_str();
    add_driver_options(pipeline, pdr);
    pipeline->add_option("--out", out, "output directory")->capture_default_str();

    std::string stats_dir;
    auto* stats = app.add_subcommand("stats", "data set statistics");
    stats->add_option("--data", stats_dir, "data set directory written by datagen")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*datagen) return run_datagen(dg);
        if (*paramgen) return run_paramgen(pg);
        if (*driver) return run_driver(dr);
        if (*acid) return run_acid_cmd(ac);
        if (*stats) {
            std::cout << emit_stats(stats_dir).to_json().dump(2) << "\n";
            return 0;
        }
        if (*pipeline) {
            PipelineConfig c;
            c.gen.seed = pdg.seed;
            c.gen.num_persons = pdg.persons;
            c.gen.cutoff_fraction = pdg.cutoff_fraction;
            c.gen.t_safe = sim_seconds(pdg.t_safe_secs);
            c.gen.moderator_policy = parse_policy(pdg.policy);
            c.paramgen.k = ppg.k;
            c.paramgen.per_day = ppg.per_day;
            c.paramgen.seed = ppg.seed;
            c.driver = driver_config(pdr, c.gen.t_safe);
            c.out_dir = out;
            const auto report = run_pipeline(c);
            std::cout << report.summary();
            std::cout << "report: " << (c.out_dir / "fdr.json").string() << "\n";
            if (report.validation && report.validation->diffs > 0) return 2;
            if (report.audit_violations > 0) return 2;
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
