#pragma once

#include "snb/datagen.hpp"
#include "snb/driver.hpp"
#include "snb/paramgen.hpp"

#include "json.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>

namespace snb {

/// Counts in the categories of the paper's data-set table, at generated scale.
/// Nodes are persons, forums and messages of the initial snapshot; edges are knows, hasMember and
/// likes plus the implicit hasModerator, hasCreator, containerOf and replyOf links.
struct DatasetStats {
    std::uint64_t nodes = 0;
    std::uint64_t edges = 0;
    std::uint64_t persons = 0;
    std::uint64_t knows = 0;
    std::uint64_t forums = 0;
    std::uint64_t memberships = 0;
    std::uint64_t messages = 0;
    std::uint64_t likes = 0;
    std::uint64_t insert_ops = 0;
    std::uint64_t delete_ops = 0;
    std::map<std::string, std::uint64_t> ops_per_type; ///< INS1..INS8, DEL1..DEL8
    double delete_insert_ratio = 0;                    ///< 0 without inserts

    nlohmann::json to_json() const;
    bool operator==(const DatasetStats&) const = default;
};

DatasetStats dataset_stats(const TemporalGraph& snapshot, const std::vector<UpdateOperation>& stream);
/// Statistics of a data set directory written by `datagen` (snapshot/ and stream.ldjson).
DatasetStats emit_stats(const std::filesystem::path& dataset_dir);

/// Writes config.json, snapshot/, stream.ldjson and temporal/.
void write_dataset(const TemporalGraph& graph, const SnapshotAndStream& split, const GenConfig& config,
                   const std::filesystem::path& dir);

/// First and last simulation day of the update stream.
std::pair<SimDay, SimDay> stream_days(const GenConfig& config);

struct PipelineConfig {
    GenConfig gen;
    ParamGenOptions paramgen;
    DriverConfig driver;
    std::filesystem::path out_dir = "snb-out";

    /// Throws ConfigInvalid naming the field.
    void validate() const;
    nlohmann::json to_json() const;
};

struct Environment {
    std::string compiler;
    std::string build_type;
    std::string os;
    unsigned hardware_threads = 0;

    static Environment current();
    nlohmann::json to_json() const;
};

struct FdrReport {
    nlohmann::json config;
    DatasetStats stats;
    std::optional<RunReport> run;                ///< benchmark mode
    std::size_t audit_violations = 0;            ///< benchmark mode
    std::optional<ValidationReport> validation; ///< validate mode
    std::map<std::string, double> stage_seconds;
    Environment environment;

    nlohmann::json to_json() const;
    std::string summary() const;
};

/// A pipeline stage failed; what() starts with the stage name.
class StageFailed : public Error {
public:
    StageFailed(std::string stage, const std::string& cause)
        : Error(stage + ": " + cause), stage_(std::move(stage)) {}
    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

/// datagen -> paramgen -> load -> benchmark or validate -> report. Writes everything under
/// out_dir (data/, params/, audit.ldjson, fdr.json, summary.txt). Throws StageFailed.
FdrReport run_pipeline(const PipelineConfig& config);

} // namespace snb
