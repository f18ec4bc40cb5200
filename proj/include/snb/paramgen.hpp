#pragma once

#include "snb/model.hpp"
#include "snb/query.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace snb {

using FactorKey = std::vector<std::int64_t>;

/// Summary statistics of the temporal graph: one frequency per key.
struct FactorTable {
    std::string name;
    std::vector<std::string> key_columns;
    struct Row {
        FactorKey key;
        std::int64_t frequency = 0;
        bool operator==(const Row&) const = default;
    };
    std::vector<Row> rows; ///< sorted by key

    bool operator==(const FactorTable&) const = default;
    std::optional<std::int64_t> frequency_of(const FactorKey& key) const;
};

/// Keyed by table name: countryPairsNumFriends, personNumFriends, personNumMessages,
/// messageCountPerDay.
using FactorTables = std::map<std::string, FactorTable>;

FactorTables build_factor_tables(const TemporalGraph& graph);

/// Sorts rows by frequency, splits them where adjacent frequencies differ by more than 5% of the
/// frequency range, and returns the contiguous window of at least min_group_size rows (within one
/// split group) with the smallest standard deviation. Ties: larger window, then smaller median,
/// then lower position. Throws NoQualifyingGroup when no group is large enough.
std::vector<FactorKey> select_window(const FactorTable& table, std::size_t min_group_size);

/// Nearest-rank percentile: rows sorted ascending by (frequency, key); returns `count` keys
/// ordered by distance from rank ceil(p * N) (lower position first on equal distance).
std::vector<FactorKey> select_percentile(const FactorTable& table, double p, std::size_t count);

/// The day's sparsest (g1) and densest (g2) friendship graphs over a shared vertex numbering.
/// Vertices are persons alive at some point of the day; in_g1 marks those alive all day.
struct BoundGraphs {
    SimDay day;
    std::vector<EntityId> persons;
    std::unordered_map<EntityId, std::uint32_t> index;
    std::vector<char> in_g1;
    std::vector<std::vector<std::uint32_t>> g1;
    std::vector<std::vector<std::uint32_t>> g2;

    std::size_t g1_edge_count() const;
    std::size_t g2_edge_count() const;
};

BoundGraphs build_bound_graphs(const TemporalGraph& graph, SimDay day);

using PersonPair = std::pair<EntityId, EntityId>;

/// All pairs (first < second) exactly k hops apart in both g1 and g2.
std::vector<PersonPair> reachable_candidates(const BoundGraphs& bound, int k);

/// `count` pairs sampled uniformly (seeded) from reachable_candidates.
/// Throws InsufficientPairs when fewer exist.
std::vector<PersonPair> curate_reachable_pairs(const BoundGraphs& bound, int k, std::size_t count,
                                               std::uint64_t seed);

/// `count` distinct pairs of all-day-alive persons in different connected components of g2.
/// Throws InsufficientPairs when fewer exist (e.g. g2 connected).
std::vector<PersonPair> curate_unreachable_pairs(const BoundGraphs& bound, std::size_t count, std::uint64_t seed);

struct ParamGenOptions {
    int k = 4;
    std::size_t per_day = 10;
    std::size_t min_group_size = 10;
    int cr3_duration_days = 30;
    std::uint64_t seed = 7;
    unsigned threads = 0; ///< 0: hardware concurrency
};

struct ParameterBucket {
    SimDay day;
    std::map<QueryVariant, std::vector<QueryParams>> per_query;
    bool partial = false;
    std::vector<std::string> warnings;

    bool operator==(const ParameterBucket&) const = default;
};

/// One bucket per day in [first_day, last_day]. Every parameter references entities alive for
/// the whole day. Shortfalls are recorded as warnings and mark the bucket partial.
std::vector<ParameterBucket> generate_parameters(const TemporalGraph& graph, SimDay first_day, SimDay last_day,
                                                 const ParamGenOptions& options);

/// DIR/index.json plus one DIR/<YYYY-MM-DD>.ldjson per day with {"variant", "params"} lines.
void write_parameter_buckets(const std::vector<ParameterBucket>& buckets, const std::filesystem::path& dir);
std::vector<ParameterBucket> read_parameter_buckets(const std::filesystem::path& dir);

} // namespace snb
