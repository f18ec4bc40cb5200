#pragma once

#include "snb/model.hpp"

#include "json.hpp"

#include <optional>
#include <string_view>
#include <variant>
#include <vector>

namespace snb {

enum class QueryVariant : std::uint8_t { CR3a, CR3b, CR13a, CR13b, CR14a, CR14b, SR2, SR6 };

inline constexpr QueryVariant kAllVariants[] = {QueryVariant::CR3a,  QueryVariant::CR3b,  QueryVariant::CR13a,
                                                QueryVariant::CR13b, QueryVariant::CR14a, QueryVariant::CR14b,
                                                QueryVariant::SR2,   QueryVariant::SR6};
inline constexpr QueryVariant kComplexVariants[] = {QueryVariant::CR3a,  QueryVariant::CR3b,  QueryVariant::CR13a,
                                                    QueryVariant::CR13b, QueryVariant::CR14a, QueryVariant::CR14b};

std::string_view variant_name(QueryVariant v);
QueryVariant parse_variant(std::string_view name);
constexpr bool is_complex(QueryVariant v) { return v < QueryVariant::SR2; }

struct Cr3Params {
    EntityId person = 0;
    EntityId country_x = 0;
    EntityId country_y = 0;
    SimInstant start_date;
    int duration_days = 0;
    bool operator==(const Cr3Params&) const = default;
};

struct PathParams {
    EntityId person1 = 0;
    EntityId person2 = 0;
    bool operator==(const PathParams&) const = default;
};

struct PersonParam {
    EntityId person = 0;
    bool operator==(const PersonParam&) const = default;
};

struct MessageParam {
    EntityId message = 0;
    bool operator==(const MessageParam&) const = default;
};

using QueryParams = std::variant<Cr3Params, PathParams, PersonParam, MessageParam>;

struct QueryInstance {
    QueryVariant variant = QueryVariant::SR2;
    QueryParams params;
    bool operator==(const QueryInstance&) const = default;
};

// ---- results --------------------------------------------------------------------------------

struct Cr3Row {
    EntityId person = 0;
    std::int64_t x_count = 0;
    std::int64_t y_count = 0;
    bool operator==(const Cr3Row&) const = default;
};

/// Hop count; -1 when unreachable.
struct PathLength {
    int hops = -1;
    bool operator==(const PathLength&) const = default;
};

/// One cheapest path; empty nodes and weight -1 when unreachable.
struct CheapestPath {
    std::vector<EntityId> nodes;
    std::int64_t weight = -1;
    bool operator==(const CheapestPath&) const = default;
};

struct Sr2Row {
    EntityId message = 0;
    SimInstant creation;
    EntityId root_post = 0;
    EntityId root_author = 0;
    bool operator==(const Sr2Row&) const = default;
};

struct Sr6Result {
    EntityId forum = 0;
    std::optional<EntityId> moderator;
    bool operator==(const Sr6Result&) const = default;
};

using QueryResult = std::variant<std::vector<Cr3Row>, PathLength, CheapestPath, std::vector<Sr2Row>, Sr6Result>;

/// Result equality as the query defines it: CR14 admits any cheapest path, so only the total
/// weight (and reachability) is compared; everything else has a defined order and is compared exactly.
bool results_equivalent(QueryVariant variant, const QueryResult& a, const QueryResult& b);

/// Weight of a knows edge in the interaction subgraph: max(round(40 - sqrt(n)), 1), half away from zero.
std::int64_t interaction_weight(std::int64_t num_interactions);

nlohmann::json to_json(const QueryParams& params);
QueryParams params_from_json(QueryVariant variant, const nlohmann::json& j);
nlohmann::json to_json(const QueryResult& result);

} // namespace snb
