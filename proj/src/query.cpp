#include "snb/query.hpp"

#include <cmath>
#include <stdexcept>

namespace snb {

using nlohmann::json;

namespace {
constexpr std::string_view kNames[] = {"CR3a", "CR3b", "CR13a", "CR13b", "CR14a", "CR14b", "SR2", "SR6"};
}

std::string_view variant_name(QueryVariant v) { return kNames[static_cast<std::size_t>(v)]; }

QueryVariant parse_variant(std::string_view name) {
    for (std::size_t i = 0; i < std::size(kNames); ++i)
        if (kNames[i] == name) return static_cast<QueryVariant>(i);
    throw std::invalid_argument("unknown query variant '" + std::string(name) + "'");
}

std::int64_t interaction_weight(std::int64_t n) {
    const long w = std::lround(40.0 - std::sqrt(static_cast<double>(n)));
    return std::max<std::int64_t>(w, 1);
}

bool results_equivalent(QueryVariant variant, const QueryResult& a, const QueryResult& b) {
    if (a.index() != b.index()) return false;
    if (variant == QueryVariant::CR14a || variant == QueryVariant::CR14b) {
        const auto& pa = std::get<CheapestPath>(a);
        const auto& pb = std::get<CheapestPath>(b);
        return pa.weight == pb.weight && pa.nodes.empty() == pb.nodes.empty() &&
               (pa.nodes.empty() || (pa.nodes.front() == pb.nodes.front() && pa.nodes.back() == pb.nodes.back()));
    }
    return a == b;
}

json to_json(const QueryParams& params) {
    return std::visit(
        [](const auto& p) -> json {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, Cr3Params>)
                return {{"personId", p.person},
                        {"countryXId", p.country_x},
                        {"countryYId", p.country_y},
                        {"startDate", to_iso(p.start_date)},
                        {"durationDays", p.duration_days}};
            else if constexpr (std::is_same_v<T, PathParams>)
                return {{"person1Id", p.person1}, {"person2Id", p.person2}};
            else if constexpr (std::is_same_v<T, PersonParam>)
                return {{"personId", p.person}};
            else
                return {{"messageId", p.message}};
        },
        params);
}

QueryParams params_from_json(QueryVariant variant, const json& j) {
    switch (variant) {
    case QueryVariant::CR3a:
    case QueryVariant::CR3b:
        return Cr3Params{j.at("personId").get<EntityId>(), j.at("countryXId").get<EntityId>(),
                         j.at("countryYId").get<EntityId>(), parse_iso(j.at("startDate").get<std::string>()),
                         j.at("durationDays").get<int>()};
    case QueryVariant::SR2: return PersonParam{j.at("personId").get<EntityId>()};
    case QueryVariant::SR6: return MessageParam{j.at("messageId").get<EntityId>()};
    default: return PathParams{j.at("person1Id").get<EntityId>(), j.at("person2Id").get<EntityId>()};
    }
}

json to_json(const QueryResult& result) {
    return std::visit(
        [](const auto& r) -> json {
            using T = std::decay_t<decltype(r)>;
            if constexpr (std::is_same_v<T, std::vector<Cr3Row>>) {
                json rows = json::array();
                for (const auto& row : r)
                    rows.push_back({{"personId", row.person}, {"xCount", row.x_count}, {"yCount", row.y_count}});
                return rows;
            } else if constexpr (std::is_same_v<T, PathLength>) {
                return {{"shortestPathLength", r.hops}};
            } else if constexpr (std::is_same_v<T, CheapestPath>) {
                return {{"personIdsInPath", r.nodes}, {"pathWeight", r.weight}};
            } else if constexpr (std::is_same_v<T, std::vector<Sr2Row>>) {
                json rows = json::array();
                for (const auto& row : r)
                    rows.push_back({{"messageId", row.message},
                                    {"messageCreationDate", to_iso(row.creation)},
                                    {"originalPostId", row.root_post},
                                    {"originalPostAuthorId", row.root_author}});
                return rows;
            } else {
                return {{"forumId", r.forum},
                        {"moderatorId", r.moderator ? json(*r.moderator) : json(nullptr)}};
            }
        },
        result);
}

} // namespace snb
