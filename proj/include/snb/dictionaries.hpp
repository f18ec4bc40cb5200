#pragma once

#include "snb/model.hpp"

#include <span>
#include <string_view>

namespace snb::dict {

struct Country {
    EntityId id;
    std::string_view name;
    std::span<const std::string_view> first_names;
    std::span<const std::string_view> last_names;
};

struct University {
    EntityId id;
    EntityId country_id;
    std::string_view name;
};

struct Tag {
    EntityId id;
    std::string_view name;
};

/// Ordered by descending population weight; generators sample with a skew over this order.
std::span<const Country> countries();
std::span<const University> universities();
std::span<const Tag> tags();

const Country* find_country(EntityId id);

} // namespace snb::dict
