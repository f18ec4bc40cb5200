#pragma once

#include "snb/datagen.hpp"

#include "json.hpp"

#include <filesystem>
#include <span>

namespace snb {

/// On-disk layout of a generated data set:
///
///   DIR/config.json          generator config, cutoff, pre-cutoff deletion count
///   DIR/snapshot/*.csv       initial snapshot (state at the cutoff)
///   DIR/stream.ldjson        update stream, one operation per line
///   DIR/temporal/*.csv       full temporal graph (plus deletion_roots.csv), used by paramgen
///
/// CSV files are '|'-separated with a header row. Timestamps are ISO-8601 UTC with milliseconds;
/// an empty deletionDate means "never deleted". Multi-valued columns use ';'.
///
///   person.csv      creationDate|deletionDate|id|firstName|lastName|countryId|universityId|tagInterests
///   knows.csv       creationDate|deletionDate|person1Id|person2Id
///   forum.csv       creationDate|deletionDate|id|moderatorPersonId
///   has_member.csv  creationDate|deletionDate|forumId|personId
///   message.csv     creationDate|deletionDate|id|kind|creatorPersonId|containerForumId|replyToMessageId|countryId|tagIds|rootPostId
///   likes.csv       creationDate|deletionDate|personId|messageId
///   deletion_roots.csv  opType|first|second|at

void write_entity_csvs(const TemporalGraph& graph, const std::filesystem::path& dir, bool with_deletion_roots);
TemporalGraph read_entity_csvs(const std::filesystem::path& dir, bool with_deletion_roots);

nlohmann::json to_json(const UpdateOperation& op);
/// Throws std::invalid_argument / nlohmann exceptions on malformed input.
UpdateOperation update_from_json(const nlohmann::json& j);

void write_stream(std::span<const UpdateOperation> stream, const std::filesystem::path& file);
std::vector<UpdateOperation> read_stream(const std::filesystem::path& file);

nlohmann::json to_json(const GenConfig& config);
GenConfig gen_config_from_json(const nlohmann::json& j);

/// Writes config.json, snapshot/ and stream.ldjson.
void serialize(const SnapshotAndStream& data, const GenConfig& config, const std::filesystem::path& dir);
SnapshotAndStream deserialize(const std::filesystem::path& dir);
GenConfig read_gen_config(const std::filesystem::path& dir);

void write_temporal_graph(const TemporalGraph& graph, const std::filesystem::path& dir);
TemporalGraph read_temporal_graph(const std::filesystem::path& dir);

} // namespace snb
