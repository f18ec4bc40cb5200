#include "snb/serialize.hpp"

#include "snb/errors.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace snb {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// ---- CSV primitives -------------------------------------------------------------------------

std::ofstream open_out(const fs::path& file) {
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + file.string());
    return out;
}

std::ifstream open_in(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw IoError("cannot read " + file.string());
    return in;
}

std::string opt_time(const std::optional<SimInstant>& t) { return t ? to_iso(*t) : std::string(); }

std::string opt_id(const std::optional<EntityId>& id) { return id ? std::to_string(*id) : std::string(); }

std::string id_list(const std::vector<EntityId>& ids) {
    std::string s;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (i) s += ';';
        s += std::to_string(ids[i]);
    }
    return s;
}

template <typename... Cols>
void row(std::ostream& out, const Cols&... cols) {
    bool first = true;
    ((out << (first ? "" : "|") << cols, first = false), ...);
    out << '\n';
}

class CsvReader {
public:
    CsvReader(const fs::path& file, std::string_view expected_header)
        : in_(open_in(file)), source_(file.string()) {
        std::string header;
        if (!std::getline(in_, header)) throw ParseError(source_, 1, "missing header");
        line_ = 1;
        if (header != expected_header) throw ParseError(source_, 1, "unexpected header '" + header + "'");
        columns_ = static_cast<std::size_t>(std::count(expected_header.begin(), expected_header.end(), '|')) + 1;
    }

    bool next() {
        std::string line;
        if (!std::getline(in_, line)) return false;
        ++line_;
        fields_.clear();
        std::size_t start = 0;
        for (;;) {
            const auto bar = line.find('|', start);
            fields_.push_back(line.substr(start, bar - start));
            if (bar == std::string::npos) break;
            start = bar + 1;
        }
        if (fields_.size() != columns_)
            fail("expected " + std::to_string(columns_) + " columns, found " + std::to_string(fields_.size()));
        return true;
    }

    [[noreturn]] void fail(const std::string& what) const { throw ParseError(source_, line_, what); }

    const std::string& str(std::size_t i) const { return fields_[i]; }

    EntityId id(std::size_t i) const {
        EntityId v = 0;
        const auto& s = fields_[i];
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc{} || p != s.data() + s.size() || s.empty()) fail("bad integer '" + s + "' in column " + std::to_string(i + 1));
        return v;
    }

    std::optional<EntityId> opt_id(std::size_t i) const {
        if (fields_[i].empty()) return std::nullopt;
        return id(i);
    }

    std::vector<EntityId> ids(std::size_t i) const {
        std::vector<EntityId> out;
        const auto& s = fields_[i];
        std::size_t start = 0;
        while (start < s.size()) {
            auto semi = s.find(';', start);
            if (semi == std::string::npos) semi = s.size();
            EntityId v = 0;
            auto [p, ec] = std::from_chars(s.data() + start, s.data() + semi, v);
            if (ec != std::errc{} || p != s.data() + semi) fail("bad id list '" + s + "'");
            out.push_back(v);
            start = semi + 1;
        }
        return out;
    }

    SimInstant time(std::size_t i) const {
        try {
            return parse_iso(fields_[i]);
        } catch (const std::invalid_argument& e) {
            fail(e.what());
        }
    }

    Lifecycle lifecycle() const {
        Lifecycle l{time(0), std::nullopt};
        if (!fields_[1].empty()) l.deletion = time(1);
        return l;
    }

private:
    std::ifstream in_;
    std::string source_;
    std::size_t line_ = 0;
    std::size_t columns_ = 0;
    std::vector<std::string> fields_;
};

constexpr std::string_view kPersonHeader =
    "creationDate|deletionDate|id|firstName|lastName|countryId|universityId|tagInterests";
constexpr std::string_view kKnowsHeader = "creationDate|deletionDate|person1Id|person2Id";
constexpr std::string_view kForumHeader = "creationDate|deletionDate|id|moderatorPersonId";
constexpr std::string_view kMemberHeader = "creationDate|deletionDate|forumId|personId";
constexpr std::string_view kMessageHeader =
    "creationDate|deletionDate|id|kind|creatorPersonId|containerForumId|replyToMessageId|countryId|tagIds|rootPostId";
constexpr std::string_view kLikesHeader = "creationDate|deletionDate|personId|messageId";
constexpr std::string_view kRootsHeader = "opType|first|second|at";

} // namespace

void write_entity_csvs(const TemporalGraph& g, const fs::path& dir, bool with_deletion_roots) {
    fs::create_directories(dir);
    {
        auto out = open_out(dir / "person.csv");
        out << kPersonHeader << '\n';
        for (const auto& p : g.persons)
            row(out, to_iso(p.lifecycle.creation), opt_time(p.lifecycle.deletion), p.id, p.first_name,
                p.last_name, p.country_id, opt_id(p.university_id), id_list(p.tag_interests));
    }
    {
        auto out = open_out(dir / "knows.csv");
        out << kKnowsHeader << '\n';
        for (const auto& k : g.knows)
            row(out, to_iso(k.lifecycle.creation), opt_time(k.lifecycle.deletion), k.person1_id, k.person2_id);
    }
    {
        auto out = open_out(dir / "forum.csv");
        out << kForumHeader << '\n';
        for (const auto& f : g.forums)
            row(out, to_iso(f.lifecycle.creation), opt_time(f.lifecycle.deletion), f.id, f.moderator_person_id);
    }
    {
        auto out = open_out(dir / "has_member.csv");
        out << kMemberHeader << '\n';
        for (const auto& hm : g.memberships)
            row(out, to_iso(hm.lifecycle.creation), opt_time(hm.lifecycle.deletion), hm.forum_id, hm.person_id);
    }
    {
        auto out = open_out(dir / "message.csv");
        out << kMessageHeader << '\n';
        for (const auto& m : g.messages)
            row(out, to_iso(m.lifecycle.creation), opt_time(m.lifecycle.deletion), m.id,
                m.is_post() ? "Post" : "Comment", m.creator_person_id, opt_id(m.container_forum_id),
                opt_id(m.reply_to_message_id), m.country_id, id_list(m.tag_ids), m.root_post_id);
    }
    {
        auto out = open_out(dir / "likes.csv");
        out << kLikesHeader << '\n';
        for (const auto& l : g.likes)
            row(out, to_iso(l.lifecycle.creation), opt_time(l.lifecycle.deletion), l.person_id, l.message_id);
    }
    if (with_deletion_roots) {
        auto out = open_out(dir / "deletion_roots.csv");
        out << kRootsHeader << '\n';
        for (const auto& r : g.deletion_roots) row(out, op_name(r.type), r.first, r.second, to_iso(r.at));
    }
}

TemporalGraph read_entity_csvs(const fs::path& dir, bool with_deletion_roots) {
    TemporalGraph g;
    {
        CsvReader r(dir / "person.csv", kPersonHeader);
        while (r.next())
            g.persons.push_back({r.id(2), r.str(3), r.str(4), r.id(5), r.opt_id(6), r.ids(7), r.lifecycle()});
    }
    {
        CsvReader r(dir / "knows.csv", kKnowsHeader);
        while (r.next()) g.knows.push_back({r.id(2), r.id(3), r.lifecycle()});
    }
    {
        CsvReader r(dir / "forum.csv", kForumHeader);
        while (r.next()) g.forums.push_back({r.id(2), r.id(3), r.lifecycle()});
    }
    {
        CsvReader r(dir / "has_member.csv", kMemberHeader);
        while (r.next()) g.memberships.push_back({r.id(2), r.id(3), r.lifecycle()});
    }
    {
        CsvReader r(dir / "message.csv", kMessageHeader);
        while (r.next()) {
            Message m;
            m.lifecycle = r.lifecycle();
            m.id = r.id(2);
            if (r.str(3) == "Post") m.kind = MessageKind::Post;
            else if (r.str(3) == "Comment") m.kind = MessageKind::Comment;
            else r.fail("bad message kind '" + r.str(3) + "'");
            m.creator_person_id = r.id(4);
            m.container_forum_id = r.opt_id(5);
            m.reply_to_message_id = r.opt_id(6);
            m.country_id = r.id(7);
            m.tag_ids = r.ids(8);
            m.root_post_id = r.id(9);
            g.messages.push_back(std::move(m));
        }
    }
    {
        CsvReader r(dir / "likes.csv", kLikesHeader);
        while (r.next()) g.likes.push_back({r.id(2), r.id(3), r.lifecycle()});
    }
    if (with_deletion_roots) {
        CsvReader r(dir / "deletion_roots.csv", kRootsHeader);
        while (r.next()) {
            DeletionRoot root;
            try {
                root.type = parse_op_name(r.str(0));
            } catch (const std::invalid_argument& e) {
                r.fail(e.what());
            }
            root.first = r.id(1);
            root.second = r.id(2);
            root.at = r.time(3);
            g.deletion_roots.push_back(root);
        }
    }
    return g;
}

// ---- update stream --------------------------------------------------------------------------

namespace {

json opt_json(const std::optional<EntityId>& v) { return v ? json(*v) : json(nullptr); }

std::optional<EntityId> opt_from(const json& j, const char* key) {
    const auto& v = j.at(key);
    if (v.is_null()) return std::nullopt;
    return v.get<EntityId>();
}

json payload_json(const Payload& p) {
    return std::visit(
        [](const auto& e) -> json {
            using T = std::decay_t<decltype(e)>;
            json j;
            j["creationDate"] = to_iso(e.lifecycle.creation);
            if constexpr (std::is_same_v<T, Person>) {
                j["id"] = e.id;
                j["firstName"] = e.first_name;
                j["lastName"] = e.last_name;
                j["countryId"] = e.country_id;
                j["universityId"] = opt_json(e.university_id);
                j["tagInterests"] = e.tag_interests;
            } else if constexpr (std::is_same_v<T, Forum>) {
                j["id"] = e.id;
                j["moderatorPersonId"] = e.moderator_person_id;
            } else if constexpr (std::is_same_v<T, Message>) {
                j["id"] = e.id;
                j["kind"] = e.is_post() ? "Post" : "Comment";
                j["creatorPersonId"] = e.creator_person_id;
                j["containerForumId"] = opt_json(e.container_forum_id);
                j["replyToMessageId"] = opt_json(e.reply_to_message_id);
                j["countryId"] = e.country_id;
                j["tagIds"] = e.tag_ids;
                j["rootPostId"] = e.root_post_id;
            } else if constexpr (std::is_same_v<T, KnowsEdge>) {
                j["person1Id"] = e.person1_id;
                j["person2Id"] = e.person2_id;
            } else if constexpr (std::is_same_v<T, LikesEdge>) {
                j["personId"] = e.person_id;
                j["messageId"] = e.message_id;
            } else {
                j["forumId"] = e.forum_id;
                j["personId"] = e.person_id;
            }
            return j;
        },
        p);
}

Payload payload_from(OpType type, const json& j) {
    Lifecycle life{parse_iso(j.at("creationDate").get<std::string>()), std::nullopt};
    switch (op_number(type)) {
    case 1:
        return Person{j.at("id").get<EntityId>(), j.at("firstName").get<std::string>(),
                      j.at("lastName").get<std::string>(), j.at("countryId").get<EntityId>(),
                      opt_from(j, "universityId"), j.at("tagInterests").get<std::vector<EntityId>>(), life};
    case 2:
    case 3: return LikesEdge{j.at("personId").get<EntityId>(), j.at("messageId").get<EntityId>(), life};
    case 4: return Forum{j.at("id").get<EntityId>(), j.at("moderatorPersonId").get<EntityId>(), life};
    case 5: return HasMemberEdge{j.at("forumId").get<EntityId>(), j.at("personId").get<EntityId>(), life};
    case 6:
    case 7: {
        Message m;
        m.id = j.at("id").get<EntityId>();
        const auto kind = j.at("kind").get<std::string>();
        if (kind != "Post" && kind != "Comment") throw std::invalid_argument("bad message kind '" + kind + "'");
        m.kind = kind == "Post" ? MessageKind::Post : MessageKind::Comment;
        m.creator_person_id = j.at("creatorPersonId").get<EntityId>();
        m.container_forum_id = opt_from(j, "containerForumId");
        m.reply_to_message_id = opt_from(j, "replyToMessageId");
        m.country_id = j.at("countryId").get<EntityId>();
        m.tag_ids = j.at("tagIds").get<std::vector<EntityId>>();
        m.root_post_id = j.at("rootPostId").get<EntityId>();
        m.lifecycle = life;
        return m;
    }
    default: {
        const auto a = j.at("person1Id").get<EntityId>(), b = j.at("person2Id").get<EntityId>();
        return KnowsEdge{a, b, life};
    }
    }
}

} // namespace

json to_json(const UpdateOperation& op) {
    return json{{"op", op_name(op.type)},
                {"scheduled", to_iso(op.scheduled_time)},
                {"dependency", to_iso(op.dependency_time)},
                {"payload", payload_json(op.payload)}};
}

UpdateOperation update_from_json(const json& j) {
    UpdateOperation op;
    op.type = parse_op_name(j.at("op").get<std::string>());
    op.scheduled_time = parse_iso(j.at("scheduled").get<std::string>());
    op.dependency_time = parse_iso(j.at("dependency").get<std::string>());
    op.payload = payload_from(op.type, j.at("payload"));
    if (!payload_matches(op.type, op.payload))
        throw std::invalid_argument("payload does not match " + op_name(op.type));
    return op;
}

void write_stream(std::span<const UpdateOperation> stream, const fs::path& file) {
    if (file.has_parent_path()) fs::create_directories(file.parent_path());
    auto out = open_out(file);
    for (const auto& op : stream) out << to_json(op).dump() << '\n';
}

std::vector<UpdateOperation> read_stream(const fs::path& file) {
    auto in = open_in(file);
    std::vector<UpdateOperation> ops;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (line.empty()) continue;
        try {
            ops.push_back(update_from_json(json::parse(line)));
        } catch (const std::exception& e) {
            throw ParseError(file.string(), n, e.what());
        }
    }
    return ops;
}

// ---- config & data set ----------------------------------------------------------------------

json to_json(const GenConfig& c) {
    return json{{"seed", c.seed},
                {"numPersons", c.num_persons},
                {"simulationStart", to_iso(c.simulation_start)},
                {"simulationEnd", to_iso(c.simulation_end)},
                {"cutoffFraction", c.cutoff_fraction},
                {"tSafeMillis", c.t_safe.millis},
                {"degreeExponent", c.degree_exponent},
                {"homophilyWeight", c.homophily_weight},
                {"flashmobCount", c.flashmob_count},
                {"personDeletionRate", c.person_deletion_rate},
                {"contentDeletionRate", c.content_deletion_rate},
                {"postsPerMembership", c.posts_per_membership},
                {"moderatorPolicy", std::string(to_string(c.moderator_policy))}};
}

GenConfig gen_config_from_json(const json& j) {
    GenConfig c;
    c.seed = j.value("seed", c.seed);
    c.num_persons = j.value("numPersons", c.num_persons);
    if (j.contains("simulationStart")) c.simulation_start = parse_iso(j.at("simulationStart").get<std::string>());
    if (j.contains("simulationEnd")) c.simulation_end = parse_iso(j.at("simulationEnd").get<std::string>());
    c.cutoff_fraction = j.value("cutoffFraction", c.cutoff_fraction);
    c.t_safe.millis = j.value("tSafeMillis", c.t_safe.millis);
    c.degree_exponent = j.value("degreeExponent", c.degree_exponent);
    c.homophily_weight = j.value("homophilyWeight", c.homophily_weight);
    c.flashmob_count = j.value("flashmobCount", c.flashmob_count);
    c.person_deletion_rate = j.value("personDeletionRate", c.person_deletion_rate);
    c.content_deletion_rate = j.value("contentDeletionRate", c.content_deletion_rate);
    c.posts_per_membership = j.value("postsPerMembership", c.posts_per_membership);
    if (j.contains("moderatorPolicy"))
        c.moderator_policy = parse_moderator_policy(j.at("moderatorPolicy").get<std::string>());
    return c;
}

void serialize(const SnapshotAndStream& data, const GenConfig& config, const fs::path& dir) {
    fs::create_directories(dir);
    {
        json j{{"generator", to_json(config)},
               {"cutoff", to_iso(data.cutoff)},
               {"deletedBeforeCutoff", data.deleted_before_cutoff}};
        auto out = open_out(dir / "config.json");
        out << j.dump(2) << '\n';
    }
    write_entity_csvs(data.snapshot, dir / "snapshot", false);
    write_stream(data.stream, dir / "stream.ldjson");
}

namespace {

json read_config_json(const fs::path& dir) {
    auto in = open_in(dir / "config.json");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError((dir / "config.json").string(), 1, e.what());
    }
}

} // namespace

GenConfig read_gen_config(const fs::path& dir) { return gen_config_from_json(read_config_json(dir).at("generator")); }

SnapshotAndStream deserialize(const fs::path& dir) {
    const json cfg = read_config_json(dir);
    SnapshotAndStream data;
    data.cutoff = parse_iso(cfg.at("cutoff").get<std::string>());
    data.deleted_before_cutoff = cfg.at("deletedBeforeCutoff").get<std::size_t>();
    data.snapshot = read_entity_csvs(dir / "snapshot", false);
    data.stream = read_stream(dir / "stream.ldjson");
    return data;
}

void write_temporal_graph(const TemporalGraph& graph, const fs::path& dir) {
    write_entity_csvs(graph, dir / "temporal", true);
}

TemporalGraph read_temporal_graph(const fs::path& dir) { return read_entity_csvs(dir / "temporal", true); }

} // namespace snb
