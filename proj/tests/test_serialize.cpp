#include "builders.hpp"
#include "oracles.hpp"

#include "snb/errors.hpp"
#include "snb/paramgen.hpp"
#include "snb/serialize.hpp"

#include "doctest.h"

#include <fstream>
#include <sstream>

using namespace snb;
namespace fs = std::filesystem;

namespace {

std::vector<std::string> lines_of(const fs::path& file) {
    std::ifstream in(file);
    std::vector<std::string> out;
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

void write_lines(const fs::path& file, const std::vector<std::string>& lines) {
    std::ofstream out(file);
    for (const auto& l : lines) out << l << "\n";
}

} // namespace

TEST_SUITE("serialize") {

TEST_CASE("round trip") {
    const auto& d = oracle::dataset(200);
    build::TempDir dir("roundtrip");
    serialize(d.split, d.config, dir.path);
    const auto back = deserialize(dir.path);
    CHECK(back.cutoff == d.split.cutoff);
    CHECK(back.deleted_before_cutoff == d.split.deleted_before_cutoff);
    CHECK(back.snapshot == d.split.snapshot);
    CHECK(back.stream == d.split.stream);
    CHECK(read_gen_config(dir.path) == d.config);

    write_temporal_graph(d.graph, dir.path / "temporal");
    CHECK(read_temporal_graph(dir.path / "temporal") == d.graph);
}

TEST_CASE("update json round trip for every op type") {
    const auto& stream = oracle::dataset(500).split.stream;
    std::set<OpType> seen;
    for (const auto& op : stream) {
        seen.insert(op.type);
        CHECK(update_from_json(to_json(op)) == op);
    }
    CHECK(seen.size() >= 12);
}

TEST_CASE("empty graph writes header-only files") {
    GenConfig c;
    c.num_persons = 0;
    const auto g = generate_temporal_graph(c);
    build::TempDir dir("empty");
    serialize(split_at_cutoff(g, c), c, dir.path);
    std::size_t files = 0;
    for (const auto& e : fs::directory_iterator(dir.path / "snapshot")) {
        ++files;
        const auto lines = lines_of(e.path());
        REQUIRE(lines.size() == 1);
        CHECK(lines[0].find("creationDate|deletionDate|") == 0);
    }
    CHECK(files == 6);
    CHECK(fs::file_size(dir.path / "stream.ldjson") == 0);
    const auto back = deserialize(dir.path);
    CHECK(back.snapshot.entity_count() == 0);
    CHECK(back.stream.empty());
}

TEST_CASE("corrupt lines raise ParseError with the line number") {
    const auto& d = oracle::dataset(200);
    build::TempDir dir("corrupt");
    serialize(d.split, d.config, dir.path);

    SUBCASE("csv") {
        const auto file = dir.path / "snapshot" / "knows.csv";
        auto lines = lines_of(file);
        REQUIRE(lines.size() > 5);
        lines[3] = "not|a|valid|row";
        write_lines(file, lines);
        try {
            deserialize(dir.path);
            FAIL("no error");
        } catch (const ParseError& e) {
            CHECK(e.line() == 4);
            CHECK(std::string(e.what()).find("knows.csv") != std::string::npos);
        }
    }
    SUBCASE("bad timestamp") {
        const auto file = dir.path / "snapshot" / "person.csv";
        auto lines = lines_of(file);
        lines[1].replace(0, 4, "20X2");
        write_lines(file, lines);
        try {
            deserialize(dir.path);
            FAIL("no error");
        } catch (const ParseError& e) {
            CHECK(e.line() == 2);
        }
    }
    SUBCASE("stream") {
        const auto file = dir.path / "stream.ldjson";
        auto lines = lines_of(file);
        REQUIRE(lines.size() > 10);
        lines[6] = "{\"op\":\"INS9\"}";
        write_lines(file, lines);
        try {
            deserialize(dir.path);
            FAIL("no error");
        } catch (const ParseError& e) {
            CHECK(e.line() == 7);
        }
    }
    SUBCASE("missing directory") {
        CHECK_THROWS_AS(deserialize(dir.path / "nope"), IoError);
    }
}

TEST_CASE("parameter buckets round trip") {
    const auto& d = oracle::dataset(200);
    build::TempDir dir("params");
    write_parameter_buckets(d.buckets, dir.path);
    CHECK(read_parameter_buckets(dir.path) == d.buckets);
}

TEST_CASE("query params json") {
    const std::vector<QueryInstance> qs{
        {QueryVariant::CR3a, Cr3Params{1, 2, 3, make_instant(2012, 1, 1), 30}},
        {QueryVariant::CR13b, PathParams{4, 5}},
        {QueryVariant::SR2, PersonParam{6}},
        {QueryVariant::SR6, MessageParam{7}},
    };
    for (const auto& q : qs) CHECK(params_from_json(q.variant, to_json(q.params)) == q.params);
    for (auto v : kAllVariants) CHECK(parse_variant(variant_name(v)) == v);
}

} // TEST_SUITE
