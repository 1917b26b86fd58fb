#include "catch_amalgamated.hpp"

#include "quadlattice/io.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace ql;
using nlohmann::json;

namespace {

std::string key_of(const json& j) {
    try {
        parse_config(j);
    } catch (const ConfigError& e) {
        return e.key;
    }
    return "";
}

}  // namespace

TEST_CASE("config keys") {
    CHECK(key_of(json::object()).empty());
    CHECK(key_of({{"contrast", 12.0}, {"radius", 0.3}, {"cutoff", 5}}).empty());
    CHECK(key_of({{"contrst", 12.0}}) == "contrst");
    CHECK(key_of({{"cutoff", 6.5}}) == "cutoff");
    CHECK(key_of({{"delta", "big"}}) == "delta");
    CHECK(key_of({{"radius", 0.7}}) == "radius");
    CHECK(key_of(json::array()) == "<root>");
    const CrystalConfig c = parse_config({{"center_x", 0.01}, {"center_y", -0.02}, {"reg_epsilon", 1e-7}});
    CHECK(c.center[0] == 0.01);
    CHECK(c.center[1] == -0.02);
    CHECK(c.reg_epsilon == 1e-7);
    CHECK(parse_config(config_json(c)).center[1] == -0.02);
}

TEST_CASE("17 significant digits round trip") {
    for (double x : {0.1, 1.0 / 3.0, 376.87416246942206, -2.5e-300, 6.02214076e23}) CHECK(std::stod(fmt(x)) == x);
    CHECK(fmt(0.1) == "0.10000000000000001");
}

TEST_CASE("sha256 test vectors") {
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("csv layout") {
    Csv c({"a", "b"});
    c.comment("note");
    c.row() << 1 << 0.5;
    c.row() << std::string("x") << -2.0;
    CHECK(c.str() == "# note\na,b\n1,0.5\nx,-2\n");
    c.row() << 1;
    CHECK_THROWS(c.str());
}

TEST_CASE("manifest lists every output with its digest, reruns are byte-identical") {
    const auto dir = std::filesystem::temp_directory_path() / "ql_manifest_test";
    std::filesystem::remove_all(dir);
    std::string digest;
    for (int run = 0; run < 2; ++run) {
        RunManifest m(dir, "bands", CrystalConfig{});
        Csv c({"x"});
        c.row() << 1.0 / 7;
        m.write("t.csv", c.str());
        m.finish(0);
        std::ifstream in(dir / "manifest.json");
        const json j = json::parse(in);
        REQUIRE(j["outputs"].size() == 1);
        CHECK(j["outputs"][0]["file"] == "t.csv");
        CHECK(j["command"] == "bands");
        CHECK(j["config"]["cutoff"] == 6);
        std::ifstream f(dir / "t.csv");
        std::stringstream ss;
        ss << f.rdbuf();
        CHECK(j["outputs"][0]["sha256"] == sha256_hex(ss.str()));
        if (run == 0) digest = j["outputs"][0]["sha256"];
        else CHECK(j["outputs"][0]["sha256"] == digest);
    }
    std::filesystem::remove_all(dir);
}
