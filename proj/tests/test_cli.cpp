#include "nhssh/cli.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace nhssh;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "nhssh_cli_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

struct Run {
    int code = 0;
    std::string out;
    std::string err;
};

Run cli(const std::vector<std::string>& args) {
    std::ostringstream out;
    std::ostringstream err;
    Run r;
    r.code = run_cli(args, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

const char* kRow3 = R"({"circuit": {"r1": 1.45, "r2": 0.14, "c1": 0.22, "c2": 0.54, "l": 1.11, "n_cells": 20,
                        "boundary": "periodic"}, "bands": {"n_k": 128}, "winding": {"n_k": 256}})";

bool same_tree(const fs::path& a, const fs::path& b) {
    std::vector<std::string> names;
    for (const auto& e : fs::directory_iterator(a)) names.push_back(e.path().filename().string());
    std::size_t count = 0;
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(b)) ++count;
    if (count != names.size()) return false;
    for (const auto& n : names) {
        if (slurp(a / n) != slurp(b / n)) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("missing inductance is a config error naming the key") {
    const auto dir = scratch("missing");
    write(dir / "c.json", R"({"circuit": {"r1": 1, "r2": 1, "c1": 1, "c2": 1}})");
    const auto r = cli({"bands", "--config", (dir / "c.json").string(), "--out", (dir / "o").string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("circuit.l") != std::string::npos);
    CHECK(r.err.find("bands") != std::string::npos);
}

TEST_CASE("unknown keys and bad values are config errors") {
    const auto dir = scratch("bad");
    write(dir / "typo.json", R"({"circuit": {"r1": 1, "r2": 1, "c1": 1, "c2": 1, "l": 1, "nk": 3}})");
    auto r = cli({"bands", "--config", (dir / "typo.json").string(), "--out", (dir / "o").string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("circuit.nk") != std::string::npos);
    write(dir / "neg.json", R"({"circuit": {"r1": 1, "r2": 1, "c1": -1, "c2": 1, "l": 1}})");
    r = cli({"bands", "--config", (dir / "neg.json").string(), "--out", (dir / "o").string()});
    CHECK(r.code == 2);
    CHECK(cli({"bands"}).code == 2);
    CHECK(cli({"bands", "--format", "xml"}).code == 2);
}

TEST_CASE("unreadable config and unwritable output are I/O errors") {
    const auto dir = scratch("io");
    CHECK(cli({"bands", "--config", (dir / "absent.json").string()}).code == 4);
    write(dir / "c.json", kRow3);
    write(dir / "blocker", "");
    CHECK(cli({"bands", "--config", (dir / "c.json").string(), "--out", (dir / "blocker" / "x").string()}).code == 4);
}

TEST_CASE("numerical failures exit with 3") {
    const auto dir = scratch("numeric");
    // A step at the invariant bound fails the step-doubling check.
    write(dir / "c.json", R"({"circuit": {"r1": 0.4, "r2": 0.9, "c1": 0.5, "c2": 1.1, "l": 1.3, "n_cells": 3},
                              "transient": {"drive_frequency": 31.41592653589793, "decay": 0.1, "dt": 0.01,
                                            "observe_periods": 4}})");
    const auto r = cli({"transient", "--config", (dir / "c.json").string(), "--out", (dir / "o").string()});
    CHECK(r.code == 3);
    CHECK(r.err.find("StepRejected") != std::string::npos);
}

TEST_CASE("bands run twice gives byte-identical files") {
    const auto dir = scratch("determinism");
    write(dir / "c.json", kRow3);
    REQUIRE(cli({"bands", "--config", (dir / "c.json").string(), "--out", (dir / "a").string()}).code == 0);
    REQUIRE(cli({"bands", "--config", (dir / "c.json").string(), "--out", (dir / "b").string(), "--threads", "3"}).code == 0);
    CHECK(fs::exists(dir / "a" / "bands.csv"));
    CHECK(fs::exists(dir / "a" / "lambda.csv"));
    CHECK(same_tree(dir / "a", dir / "b"));
}

TEST_CASE("resolved config echo reproduces the run") {
    const auto dir = scratch("echo");
    write(dir / "c.json", kRow3);
    REQUIRE(cli({"winding", "--config", (dir / "c.json").string(), "--out", (dir / "a").string()}).code == 0);
    REQUIRE(cli({"--config", (dir / "a" / "config.resolved.json").string(), "--out", (dir / "b").string()}).code == 0);
    CHECK(same_tree(dir / "a", dir / "b"));
    CHECK(slurp(dir / "a" / "winding.json").find("\"multiset\": [\n    0,\n    0,\n    1,\n    1\n  ]") !=
          std::string::npos);
}

TEST_CASE("curves can be written as json") {
    const auto dir = scratch("json");
    write(dir / "c.json", kRow3);
    REQUIRE(cli({"bands", "--config", (dir / "c.json").string(), "--out", dir.string(), "--format", "json"}).code == 0);
    CHECK(fs::exists(dir / "bands.json"));
    CHECK_FALSE(fs::exists(dir / "bands.csv"));
}

TEST_CASE("lossless C1 > C2 winding is zero on every branch") {
    const auto dir = scratch("lossless");
    write(dir / "c.json", R"({"circuit": {"r1": 0, "r2": 0, "c1": 1.2, "c2": 0.4, "l": 1, "boundary": "periodic"}})");
    REQUIRE(cli({"winding", "--config", (dir / "c.json").string(), "--out", dir.string()}).code == 0);
    CHECK(slurp(dir / "winding.json").find("\"multiset\": [\n    0,\n    0,\n    0,\n    0\n  ]") != std::string::npos);
}

TEST_CASE("single-point sweep agrees with the winding command") {
    const auto dir = scratch("sweep");
    write(dir / "c.json", R"({"circuit": {"r1": 1.45, "r2": 0.14, "c1": 0.22, "c2": 0.54, "l": 1.11},
                              "sweep": {"skin": false}})");
    REQUIRE(cli({"sweep", "--config", (dir / "c.json").string(), "--out", dir.string()}).code == 0);
    const auto csv = slurp(dir / "sweep.csv");
    CHECK(csv.find(",1,0,0,1,{0;0;1;1},") != std::string::npos);
}

TEST_CASE("sweep output does not depend on the thread count") {
    const auto dir = scratch("sweep_threads");
    write(dir / "c.json", R"({"circuit": {"r1": 1.45, "r2": 0.14, "c1": 0.22, "c2": 0.54, "l": 1.11},
        "sweep": {"ranges": [{"field": "r1", "start": 0.5, "stop": 1.5, "count": 3}], "skin": false}})");
    REQUIRE(cli({"sweep", "--config", (dir / "c.json").string(), "--out", (dir / "one").string(), "--threads", "1"}).code == 0);
    REQUIRE(cli({"sweep", "--config", (dir / "c.json").string(), "--out", (dir / "four").string(), "--threads", "4"}).code == 0);
    CHECK(same_tree(dir / "one", dir / "four"));
}

TEST_CASE("netlist command reports a consistent node count") {
    const auto dir = scratch("netlist");
    write(dir / "c.json", R"({"circuit": {"r1": 0.5, "r2": 1.5, "c1": 0.2, "c2": 0.7, "l": 1.1, "n_cells": 2},
                              "transient": {"drive_frequency": 2.0, "decay": 0.1}})");
    REQUIRE(cli({"netlist", "--config", (dir / "c.json").string(), "--out", dir.string()}).code == 0);
    const auto j = slurp(dir / "netlist.json");
    CHECK(j.find("\"element_cards\": 11") != std::string::npos);
    CHECK(j.find("\"node_count_consistent\": true") != std::string::npos);
}

TEST_CASE("presets are found through the preset directory") {
    const auto dir = scratch("preset");
    const auto r = cli({"--preset", "table1_row3", "--out", dir.string()});
    CHECK(r.code == 0);
    CHECK(fs::exists(dir / "winding.json"));
    CHECK(cli({"--preset", "no_such_preset", "--out", dir.string()}).code == 4);
}
