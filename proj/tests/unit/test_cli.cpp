#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "knotfield/cli.hpp"

using namespace knotfield;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out, err;
};

Run run(std::vector<std::string> args) {
    std::ostringstream o, e;
    int c = run_cli(args, o, e);
    return {c, o.str(), e.str()};
}

fs::path scratch(const std::string& tag) {
    auto p = fs::temp_directory_path() / ("knotfield_cli_" + tag);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_SUITE("cli") {
TEST_CASE("usage errors exit 1") {
    CHECK(run({}).code == kExitUsage);
    CHECK(run({"frobnicate"}).code == kExitUsage);
    CHECK(run({"trace", "5_2", "--format", "xml"}).code == kExitUsage);
    CHECK(run({"catalog", "7_4"}).code == kExitUsage);
    CHECK(run({"build", "5_2", "--a", "abc"}).code == kExitUsage);
}

TEST_CASE("catalog listing") {
    auto r = run({"catalog"});
    CHECK(r.code == kExitOk);
    CHECK(r.out.find("5_2\n") != std::string::npos);
    auto s = run({"catalog", "5_2"});
    CHECK(s.out.find("word: s1^-1 s2 s1^3 s2") != std::string::npos);
    CHECK(s.out.find("alexander: 2t^2-3t+2") != std::string::npos);
}

TEST_CASE("trace exit codes") {
    auto dir = scratch("trace");
    auto ok = run({"trace", "5_2", "--a", "0.4", "--out", dir.string()});
    CHECK(ok.code == kExitOk);
    CHECK(ok.out.find("verdict: pass") != std::string::npos);
    CHECK(fs::exists(dir / "curves.csv"));
    CHECK(fs::exists(dir / "report.txt"));
    auto bad = run({"trace", "5_2", "--a", "0.7", "--out", dir.string()});
    CHECK(bad.code == kExitVerification);
    CHECK(run({"trace", "5_2", "--phi-steps", "100", "--out", dir.string()}).code == kExitUsage);
}

TEST_CASE("outputs are deterministic") {
    auto d1 = scratch("det1"), d2 = scratch("det2");
    for (const auto& d : {d1, d2}) {
        REQUIRE(run({"build", "5_2", "--out", d.string()}).code == kExitOk);
        REQUIRE(run({"trace", "5_2", "--out", d.string(), "--phi-steps", "720"}).code == kExitOk);
        REQUIRE(run({"critical", "5_2", "--out", d.string()}).code == kExitOk);
    }
    int files = 0;
    for (const auto& e : fs::directory_iterator(d1)) {
        ++files;
        CHECK_MESSAGE(slurp(e.path()) == slurp(d2 / e.path().filename()), e.path().filename().string());
    }
    CHECK(files >= 6);
}

TEST_CASE("KNOTFIELD_OUT sets the default output directory") {
    auto d = scratch("env");
    setenv("KNOTFIELD_OUT", d.c_str(), 1);
    auto r = run({"build", "5_2", "--format", "json"});
    unsetenv("KNOTFIELD_OUT");
    CHECK(r.code == kExitOk);
    CHECK(fs::exists(d / "semiholo.json"));
    auto j = nlohmann::json::parse(slurp(d / "cartesian.json"));
    CHECK(j.at("scale") == "8");
    CHECK(j.at("D") == 5);
    CHECK(!j.at("terms").empty());
}

TEST_CASE("csv to json conversion") {
    auto j = nlohmann::json::parse(csv_to_json("a,b,c\n1,2.5,x y\n-3,1e-3,\n"));
    REQUIRE(j.size() == 2);
    CHECK(j[0]["a"].is_number_integer());
    CHECK(j[0]["a"] == 1);
    CHECK(j[0]["b"] == 2.5);
    CHECK(j[0]["c"] == "x y");
    CHECK(j[1]["a"] == -3);
    CHECK(j[1]["b"].is_number_float());
}
}
