#include "epsweep/cli.hpp"
#include "epsweep/format.hpp"
#include "epsweep/network_io.hpp"

#include "fixtures.hpp"

#include <doctest.h>

#include <fstream>
#include <sstream>

using namespace epsweep;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

struct Run {
    int code;
    std::string out, err;
};

Run run(cli::RunConfig c) {
    std::ostringstream out, err;
    const int code = cli::run(c, out, err);
    return {code, out.str(), err.str()};
}

cli::RunConfig config(cli::Subcommand s, const fs::path& input, const fs::path& out) {
    cli::RunConfig c;
    c.subcommand = s;
    c.input_path = input;
    c.output_dir = out;
    return c;
}

fs::path write_doc(const fs::path& dir, const std::string& name, const Json& doc) {
    const fs::path p = dir / name;
    std::ofstream(p) << doc.dump(2);
    return p;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("validate reports the worked example") {
    fixtures::TempDir tmp("validate");
    const auto r = run(config(cli::Subcommand::Validate, fixtures::example("five_spring_network.json"), tmp.path));
    CHECK(r.code == 0);
    CHECK(r.out.find("balance: n/a (H given); rank: 1 = q") != std::string::npos);
    CHECK(fs::exists(tmp.path / "validation.json"));
    CHECK(fs::exists(tmp.path / "manifest.json"));
}

TEST_CASE("derive emits the normals") {
    fixtures::TempDir tmp("derive");
    const auto r = run(config(cli::Subcommand::Derive, fixtures::example("five_spring_network.json"), tmp.path));
    REQUIRE(r.code == 0);
    const Json doc = Json::parse(slurp(tmp.path / "derived.json"));
    const std::vector<double> n1{0.375, 0.125, 0.125, 0.375, 0.25};
    const auto& normals = doc.at("normals");
    for (int i : {0, 3})
        for (int j = 0; j < 5; ++j) CHECK(normals[i][j].get<double>() == doctest::Approx(n1[j]));
    CHECK(doc.at("dim_V").get<int>() == 2);
}

TEST_CASE("exit codes follow the error category") {
    fixtures::TempDir tmp("codes");
    SUBCASE("missing file") {
        CHECK(run(config(cli::Subcommand::Validate, tmp.path / "nope.json", tmp.path)).code == 1);
    }
    SUBCASE("syntax error carries a location") {
        const fs::path p = tmp.path / "broken.json";
        std::ofstream(p) << "{\n  \"nodes\": 5,\n  \"springs\": [\n";
        const auto r = run(config(cli::Subcommand::Derive, p, tmp.path));
        CHECK(r.code == 1);
        CHECK(r.err.find("line") != std::string::npos);
    }
    SUBCASE("schema error names the field") {
        Json doc = network_to_json(fixtures::five_spring());
        doc["springs"][2].erase("head");
        const auto r = run(config(cli::Subcommand::Derive, write_doc(tmp.path, "n.json", doc), tmp.path));
        CHECK(r.code == 1);
        CHECK(r.err.find("springs[2].head") != std::string::npos);
    }
    SUBCASE("rank condition") {
        auto net = fixtures::five_spring();
        net.offset = {};
        net.displacement_loadings.push_back(net.displacement_loadings[0]);
        const auto r = run(config(cli::Subcommand::Validate,
                                  write_doc(tmp.path, "n.json", network_to_json(net)), tmp.path));
        CHECK(r.code == 2);
        CHECK(r.err.find("rank") != std::string::npos);
    }
    SUBCASE("safe load") {
        auto net = fixtures::five_spring();
        for (auto& s : net.springs) {
            s.c_minus = -0.1;
            s.c_plus = 0.1;
        }
        const auto r = run(config(cli::Subcommand::Analyze,
                                  write_doc(tmp.path, "n.json", network_to_json(net)), tmp.path));
        CHECK(r.code == 2);
        CHECK(r.err.find("safe load") != std::string::npos);
    }
    SUBCASE("bad flag values") {
        auto c = config(cli::Subcommand::Simulate, fixtures::example("five_spring_network.json"), tmp.path);
        c.dt = -1.0;
        CHECK(run(c).code == 1);
    }
}

TEST_CASE("simulate writes a deterministic table") {
    fixtures::TempDir a("sim_a"), b("sim_b");
    auto c = config(cli::Subcommand::Simulate, fixtures::example("five_spring_network.json"), a.path);
    c.dt = 0.5;
    c.periods = 1;
    c.decimate = 4;
    REQUIRE(run(c).code == 0);
    c.output_dir = b.path;
    REQUIRE(run(c).code == 0);
    const std::string table = slurp(a.path / "trajectory.csv");
    CHECK(table == slurp(b.path / "trajectory.csv"));
    CHECK(slurp(a.path / "manifest.json").find("output") != std::string::npos);
    std::istringstream lines(table);
    std::string head;
    std::getline(lines, head);
    CHECK(head == "t,v1,v2,y1,y2,y3,y4,y5,s1,s2,s3,s4,s5");
    std::string row;
    std::getline(lines, row);
    CHECK(std::count(row.begin(), row.end(), ',') == 12);
}

TEST_CASE("manifests replay to identical outputs") {
    fixtures::TempDir a("rep_a"), b("rep_b");
    auto c = config(cli::Subcommand::Direct, fixtures::example("rectangle.json"), a.path);
    c.dt = 0.05;
    c.periods = 2;
    REQUIRE(run(c).code == 0);
    std::ostringstream out, err;
    REQUIRE(cli::replay(a.path / "manifest.json", out, err, b.path) == 0);
    for (const char* f : {"direct_trajectories.csv", "direct_report.json", "manifest.json"})
        CHECK(slurp(a.path / f) == slurp(b.path / f));
}

TEST_CASE("direct mode on the rectangle reports distinct limit orbits") {
    fixtures::TempDir tmp("direct");
    auto c = config(cli::Subcommand::Direct, fixtures::example("rectangle.json"), tmp.path);
    c.dt = 0.05;
    REQUIRE(run(c).code == 0);
    const Json rep = Json::parse(slurp(tmp.path / "direct_report.json"));
    CHECK(rep.at("classification") == "family");
}

TEST_CASE("command-line parsing") {
    fixtures::TempDir tmp("argv");
    const std::string input = fixtures::example("five_spring_network.json").string();
    const std::string out = tmp.path.string();
    std::vector<std::string> args{"epsweep", "validate", input, "--out", out, "--dt", "0.25"};
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    CHECK(cli::main(static_cast<int>(argv.size()), argv.data()) == 0);
    const Json manifest = Json::parse(slurp(tmp.path / "manifest.json"));
    CHECK(manifest.at("config").at("dt").get<double>() == 0.25);
    CHECK(manifest.at("version") == cli::kToolVersion);

    std::vector<std::string> bad{"epsweep", "simulate"};
    std::vector<char*> bad_argv;
    for (auto& a : bad) bad_argv.push_back(a.data());
    CHECK(cli::main(static_cast<int>(bad_argv.size()), bad_argv.data()) == 1);
}

}  // TEST_SUITE
