#include "doctest.h"

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "lts/cli.hpp"
#include "lts/io.hpp"

using namespace lts;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string &name) {
    const fs::path dir = fs::temp_directory_path() / ("lts_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

int run(const std::vector<std::string> &args) { return dispatch(args); }

fs::path fixture(const std::string &name) {
    return fs::path(LTS_FIXTURES_DIR) / name;
}

void write_json(const fs::path &path, const nlohmann::json &doc) {
    io::write_text_file(path, doc.dump(2));
}

} // namespace

TEST_CASE("validate accepts the four-node fixture") {
    const fs::path dir = fresh_dir("validate");
    write_json(dir / "check.json",
               {{"nodes", fixture("nodes4.csv").string()},
                {"edges", fixture("edges4.csv").string()}});
    CHECK(run({"validate", "--config", (dir / "check.json").string()}) == 0);
}

TEST_CASE("configuration problems exit with code 2") {
    const fs::path dir = fresh_dir("cfgerr");
    io::write_text_file(dir / "broken.json", "{nope");
    CHECK(run({"validate", "--config", (dir / "broken.json").string()}) == 2);

    write_json(dir / "empty.json", nlohmann::json::object());
    CHECK(run({"validate", "--config", (dir / "empty.json").string()}) == 2);

    CHECK(run({"frobnicate"}) == 2);
    CHECK(run({"estimate", "--config", (dir / "empty.json").string()}) == 2);
    CHECK(run({}) == 2);
}

TEST_CASE("missing input files exit with code 3") {
    const fs::path dir = fresh_dir("dataerr");
    CHECK(run({"validate", "--config", (dir / "absent.json").string()}) == 3);

    write_json(dir / "check.json", {{"nodes", "missing_nodes.csv"},
                                    {"edges", "missing_edges.csv"}});
    CHECK(run({"validate", "--config", (dir / "check.json").string()}) == 3);
}

TEST_CASE("a census sample estimates the population exactly") {
    const fs::path dir = fresh_dir("census");
    write_json(dir / "sample.json",
               {{"population",
                 {{"nodes", fixture("nodes4.csv").string()},
                  {"edges", fixture("edges4.csv").string()}}},
                {"design", {{"alpha", 1.0}, {"beta", 0.5}}},
                {"seed", 4}});
    REQUIRE(run({"sample", "--config", (dir / "sample.json").string(), "--out",
                 (dir / "draw").string()}) == 0);

    write_json(dir / "estimate.json",
               {{"sample", "draw/sample.json"},
                {"quantities",
                 {{"size", true}, {"mean_responses", {"score"}}}}});
    REQUIRE(run({"estimate", "--config", (dir / "estimate.json").string(),
                 "--out", (dir / "est").string(), "--format", "csv"}) == 0);

    const auto doc = nlohmann::json::parse(
        io::read_text_file(dir / "est" / "estimates.json"));
    REQUIRE(doc.at("estimates").size() == 2);
    const auto &size = doc.at("estimates")[0];
    CHECK(size.at("quantity") == "size");
    CHECK(size.at("point").get<double>() == 4.0);
    CHECK(size.at("variance").get<double>() == 0.0);
    CHECK(size.at("ci_lo").get<double>() == 4.0);
    CHECK(size.at("ci_hi").get<double>() == 4.0);
    const auto &mean = doc.at("estimates")[1];
    CHECK(mean.at("quantity") == "mean_score");
    CHECK(mean.at("point").get<double>() == 2.5);
    CHECK(mean.at("variance").get<double>() == 0.0);
    CHECK(fs::exists(dir / "est" / "estimates.csv"));
}

TEST_CASE("estimation failures exit with code 4") {
    const fs::path dir = fresh_dir("esterr");
    // a single forced unit with certain tracing: n0 = 1 is too small to
    // jackknife
    write_json(dir / "sample.json",
               {{"population",
                 {{"nodes", fixture("nodes4.csv").string()},
                  {"edges", fixture("edges4.csv").string()}}},
                {"design",
                 {{"alpha", 0.0}, {"beta", 1.0}, {"certainty_units", {1}}}},
                {"seed", 4}});
    REQUIRE(run({"sample", "--config", (dir / "sample.json").string(), "--out",
                 (dir / "draw").string()}) == 0);
    write_json(dir / "estimate.json", {{"sample", "draw/sample.json"}});
    CHECK(run({"estimate", "--config", (dir / "estimate.json").string(),
               "--out", (dir / "est").string()}) == 4);
}

TEST_CASE("the seed flag overrides the config seed deterministically") {
    const fs::path dir = fresh_dir("seed");
    write_json(dir / "sample.json",
               {{"population",
                 {{"synthetic",
                   {{"stratum_sizes", {12, 12}}, {"mean_degree", 2.0},
                    {"seed", 1}}}}},
                {"design", {{"alpha", 0.5}, {"beta", 0.5}}},
                {"seed", 1}});
    const std::string cfg = (dir / "sample.json").string();
    REQUIRE(run({"sample", "--config", cfg, "--out", (dir / "a").string(),
                 "--seed", "9"}) == 0);
    REQUIRE(run({"sample", "--config", cfg, "--out", (dir / "b").string(),
                 "--seed", "9"}) == 0);
    REQUIRE(run({"sample", "--config", cfg, "--out", (dir / "c").string(),
                 "--seed", "10"}) == 0);

    const std::string a = io::read_text_file(dir / "a" / "sample.json");
    const std::string b = io::read_text_file(dir / "b" / "sample.json");
    const std::string c = io::read_text_file(dir / "c" / "sample.json");
    CHECK(a == b);
    CHECK(a != c);
}

TEST_CASE("reordering averages on a census reduce to the plain estimate") {
    const fs::path dir = fresh_dir("rbcensus");
    write_json(dir / "sample.json",
               {{"population",
                 {{"nodes", fixture("nodes4.csv").string()},
                  {"edges", fixture("edges4.csv").string()}}},
                {"design", {{"alpha", 1.0}, {"beta", 0.5}}},
                {"seed", 4}});
    REQUIRE(run({"sample", "--config", (dir / "sample.json").string(), "--out",
                 (dir / "draw").string()}) == 0);

    write_json(dir / "rb.json",
               {{"sample", "draw/sample.json"},
                {"rb", {{"mode", "mcmc"}, {"chain_length", 30}, {"chains", 2},
                        {"search_length", 10}}},
                {"seed", 5}});
    REQUIRE(run({"rb", "--config", (dir / "rb.json").string(), "--out",
                 (dir / "out").string()}) == 0);

    const auto doc =
        nlohmann::json::parse(io::read_text_file(dir / "out" / "rb.json"));
    CHECK(doc.at("info").at("acceptance_rate").get<double>() == 0.0);
    CHECK(!doc.at("info").contains("gelman_rubin")); // degenerate chains
    const auto &q = doc.at("quantities")[0];
    CHECK(q.at("quantity") == "size");
    CHECK(q.at("rao_blackwell").at("point").get<double>() ==
          q.at("preliminary").at("point").get<double>());
    CHECK(!fs::exists(dir / "out" / "chain_0.csv")); // traces off by default
}

TEST_CASE("rb requires a sample file") {
    const fs::path dir = fresh_dir("rbbad");
    write_json(dir / "rb.json", {{"rb", {{"mode", "exact"}}}});
    CHECK(run({"rb", "--config", (dir / "rb.json").string(), "--out",
               (dir / "out").string()}) == 2);
}

TEST_CASE("synth writes a loadable population") {
    const fs::path dir = fresh_dir("synth");
    write_json(dir / "synth.json",
               {{"stratum_sizes", {8, 12}}, {"mean_degree", 2.0},
                {"indicator_stratum", 2}, {"seed", 17}});
    REQUIRE(run({"synth", "--config", (dir / "synth.json").string(), "--out",
                 (dir / "pop").string()}) == 0);
    const Population pop = io::load_population_csv(dir / "pop" / "nodes.csv",
                                                   dir / "pop" / "edges.csv");
    CHECK(pop.size() == 20);
    CHECK(pop.num_strata() == 2);
    const auto doc = nlohmann::json::parse(
        io::read_text_file(dir / "pop" / "summary.json"));
    CHECK(doc.at("units") == 20);
    CHECK(doc.at("links").get<std::int64_t>() == pop.num_links());
}

TEST_CASE("simulate writes the full report tree") {
    const fs::path dir = fresh_dir("simulate");
    write_json(dir / "study.json",
               {{"population",
                 {{"synthetic",
                   {{"stratum_sizes", {10, 10}}, {"mean_degree", 2.0},
                    {"seed", 3}}}}},
                {"design", {{"alpha", 1.0}, {"beta", 0.5}}},
                {"setups", {{{"name", "plain"}}}},
                {"replications", 2},
                {"seed", 6}});
    REQUIRE(run({"simulate", "--config", (dir / "study.json").string(),
                 "--out", (dir / "out").string()}) == 0);
    CHECK(fs::exists(dir / "out" / "report.json"));
    CHECK(fs::exists(dir / "out" / "scores.csv"));
    CHECK(fs::exists(dir / "out" / "setups.csv"));
    const auto doc =
        nlohmann::json::parse(io::read_text_file(dir / "out" / "report.json"));
    CHECK(doc.at("replications") == 2);
}
