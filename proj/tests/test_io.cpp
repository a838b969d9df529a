#include "doctest.h"

#include <filesystem>
#include <string>

#include "json.hpp"

#include "lts/io.hpp"

#include "helpers.hpp"

using namespace lts;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string &name) {
    const fs::path dir = fs::temp_directory_path() / ("lts_io_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

} // namespace

TEST_CASE("fnv1a64 matches the reference vectors") {
    CHECK(io::fnv1a64("") == 14695981039346656037ull);
    CHECK(io::fnv1a64("a") == 12638187200555641996ull);
    CHECK(io::fnv1a64("foobar") == 9625390261332436968ull);
}

TEST_CASE("text files round trip and missing files are data errors") {
    const fs::path dir = fresh_dir("text");
    io::write_text_file(dir / "nested" / "a.txt", "hello\n");
    CHECK(io::read_text_file(dir / "nested" / "a.txt") == "hello\n");
    CHECK_THROWS_AS(io::read_text_file(dir / "nope.txt"), DataError);
}

TEST_CASE("the checked-in four-node fixture loads as expected") {
    const fs::path fixtures(LTS_FIXTURES_DIR);
    const Population pop = io::load_population_csv(fixtures / "nodes4.csv",
                                                   fixtures / "edges4.csv");
    const Population reference = testing::four_node_population();
    CHECK(pop.size() == 4);
    CHECK(pop.num_strata() == 1);
    CHECK(pop.link_list() == reference.link_list());
    CHECK(pop.response_names() == std::vector<std::string>{"score"});
    for (UnitId u = 1; u <= 4; ++u)
        CHECK(pop.response(u, 0) == reference.response(u, 0));
}

TEST_CASE("population tables round trip through csv") {
    SynthSpec spec;
    spec.stratum_sizes = {8, 12};
    spec.mean_degree = 2.5;
    spec.indicator_stratum = 1;
    spec.seed = 4;
    const Population pop = generate_synthetic(spec).population;

    const fs::path dir = fresh_dir("pop");
    io::save_population_csv(pop, dir / "nodes.csv", dir / "edges.csv");
    const Population back = io::load_population_csv(dir / "nodes.csv",
                                                    dir / "edges.csv");
    CHECK(back.size() == pop.size());
    CHECK(back.stratum_sizes() == pop.stratum_sizes());
    CHECK(back.link_list() == pop.link_list());
    CHECK(back.response_names() == pop.response_names());
    for (UnitId u = 1; u <= static_cast<UnitId>(pop.size()); ++u)
        for (std::size_t c = 0; c < pop.response_names().size(); ++c)
            CHECK(back.response(u, static_cast<int>(c)) ==
                  pop.response(u, static_cast<int>(c)));
}

TEST_CASE("population loading rejects malformed tables") {
    const fs::path dir = fresh_dir("badpop");
    const fs::path edges = dir / "edges.csv";
    io::write_text_file(edges, "src,dst\n");

    io::write_text_file(dir / "bad_header.csv", "id,stratum\n1,1\n");
    CHECK_THROWS_AS(io::load_population_csv(dir / "bad_header.csv", edges),
                    DataError);

    io::write_text_file(dir / "dup.csv", "unit,stratum\n1,1\n1,1\n");
    CHECK_THROWS_AS(io::load_population_csv(dir / "dup.csv", edges), DataError);

    io::write_text_file(dir / "gap.csv", "unit,stratum\n1,1\n3,1\n");
    CHECK_THROWS_AS(io::load_population_csv(dir / "gap.csv", edges), DataError);

    io::write_text_file(dir / "zero_stratum.csv", "unit,stratum\n1,0\n2,1\n");
    CHECK_THROWS_AS(io::load_population_csv(dir / "zero_stratum.csv", edges),
                    DataError);

    io::write_text_file(dir / "nodes.csv", "unit,stratum\n1,1\n2,1\n");
    io::write_text_file(dir / "bad_edges.csv", "src,dst\n1,9\n");
    CHECK_THROWS_AS(
        io::load_population_csv(dir / "nodes.csv", dir / "bad_edges.csv"),
        DataError);
    io::write_text_file(dir / "edge_header.csv", "from,to\n1,2\n");
    CHECK_THROWS_AS(
        io::load_population_csv(dir / "nodes.csv", dir / "edge_header.csv"),
        DataError);
}

TEST_CASE("samples round trip through json") {
    const Population pop = testing::four_node_population();
    DesignParams params;
    params.alpha = {0.6};
    params.beta = Grid<double>::constant(1, 0.5);
    Rng rng = Rng::stream(23, 1);
    const ObservedSample d0 = draw_sample(pop, params, rng);

    const fs::path dir = fresh_dir("sample");
    io::save_sample(d0, dir / "sample.json", {42, 7});
    const ObservedSample back = io::load_sample(dir / "sample.json");
    CHECK(back == d0);

    const ReducedData dr = reduce(d0);
    io::save_reduced(dr, dir / "reduced.json", {42, 7});
    CHECK(io::load_reduced(dir / "reduced.json") == dr);
}

TEST_CASE("sample loading enforces schema and structure") {
    const Population pop = testing::four_node_population();
    DesignParams params;
    params.alpha = {1.0};
    params.beta = Grid<double>::constant(1, 0.5);
    Rng rng = Rng::stream(23, 2);
    const ObservedSample d0 = draw_sample(pop, params, rng);

    const fs::path dir = fresh_dir("badsample");
    io::save_sample(d0, dir / "sample.json", {1, 1});
    const std::string text = io::read_text_file(dir / "sample.json");

    io::write_text_file(dir / "garbage.json", "not json at all");
    CHECK_THROWS_AS(io::load_sample(dir / "garbage.json"), DataError);

    nlohmann::json doc = nlohmann::json::parse(text);
    doc["schema"] = "sample/v2";
    io::write_text_file(dir / "wrong_schema.json", doc.dump());
    CHECK_THROWS_AS(io::load_sample(dir / "wrong_schema.json"), DataError);

    doc = nlohmann::json::parse(text);
    doc["members"][0]["wave"] = 7;
    io::write_text_file(dir / "bad_wave.json", doc.dump());
    CHECK_THROWS_AS(io::load_sample(dir / "bad_wave.json"), DataError);

    doc = nlohmann::json::parse(text);
    doc["links"].push_back({1, 99});
    io::write_text_file(dir / "bad_link.json", doc.dump());
    CHECK_THROWS_AS(io::load_sample(dir / "bad_link.json"), DataError);
}

TEST_CASE("estimate tables carry provenance and all fields") {
    std::vector<io::EstimateRecord> records;
    EstimateWithVariance est;
    est.point = 12.5;
    est.variance = 2.25;
    est.ci_lo = 10.0;
    est.ci_hi = 16.0;
    est.method = IntervalMethod::log_transform;
    est.conservative = true;
    records.push_back(io::to_record("size", "main", est));

    const fs::path dir = fresh_dir("estimates");
    io::save_estimates_json(records, dir / "estimates.json", {99, 3});
    io::save_estimates_csv(records, dir / "estimates.csv", {99, 3});

    const auto doc =
        nlohmann::json::parse(io::read_text_file(dir / "estimates.json"));
    CHECK(doc.at("schema") == "estimates/v1");
    CHECK(doc.at("provenance").at("config_hash") == "99");
    CHECK(doc.at("provenance").at("seed") == "3");
    REQUIRE(doc.at("estimates").size() == 1);
    const auto &e = doc.at("estimates")[0];
    CHECK(e.at("quantity") == "size");
    CHECK(e.at("setup") == "main");
    CHECK(e.at("point").get<double>() == doctest::Approx(12.5));
    CHECK(e.at("method") == "log_transform");
    CHECK(e.at("conservative_flag").get<bool>());

    const std::string csv = io::read_text_file(dir / "estimates.csv");
    CHECK(csv.rfind("# config_hash=99 seed=3\n", 0) == 0);
    CHECK(csv.find("quantity,setup,point,variance,ci_lo,ci_hi,method,"
                   "conservative") != std::string::npos);
    CHECK(csv.find("size,main,12.5,2.25,10,16,log_transform,1") !=
          std::string::npos);
}

TEST_CASE("trace tables use the given value column name") {
    const fs::path dir = fresh_dir("trace");
    const std::vector<io::TraceRow> rows{{0, 0, 1.5}, {1, 1, 2.5}};
    io::save_trace_csv(dir / "trace.csv", rows, "log_prob", {5, 6});
    const std::string text = io::read_text_file(dir / "trace.csv");
    CHECK(text.find("step,accepted,log_prob\n") != std::string::npos);
    CHECK(text.find("0,0,1.5\n") != std::string::npos);
    CHECK(text.find("1,1,2.5\n") != std::string::npos);
}

TEST_CASE("synthetic specs parse from json") {
    const SynthSpec spec = io::parse_synth_spec_text(
        R"({"stratum_sizes": [5, 7], "mean_degree": 2.0,
            "reciprocated": false, "indicator_stratum": 2,
            "degree_response": false, "seed": 11})");
    CHECK(spec.stratum_sizes == std::vector<int>{5, 7});
    CHECK(spec.mean_degree == 2.0);
    CHECK(!spec.reciprocated);
    CHECK(spec.indicator_stratum == 2);
    CHECK(!spec.degree_response);
    CHECK(spec.seed == 11);

    CHECK_THROWS_AS(io::parse_synth_spec_text("{"), ConfigError);
    CHECK_THROWS_AS(io::parse_synth_spec_text(R"({"stratum_sizes": "x"})"),
                    ConfigError);
}
