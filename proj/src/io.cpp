#include "lts/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace lts::io {

namespace {

using nlohmann::json;

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

std::vector<std::string> split_line(const std::string &line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

double parse_double(const std::string &s, const std::string &what) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size())
            throw std::invalid_argument(s);
        return v;
    } catch (const std::exception &) {
        throw DataError("cannot parse " + what + " from '" + s + "'");
    }
}

std::int64_t parse_int(const std::string &s, const std::string &what) {
    try {
        std::size_t pos = 0;
        const std::int64_t v = std::stoll(s, &pos);
        if (pos != s.size())
            throw std::invalid_argument(s);
        return v;
    } catch (const std::exception &) {
        throw DataError("cannot parse " + what + " from '" + s + "'");
    }
}

json provenance_json(const Provenance &prov) {
    return json{{"config_hash", std::to_string(prov.config_hash)},
                {"seed", std::to_string(prov.seed)}};
}

std::string provenance_comment(const Provenance &prov) {
    return "# config_hash=" + std::to_string(prov.config_hash) +
           " seed=" + std::to_string(prov.seed) + "\n";
}

json design_to_json(const DesignParams &design) {
    json beta = json::array();
    for (int l = 0; l < design.beta.dim(); ++l) {
        json row = json::array();
        for (int c = 0; c < design.beta.dim(); ++c)
            row.push_back(design.beta.at(l, c));
        beta.push_back(std::move(row));
    }
    return json{{"alpha", design.alpha},
                {"beta", std::move(beta)},
                {"certainty_units", design.certainty_units}};
}

DesignParams design_from_json(const json &doc) {
    DesignParams design;
    design.alpha = doc.at("alpha").get<std::vector<double>>();
    const auto &rows = doc.at("beta");
    if (!rows.is_array() || rows.empty())
        throw DataError("design beta must be a non-empty matrix");
    const int k = static_cast<int>(rows.size());
    design.beta = Grid<double>(k, 0.0);
    for (int l = 0; l < k; ++l) {
        const auto row = rows.at(l).get<std::vector<double>>();
        if (static_cast<int>(row.size()) != k)
            throw DataError("design beta must be square");
        for (int c = 0; c < k; ++c)
            design.beta.at(l, c) = row[c];
    }
    if (doc.contains("certainty_units"))
        design.certainty_units = doc.at("certainty_units").get<std::vector<UnitId>>();
    return design;
}

template <typename Sample>
json sample_body(const Sample &d, const Provenance &prov, bool with_wave) {
    json members = json::array();
    for (const SampleMember &m : d.members) {
        json jm{{"unit", m.unit},
                {"stratum", m.stratum + 1},
                {"y", m.out_nominations},
                {"responses", m.responses}};
        if (with_wave)
            jm["wave"] = m.wave;
        members.push_back(std::move(jm));
    }
    json links = json::array();
    for (auto [from, to] : d.links)
        links.push_back(json::array({from, to}));
    json certainty = json::array();
    json include = json::array();
    for (int c = 0; c < d.num_strata; ++c) {
        certainty.push_back(d.certainty[c] != 0);
        include.push_back(d.include_in_total[c] != 0);
    }
    return json{{"num_strata", d.num_strata},
                {"design", design_to_json(d.design)},
                {"certainty", std::move(certainty)},
                {"include_in_total", std::move(include)},
                {"response_names", d.response_names},
                {"members", std::move(members)},
                {"links", std::move(links)},
                {"provenance", provenance_json(prov)}};
}

template <typename Sample>
void sample_from_json(const json &doc, Sample &d, bool with_wave) {
    d.num_strata = doc.at("num_strata").get<int>();
    if (d.num_strata < 1)
        throw DataError("sample must have at least one stratum");
    d.design = design_from_json(doc.at("design"));
    const auto certainty = doc.at("certainty").get<std::vector<bool>>();
    const auto include = doc.at("include_in_total").get<std::vector<bool>>();
    d.certainty.assign(certainty.begin(), certainty.end());
    d.include_in_total.assign(include.begin(), include.end());
    d.response_names = doc.at("response_names").get<std::vector<std::string>>();
    for (const auto &jm : doc.at("members")) {
        SampleMember m;
        m.unit = jm.at("unit").get<UnitId>();
        const int stratum = jm.at("stratum").get<int>();
        if (stratum < 1 || stratum > d.num_strata)
            throw DataError("member stratum out of range");
        m.stratum = stratum - 1;
        m.out_nominations = jm.at("y").get<std::vector<int>>();
        m.responses = jm.at("responses").get<std::vector<double>>();
        if (with_wave)
            m.wave = jm.at("wave").get<int>();
        d.members.push_back(std::move(m));
    }
    for (const auto &jl : doc.at("links")) {
        if (!jl.is_array() || jl.size() != 2)
            throw DataError("sample links must be [from, to] pairs");
        d.links.emplace_back(jl.at(0).get<UnitId>(), jl.at(1).get<UnitId>());
    }
}

json parse_json_text(const std::string &text, const std::string &what) {
    json doc = json::parse(text, nullptr, false);
    if (doc.is_discarded())
        throw DataError("malformed JSON in " + what);
    return doc;
}

} // namespace

std::uint64_t fnv1a64(std::string_view text) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

std::string read_text_file(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw DataError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text_file(const std::filesystem::path &path, std::string_view text) {
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw DataError("cannot write " + path.string());
    out << text;
    if (!out)
        throw DataError("short write to " + path.string());
}

Population load_population_csv(const std::filesystem::path &nodes_file,
                               const std::filesystem::path &edges_file) {
    std::istringstream nodes(read_text_file(nodes_file));
    std::string line;
    if (!std::getline(nodes, line))
        throw DataError("empty nodes file " + nodes_file.string());
    const std::vector<std::string> header = split_line(line);
    if (header.size() < 2 || header[0] != "unit" || header[1] != "stratum")
        throw DataError("nodes header must start with unit,stratum");
    const std::vector<std::string> response_names(header.begin() + 2, header.end());

    struct Row {
        UnitId unit;
        int stratum;
        std::vector<double> responses;
    };
    std::vector<Row> rows;
    while (std::getline(nodes, line)) {
        if (line.empty())
            continue;
        const std::vector<std::string> cells = split_line(line);
        if (cells.size() != header.size())
            throw DataError("nodes row has " + std::to_string(cells.size()) +
                            " cells, expected " + std::to_string(header.size()));
        Row r;
        r.unit = static_cast<UnitId>(parse_int(cells[0], "unit id"));
        r.stratum = static_cast<int>(parse_int(cells[1], "stratum"));
        for (std::size_t c = 2; c < cells.size(); ++c)
            r.responses.push_back(parse_double(cells[c], "response " + header[c]));
        rows.push_back(std::move(r));
    }
    const int n = static_cast<int>(rows.size());
    if (n == 0)
        throw DataError("nodes file has no rows");

    PopulationData data;
    data.stratum_by_unit.assign(n, -1);
    data.response_names = response_names;
    data.responses.assign(response_names.size(), std::vector<double>(n, 0.0));
    for (const Row &r : rows) {
        if (r.unit < 1 || r.unit > static_cast<UnitId>(n))
            throw DataError("unit ids must be 1..N, found " + std::to_string(r.unit));
        const int i = static_cast<int>(r.unit) - 1;
        if (data.stratum_by_unit[i] != -1)
            throw DataError("duplicate unit id " + std::to_string(r.unit));
        data.stratum_by_unit[i] = r.stratum - 1;
        for (std::size_t c = 0; c < r.responses.size(); ++c)
            data.responses[c][i] = r.responses[c];
    }

    std::istringstream edges(read_text_file(edges_file));
    if (!std::getline(edges, line))
        throw DataError("empty edges file " + edges_file.string());
    if (split_line(line) != std::vector<std::string>{"src", "dst"})
        throw DataError("edges header must be src,dst");
    while (std::getline(edges, line)) {
        if (line.empty())
            continue;
        const std::vector<std::string> cells = split_line(line);
        if (cells.size() != 2)
            throw DataError("edges rows must have two cells");
        data.links.emplace_back(static_cast<UnitId>(parse_int(cells[0], "src")),
                                static_cast<UnitId>(parse_int(cells[1], "dst")));
    }
    return Population(std::move(data));
}

void save_population_csv(const Population &pop,
                         const std::filesystem::path &nodes_file,
                         const std::filesystem::path &edges_file) {
    std::string nodes = "unit,stratum";
    for (const std::string &name : pop.response_names())
        nodes += "," + name;
    nodes += "\n";
    for (int i = 1; i <= pop.size(); ++i) {
        nodes += std::to_string(i) + "," +
                 std::to_string(pop.stratum_index(i) + 1);
        for (std::size_t c = 0; c < pop.response_names().size(); ++c)
            nodes += "," + fmt(pop.response(i, static_cast<int>(c)));
        nodes += "\n";
    }
    write_text_file(nodes_file, nodes);

    std::string edges = "src,dst\n";
    for (auto [from, to] : pop.link_list())
        edges += std::to_string(from) + "," + std::to_string(to) + "\n";
    write_text_file(edges_file, edges);
}

SynthSpec parse_synth_spec_text(const std::string &text) {
    json doc = json::parse(text, nullptr, false);
    if (doc.is_discarded())
        throw ConfigError("malformed JSON in synthetic-population spec");
    SynthSpec spec;
    try {
        spec.stratum_sizes = doc.at("stratum_sizes").get<std::vector<int>>();
        if (doc.contains("reciprocated"))
            spec.reciprocated = doc.at("reciprocated").get<bool>();
        if (doc.contains("density_within"))
            spec.density_within = doc.at("density_within").get<double>();
        if (doc.contains("density_between"))
            spec.density_between = doc.at("density_between").get<double>();
        if (doc.contains("mean_degree"))
            spec.mean_degree = doc.at("mean_degree").get<double>();
        if (doc.contains("indicator_stratum"))
            spec.indicator_stratum = doc.at("indicator_stratum").get<int>();
        if (doc.contains("degree_response"))
            spec.degree_response = doc.at("degree_response").get<bool>();
        if (doc.contains("seed"))
            spec.seed = doc.at("seed").get<std::uint64_t>();
    } catch (const json::exception &e) {
        throw ConfigError(std::string("bad synthetic-population spec: ") + e.what());
    }
    return spec;
}

SynthSpec load_synth_spec(const std::filesystem::path &path) {
    return parse_synth_spec_text(read_text_file(path));
}

void save_sample(const ObservedSample &d0, const std::filesystem::path &path,
                 const Provenance &prov) {
    json doc = sample_body(d0, prov, true);
    doc["schema"] = "sample/v1";
    write_text_file(path, doc.dump(2) + "\n");
}

ObservedSample load_sample(const std::filesystem::path &path) {
    const json doc = parse_json_text(read_text_file(path), path.string());
    try {
        if (doc.at("schema").get<std::string>() != "sample/v1")
            throw DataError("expected schema sample/v1 in " + path.string());
        ObservedSample d0;
        sample_from_json(doc, d0, true);
        validate(d0);
        return d0;
    } catch (const json::exception &e) {
        throw DataError(std::string("bad sample document: ") + e.what());
    }
}

void save_reduced(const ReducedData &data, const std::filesystem::path &path,
                  const Provenance &prov) {
    json doc = sample_body(data, prov, false);
    doc["schema"] = "reduced/v1";
    doc["n0"] = data.n0;
    write_text_file(path, doc.dump(2) + "\n");
}

ReducedData load_reduced(const std::filesystem::path &path) {
    const json doc = parse_json_text(read_text_file(path), path.string());
    try {
        if (doc.at("schema").get<std::string>() != "reduced/v1")
            throw DataError("expected schema reduced/v1 in " + path.string());
        ReducedData data;
        sample_from_json(doc, data, false);
        data.n0 = doc.at("n0").get<std::vector<int>>();
        validate(data);
        return data;
    } catch (const json::exception &e) {
        throw DataError(std::string("bad reduced-data document: ") + e.what());
    }
}

std::string method_name(IntervalMethod method) {
    switch (method) {
    case IntervalMethod::clt:
        return "clt";
    case IntervalMethod::log_transform:
        return "log_transform";
    case IntervalMethod::none:
        break;
    }
    return "none";
}

EstimateRecord to_record(std::string quantity, std::string setup,
                         const EstimateWithVariance &est) {
    EstimateRecord rec;
    rec.quantity = std::move(quantity);
    rec.setup = std::move(setup);
    rec.point = est.point;
    rec.variance = est.variance;
    rec.ci_lo = est.ci_lo;
    rec.ci_hi = est.ci_hi;
    rec.method = method_name(est.method);
    rec.conservative = est.conservative;
    return rec;
}

void save_estimates_json(std::span<const EstimateRecord> records,
                         const std::filesystem::path &path,
                         const Provenance &prov) {
    json list = json::array();
    for (const EstimateRecord &rec : records) {
        list.push_back(json{{"quantity", rec.quantity},
                            {"setup", rec.setup},
                            {"point", rec.point},
                            {"variance", rec.variance},
                            {"ci_lo", rec.ci_lo},
                            {"ci_hi", rec.ci_hi},
                            {"method", rec.method},
                            {"conservative_flag", rec.conservative}});
    }
    const json doc{{"schema", "estimates/v1"},
                   {"provenance", provenance_json(prov)},
                   {"estimates", std::move(list)}};
    write_text_file(path, doc.dump(2) + "\n");
}

void save_estimates_csv(std::span<const EstimateRecord> records,
                        const std::filesystem::path &path,
                        const Provenance &prov) {
    std::string out = provenance_comment(prov);
    out += "quantity,setup,point,variance,ci_lo,ci_hi,method,conservative\n";
    for (const EstimateRecord &rec : records) {
        out += rec.quantity + "," + rec.setup + "," + fmt(rec.point) + "," +
               fmt(rec.variance) + "," + fmt(rec.ci_lo) + "," + fmt(rec.ci_hi) +
               "," + rec.method + "," + (rec.conservative ? "1" : "0") + "\n";
    }
    write_text_file(path, out);
}

void save_trace_csv(const std::filesystem::path &path,
                    std::span<const TraceRow> rows, std::string_view value_name,
                    const Provenance &prov) {
    std::string out = provenance_comment(prov);
    out += "step,accepted,";
    out += value_name;
    out += "\n";
    for (const TraceRow &row : rows) {
        out += std::to_string(row.step) + "," + std::to_string(row.accepted) +
               "," + fmt(row.value) + "\n";
    }
    write_text_file(path, out);
}

} // namespace lts::io
