#include "lts/population.hpp"

#include <algorithm>
#include <numeric>

namespace lts {

Population::Population(PopulationData data) {
    const int n = static_cast<int>(data.stratum_by_unit.size());
    if (n == 0)
        throw DataError("population has no units");

    int k = 0;
    for (int s : data.stratum_by_unit) {
        if (s < 0)
            throw DataError("negative stratum index");
        k = std::max(k, s + 1);
    }
    strat_.index_by_unit = std::move(data.stratum_by_unit);
    strat_.count = k;

    stratum_sizes_.assign(k, 0);
    for (int s : strat_.index_by_unit)
        ++stratum_sizes_[s];
    for (int s = 0; s < k; ++s) {
        if (stratum_sizes_[s] == 0)
            throw DataError("stratum ids are not contiguous: stratum " +
                            std::to_string(s + 1) + " is empty");
    }

    meta_ = std::move(data.strata);
    if (meta_.empty())
        meta_.assign(k, StratumMeta{});
    if (static_cast<int>(meta_.size()) != k)
        throw DataError("stratum metadata size does not match stratum count");

    out_.assign(n, {});
    in_.assign(n, {});
    for (auto [from, to] : data.links) {
        if (from < 1 || from > static_cast<UnitId>(n))
            throw DataError("unknown unit " + std::to_string(from) + " in edge list");
        if (to < 1 || to > static_cast<UnitId>(n))
            throw DataError("unknown unit " + std::to_string(to) + " in edge list");
        if (from == to)
            throw DataError("self-loop on unit " + std::to_string(from) +
                            " (self-nomination is implicit, never stored)");
        out_[from - 1].push_back(to);
        in_[to - 1].push_back(from);
    }
    for (int i = 0; i < n; ++i) {
        std::sort(out_[i].begin(), out_[i].end());
        if (std::adjacent_find(out_[i].begin(), out_[i].end()) != out_[i].end())
            throw DataError("duplicate link from unit " + std::to_string(i + 1));
        std::sort(in_[i].begin(), in_[i].end());
        num_links_ += static_cast<std::int64_t>(out_[i].size());
    }

    response_names_ = std::move(data.response_names);
    responses_ = std::move(data.responses);
    if (response_names_.size() != responses_.size())
        throw DataError("response name/column count mismatch");
    for (const auto &col : responses_) {
        if (static_cast<int>(col.size()) != n)
            throw DataError("response column length does not match unit count");
    }
}

std::span<const UnitId> Population::out_neighbors(UnitId unit) const {
    return out_[unit - 1];
}

std::span<const UnitId> Population::in_neighbors(UnitId unit) const {
    return in_[unit - 1];
}

bool Population::has_link(UnitId from, UnitId to) const {
    const auto &v = out_[from - 1];
    return std::binary_search(v.begin(), v.end(), to);
}

std::optional<int> Population::find_response(const std::string &name) const {
    for (std::size_t i = 0; i < response_names_.size(); ++i) {
        if (response_names_[i] == name)
            return static_cast<int>(i);
    }
    return std::nullopt;
}

int Population::degree(UnitId unit) const {
    const auto &a = out_[unit - 1];
    const auto &b = in_[unit - 1];
    // count of the union of sorted out- and in-neighbour lists
    std::size_t i = 0, j = 0;
    int d = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] == b[j]) {
            ++i;
            ++j;
        } else if (a[i] < b[j]) {
            ++i;
        } else {
            ++j;
        }
        ++d;
    }
    d += static_cast<int>((a.size() - i) + (b.size() - j));
    return d;
}

std::vector<UnitId> Population::top_degree_units(int d) const {
    if (d <= 0)
        return {};
    const int n = size();
    std::vector<UnitId> units(n);
    std::iota(units.begin(), units.end(), UnitId{1});
    std::vector<int> deg(n);
    for (int i = 0; i < n; ++i)
        deg[i] = degree(static_cast<UnitId>(i + 1));
    // highest degree first; ties go to the smallest unit id
    std::stable_sort(units.begin(), units.end(), [&](UnitId a, UnitId b) {
        if (deg[a - 1] != deg[b - 1])
            return deg[a - 1] > deg[b - 1];
        return a < b;
    });
    units.resize(std::min(n, d));
    std::sort(units.begin(), units.end());
    return units;
}

LinkCountMatrix Population::link_counts() const {
    const int k = num_strata();
    LinkCountMatrix m;
    m.w_lk = Grid<std::int64_t>(k, 0);
    for (int i = 0; i < size(); ++i) {
        const int l = strat_.index_by_unit[i];
        for (UnitId j : out_[i])
            ++m.w_lk.at(l, strat_.stratum_of(j));
    }
    // notional self-loops y_ii = 1 live on the diagonal
    for (int s = 0; s < k; ++s)
        m.w_lk.at(s, s) += stratum_sizes_[s];
    for (int l = 0; l < k; ++l)
        for (int c = 0; c < k; ++c)
            m.w += m.w_lk.at(l, c);
    return m;
}

std::vector<std::pair<UnitId, UnitId>> Population::link_list() const {
    std::vector<std::pair<UnitId, UnitId>> links;
    links.reserve(static_cast<std::size_t>(num_links_));
    for (int i = 0; i < size(); ++i)
        for (UnitId j : out_[i])
            links.emplace_back(static_cast<UnitId>(i + 1), j);
    return links;
}

LinkCountMatrix link_counts(const Population &pop) { return pop.link_counts(); }

namespace {

void add_pair(std::vector<std::pair<UnitId, UnitId>> &links, UnitId a, UnitId b,
              bool reciprocated) {
    links.emplace_back(a, b);
    if (reciprocated)
        links.emplace_back(b, a);
}

} // namespace

SyntheticPopulation generate_synthetic(const SynthSpec &spec) {
    if (spec.stratum_sizes.empty())
        throw ConfigError("synthetic spec needs at least one stratum");
    for (int s : spec.stratum_sizes) {
        if (s < 1)
            throw ConfigError("stratum sizes must be >= 1");
    }
    const bool density_mode = spec.density_within.has_value();
    if (density_mode == spec.mean_degree.has_value())
        throw ConfigError("synthetic spec needs exactly one of densities or a "
                          "mean-degree target");

    const int k = static_cast<int>(spec.stratum_sizes.size());
    const int n = std::accumulate(spec.stratum_sizes.begin(), spec.stratum_sizes.end(), 0);

    std::vector<int> stratum_by_unit(n);
    {
        int u = 0;
        for (int s = 0; s < k; ++s)
            for (int c = 0; c < spec.stratum_sizes[s]; ++c)
                stratum_by_unit[u++] = s;
    }

    Rng rng(spec.seed);
    std::vector<std::pair<UnitId, UnitId>> links;
    if (density_mode) {
        const double within = *spec.density_within;
        const double between = spec.density_between.value_or(within);
        if (within < 0 || within > 1 || between < 0 || between > 1)
            throw ConfigError("link densities must lie in [0, 1]");
        for (UnitId a = 1; a <= static_cast<UnitId>(n); ++a) {
            const UnitId first = spec.reciprocated ? a + 1 : 1;
            for (UnitId b = first; b <= static_cast<UnitId>(n); ++b) {
                if (a == b)
                    continue;
                const double p = stratum_by_unit[a - 1] == stratum_by_unit[b - 1]
                                     ? within
                                     : between;
                if (rng.bernoulli(p))
                    add_pair(links, a, b, spec.reciprocated);
            }
        }
    } else {
        const double target = *spec.mean_degree;
        if (target < 0)
            throw ConfigError("mean-degree target must be non-negative");
        const std::int64_t max_pairs =
            static_cast<std::int64_t>(n) * (n - 1) / (spec.reciprocated ? 2 : 1);
        const std::int64_t wanted =
            static_cast<std::int64_t>(std::llround(target * n / 2.0));
        if (wanted > max_pairs)
            throw ConfigError("mean-degree target is infeasible for " +
                              std::to_string(n) + " units");
        // uniform sample of `wanted` distinct pairs
        std::vector<std::pair<UnitId, UnitId>> pairs;
        pairs.reserve(static_cast<std::size_t>(max_pairs));
        for (UnitId a = 1; a <= static_cast<UnitId>(n); ++a) {
            const UnitId first = spec.reciprocated ? a + 1 : 1;
            for (UnitId b = first; b <= static_cast<UnitId>(n); ++b) {
                if (a != b)
                    pairs.emplace_back(a, b);
            }
        }
        for (std::int64_t i = 0; i < wanted; ++i) {
            const auto j =
                i + static_cast<std::int64_t>(rng.next_below(pairs.size() - i));
            std::swap(pairs[i], pairs[j]);
            add_pair(links, pairs[i].first, pairs[i].second, spec.reciprocated);
        }
    }

    PopulationData data;
    data.stratum_by_unit = std::move(stratum_by_unit);
    data.links = std::move(links);
    if (spec.indicator_stratum) {
        const int target = *spec.indicator_stratum;
        if (target < 1 || target > k)
            throw ConfigError("indicator stratum out of range");
        std::vector<double> col(n);
        for (int i = 0; i < n; ++i)
            col[i] = data.stratum_by_unit[i] == target - 1 ? 1.0 : 0.0;
        data.response_names.push_back("indicator");
        data.responses.push_back(std::move(col));
    }

    Population pop(std::move(data));
    if (spec.degree_response) {
        // degree has to be computed on the finished adjacency
        std::vector<double> col(n);
        for (int i = 0; i < n; ++i)
            col[i] = pop.degree(static_cast<UnitId>(i + 1));
        PopulationData again;
        again.stratum_by_unit = pop.stratification().index_by_unit;
        again.links = pop.link_list();
        again.response_names = pop.response_names();
        for (std::size_t c = 0; c < pop.response_names().size(); ++c) {
            auto span = pop.response_column(static_cast<int>(c));
            again.responses.emplace_back(span.begin(), span.end());
        }
        again.response_names.push_back("degree");
        again.responses.push_back(std::move(col));
        pop = Population(std::move(again));
    }

    SyntheticPopulation out{std::move(pop), {}, 0.0};
    const int total = out.population.size();
    for (int s = 0; s < out.population.num_strata(); ++s)
        out.stratum_proportions.push_back(
            static_cast<double>(out.population.stratum_sizes()[s]) / total);
    double deg_sum = 0.0;
    for (int i = 0; i < total; ++i)
        deg_sum += out.population.degree(static_cast<UnitId>(i + 1));
    out.mean_degree = deg_sum / total;
    return out;
}

} // namespace lts
