#include "qge/graph.hpp"

#include "qge/error.hpp"
#include "qge/random.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <deque>
#include <limits>
#include <set>
#include <sstream>

namespace qge {

Graph Graph::from_edges(int n, int d, std::vector<Edge> edges) {
    require(n >= 1, ErrorKind::validation, "graph: vertex count must be positive");
    require(d >= 1, ErrorKind::validation, "graph: degree must be positive");
    require(static_cast<long long>(n) * d == 2LL * static_cast<long long>(edges.size()),
            ErrorKind::validation,
            "graph: regularity violation, expected " + std::to_string(static_cast<long long>(n) * d / 2) +
                " edges for n=" + std::to_string(n) + " d=" + std::to_string(d) + ", got " +
                std::to_string(edges.size()));

    Graph g;
    g.n_ = n;
    g.d_ = d;
    g.neighbors_.assign(n, {});
    g.incident_.assign(n, {});

    std::set<std::pair<int, int>> seen;
    for (std::size_t i = 0; i < edges.size(); ++i) {
        auto [u, v] = edges[i];
        require(u >= 0 && u < n && v >= 0 && v < n, ErrorKind::validation,
                "graph: edge " + std::to_string(i) + " has a vertex out of range");
        require(u != v, ErrorKind::validation, "graph: loop at vertex " + std::to_string(u));
        auto key = std::minmax(u, v);
        require(seen.insert(key).second, ErrorKind::validation,
                "graph: multi-edge between " + std::to_string(key.first) + " and " +
                    std::to_string(key.second));
    }
    g.edges_ = std::move(edges);

    std::vector<std::vector<std::pair<int, int>>> inc(n);
    for (int e = 0; e < g.bond_count(); ++e) {
        auto [u, v] = g.edges_[e];
        inc[u].push_back({v, e});
        inc[v].push_back({u, e});
    }
    for (int v = 0; v < n; ++v) {
        require(static_cast<int>(inc[v].size()) == d, ErrorKind::validation,
                "graph: regularity violation, vertex " + std::to_string(v) + " has degree " +
                    std::to_string(inc[v].size()) + " (expected " + std::to_string(d) + ")");
        std::sort(inc[v].begin(), inc[v].end());
        for (auto [w, e] : inc[v]) {
            g.neighbors_[v].push_back(w);
            g.incident_[v].push_back(e);
        }
    }
    return g;
}

int Graph::edge_between(int u, int v) const {
    const auto& nb = neighbors_[u];
    auto it = std::lower_bound(nb.begin(), nb.end(), v);
    if (it == nb.end() || *it != v)
        return -1;
    return incident_[u][static_cast<std::size_t>(it - nb.begin())];
}

Eigen::MatrixXd Graph::adjacency() const {
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(n_, n_);
    for (auto [u, v] : edges_) {
        c(u, v) = 1.0;
        c(v, u) = 1.0;
    }
    return c;
}

int Graph::tail(int b) const {
    const auto& e = edges_.at(static_cast<std::size_t>(edge_of(b)));
    return b < bond_count() ? e.first : e.second;
}

int Graph::head(int b) const {
    const auto& e = edges_.at(static_cast<std::size_t>(edge_of(b)));
    return b < bond_count() ? e.second : e.first;
}

Graph generate_random_regular(int n, int d, std::uint64_t seed, SamplerOptions opts) {
    require(n >= 1 && d >= 3, ErrorKind::parameter, "generate: need n >= 1 and d >= 3");
    require(d < n, ErrorKind::parameter, "generate: need d < n");
    require((static_cast<long long>(n) * d) % 2 == 0, ErrorKind::parameter, "generate: n*d must be even");

    Rng rng(seed);
    const int points = n * d;
    std::vector<int> stubs(points);
    for (int i = 0; i < points; ++i)
        stubs[i] = i / d;

    std::vector<char> seen(static_cast<std::size_t>(n) * n);
    for (std::uint64_t attempt = 0; attempt < opts.max_attempts; ++attempt) {
        rng.shuffle(stubs);
        std::fill(seen.begin(), seen.end(), 0);
        std::vector<Edge> edges;
        edges.reserve(points / 2);
        bool simple = true;
        for (int i = 0; i < points && simple; i += 2) {
            int u = stubs[i], v = stubs[i + 1];
            if (u == v) {
                simple = false;
                break;
            }
            if (u > v)
                std::swap(u, v);
            char& s = seen[static_cast<std::size_t>(u) * n + v];
            if (s) {
                simple = false;
                break;
            }
            s = 1;
            edges.push_back({u, v});
        }
        if (simple) {
            std::sort(edges.begin(), edges.end());
            return Graph::from_edges(n, d, std::move(edges));
        }
    }
    fail(ErrorKind::sampling, "generate: rejection budget of " + std::to_string(opts.max_attempts) +
                                  " pairings exhausted");
}

namespace {

bool parse_ints(std::string_view line, int* out, int count) {
    const char* p = line.data();
    const char* end = line.data() + line.size();
    for (int i = 0; i < count; ++i) {
        while (p < end && (*p == ' ' || *p == '\t' || *p == '\r'))
            ++p;
        auto [next, ec] = std::from_chars(p, end, out[i]);
        if (ec != std::errc())
            return false;
        p = next;
    }
    while (p < end && (*p == ' ' || *p == '\t' || *p == '\r'))
        ++p;
    return p == end;
}

bool skippable(std::string_view line) {
    auto pos = line.find_first_not_of(" \t\r");
    return pos == std::string_view::npos || line[pos] == '#';
}

} // namespace

Graph import_graph(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto nl = text.find('\n', start);
        if (nl == std::string_view::npos)
            nl = text.size();
        lines.push_back(text.substr(start, nl - start));
        start = nl + 1;
    }

    int n = -1, d = -1;
    std::vector<Edge> edges;
    for (std::size_t ln = 0; ln < lines.size(); ++ln) {
        if (skippable(lines[ln]))
            continue;
        int vals[2];
        if (!parse_ints(lines[ln], vals, 2))
            fail(ErrorKind::parse, "graph file line " + std::to_string(ln + 1) + ": expected two integers");
        if (n < 0) {
            n = vals[0];
            d = vals[1];
            require(n >= 1 && d >= 1, ErrorKind::parse, "graph file: header must hold positive n and d");
        } else {
            edges.push_back({vals[0], vals[1]});
        }
    }
    require(n >= 0, ErrorKind::parse, "graph file: missing \"n d\" header");
    return Graph::from_edges(n, d, std::move(edges));
}

std::string export_graph(const Graph& g) {
    std::string out = std::to_string(g.n()) + " " + std::to_string(g.d()) + "\n";
    for (auto [u, v] : g.edges())
        out += std::to_string(u) + " " + std::to_string(v) + "\n";
    return out;
}

ComponentInfo components(const Graph& g) {
    ComponentInfo info;
    info.label.assign(g.n(), -1);
    std::vector<int> color(g.n(), -1);
    for (int s = 0; s < g.n(); ++s) {
        if (info.label[s] >= 0)
            continue;
        bool two_colorable = true;
        std::deque<int> queue{s};
        info.label[s] = info.components;
        color[s] = 0;
        while (!queue.empty()) {
            int u = queue.front();
            queue.pop_front();
            for (int w : g.neighbors(u)) {
                if (info.label[w] < 0) {
                    info.label[w] = info.components;
                    color[w] = 1 - color[u];
                    queue.push_back(w);
                } else if (color[w] == color[u]) {
                    two_colorable = false;
                }
            }
        }
        ++info.components;
        if (two_colorable)
            ++info.bipartite_components;
    }
    return info;
}

std::optional<int> girth(const Graph& g) {
    int best = std::numeric_limits<int>::max();
    std::vector<int> dist(g.n()), parent(g.n());
    for (int s = 0; s < g.n(); ++s) {
        std::fill(dist.begin(), dist.end(), -1);
        std::deque<int> queue{s};
        dist[s] = 0;
        parent[s] = -1;
        while (!queue.empty()) {
            int u = queue.front();
            queue.pop_front();
            if (2 * dist[u] >= best)
                break;
            for (int w : g.neighbors(u)) {
                if (dist[w] < 0) {
                    dist[w] = dist[u] + 1;
                    parent[w] = u;
                    queue.push_back(w);
                } else if (w != parent[u]) {
                    best = std::min(best, dist[u] + dist[w] + 1);
                }
            }
        }
    }
    if (best == std::numeric_limits<int>::max())
        return std::nullopt;
    return best;
}

SpectralReport spectral_report(const Graph& g) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(g.adjacency(), Eigen::EigenvaluesOnly);
    require(solver.info() == Eigen::Success, ErrorKind::numerical, "spectral_report: eigensolver failed");

    SpectralReport r;
    const auto& ev = solver.eigenvalues();
    r.mu.assign(ev.data(), ev.data() + ev.size());
    std::sort(r.mu.begin(), r.mu.end(), std::greater<>());

    const double d = g.d();
    int top = 0, bottom = 0;
    for (double m : r.mu) {
        if (std::abs(m - d) < kEigenTolerance)
            ++top;
        if (std::abs(m + d) < kEigenTolerance)
            ++bottom;
    }

    auto info = components(g);
    r.components = info.components;
    r.bipartite_components = info.bipartite_components;
    require(top == info.components, ErrorKind::numerical,
            "spectral_report: multiplicity of d disagrees with component count");
    require(bottom == info.bipartite_components, ErrorKind::numerical,
            "spectral_report: multiplicity of -d disagrees with bipartite component count");
    r.is_connected = info.components == 1;
    r.is_bipartite = info.bipartite_components == info.components;

    r.nontrivial.assign(r.mu.begin() + top, r.mu.end() - bottom);
    double largest = 0.0;
    for (double m : r.nontrivial)
        largest = std::max(largest, std::abs(m));
    r.beta = std::clamp(d - largest, 0.0, d);
    if (info.bipartite_components > 0)
        r.beta = 0.0;
    r.girth = girth(g);
    return r;
}

bool is_ramanujan(const SpectralReport& r, int d) {
    require(r.is_connected, ErrorKind::domain, "is_ramanujan: graph is disconnected");
    require(r.bipartite_components == 0, ErrorKind::domain, "is_ramanujan: graph is bipartite");
    const double threshold = 2.0 * std::sqrt(static_cast<double>(d) - 1.0) + kEigenTolerance;
    return std::all_of(r.nontrivial.begin(), r.nontrivial.end(),
                       [&](double m) { return std::abs(m) <= threshold; });
}

namespace {

class CycleSearch {
public:
    CycleSearch(const Graph& g, double budget) : g_(g), budget_(budget), on_path_(g.n(), 0) {}

    // Length of the shortest cycle through edge e, or 0 if none is <= cap.
    int shortest_through(int e, int cap) {
        auto [u, v] = g_.edges()[e];
        target_ = u;
        best_ = cap + 1;
        on_path_[u] = 1;
        on_path_[v] = 1;
        extend(v, u, 1);
        on_path_[u] = 0;
        on_path_[v] = 0;
        return best_ <= cap ? best_ : 0;
    }

private:
    // At vertex `at`, reached from `from`, having used `len` edges (edge e included).
    void extend(int at, int from, int len) {
        for (int w : g_.neighbors(at)) {
            if (w == from)
                continue;
            work_ += 1.0;
            if (work_ > budget_)
                fail(ErrorKind::budget, "census: work budget exceeded");
            if (w == target_) {
                best_ = std::min(best_, len + 1);
                continue;
            }
            // A detour through w can only close a cycle of length >= len + 2.
            if (on_path_[w] || len + 2 >= best_)
                continue;
            on_path_[w] = 1;
            extend(w, at, len + 1);
            on_path_[w] = 0;
        }
    }

    const Graph& g_;
    double budget_;
    double work_ = 0.0;
    std::vector<char> on_path_;
    int target_ = -1;
    int best_ = 0;
};

void check_budget(const Graph& g, int t, const CensusOptions& opts) {
    const double estimate = g.bond_count() * std::pow(std::max(g.d() - 1, 1), std::max(t - 1, 0));
    if (estimate > opts.work_budget)
        fail(ErrorKind::budget, "census: horizon " + std::to_string(t) + " needs ~" +
                                    std::to_string(estimate) + " path extensions, over budget");
}

// Shortest cycle length through each edge, 0 where it exceeds cap.
std::vector<int> edge_cycle_lengths(const Graph& g, int cap, const CensusOptions& opts) {
    std::vector<int> len(g.bond_count(), 0);
    if (cap < 3)
        return len;
    check_budget(g, cap, opts);
    CycleSearch search(g, opts.work_budget);
    for (int e = 0; e < g.bond_count(); ++e)
        len[e] = search.shortest_through(e, cap);
    return len;
}

} // namespace

std::vector<int> cycle_bond_census(const Graph& g, int t, CensusOptions opts) {
    require(t >= 0, ErrorKind::parameter, "cycle census: horizon must be non-negative");
    auto len = edge_cycle_lengths(g, t, opts);
    std::vector<int> out;
    for (int e = 0; e < g.bond_count(); ++e)
        if (len[e] > 0)
            out.push_back(e);
    return out;
}

std::vector<int> near_cycle_census(const Graph& g, int t, CensusOptions opts) {
    require(t >= 0, ErrorKind::parameter, "near-cycle census: horizon must be non-negative");
    std::vector<int> out;
    if (t < 2)
        return out;
    auto edge_len = edge_cycle_lengths(g, 2 * t, opts);

    // Shortest cycle through each vertex (0 = none within 2t).
    std::vector<int> vertex_len(g.n(), 0);
    for (int e = 0; e < g.bond_count(); ++e) {
        if (edge_len[e] == 0)
            continue;
        for (int v : {g.edges()[e].first, g.edges()[e].second})
            if (vertex_len[v] == 0 || edge_len[e] < vertex_len[v])
                vertex_len[v] = edge_len[e];
    }

    std::vector<char> member(g.directed_count(), 0);
    std::vector<int> dist(g.n());
    for (int t2 = 2; t2 <= t; ++t2) {
        const int t1 = t - t2;
        std::fill(dist.begin(), dist.end(), -1);
        std::deque<int> queue;
        for (int v = 0; v < g.n(); ++v)
            if (vertex_len[v] > 0 && vertex_len[v] <= 2 * t2) {
                dist[v] = 0;
                queue.push_back(v);
            }
        while (!queue.empty()) {
            int u = queue.front();
            queue.pop_front();
            if (dist[u] >= t1)
                continue;
            for (int w : g.neighbors(u))
                if (dist[w] < 0) {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
        }
        // Either endpoint counts, so b and rev(b) always agree.
        for (int b = 0; b < g.directed_count(); ++b) {
            const int h = g.head(b), s = g.tail(b);
            if ((dist[h] >= 0 && dist[h] <= t1) || (dist[s] >= 0 && dist[s] <= t1))
                member[b] = 1;
        }
    }
    for (int b = 0; b < g.directed_count(); ++b)
        if (member[b])
            out.push_back(b);
    return out;
}

CensusReport census(const Graph& g, int t, CensusOptions opts) {
    CensusReport r;
    r.t = t;
    r.c_bonds = cycle_bond_census(g, t, opts);
    r.t_bonds = near_cycle_census(g, t, opts);
    return r;
}

std::string census_json(const CensusReport& r) {
    nlohmann::ordered_json j;
    j["t"] = r.t;
    j["c_bonds"] = r.c_bonds;
    j["t_bonds"] = r.t_bonds;
    return j.dump();
}

std::string spectral_json(const Graph& g, const SpectralReport& r) {
    nlohmann::ordered_json j;
    j["n"] = g.n();
    j["d"] = g.d();
    j["B"] = g.bond_count();
    j["mu"] = r.mu;
    j["beta"] = r.beta;
    j["is_connected"] = r.is_connected;
    j["is_bipartite"] = r.is_bipartite;
    j["components"] = r.components;
    if (r.girth)
        j["girth"] = *r.girth;
    else
        j["girth"] = "acyclic";
    if (r.is_connected && r.bipartite_components == 0)
        j["is_ramanujan"] = is_ramanujan(r, g.d());
    return j.dump();
}

} // namespace qge
