#pragma once

#include "qge/graph.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <set>
#include <vector>

namespace fixtures {

inline qge::Graph complete(int n) {
    std::vector<qge::Edge> edges;
    for (int u = 0; u < n; ++u)
        for (int v = u + 1; v < n; ++v)
            edges.emplace_back(u, v);
    return qge::Graph::from_edges(n, n - 1, edges);
}

inline qge::Graph petersen() {
    std::vector<qge::Edge> edges;
    for (int i = 0; i < 5; ++i) {
        edges.emplace_back(i, (i + 1) % 5);
        edges.emplace_back(i, i + 5);
        edges.emplace_back(5 + i, 5 + (i + 2) % 5);
    }
    return qge::Graph::from_edges(10, 3, edges);
}

/// Ring of m copies of K5 minus an edge, each missing pair rewired to the
/// next copy. 4-regular, connected, non-bipartite, gap shrinking with m.
inline qge::Graph gadget_ring(int m) {
    std::vector<qge::Edge> edges;
    for (int g = 0; g < m; ++g) {
        const int base = 5 * g;
        for (int u = 0; u < 5; ++u)
            for (int v = u + 1; v < 5; ++v)
                if (!(u == 0 && v == 1))
                    edges.emplace_back(base + u, base + v);
        edges.emplace_back(base + 1, (5 * (g + 1)) % (5 * m));
    }
    return qge::Graph::from_edges(5 * m, 4, edges);
}

/// Point-line incidence graph of the projective plane over F_3: 26 vertices,
/// 4-regular, bipartite, girth 6.
inline qge::Graph pg23_incidence() {
    std::vector<std::array<int, 3>> pts;
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
            for (int c = 0; c < 3; ++c) {
                if (a == 0 && b == 0 && c == 0)
                    continue;
                // Normalise: first nonzero coordinate equal to 1.
                const int lead = a ? a : (b ? b : c);
                if (lead != 1)
                    continue;
                pts.push_back({a, b, c});
            }
    std::vector<qge::Edge> edges;
    const int m = static_cast<int>(pts.size()); // 13
    for (int p = 0; p < m; ++p)
        for (int l = 0; l < m; ++l) {
            const int dot = pts[p][0] * pts[l][0] + pts[p][1] * pts[l][1] + pts[p][2] * pts[l][2];
            if (dot % 3 == 0)
                edges.emplace_back(p, m + l);
        }
    return qge::Graph::from_edges(2 * m, 4, edges);
}

/// All simple cycles (as vertex sequences), each reported once, up to length cap.
inline std::vector<std::vector<int>> enumerate_cycles(const qge::Graph& g, int cap) {
    std::vector<std::vector<int>> out;
    std::vector<int> path;
    std::vector<char> used(static_cast<std::size_t>(g.n()), 0);
    auto dfs = [&](auto&& self, int start, int v) -> void {
        for (int w : g.neighbors(v)) {
            if (w == start && path.size() >= 3 && path[1] < path.back())
                out.push_back(path);
            if (w <= start || used[w] || static_cast<int>(path.size()) >= cap)
                continue;
            used[w] = 1;
            path.push_back(w);
            self(self, start, w);
            path.pop_back();
            used[w] = 0;
        }
    };
    for (int s = 0; s < g.n(); ++s) {
        path = {s};
        used[s] = 1;
        dfs(dfs, s, s);
        used[s] = 0;
    }
    return out;
}

/// Undirected edges on a cycle of length <= t, from the enumeration.
inline std::vector<int> brute_c(const qge::Graph& g, int t) {
    std::set<int> es;
    for (const auto& cyc : enumerate_cycles(g, t))
        for (std::size_t i = 0; i < cyc.size(); ++i)
            es.insert(g.edge_between(cyc[i], cyc[(i + 1) % cyc.size()]));
    return {es.begin(), es.end()};
}

/// Shortest cycle through edge e via BFS in G - e.
inline int shortest_cycle_through(const qge::Graph& g, int e) {
    const auto [u, v] = g.edges()[e];
    std::vector<int> dist(static_cast<std::size_t>(g.n()), -1);
    std::vector<int> queue{u};
    dist[u] = 0;
    for (std::size_t qi = 0; qi < queue.size(); ++qi) {
        const int x = queue[qi];
        for (int y : g.neighbors(x)) {
            if ((x == u && y == v) || (x == v && y == u))
                continue;
            if (dist[y] < 0) {
                dist[y] = dist[x] + 1;
                queue.push_back(y);
            }
        }
    }
    return dist[v] < 0 ? std::numeric_limits<int>::max() : dist[v] + 1;
}

/// All-pairs vertex distances by Floyd-Warshall.
inline std::vector<std::vector<int>> distances(const qge::Graph& g) {
    const int inf = 1 << 20;
    std::vector<std::vector<int>> d(g.n(), std::vector<int>(g.n(), inf));
    for (int v = 0; v < g.n(); ++v) {
        d[v][v] = 0;
        for (int w : g.neighbors(v))
            d[v][w] = 1;
    }
    for (int k = 0; k < g.n(); ++k)
        for (int i = 0; i < g.n(); ++i)
            for (int j = 0; j < g.n(); ++j)
                d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
    return d;
}

/// Directed bonds with an endpoint within t - t2 of a vertex on a cycle of
/// length <= 2 t2, for some 2 <= t2 <= t.
inline std::vector<int> brute_t(const qge::Graph& g, int t) {
    const auto dist = distances(g);
    const auto cycles = enumerate_cycles(g, 2 * t);
    std::set<int> out;
    for (int t2 = 2; t2 <= t; ++t2) {
        std::set<int> on_cycle;
        for (const auto& c : cycles)
            if (static_cast<int>(c.size()) <= 2 * t2)
                on_cycle.insert(c.begin(), c.end());
        for (int b = 0; b < g.directed_count(); ++b)
            for (int v : on_cycle)
                if (std::min(dist[g.head(b)][v], dist[g.tail(b)][v]) <= t - t2) {
                    out.insert(b);
                    break;
                }
    }
    return {out.begin(), out.end()};
}

} // namespace fixtures
