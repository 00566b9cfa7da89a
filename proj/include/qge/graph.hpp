#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace qge {

using Edge = std::pair<int, int>;

/// Simple d-regular combinatorial graph. Edges keep the orientation and order
/// they were given in; directed bond b < B is edge b traversed first -> second,
/// and bond b + B is its reversal.
class Graph {
public:
    /// Validates and builds. Throws Error(validation) on loops, repeated
    /// pairs, out-of-range vertices or a degree other than d.
    static Graph from_edges(int n, int d, std::vector<Edge> edges);

    int n() const noexcept { return n_; }
    int d() const noexcept { return d_; }
    int bond_count() const noexcept { return static_cast<int>(edges_.size()); }
    const std::vector<Edge>& edges() const noexcept { return edges_; }

    /// Neighbors of v sorted by vertex id.
    const std::vector<int>& neighbors(int v) const { return neighbors_[v]; }
    /// Edge indices incident to v, in the same order as neighbors(v).
    const std::vector<int>& incident_edges(int v) const { return incident_[v]; }
    /// Index of the edge joining u and v, or -1.
    int edge_between(int u, int v) const;
    bool adjacent(int u, int v) const { return edge_between(u, v) >= 0; }

    /// Connectivity matrix C (n x n, 0/1, symmetric).
    Eigen::MatrixXd adjacency() const;

    // Directed-bond conventions shared by every module.
    int directed_count() const noexcept { return 2 * bond_count(); }
    int tail(int b) const;
    int head(int b) const;
    int reverse(int b) const { return b < bond_count() ? b + bond_count() : b - bond_count(); }
    int edge_of(int b) const { return b < bond_count() ? b : b - bond_count(); }

private:
    Graph() = default;

    int n_ = 0;
    int d_ = 0;
    std::vector<Edge> edges_;
    std::vector<std::vector<int>> neighbors_;
    std::vector<std::vector<int>> incident_;
};

/// Uniform sample from the simple d-regular graphs on n labelled vertices:
/// configuration-model pairing, rejected until simple.
struct SamplerOptions {
    std::uint64_t max_attempts = 100000;
};
Graph generate_random_regular(int n, int d, std::uint64_t seed, SamplerOptions opts = {});

/// Parses the plain-text edge-list format: "n d" header, then one "u v" line
/// per edge (0-based). Blank lines and lines starting with '#' are skipped.
Graph import_graph(std::string_view text);
std::string export_graph(const Graph& g);

struct SpectralReport {
    std::vector<double> mu;          // eigenvalues of C, decreasing
    std::vector<double> nontrivial;  // mu with the +-d trivial eigenvalues removed
    double beta = 0.0;               // d - max |nontrivial|
    int components = 0;
    int bipartite_components = 0;
    bool is_connected = false;
    bool is_bipartite = false;
    std::optional<int> girth;        // nullopt for an acyclic graph
};

inline constexpr double kEigenTolerance = 1e-9;

SpectralReport spectral_report(const Graph& g);

/// Girth by breadth-first search from every vertex.
std::optional<int> girth(const Graph& g);

/// Connected components and the bipartite ones, from a traversal.
struct ComponentInfo {
    int components = 0;
    int bipartite_components = 0;
    std::vector<int> label;
};
ComponentInfo components(const Graph& g);

/// Every nontrivial |mu| <= 2 sqrt(d-1) + 1e-9. Throws Error(domain) for a
/// disconnected or bipartite report.
bool is_ramanujan(const SpectralReport& r, int d);

/// Work cap for the exhaustive cycle searches, counted in path extensions.
struct CensusOptions {
    double work_budget = 5e8;
};

/// Undirected bonds lying on a cycle of length <= t, by non-backtracking
/// depth-first search of simple paths from each bond. Sorted edge indices.
std::vector<int> cycle_bond_census(const Graph& g, int t, CensusOptions opts = {});

/// Directed bonds b such that for some t1 + t2 = t, 2 <= t2, an endpoint of b
/// is within vertex distance t1 of a vertex on a cycle of length <= 2 t2.
std::vector<int> near_cycle_census(const Graph& g, int t, CensusOptions opts = {});

struct CensusReport {
    int t = 0;
    std::vector<int> c_bonds;
    std::vector<int> t_bonds;
};
CensusReport census(const Graph& g, int t, CensusOptions opts = {});

/// {"t":..,"c_bonds":[..],"t_bonds":[..]}
std::string census_json(const CensusReport& r);
std::string spectral_json(const Graph& g, const SpectralReport& r);

} // namespace qge
