#pragma once

#include "qge/graph.hpp"
#include "qge/scattering.hpp"

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace qge {

using cplx = std::complex<double>;

/// Directed bonds: 0..B-1 are the graph edges in file order (first -> second),
/// B..2B-1 their reversals in the same order.
struct BondIndex {
    int n = 0;
    int B = 0;
    std::vector<int> tail;
    std::vector<int> head;
    std::vector<int> rev;

    explicit BondIndex(const Graph& g);
    int size() const { return 2 * B; }
};

/// Graph plus one positive length per undirected bond.
class MetricGraph {
public:
    MetricGraph(Graph g, std::vector<double> lengths);

    const Graph& graph() const { return graph_; }
    const std::vector<double>& lengths() const { return lengths_; }
    /// Length of a directed bond (shared with its reversal).
    double length(int b) const { return lengths_[static_cast<std::size_t>(graph_.edge_of(b))]; }

private:
    Graph graph_;
    std::vector<double> lengths_;
};

/// B lengths drawn uniformly from [lo, hi).
std::vector<double> random_lengths(int B, std::uint64_t seed, double lo = 1.0, double hi = 2.0);
/// One positive decimal per line, edge order.
std::vector<double> parse_lengths(std::string_view text, int B);

/// Per-vertex scattering choice; every sigma must be d x d.
struct VertexRule {
    std::vector<VertexScattering> sigma;
    std::vector<std::string> label;

    static VertexRule uniform(SigmaKind kind, int n, int d);
};

struct Assembly {
    BondIndex bonds;
    Eigen::MatrixXcd S;  // S(b, c) != 0 only when head(b) == tail(c)
    std::vector<std::string> vertex_rule;
};

/// S(b, c) = sigma_v(slot(c), slot(b)) for v = head(b) = tail(c), where slot is
/// the position of the bond's edge among v's incident edges sorted by neighbor id.
Assembly build_assembly(const MetricGraph& mg, const VertexRule& rule);
Assembly build_assembly(const MetricGraph& mg, SigmaKind kind);

/// U(k)(b, c) = exp(i k L_b) S(b, c).
Eigen::MatrixXcd evolution(const Assembly& a, const MetricGraph& mg, double k);

/// Eigenphases theta_j in [0, 1) and orthonormal eigenvectors (columns) of a
/// unitary matrix, U phi_j = exp(2 pi i theta_j) phi_j.
struct Eigenbasis {
    Eigen::VectorXd phases;
    Eigen::MatrixXcd vectors;
};

Eigenbasis eigenbasis(const Eigen::MatrixXcd& U);

/// Eigenvalues only (unit-modulus complex numbers).
Eigen::VectorXcd eigenvalues_unitary(const Eigen::MatrixXcd& U);

struct SpectrumRoot {
    double k = 0.0;
    int multiplicity = 1;
};

/// Roots of det(U(k) - I) = 0 in [k_min, k_max], found on a grid of the given
/// resolution and refined by bisection on the eigenphase nearest zero.
std::vector<SpectrumRoot> spectrum_scan(const Assembly& a, const MetricGraph& mg, double k_min, double k_max,
                                        double resolution);

/// Observable constant on directed bonds; Op(f) = diag(f).
struct Observable {
    Eigen::VectorXcd f;
    double kappa = 0.0;     // max |f_b|
    bool traceless = false; // |sum f_b| < 1e-12 * 2B

    static Observable from_values(Eigen::VectorXcd f);
};

/// +kappa on bonds leaving even vertices, -kappa otherwise, then mean-centred.
Observable parity_observable(const Graph& g, double kappa);
Observable constant_observable(int directed_count, cplx c);
/// Independent uniform [-kappa, kappa] real entries, mean-centred.
Observable random_traceless_observable(int directed_count, double kappa, std::uint64_t seed);
/// 2B lines "re im", directed-bond order.
Observable parse_observable(std::string_view text, int directed_count);

/// Sample points standing in for the k -> infinity average over [0, K].
struct KGrid {
    double K = 200.0;
    int samples = 200;
    bool monte_carlo = false;
    std::uint64_t seed = 0;

    /// Midpoints K (s + 1/2) / samples, or K * uniform draws when monte_carlo.
    std::vector<double> points() const;
};

struct VarianceEstimate {
    double estimate = 0.0;
    double stderr_ = 0.0;
    int samples = 0;
};

/// (1/2B) avg_k sum_j |<phi_j, Op(f) phi_j> - Tr Op(f)/2B|^2 over the grid.
VarianceEstimate variance_estimate(const Assembly& a, const MetricGraph& mg, const Observable& f, const KGrid& grid);

/// Real part of Tr(Op(f)^* U^t Op(f) U^-t) by dense products. Throws
/// Error(numerical) if the imaginary residue exceeds 1e-10.
double trace_correlator(const Assembly& a, const MetricGraph& mg, const Observable& f, int t, double k);

/// Grid average of |U(k)^t (b, c)|^2.
Eigen::MatrixXd m_tilde(const Assembly& a, const MetricGraph& mg, int t, const KGrid& grid);

/// Triangular window w_T(t) = (1/T)(1 - |t|/T) for |t| < T, zero otherwise.
struct FejerWeights {
    int T = 0;
    std::vector<double> values; // values[t + T], |t| <= T

    double operator()(int t) const;
};

FejerWeights fejer(int T);
/// 2 (1 - cos T x) / (T^2 x^2), with value 1 at x = 0.
double fejer_kernel(int T, double x);

struct LemmaSides {
    double lhs = 0.0;
    double rhs = 0.0;
};

/// lhs = (1/N) sum_j |<u_j, A u_j>|^2 over an eigenbasis of U,
/// rhs = (1/N) sum_{|t| <= T} w_T(t) Tr(A^* U^t A U^-t).
LemmaSides lemma_a_sides(const Eigen::MatrixXcd& U, const Eigen::MatrixXcd& A, int T);

} // namespace qge
