#include "qge/evolution.hpp"

#include "qge/error.hpp"
#include "qge/parallel.hpp"
#include "qge/random.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>

namespace qge {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kImagResidue = 1e-10;

std::vector<std::string_view> content_lines(std::string_view text) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto nl = text.find('\n', start);
        if (nl == std::string_view::npos)
            nl = text.size();
        auto line = text.substr(start, nl - start);
        auto pos = line.find_first_not_of(" \t\r");
        if (pos != std::string_view::npos && line[pos] != '#')
            out.push_back(line);
        start = nl + 1;
    }
    return out;
}

std::vector<double> parse_doubles(std::string_view line) {
    std::vector<double> vals;
    std::string s(line);
    std::istringstream in(s);
    double x;
    while (in >> x)
        vals.push_back(x);
    if (!in.eof())
        fail(ErrorKind::parse, "malformed number in line '" + s + "'");
    return vals;
}

// dense * U where U has at most d nonzeros per row.
Eigen::MatrixXcd times_sparse(const Eigen::MatrixXcd& left, const Eigen::MatrixXcd& u,
                              const std::vector<std::vector<std::pair<int, cplx>>>& rows) {
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(left.rows(), u.cols());
    for (Eigen::Index m = 0; m < u.rows(); ++m)
        for (auto [c, val] : rows[static_cast<std::size_t>(m)])
            out.col(c) += left.col(m) * val;
    return out;
}

std::vector<std::vector<std::pair<int, cplx>>> sparse_rows(const Eigen::MatrixXcd& u) {
    std::vector<std::vector<std::pair<int, cplx>>> rows(static_cast<std::size_t>(u.rows()));
    for (Eigen::Index b = 0; b < u.rows(); ++b)
        for (Eigen::Index c = 0; c < u.cols(); ++c)
            if (u(b, c) != cplx(0.0))
                rows[static_cast<std::size_t>(b)].push_back({static_cast<int>(c), u(b, c)});
    return rows;
}

Eigen::MatrixXcd matrix_power(const Eigen::MatrixXcd& u, int t) {
    const auto n = u.rows();
    Eigen::MatrixXcd p = Eigen::MatrixXcd::Identity(n, n);
    for (int i = 0; i < t; ++i)
        p = p * u;
    return p;
}

} // namespace

BondIndex::BondIndex(const Graph& g) : n(g.n()), B(g.bond_count()) {
    tail.resize(2 * B);
    head.resize(2 * B);
    rev.resize(2 * B);
    for (int b = 0; b < 2 * B; ++b) {
        tail[b] = g.tail(b);
        head[b] = g.head(b);
        rev[b] = g.reverse(b);
    }
}

MetricGraph::MetricGraph(Graph g, std::vector<double> lengths) : graph_(std::move(g)), lengths_(std::move(lengths)) {
    require(static_cast<int>(lengths_.size()) == graph_.bond_count(), ErrorKind::validation,
            "metric graph: expected " + std::to_string(graph_.bond_count()) + " lengths, got " +
                std::to_string(lengths_.size()));
    for (std::size_t i = 0; i < lengths_.size(); ++i)
        require(lengths_[i] > 0.0 && std::isfinite(lengths_[i]), ErrorKind::validation,
                "metric graph: length " + std::to_string(i) + " is not a positive number");
}

std::vector<double> random_lengths(int B, std::uint64_t seed, double lo, double hi) {
    require(B >= 0 && lo > 0.0 && hi >= lo, ErrorKind::parameter, "random_lengths: need 0 < lo <= hi");
    Rng rng(seed);
    std::vector<double> out(static_cast<std::size_t>(B));
    for (auto& l : out)
        l = rng.uniform(lo, hi);
    return out;
}

std::vector<double> parse_lengths(std::string_view text, int B) {
    std::vector<double> out;
    for (auto line : content_lines(text)) {
        auto vals = parse_doubles(line);
        require(vals.size() == 1, ErrorKind::parse, "lengths file: expected one number per line");
        out.push_back(vals[0]);
    }
    require(static_cast<int>(out.size()) == B, ErrorKind::validation,
            "lengths file: expected " + std::to_string(B) + " lengths, got " + std::to_string(out.size()));
    return out;
}

VertexRule VertexRule::uniform(SigmaKind kind, int n, int d) {
    VertexRule rule;
    auto s = make_sigma(kind, d);
    rule.sigma.assign(static_cast<std::size_t>(n), s);
    rule.label.assign(static_cast<std::size_t>(n), to_string(kind));
    return rule;
}

Assembly build_assembly(const MetricGraph& mg, const VertexRule& rule) {
    const Graph& g = mg.graph();
    require(static_cast<int>(rule.sigma.size()) == g.n(), ErrorKind::assembly,
            "assembly: need one scattering matrix per vertex");
    for (int v = 0; v < g.n(); ++v)
        require(rule.sigma[v].size() == g.d() && rule.sigma[v].sigma.cols() == g.d(), ErrorKind::assembly,
                "assembly: scattering matrix at vertex " + std::to_string(v) + " has the wrong size");

    Assembly a{BondIndex(g), Eigen::MatrixXcd::Zero(g.directed_count(), g.directed_count()), rule.label};
    if (a.vertex_rule.size() != static_cast<std::size_t>(g.n()))
        a.vertex_rule.assign(static_cast<std::size_t>(g.n()), "custom");

    for (int v = 0; v < g.n(); ++v) {
        const auto& inc = g.incident_edges(v);
        const auto& sigma = rule.sigma[v].sigma;
        for (int i = 0; i < g.d(); ++i) {
            const int e_in = inc[i];
            // Directed bond along edge e_in that enters v.
            const int b = g.edges()[e_in].second == v ? e_in : e_in + g.bond_count();
            for (int j = 0; j < g.d(); ++j) {
                const int e_out = inc[j];
                const int c = g.edges()[e_out].first == v ? e_out : e_out + g.bond_count();
                a.S(b, c) = sigma(j, i);
            }
        }
    }
    return a;
}

Assembly build_assembly(const MetricGraph& mg, SigmaKind kind) {
    return build_assembly(mg, VertexRule::uniform(kind, mg.graph().n(), mg.graph().d()));
}

Eigen::MatrixXcd evolution(const Assembly& a, const MetricGraph& mg, double k) {
    Eigen::MatrixXcd u = a.S;
    for (int b = 0; b < a.bonds.size(); ++b)
        u.row(b) *= std::polar(1.0, k * mg.length(b));
    return u;
}

namespace {

struct Attempt {
    Eigenbasis basis;
    Eigen::VectorXcd values;
    double residual = 0.0;
};

Attempt finish(const Eigen::MatrixXcd& U, Eigen::MatrixXcd vectors) {
    Attempt out;
    const Eigen::MatrixXcd w = U * vectors;
    const auto n = U.rows();
    out.values.resize(n);
    out.basis.phases.resize(n);
    double residual = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
        const cplx lambda = vectors.col(j).dot(w.col(j));
        out.values(j) = lambda;
        double theta = std::arg(lambda) / kTwoPi;
        if (theta < 0.0)
            theta += 1.0;
        if (theta >= 1.0)
            theta -= 1.0;
        out.basis.phases(j) = theta;
        residual = std::max(residual, (w.col(j) - lambda * vectors.col(j)).norm());
    }
    const double orth = (vectors.adjoint() * vectors - Eigen::MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff();
    out.residual = std::max(residual, orth);
    out.basis.vectors = std::move(vectors);
    return out;
}

// Hermitian Cayley transform of exp(i alpha) U; exact eigenvectors of U,
// orthonormal even inside degenerate eigenspaces.
Attempt cayley_attempt(const Eigen::MatrixXcd& U, double alpha) {
    const auto n = U.rows();
    const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(n, n);
    const Eigen::MatrixXcd v = std::polar(1.0, alpha) * U;
    Eigen::MatrixXcd h = cplx(0.0, 1.0) * Eigen::PartialPivLU<Eigen::MatrixXcd>(id + v).solve(id - v);
    h = (0.5 * (h + h.adjoint())).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h);
    if (solver.info() != Eigen::Success)
        return {{}, {}, std::numeric_limits<double>::infinity()};
    return finish(U, solver.eigenvectors());
}

// Rotation that puts -1 in the middle of the widest gap of the spectrum.
double gap_alpha(const Eigen::VectorXcd& values) {
    std::vector<double> phi;
    for (Eigen::Index j = 0; j < values.size(); ++j)
        phi.push_back(std::arg(values(j)));
    std::sort(phi.begin(), phi.end());
    double best_gap = -1.0, mid = 0.0;
    for (std::size_t i = 0; i < phi.size(); ++i) {
        const double next = i + 1 < phi.size() ? phi[i + 1] : phi[0] + kTwoPi;
        if (next - phi[i] > best_gap) {
            best_gap = next - phi[i];
            mid = 0.5 * (phi[i] + next);
        }
    }
    return std::numbers::pi - mid;
}

constexpr double kAcceptResidual = 1e-10;

} // namespace

Eigenbasis eigenbasis(const Eigen::MatrixXcd& U) {
    require(U.rows() == U.cols() && U.rows() > 0, ErrorKind::domain, "eigenbasis: matrix must be square");
    require(unitarity_defect(U) < 1e-8, ErrorKind::domain, "eigenbasis: matrix is not unitary");

    Attempt a = cayley_attempt(U, 0.5);
    for (int retry = 0; retry < 2 && a.residual >= kAcceptResidual; ++retry) {
        if (a.values.size() != U.rows())
            break;
        a = cayley_attempt(U, gap_alpha(a.values));
    }
    if (a.residual < kAcceptResidual)
        return std::move(a.basis);

    // Schur form of a normal matrix is diagonal; Q holds the eigenvectors.
    Eigen::ComplexSchur<Eigen::MatrixXcd> schur(U);
    require(schur.info() == Eigen::Success, ErrorKind::numerical, "eigenbasis: Schur decomposition failed");
    Attempt s = finish(U, schur.matrixU());
    require(s.residual < 1e-8, ErrorKind::numerical, "eigenbasis: eigenvector residual too large");
    return std::move(s.basis);
}

Eigen::VectorXcd eigenvalues_unitary(const Eigen::MatrixXcd& U) {
    Eigen::ComplexSchur<Eigen::MatrixXcd> schur(U, false);
    require(schur.info() == Eigen::Success, ErrorKind::numerical, "eigenvalues: Schur decomposition failed");
    return schur.matrixT().diagonal();
}

namespace {

// Principal eigenphase (radians) closest to zero.
double nearest_phase(const Eigen::VectorXcd& values) {
    double best = std::numbers::pi;
    for (Eigen::Index j = 0; j < values.size(); ++j) {
        const double phi = std::arg(values(j));
        if (std::abs(phi) < std::abs(best))
            best = phi;
    }
    return best;
}

} // namespace

std::vector<SpectrumRoot> spectrum_scan(const Assembly& a, const MetricGraph& mg, double k_min, double k_max,
                                        double resolution) {
    require(resolution > 0.0, ErrorKind::parameter, "spectrum_scan: resolution must be positive");
    require(k_max > k_min, ErrorKind::parameter, "spectrum_scan: empty k range");

    auto h = [&](double k) { return nearest_phase(eigenvalues_unitary(evolution(a, mg, k))); };

    const auto steps = static_cast<std::size_t>(std::ceil((k_max - k_min) / resolution));
    std::vector<double> ks(steps + 1);
    for (std::size_t i = 0; i <= steps; ++i)
        ks[i] = std::min(k_min + static_cast<double>(i) * resolution, k_max);
    auto hs = parallel_map<double>(ks.size(), [&](std::size_t i) { return h(ks[i]); });

    std::vector<SpectrumRoot> roots;
    auto confirm = [&](double k) {
        auto values = eigenvalues_unitary(evolution(a, mg, k));
        int mult = 0;
        double closest = std::numeric_limits<double>::infinity();
        for (Eigen::Index j = 0; j < values.size(); ++j) {
            const double gap = std::abs(values(j) - cplx(1.0));
            closest = std::min(closest, gap);
            if (gap < 1e-6)
                ++mult;
        }
        if (closest < 1e-8)
            roots.push_back({k, std::max(mult, 1)});
    };

    for (std::size_t i = 0; i < steps; ++i) {
        const double h0 = hs[i], h1 = hs[i + 1];
        if (h0 == 0.0 && (i == 0)) {
            confirm(ks[i]);
            continue;
        }
        // Eigenphases of D(k)S increase with k, so roots are - to + crossings.
        if (!(h0 < 0.0 && h1 >= 0.0) || std::abs(h0) > 0.5 * std::numbers::pi ||
            std::abs(h1) > 0.5 * std::numbers::pi)
            continue;
        double lo = ks[i], hi = ks[i + 1];
        for (int it = 0; it < 200 && hi - lo > 1e-13 * std::max(1.0, std::abs(hi)); ++it) {
            const double mid = 0.5 * (lo + hi);
            if (h(mid) < 0.0)
                lo = mid;
            else
                hi = mid;
        }
        confirm(0.5 * (lo + hi));
    }
    return roots;
}

Observable Observable::from_values(Eigen::VectorXcd f) {
    Observable o;
    o.kappa = f.size() ? f.cwiseAbs().maxCoeff() : 0.0;
    o.traceless = std::abs(f.sum()) < 1e-12 * static_cast<double>(f.size());
    o.f = std::move(f);
    return o;
}

Observable parity_observable(const Graph& g, double kappa) {
    Eigen::VectorXcd f(g.directed_count());
    for (int b = 0; b < g.directed_count(); ++b)
        f(b) = g.tail(b) % 2 == 0 ? kappa : -kappa;
    f.array() -= f.mean();
    return Observable::from_values(std::move(f));
}

Observable constant_observable(int directed_count, cplx c) {
    return Observable::from_values(Eigen::VectorXcd::Constant(directed_count, c));
}

Observable random_traceless_observable(int directed_count, double kappa, std::uint64_t seed) {
    Rng rng(seed);
    Eigen::VectorXcd f(directed_count);
    for (int b = 0; b < directed_count; ++b)
        f(b) = rng.uniform(-kappa, kappa);
    f.array() -= f.mean();
    return Observable::from_values(std::move(f));
}

Observable parse_observable(std::string_view text, int directed_count) {
    std::vector<cplx> vals;
    for (auto line : content_lines(text)) {
        auto v = parse_doubles(line);
        require(v.size() == 2, ErrorKind::parse, "observable file: expected \"re im\" per line");
        vals.emplace_back(v[0], v[1]);
    }
    require(static_cast<int>(vals.size()) == directed_count, ErrorKind::validation,
            "observable file: expected " + std::to_string(directed_count) + " entries, got " +
                std::to_string(vals.size()));
    Eigen::VectorXcd f(directed_count);
    for (int b = 0; b < directed_count; ++b)
        f(b) = vals[static_cast<std::size_t>(b)];
    return Observable::from_values(std::move(f));
}

std::vector<double> KGrid::points() const {
    require(samples >= 1, ErrorKind::parameter, "k grid: need at least one sample");
    require(K > 0.0, ErrorKind::parameter, "k grid: window K must be positive");
    std::vector<double> ks(static_cast<std::size_t>(samples));
    if (monte_carlo) {
        Rng rng(seed);
        for (auto& k : ks)
            k = K * rng.uniform();
    } else {
        for (int s = 0; s < samples; ++s)
            ks[static_cast<std::size_t>(s)] = K * (s + 0.5) / samples;
    }
    return ks;
}

VarianceEstimate variance_estimate(const Assembly& a, const MetricGraph& mg, const Observable& obs,
                                   const KGrid& grid) {
    const int n = a.bonds.size();
    require(obs.f.size() == n, ErrorKind::validation, "variance: observable dimension mismatch");

    // Centre f first; with normalised eigenvectors <phi, (F - m) phi> equals
    // <phi, F phi> - m, and a constant f centres to exactly zero.
    const bool constant = (obs.f.array() == obs.f(0)).all();
    const cplx mean = constant ? obs.f(0) : obs.f.mean();
    const Eigen::VectorXcd g = obs.f.array() - mean;

    const auto ks = grid.points();
    auto per_k = parallel_map<double>(ks.size(), [&](std::size_t s) {
        if (constant)
            return 0.0;
        const auto basis = eigenbasis(evolution(a, mg, ks[s]));
        const Eigen::MatrixXd weights = basis.vectors.cwiseAbs2();
        double acc = 0.0;
        for (int j = 0; j < n; ++j)
            acc += std::norm(g.dot(weights.col(j).cast<cplx>()) ); // conj(g) . w
        return acc / n;
    });

    VarianceEstimate out;
    out.samples = static_cast<int>(ks.size());
    double sum = 0.0;
    for (double v : per_k)
        sum += v;
    out.estimate = sum / out.samples;
    if (out.samples > 1) {
        double ss = 0.0;
        for (double v : per_k)
            ss += (v - out.estimate) * (v - out.estimate);
        out.stderr_ = std::sqrt(ss / (out.samples - 1) / out.samples);
    }
    return out;
}

double trace_correlator(const Assembly& a, const MetricGraph& mg, const Observable& obs, int t, double k) {
    require(t >= 0, ErrorKind::parameter, "trace_correlator: t must be non-negative");
    require(obs.f.size() == a.bonds.size(), ErrorKind::validation, "trace_correlator: dimension mismatch");
    const Eigen::MatrixXcd p = matrix_power(evolution(a, mg, k), t);
    const Eigen::MatrixXcd z = (p * obs.f.asDiagonal()) * p.adjoint();
    cplx tr = 0.0;
    for (Eigen::Index b = 0; b < z.rows(); ++b)
        tr += std::conj(obs.f(b)) * z(b, b);
    require(std::abs(tr.imag()) <= kImagResidue * std::max(1.0, obs.f.squaredNorm()), ErrorKind::numerical,
            "trace_correlator: imaginary residue too large (complex observable?)");
    return tr.real();
}

Eigen::MatrixXd m_tilde(const Assembly& a, const MetricGraph& mg, int t, const KGrid& grid) {
    require(t >= 0, ErrorKind::parameter, "m_tilde: t must be non-negative");
    const int n = a.bonds.size();
    const auto ks = grid.points();
    auto per_k = parallel_map<Eigen::MatrixXd>(ks.size(), [&](std::size_t s) {
        const Eigen::MatrixXcd u = evolution(a, mg, ks[s]);
        const auto rows = sparse_rows(u);
        Eigen::MatrixXcd p = Eigen::MatrixXcd::Identity(n, n);
        for (int i = 0; i < t; ++i)
            p = times_sparse(p, u, rows);
        return Eigen::MatrixXd(p.cwiseAbs2());
    });
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(n, n);
    for (const auto& m : per_k)
        acc += m;
    acc /= static_cast<double>(ks.size());

    const double row_dev = (acc.rowwise().sum().array() - 1.0).abs().maxCoeff();
    const double col_dev = (acc.colwise().sum().array() - 1.0).abs().maxCoeff();
    require(std::max(row_dev, col_dev) < 1e-8, ErrorKind::numerical, "m_tilde: result is not doubly stochastic");
    return acc;
}

double FejerWeights::operator()(int t) const {
    if (t < -T || t > T)
        return 0.0;
    return values[static_cast<std::size_t>(t + T)];
}

FejerWeights fejer(int T) {
    require(T >= 1, ErrorKind::parameter, "fejer: horizon T must be >= 1");
    FejerWeights w;
    w.T = T;
    w.values.resize(static_cast<std::size_t>(2 * T + 1));
    for (int t = -T; t <= T; ++t)
        w.values[static_cast<std::size_t>(t + T)] = std::abs(t) < T ? (1.0 - std::abs(t) / double(T)) / T : 0.0;
    return w;
}

double fejer_kernel(int T, double x) {
    require(T >= 1, ErrorKind::parameter, "fejer_kernel: horizon T must be >= 1");
    const double tx = T * x;
    if (std::abs(tx) < 1e-4) {
        // 2(1 - cos y)/y^2 = 1 - y^2/12 + y^4/360 - ...
        const double y2 = tx * tx;
        return 1.0 - y2 / 12.0 + y2 * y2 / 360.0;
    }
    return 2.0 * (1.0 - std::cos(tx)) / (tx * tx);
}

LemmaSides lemma_a_sides(const Eigen::MatrixXcd& U, const Eigen::MatrixXcd& A, int T) {
    require(A.rows() == U.rows() && A.cols() == U.cols(), ErrorKind::parameter, "lemma_a: size mismatch");
    const auto basis = eigenbasis(U); // also checks unitarity
    const auto n = static_cast<double>(U.rows());

    LemmaSides out;
    for (Eigen::Index j = 0; j < U.rows(); ++j)
        out.lhs += std::norm(basis.vectors.col(j).dot(A * basis.vectors.col(j)));
    out.lhs /= n;

    const auto w = fejer(T);
    cplx rhs = 0.0;
    Eigen::MatrixXcd p = Eigen::MatrixXcd::Identity(U.rows(), U.cols());
    for (int t = 0; t <= T; ++t) {
        if (t > 0)
            p = p * U;
        const cplx forward = (A.adjoint() * p * A * p.adjoint()).trace();
        rhs += w(t) * forward;
        if (t > 0)
            rhs += w(-t) * (A.adjoint() * p.adjoint() * A * p).trace();
    }
    require(std::abs(rhs.imag()) <= kImagResidue * std::max(1.0, A.squaredNorm()), ErrorKind::numerical,
            "lemma_a: imaginary residue too large");
    out.rhs = rhs.real() / n;
    return out;
}

} // namespace qge
