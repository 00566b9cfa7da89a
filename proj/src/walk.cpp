#include "qge/walk.hpp"

#include "qge/error.hpp"
#include "text.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <sstream>

namespace qge {

namespace {

constexpr double kStochasticTol = 1e-10;
constexpr double kIdentityTol = 1e-10;
constexpr double kMembershipTol = 1e-10;

} // namespace

WalkMatrix classical_map(const Assembly& a) {
    WalkMatrix w;
    w.M = a.S.cwiseAbs2();
    w.d = a.bonds.n > 0 ? (2 * a.bonds.B) / a.bonds.n : 0;
    const double rows = (w.M.rowwise().sum().array() - 1.0).abs().maxCoeff();
    const double cols = (w.M.colwise().sum().array() - 1.0).abs().maxCoeff();
    require(std::max(rows, cols) <= kStochasticTol, ErrorKind::assembly,
            "classical map: |S|^2 is not doubly stochastic (assembly corrupted)");
    return w;
}

VertexBasis vertex_basis(const BondIndex& bi) {
    VertexBasis vb;
    vb.e = Eigen::MatrixXd::Zero(bi.size(), bi.n);
    vb.e_tilde = Eigen::MatrixXd::Zero(bi.size(), bi.n);
    for (int b = 0; b < bi.size(); ++b) {
        vb.e(b, bi.tail[b]) = 1.0;
        vb.e_tilde(b, bi.head[b]) = 1.0;
    }
    vb.d = bi.n > 0 ? bi.size() / bi.n : 0;
    return vb;
}

WalkIdentityReport walk_action_identities(const WalkMatrix& w, const BondIndex& bi, const VertexBasis& basis) {
    const int d = basis.d;
    require(d >= 3, ErrorKind::domain, "walk identities: need d >= 3");
    WalkIdentityReport r;

    r.equi_transmitting = true;
    const double weight = 1.0 / (d - 1);
    for (int b = 0; b < bi.size() && r.equi_transmitting; ++b)
        for (int c = 0; c < bi.size(); ++c) {
            const double m = w.M(b, c);
            const bool allowed = bi.head[b] == bi.tail[c] && c != bi.rev[b];
            if ((allowed && std::abs(m - weight) > 1e-12) || (!allowed && m != 0.0)) {
                r.equi_transmitting = false;
                break;
            }
        }

    // Adjacency recovered from the pairing <e_i, e~_j> = C_ij.
    const Eigen::MatrixXd C = basis.e.transpose() * basis.e_tilde;
    const Eigen::MatrixXd me = w.M * basis.e;
    const Eigen::MatrixXd met = w.M * basis.e_tilde;
    const Eigen::MatrixXd expected_in = (basis.e_tilde * C - basis.e) / (d - 1.0);
    r.out_deviation = (me - basis.e_tilde).cwiseAbs().maxCoeff();
    r.in_deviation = (met - expected_in).cwiseAbs().maxCoeff();

    if (r.equi_transmitting)
        require(r.max_deviation() <= kIdentityTol, ErrorKind::identity,
                "walk identities fail on an equi-transmitting walk (deviation " + detail::num(r.max_deviation()) +
                    ")");
    return r;
}

SingularProfile singular_profile(const WalkMatrix& w) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(w.M.transpose() * w.M, Eigen::EigenvaluesOnly);
    require(solver.info() == Eigen::Success, ErrorKind::numerical, "singular profile: eigensolver failed");
    SingularProfile p;
    for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i)
        p.values.push_back(std::sqrt(std::max(0.0, solver.eigenvalues()(i))));
    std::sort(p.values.begin(), p.values.end(), std::greater<>());
    for (double v : p.values) {
        if (!p.clusters.empty() && std::abs(p.clusters.back().value - v) <= 1e-7)
            ++p.clusters.back().multiplicity;
        else
            p.clusters.push_back({v, 1});
    }
    return p;
}

std::string singular_csv(const SingularProfile& p) {
    std::string out = "value,multiplicity\n";
    for (const auto& c : p.clusters)
        out += detail::num(c.value) + "," + std::to_string(c.multiplicity) + "\n";
    return out;
}

Eigen::MatrixXd j_block(int d) {
    const double s = (d - 1.0) * (d - 1.0);
    return ((d - 2.0) * Eigen::MatrixXd::Ones(d, d) + Eigen::MatrixXd::Identity(d, d)) / s;
}

double gram_block_deviation(const WalkMatrix& w, const BondIndex& bi) {
    std::vector<int> order(static_cast<std::size_t>(bi.size()));
    for (int b = 0; b < bi.size(); ++b)
        order[static_cast<std::size_t>(b)] = b;
    std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return bi.tail[x] < bi.tail[y]; });

    const int d = bi.n > 0 ? bi.size() / bi.n : 0;
    const Eigen::MatrixXd gram = w.M.transpose() * w.M;
    Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(bi.size(), bi.size());
    for (int v = 0; v < bi.n; ++v)
        expected.block(v * d, v * d, d, d) = j_block(d);

    double dev = 0.0;
    for (int i = 0; i < bi.size(); ++i)
        for (int j = 0; j < bi.size(); ++j)
            dev = std::max(dev, std::abs(gram(order[i], order[j]) - expected(i, j)));
    return dev;
}

double z_closed_form(double mu, int d, int t) {
    using c = std::complex<double>;
    const double s = std::sqrt(d - 1.0);
    const c omega = mu / (2.0 * s);
    const c root = std::sqrt(omega * omega - 1.0);
    const c rp = (omega + root) / s;
    const c rm = (omega - root) / s;
    const c z = s / (2.0 * root) * (std::pow(rp, t) - std::pow(rm, t));
    return z.real();
}

double z_critical(int d, int t, int sign) {
    const double sgn = (sign < 0 && (t - 1) % 2 != 0) ? -1.0 : 1.0;
    return sgn * t / std::pow(d - 1.0, 0.5 * (t - 1));
}

ZSequence z_sequence(double mu, int d, int T, double beta) {
    require(d >= 3, ErrorKind::parameter, "z_sequence: need d >= 3");
    require(T >= 0, ErrorKind::parameter, "z_sequence: T must be non-negative");
    ZSequence zs;
    zs.z.resize(static_cast<std::size_t>(T) + 1);
    zs.z[0] = 0.0;
    if (T >= 1)
        zs.z[1] = 1.0;
    for (int t = 2; t <= T; ++t)
        zs.z[t] = (mu * zs.z[t - 1] - zs.z[t - 2]) / (d - 1.0);

    const double omega = mu / (2.0 * std::sqrt(d - 1.0));
    if (std::abs(std::abs(omega) - 1.0) > 1e-3) {
        zs.closed_checked = true;
        zs.closed.resize(zs.z.size());
        for (int t = 0; t <= T; ++t) {
            zs.closed[t] = z_closed_form(mu, d, t);
            const double scale = std::max(std::abs(zs.z[t]), std::pow(d - 1.0, -0.5 * (t - 1)));
            zs.closed_deviation = std::max(zs.closed_deviation, std::abs(zs.z[t] - zs.closed[t]) / scale);
        }
    }

    zs.bound_beta = beta;
    if (beta > 0.0 && std::abs(mu) <= d - beta) {
        const double rho = (d - 1.0 - beta) / (d - 1.0);
        for (int t = 1; t <= T; ++t) {
            const double bound = t * std::pow(rho, t - 1);
            if (std::abs(zs.z[t]) > bound * (1.0 + 1e-12))
                ++zs.bound_violations;
        }
    }
    return zs;
}

Eigen::MatrixXd c_hat(const Eigen::MatrixXd& C, int d) {
    const auto n = C.rows();
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    out.topRightCorner(n, n) = -Eigen::MatrixXd::Identity(n, n) / (d - 1.0);
    out.bottomLeftCorner(n, n) = Eigen::MatrixXd::Identity(n, n);
    out.bottomRightCorner(n, n) = C / (d - 1.0);
    return out;
}

Eigen::VectorXcd g1_coefficients(const VertexBasis& basis, const Eigen::VectorXcd& f) {
    require(f.size() == basis.e.rows(), ErrorKind::validation, "G1 coefficients: dimension mismatch");
    // The e_v are orthogonal with ||e_v||^2 = d.
    const Eigen::VectorXcd a = basis.e.transpose().cast<cplx>() * f / static_cast<double>(basis.d);
    const Eigen::VectorXcd residual = f - basis.e.cast<cplx>() * a;
    require(residual.norm() <= kMembershipTol * std::max(1.0, f.norm()), ErrorKind::domain,
            "observable is not in G1 = span{e_v}");
    return a;
}

Eigen::VectorXcd psi(const VertexBasis& basis, const Eigen::VectorXcd& x) {
    const auto n = basis.e.cols();
    require(x.size() == 2 * n, ErrorKind::validation, "psi: expected a vector of length 2n");
    return basis.e.cast<cplx>() * x.head(n) + basis.e_tilde.cast<cplx>() * x.tail(n);
}

Eigen::VectorXcd g2_projection(const VertexBasis& basis, const Eigen::VectorXcd& g) {
    const Eigen::VectorXcd a = basis.e.transpose().cast<cplx>() * g / static_cast<double>(basis.d);
    return g - basis.e.cast<cplx>() * a;
}

double reduced_consistency(const Graph& g, const WalkMatrix& w, const VertexBasis& basis, const Eigen::VectorXcd& f,
                           int t) {
    require(t >= 0, ErrorKind::parameter, "reduced consistency: t must be non-negative");
    const auto n = g.n();
    const Eigen::VectorXcd a = g1_coefficients(basis, f);

    const Eigen::MatrixXcd ch = c_hat(g.adjacency(), g.d()).cast<cplx>();
    Eigen::VectorXcd x = Eigen::VectorXcd::Zero(2 * n);
    x.head(n) = a;
    Eigen::VectorXcd walked = f;
    const Eigen::MatrixXcd m = w.M.cast<cplx>();
    for (int s = 0; s < t; ++s) {
        x = ch * x;
        walked = m * walked;
    }
    return (psi(basis, x) - walked).cwiseAbs().maxCoeff();
}

double g2_contraction(const WalkMatrix& w, const VertexBasis& basis, const Eigen::VectorXcd& g) {
    require(g.size() == w.M.rows(), ErrorKind::validation, "G2 contraction: dimension mismatch");
    const double norm = g.norm();
    require(norm > 0.0, ErrorKind::domain, "G2 contraction: zero vector");
    const Eigen::VectorXcd a = basis.e.transpose().cast<cplx>() * g;
    require(a.norm() / std::sqrt(static_cast<double>(basis.d)) <= kMembershipTol * std::max(1.0, norm),
            ErrorKind::domain, "vector is not orthogonal to G1 = span{e_v}");
    return (w.M.cast<cplx>() * g).norm() / norm;
}

const char* to_string(BoundKind k) noexcept {
    switch (k) {
    case BoundKind::theorem: return "theorem";
    case BoundKind::g1_proposition: return "g1_proposition";
    case BoundKind::none: return "none";
    }
    return "none";
}

double z_bound_gap_limit(int d) { return d - 1.0 - std::sqrt(d - 1.0); }

DecayProfile decay_profile(const WalkMatrix& w, const VertexBasis& basis, const Eigen::VectorXcd& f, int T,
                           double beta) {
    require(T >= 1, ErrorKind::parameter, "decay profile: T must be >= 1");
    require(f.size() == w.M.rows(), ErrorKind::validation, "decay profile: dimension mismatch");
    require(std::abs(f.sum()) < 1e-12 * static_cast<double>(f.size()) * std::max(1.0, f.cwiseAbs().maxCoeff()),
            ErrorKind::domain, "decay profile: observable must be traceless");
    const int d = basis.d;

    DecayProfile p;
    p.beta = beta;
    p.beta_eff = std::min(beta, z_bound_gap_limit(d));
    const double rho = (d - 1.0 - p.beta_eff) / (d - 1.0);
    const double fnorm = f.norm();

    bool in_g1 = false;
    if (beta > 0.0 && beta >= d - 2.0) {
        const Eigen::VectorXcd a = basis.e.transpose().cast<cplx>() * f / static_cast<double>(d);
        in_g1 = (f - basis.e.cast<cplx>() * a).norm() <= kMembershipTol * std::max(1.0, fnorm);
    }
    if (beta > 0.0 && beta < d - 2.0) {
        p.kind = BoundKind::theorem;
        p.K = 5.0 * (d - 1.0) / (2.0 * (d - 2.0 - p.beta_eff));
    } else if (in_g1) {
        p.kind = BoundKind::g1_proposition;
    }

    Eigen::VectorXcd x = f;
    const Eigen::MatrixXcd m = w.M.cast<cplx>();
    for (int t = 1; t <= T; ++t) {
        x = m * x;
        DecayRow row{t, x.norm(), std::numeric_limits<double>::quiet_NaN()};
        if (p.kind == BoundKind::theorem)
            row.bound = p.K * fnorm * t * std::pow(rho, t);
        else if (p.kind == BoundKind::g1_proposition)
            row.bound = 2.0 * fnorm * t * std::pow(rho, t - 1);
        if (!std::isnan(row.bound) && row.norm > row.bound)
            ++p.violations;
        p.rows.push_back(row);
    }
    return p;
}

std::string decay_csv(const DecayProfile& p) {
    std::string out = "t,norm,bound,bound_kind\n";
    for (const auto& r : p.rows)
        out += std::to_string(r.t) + "," + detail::num(r.norm) + "," + (std::isnan(r.bound) ? "" : detail::num(r.bound)) +
               "," + to_string(p.kind) + "\n";
    return out;
}

} // namespace qge
