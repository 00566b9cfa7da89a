#include "qge/scattering.hpp"

#include "qge/error.hpp"

#include <cmath>
#include <cstdio>

namespace qge {

const char* to_string(SigmaKind kind) noexcept {
    return kind == SigmaKind::kirchhoff ? "kirchhoff" : "et";
}

SigmaKind parse_sigma_kind(const std::string& name) {
    if (name == "kirchhoff")
        return SigmaKind::kirchhoff;
    if (name == "et" || name == "equi-transmitting")
        return SigmaKind::equi_transmitting;
    fail(ErrorKind::parameter, "unknown scattering rule '" + name + "' (use et or kirchhoff)");
}

VertexScattering kirchhoff_sigma(int d) {
    require(d >= 2, ErrorKind::parameter, "kirchhoff_sigma: degree must be >= 2");
    Eigen::MatrixXcd s = Eigen::MatrixXcd::Constant(d, d, 2.0 / d);
    s.diagonal().array() -= 1.0;
    return {s};
}

namespace {

bool is_prime(int q) {
    if (q < 2)
        return false;
    for (int p = 2; p * p <= q; ++p)
        if (q % p == 0)
            return false;
    return true;
}

bool paley_order(int m) {
    const int q = m - 1;
    return is_prime(q) && q % 4 == 3;
}

// Legendre symbol of a mod prime q, a != 0 mod q.
int legendre(int a, int q) {
    a = ((a % q) + q) % q;
    long long r = 1, base = a;
    for (int e = (q - 1) / 2; e > 0; e >>= 1) {
        if (e & 1)
            r = r * base % q;
        base = base * base % q;
    }
    return r == 1 ? 1 : -1;
}

Eigen::MatrixXi paley(int m) {
    const int q = m - 1;
    // H = I + S, S = [[0, 1^T], [-1, Q]] with Q the (skew) Jacobsthal matrix.
    Eigen::MatrixXi s = Eigen::MatrixXi::Zero(m, m);
    for (int j = 1; j < m; ++j) {
        s(0, j) = 1;
        s(j, 0) = -1;
    }
    for (int i = 0; i < q; ++i)
        for (int j = 0; j < q; ++j)
            if (i != j)
                s(i + 1, j + 1) = legendre(j - i, q);
    return Eigen::MatrixXi::Identity(m, m) + s;
}

Eigen::MatrixXi doubled(const Eigen::MatrixXi& h) {
    // [[H, H], [H - 2I, 2I - H]] keeps both identities at twice the order.
    const int m = static_cast<int>(h.rows());
    const Eigen::MatrixXi two = 2 * Eigen::MatrixXi::Identity(m, m);
    Eigen::MatrixXi out(2 * m, 2 * m);
    out.topLeftCorner(m, m) = h;
    out.topRightCorner(m, m) = h;
    out.bottomLeftCorner(m, m) = h - two;
    out.bottomRightCorner(m, m) = two - h;
    return out;
}

} // namespace

bool skew_hadamard_constructible(int m) {
    if (m == 2 || (m > 2 && paley_order(m)))
        return true;
    return m > 2 && m % 2 == 0 && skew_hadamard_constructible(m / 2);
}

SkewHadamard skew_hadamard(int m) {
    if (!skew_hadamard_constructible(m))
        fail(ErrorKind::construction,
             "skew_hadamard: order " + std::to_string(m) +
                 " unsupported; supported orders are 2, q+1 for primes q = 3 mod 4, and doublings of these");
    if (m == 2) {
        Eigen::MatrixXi h(2, 2);
        h << 1, 1, -1, 1;
        return {h};
    }
    if (paley_order(m))
        return {paley(m)};
    return {doubled(skew_hadamard(m / 2).h)};
}

bool is_skew_hadamard(const Eigen::MatrixXi& h) {
    const int m = static_cast<int>(h.rows());
    if (m == 0 || h.cols() != m)
        return false;
    if ((h.array().abs() != 1).any())
        return false;
    const Eigen::MatrixXi id = Eigen::MatrixXi::Identity(m, m);
    return h + h.transpose() == 2 * id && h * h.transpose() == m * id;
}

VertexScattering equi_transmitting_sigma(int d) {
    if (d == 3)
        fail(ErrorKind::nonexistent, "equi_transmitting_sigma: no 3x3 equi-transmitting matrix exists");
    require(d >= 2, ErrorKind::construction, "equi_transmitting_sigma: degree must be >= 2");
    const auto h = skew_hadamard(d).h;
    Eigen::MatrixXd s = (h - Eigen::MatrixXi::Identity(d, d)).cast<double>() / std::sqrt(d - 1.0);
    return {s.cast<std::complex<double>>()};
}

VertexScattering make_sigma(SigmaKind kind, int d) {
    return kind == SigmaKind::kirchhoff ? kirchhoff_sigma(d) : equi_transmitting_sigma(d);
}

double unitarity_defect(const Eigen::MatrixXcd& a) {
    const auto n = a.rows();
    return (a * a.adjoint() - Eigen::MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff();
}

bool is_equi_transmitting(const Eigen::MatrixXcd& m, double tol) {
    const auto d = m.rows();
    if (d < 2 || m.cols() != d)
        return false;
    if (unitarity_defect(m) >= tol)
        return false;
    const double modulus = 1.0 / std::sqrt(static_cast<double>(d) - 1.0);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j) {
            const double a = std::abs(m(i, j));
            if (i == j ? a >= tol : std::abs(a - modulus) >= tol)
                return false;
        }
    return true;
}

std::string sigma_csv(const VertexScattering& s) {
    std::string out;
    char buf[64];
    for (int i = 0; i < s.size(); ++i) {
        for (int j = 0; j < s.size(); ++j) {
            std::snprintf(buf, sizeof buf, "%s%.17g,%.17g", j ? "," : "", s.sigma(i, j).real(),
                          s.sigma(i, j).imag());
            out += buf;
        }
        out += '\n';
    }
    return out;
}

} // namespace qge
