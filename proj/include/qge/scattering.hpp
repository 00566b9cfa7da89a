#pragma once

#include <Eigen/Dense>

#include <string>

namespace qge {

/// d x d unitary vertex scattering matrix sigma_v.
struct VertexScattering {
    Eigen::MatrixXcd sigma;
    int size() const { return static_cast<int>(sigma.rows()); }
};

/// +-1 matrix with H + H^T = 2I and H H^T = m I.
struct SkewHadamard {
    Eigen::MatrixXi h;
    int order() const { return static_cast<int>(h.rows()); }
};

enum class SigmaKind { kirchhoff, equi_transmitting };

const char* to_string(SigmaKind kind) noexcept;
SigmaKind parse_sigma_kind(const std::string& name);

/// (sigma)_ij = 2/d - delta_ij.
VertexScattering kirchhoff_sigma(int d);

/// Orders reachable from 2 and Paley (q + 1, q prime, q = 3 mod 4) by doubling.
bool skew_hadamard_constructible(int m);

/// Exact construction. Throws Error(construction) naming the supported set.
SkewHadamard skew_hadamard(int m);

/// Exact integer check of both defining identities.
bool is_skew_hadamard(const Eigen::MatrixXi& h);

/// (H - I)/sqrt(d-1): zero diagonal, off-diagonal moduli 1/sqrt(d-1).
/// d = 3 throws Error(nonexistent); other unsupported d throw Error(construction).
VertexScattering equi_transmitting_sigma(int d);

VertexScattering make_sigma(SigmaKind kind, int d);

bool is_equi_transmitting(const Eigen::MatrixXcd& m, double tol);

/// max |(A A^* - I)_ij|
double unitarity_defect(const Eigen::MatrixXcd& a);

/// Row-major "re,im" pairs, one matrix row per line.
std::string sigma_csv(const VertexScattering& s);

} // namespace qge
