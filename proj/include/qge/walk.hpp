#pragma once

#include "qge/evolution.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace qge {

/// M(b, c) = |S(b, c)|^2, doubly stochastic.
struct WalkMatrix {
    Eigen::MatrixXd M;
    int d = 0;
};

/// Throws Error(assembly) if a row or column sum is off by more than 1e-10.
WalkMatrix classical_map(const Assembly& a);

/// Columns e.col(v): bonds leaving v. Columns e_tilde.col(v): bonds entering v.
struct VertexBasis {
    Eigen::MatrixXd e;
    Eigen::MatrixXd e_tilde;
    int d = 0;
};

VertexBasis vertex_basis(const BondIndex& bi);

struct WalkIdentityReport {
    bool equi_transmitting = false; // M has the zero-reflection, equal-weight pattern
    double out_deviation = 0.0;     // max |M e_v - e~_v|
    double in_deviation = 0.0;      // max |M e~_v - (sum_{w~v} e~_w - e_v)/(d-1)|
    double max_deviation() const { return out_deviation > in_deviation ? out_deviation : in_deviation; }
};

/// Throws Error(identity) when the input looks equi-transmitting but an
/// identity misses by more than 1e-10.
WalkIdentityReport walk_action_identities(const WalkMatrix& w, const BondIndex& bi, const VertexBasis& basis);

struct SingularCluster {
    double value = 0.0;
    int multiplicity = 0;
};

struct SingularProfile {
    std::vector<double> values; // decreasing
    std::vector<SingularCluster> clusters;
};

/// Square roots of the eigenvalues of M^T M; values within 1e-7 are clustered.
SingularProfile singular_profile(const WalkMatrix& w);
std::string singular_csv(const SingularProfile& p);

/// ((d-2) 11^T + I)/(d-1)^2, the common tail-vertex block of M^T M.
Eigen::MatrixXd j_block(int d);
/// Max deviation of M^T M from n copies of j_block(d) after grouping bonds by tail.
double gram_block_deviation(const WalkMatrix& w, const BondIndex& bi);

struct ZSequence {
    std::vector<double> z;         // recurrence, z_0..z_T
    std::vector<double> closed;    // closed form, empty when skipped
    bool closed_checked = false;
    double closed_deviation = 0.0; // max |z - closed| / max(|z_t|, (d-1)^{-(t-1)/2})
    double bound_beta = 0.0;
    int bound_violations = 0;      // t >= 1 with |z_t| > t ((d-1-beta)/(d-1))^{t-1}
};

/// z_0 = 0, z_1 = 1, z_t = (mu z_{t-1} - z_{t-2})/(d-1). The closed form is
/// skipped when ||omega| - 1| <= 1e-3, omega = mu / (2 sqrt(d-1)). The bound
/// is checked only when beta > 0 and |mu| <= d - beta.
ZSequence z_sequence(double mu, int d, int T, double beta = 0.0);
/// Closed form through complex roots; valid for |omega| != 1.
double z_closed_form(double mu, int d, int t);
/// Value at |mu| = 2 sqrt(d-1): t / (d-1)^{(t-1)/2}, times sign^(t-1).
double z_critical(int d, int t, int sign = 1);

/// [[0, -I/(d-1)], [I, C/(d-1)]].
Eigen::MatrixXd c_hat(const Eigen::MatrixXd& C, int d);

/// Coefficients a_v with f = sum_v a_v e_v; Error(domain) if f is not in G1
/// within 1e-10 * max(1, ||f||).
Eigen::VectorXcd g1_coefficients(const VertexBasis& basis, const Eigen::VectorXcd& f);
/// sum_v a_v e_v + b_v e~_v for x = (a, b).
Eigen::VectorXcd psi(const VertexBasis& basis, const Eigen::VectorXcd& x);
/// Component of g orthogonal to span{e_v}.
Eigen::VectorXcd g2_projection(const VertexBasis& basis, const Eigen::VectorXcd& g);

/// max |psi(C_hat^t phi~(f)) - M^t f| for f in G1.
double reduced_consistency(const Graph& g, const WalkMatrix& w, const VertexBasis& basis, const Eigen::VectorXcd& f,
                           int t);

/// ||M g|| / ||g|| for g in G2; Error(domain) otherwise (tolerance 1e-10).
double g2_contraction(const WalkMatrix& w, const VertexBasis& basis, const Eigen::VectorXcd& g);

enum class BoundKind { theorem, g1_proposition, none };
const char* to_string(BoundKind k) noexcept;

/// Largest gap for which |z_t| <= t ((d-1-beta)/(d-1))^{t-1} holds for every
/// |mu| <= d - beta: d - 1 - sqrt(d-1).
double z_bound_gap_limit(int d);

struct DecayRow {
    int t = 0;
    double norm = 0.0;
    double bound = 0.0; // NaN when no bound applies
};

struct DecayProfile {
    BoundKind kind = BoundKind::none;
    double beta = 0.0;     // measured gap
    double beta_eff = 0.0; // gap entering the bound
    double K = 0.0;        // theorem constant, 0 unless kind == theorem
    std::vector<DecayRow> rows;
    int violations = 0;
};

/// ||M^t f|| for t = 1..T against
///   theorem:        K ||f|| t rho^t,       K = 5(d-1)/(2(d-2-beta)), beta < d-2
///   g1_proposition: 2 ||f|| t rho^{t-1},   f in G1 and beta >= d-2
/// with rho = (d-1-beta_eff)/(d-1), beta_eff = min(beta, z_bound_gap_limit(d)).
/// Error(domain) unless f is traceless.
DecayProfile decay_profile(const WalkMatrix& w, const VertexBasis& basis, const Eigen::VectorXcd& f, int T,
                           double beta);

/// "t,norm,bound,bound_kind"
std::string decay_csv(const DecayProfile& p);

} // namespace qge
