#include "doctest.h"

#include "fixtures.hpp"
#include "qge/error.hpp"
#include "qge/random.hpp"
#include "qge/walk.hpp"

#include <cmath>

using namespace qge;

namespace {

struct Instance {
    MetricGraph mg;
    Assembly a;
    WalkMatrix w;
    VertexBasis basis;
};

Instance make(Graph g, SigmaKind kind = SigmaKind::equi_transmitting) {
    auto L = random_lengths(g.bond_count(), 1);
    MetricGraph mg(std::move(g), std::move(L));
    auto a = build_assembly(mg, kind);
    auto w = classical_map(a);
    auto basis = vertex_basis(a.bonds);
    return {std::move(mg), std::move(a), std::move(w), std::move(basis)};
}

Eigen::VectorXcd random_vector(int n, Rng& rng) {
    Eigen::VectorXcd v(n);
    for (int i = 0; i < n; ++i)
        v(i) = cplx(rng.normal(), rng.normal());
    return v;
}

} // namespace

TEST_CASE("classical map entries") {
    auto et = make(fixtures::complete(5));
    for (int b = 0; b < 20; ++b) {
        int thirds = 0;
        for (int c = 0; c < 20; ++c)
            if (std::abs(et.w.M(b, c) - 1.0 / 3.0) < 1e-15)
                ++thirds;
        CHECK(thirds == 3);
    }
    auto kh = make(fixtures::complete(5), SigmaKind::kirchhoff);
    for (int b = 0; b < 20; ++b) {
        CHECK(kh.w.M(b, kh.a.bonds.rev[b]) == doctest::Approx(0.25));
        CHECK(kh.w.M.row(b).sum() == doctest::Approx(1.0));
    }
    for (auto* inst : {&et, &kh})
        CHECK((inst->w.M.colwise().sum().array() - 1.0).abs().maxCoeff() < 1e-12);

    Assembly broken = et.a;
    broken.S(0, broken.S.cols() - 1) = 0.5;
    try {
        classical_map(broken);
        FAIL("expected error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::assembly);
    }
}

TEST_CASE("vertex basis") {
    auto k5 = make(fixtures::complete(5));
    for (int v = 0; v < 5; ++v) {
        CHECK(k5.basis.e.col(v).squaredNorm() == 4.0);
        CHECK(k5.basis.e_tilde.col(v).squaredNorm() == 4.0);
    }
    CHECK((k5.basis.e.rowwise().sum().array() == 1.0).all());

    auto p = make(fixtures::petersen(), SigmaKind::kirchhoff);
    const Eigen::MatrixXd pairing = p.basis.e.transpose() * p.basis.e_tilde;
    CHECK(pairing == p.mg.graph().adjacency());
}

TEST_CASE("walk action identities") {
    auto k5 = make(fixtures::complete(5));
    auto r = walk_action_identities(k5.w, k5.a.bonds, k5.basis);
    CHECK(r.equi_transmitting);
    CHECK(r.max_deviation() < 1e-12);

    auto rnd = make(generate_random_regular(20, 4, 2));
    CHECK(walk_action_identities(rnd.w, rnd.a.bonds, rnd.basis).max_deviation() < 1e-10);

    auto kh = make(fixtures::complete(5), SigmaKind::kirchhoff);
    auto rk = walk_action_identities(kh.w, kh.a.bonds, kh.basis);
    CHECK_FALSE(rk.equi_transmitting);
    // M e_v = e~_v only needs stochastic rows; the reflection shows up in M e~_v.
    CHECK(rk.out_deviation < 1e-12);
    CHECK(rk.in_deviation > 0.1);

    // Mis-wired walk with the equi-transmitting pattern but wrong targets.
    WalkMatrix bad = k5.w;
    const int n = static_cast<int>(bad.M.rows());
    Eigen::MatrixXd perm = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
        perm(i, (i + 1) % n) = 1.0;
    bad.M = perm * bad.M * perm.transpose();
    auto rb = walk_action_identities(bad, k5.a.bonds, k5.basis);
    CHECK_FALSE(rb.equi_transmitting);
}

TEST_CASE("singular profile and tail blocks") {
    for (auto g : {fixtures::complete(5), generate_random_regular(20, 4, 5)}) {
        auto inst = make(g);
        const int n = g.n();
        auto p = singular_profile(inst.w);
        REQUIRE(p.values.size() == static_cast<std::size_t>(4 * n));
        for (int i = 0; i < n; ++i)
            CHECK(std::abs(p.values[i] - 1.0) < 1e-9);
        for (int i = n; i < 4 * n; ++i)
            CHECK(std::abs(p.values[i] - 1.0 / 3.0) < 1e-9);
        REQUIRE(p.clusters.size() == 2);
        CHECK(p.clusters[0].multiplicity == n);
        CHECK(p.clusters[1].multiplicity == 3 * n);
        CHECK(gram_block_deviation(inst.w, inst.a.bonds) < 1e-14);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> js(j_block(4));
    CHECK(js.eigenvalues()(3) == doctest::Approx(1.0));
    for (int i = 0; i < 3; ++i)
        CHECK(js.eigenvalues()(i) == doctest::Approx(1.0 / 9.0));
    auto csv = singular_csv(singular_profile(make(fixtures::complete(5)).w));
    CHECK(csv.rfind("value,multiplicity\n", 0) == 0);
    CHECK(csv.find(",5\n") != std::string::npos);
    CHECK(csv.find(",15\n") != std::string::npos);
}

TEST_CASE("z recurrence") {
    const int d = 4;
    auto z = z_sequence(0.7, d, 6);
    CHECK(z.z[0] == 0.0);
    CHECK(z.z[1] == 1.0);
    CHECK(z.z[2] == doctest::Approx(0.7 / 3.0));
    CHECK(z.z[3] == doctest::Approx((0.7 * z.z[2] - 1.0) / 3.0));

    const double crit = 2.0 * std::sqrt(3.0);
    for (int sign : {1, -1}) {
        auto zc = z_sequence(sign * crit, d, 40);
        CHECK_FALSE(zc.closed_checked);
        for (int t = 0; t <= 40; ++t)
            CHECK(std::abs(zc.z[t] - z_critical(d, t, sign)) <= 1e-10 * std::max(1.0, std::abs(zc.z[t])));
    }

    for (int i = 0; i < 200; ++i) {
        const double mu = -3.0 + 6.0 * i / 199.0;
        auto s = z_sequence(mu, d, 50, 1.0);
        if (s.closed_checked)
            CHECK(s.closed_deviation < 1e-9);
        CHECK(s.bound_violations == 0);
    }
}

TEST_CASE("reduced operator reproduces the walk on G1") {
    for (auto g : {fixtures::complete(5), generate_random_regular(20, 4, 9)}) {
        auto inst = make(g);
        Rng rng(3);
        for (int trial = 0; trial < 5; ++trial) {
            Eigen::VectorXcd a = random_vector(g.n(), rng);
            Eigen::VectorXcd f = inst.basis.e.cast<cplx>() * a;
            CHECK((g1_coefficients(inst.basis, f) - a).cwiseAbs().maxCoeff() < 1e-12);
            for (int t = 0; t <= 10; ++t)
                CHECK(reduced_consistency(g, inst.w, inst.basis, f, t) < 1e-10);
        }
        CHECK(reduced_consistency(g, inst.w, inst.basis, inst.basis.e.col(0).cast<cplx>(), 0) == 0.0);
        Eigen::VectorXcd stacked(2 * g.n());
        stacked.head(g.n()).setOnes();
        stacked.tail(g.n()).setConstant(-1.0);
        CHECK(psi(inst.basis, stacked).cwiseAbs().maxCoeff() == 0.0);
        Eigen::VectorXcd off = Eigen::VectorXcd::Zero(2 * g.bond_count());
        off(0) = 1.0;
        CHECK_THROWS_AS(reduced_consistency(g, inst.w, inst.basis, off, 2), Error);
    }
    auto k5 = make(fixtures::complete(5));
    Eigen::VectorXcd f = (k5.basis.e.col(0) - k5.basis.e.col(1)).cast<cplx>();
    for (int t = 0; t <= 10; ++t)
        CHECK(reduced_consistency(k5.mg.graph(), k5.w, k5.basis, f, t) < 1e-12);
}

TEST_CASE("G2 contraction") {
    auto inst = make(generate_random_regular(20, 4, 4));
    Rng rng(8);
    for (int i = 0; i < 20; ++i) {
        auto g = g2_projection(inst.basis, random_vector(80, rng));
        CHECK(std::abs(g2_contraction(inst.w, inst.basis, g) - 1.0 / 3.0) < 1e-9);
    }
    try {
        g2_contraction(inst.w, inst.basis, inst.basis.e.col(3).cast<cplx>());
        FAIL("expected error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::domain);
    }
}

TEST_CASE("decay profile") {
    auto k5 = make(fixtures::complete(5));
    Eigen::VectorXcd g1 = (k5.basis.e.col(0) - k5.basis.e.col(2)).cast<cplx>();
    auto p = decay_profile(k5.w, k5.basis, g1, 20, 3.0);
    CHECK(p.kind == BoundKind::g1_proposition);
    CHECK(p.violations == 0);
    CHECK(p.beta_eff == doctest::Approx(3.0 - std::sqrt(3.0)));

    Rng rng(2);
    Eigen::VectorXcd general = random_vector(20, rng);
    general.array() -= general.mean();
    CHECK(decay_profile(k5.w, k5.basis, general, 5, 3.0).kind == BoundKind::none);

    auto inst = make(generate_random_regular(20, 4, 1));
    const double beta = spectral_report(inst.mg.graph()).beta;
    REQUIRE(beta < 2.0);
    for (int i = 0; i < 10; ++i) {
        Eigen::VectorXcd f = random_vector(80, rng);
        f.array() -= f.mean();
        auto d = decay_profile(inst.w, inst.basis, f, 30, beta);
        CHECK(d.kind == BoundKind::theorem);
        CHECK(d.K == doctest::Approx(15.0 / (2.0 * (2.0 - d.beta_eff))));
        CHECK(d.violations == 0);
        CHECK(d.rows.size() == 30);
    }
    CHECK_THROWS_AS(decay_profile(inst.w, inst.basis, Eigen::VectorXcd::Ones(80), 5, beta), Error);

    auto csv = decay_csv(decay_profile(k5.w, k5.basis, g1, 2, 3.0));
    CHECK(csv.rfind("t,norm,bound,bound_kind\n1,", 0) == 0);
    CHECK(csv.find(",g1_proposition\n2,") != std::string::npos);
}
