#include "doctest.h"

#include "qge/error.hpp"
#include "qge/scattering.hpp"

#include <cmath>
#include <complex>

using namespace qge;

namespace {

// Long-long identity check, independent of the library's own.
bool skew_identities(const Eigen::MatrixXi& h) {
    const auto m = h.rows();
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j < m; ++j) {
            if (std::abs(h(i, j)) != 1)
                return false;
            if (h(i, j) + h(j, i) != (i == j ? 2 : 0))
                return false;
            long long dot = 0;
            for (Eigen::Index k = 0; k < m; ++k)
                dot += static_cast<long long>(h(i, k)) * h(j, k);
            if (dot != (i == j ? m : 0))
                return false;
        }
    return true;
}

} // namespace

TEST_CASE("kirchhoff") {
    auto s2 = kirchhoff_sigma(2);
    CHECK(s2.sigma(0, 0) == std::complex<double>(0.0));
    CHECK(s2.sigma(0, 1) == std::complex<double>(1.0));
    auto s4 = kirchhoff_sigma(4);
    CHECK(s4.sigma(2, 2).real() == doctest::Approx(-0.5));
    CHECK(s4.sigma(1, 3).real() == doctest::Approx(0.5));
    for (int d = 2; d <= 16; ++d) {
        auto s = kirchhoff_sigma(d).sigma;
        CHECK((s * s - Eigen::MatrixXcd::Identity(d, d)).cwiseAbs().maxCoeff() < 1e-12);
        CHECK(unitarity_defect(s) < 1e-10);
    }
    CHECK_FALSE(is_equi_transmitting(s4.sigma, 1e-9));
}

TEST_CASE("skew-Hadamard constructions") {
    Eigen::MatrixXi h2(2, 2);
    h2 << 1, 1, -1, 1;
    CHECK(skew_hadamard(2).h == h2);
    for (int m = 2; m <= 64; m += 2) {
        if (!skew_hadamard_constructible(m)) {
            CHECK_THROWS_AS(skew_hadamard(m), Error);
            continue;
        }
        auto h = skew_hadamard(m).h;
        CHECK(h.rows() == m);
        CHECK(skew_identities(h));
        CHECK(is_skew_hadamard(h));
    }
    for (int m : {2, 4, 8, 12, 16, 20, 24, 32, 44, 48, 64})
        CHECK(skew_hadamard_constructible(m));
    for (int m : {3, 5, 6, 10, 18, 28})
        CHECK_FALSE(skew_hadamard_constructible(m));
    try {
        skew_hadamard(6);
        FAIL("expected error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::construction);
    }
    Eigen::MatrixXi bad = h2;
    bad(0, 1) = -1;
    CHECK_FALSE(is_skew_hadamard(bad));
}

TEST_CASE("equi-transmitting matrices") {
    auto s2 = equi_transmitting_sigma(2).sigma;
    CHECK(s2(0, 1).real() == 1.0);
    CHECK(s2(1, 0).real() == -1.0);
    CHECK(s2(0, 0) == std::complex<double>(0.0));

    for (int d : {2, 4, 8, 12, 16, 20, 24, 32}) {
        auto s = equi_transmitting_sigma(d).sigma;
        CHECK(unitarity_defect(s) < 1e-12);
        CHECK(is_equi_transmitting(s, 1e-9));
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                if (i != j)
                    CHECK(std::abs(s(i, j)) == doctest::Approx(1.0 / std::sqrt(d - 1.0)));
    }
    try {
        equi_transmitting_sigma(3);
        FAIL("expected error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::nonexistent);
    }
    try {
        equi_transmitting_sigma(6);
        FAIL("expected error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::construction);
    }

    // Discrete Fourier matrix: unitary, equal moduli, but nonzero diagonal.
    Eigen::MatrixXcd f(4, 4);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            f(i, j) = std::polar(0.5, 2.0 * M_PI * i * j / 4.0);
    CHECK(unitarity_defect(f) < 1e-12);
    CHECK_FALSE(is_equi_transmitting(f, 1e-9));
}

TEST_CASE("sigma kinds and CSV") {
    CHECK(parse_sigma_kind("et") == SigmaKind::equi_transmitting);
    CHECK(parse_sigma_kind("kirchhoff") == SigmaKind::kirchhoff);
    CHECK_THROWS_AS(parse_sigma_kind("bogus"), Error);
    CHECK(sigma_csv(equi_transmitting_sigma(2)) == "0,0,1,0\n-1,0,0,0\n");
}
