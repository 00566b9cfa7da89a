#include "doctest.h"

#include "qge/bounds.hpp"
#include "qge/error.hpp"
#include "qge/evolution.hpp"

#include <cmath>

using namespace qge;

namespace {

double brute_weighted(double theta, int T) {
    double s = 0.0;
    for (int t = 1; t <= T; ++t)
        s += t * std::pow(theta, t);
    return s;
}

double brute_fejer(double theta, int T) {
    auto w = fejer(T);
    double s = 0.0;
    for (int t = 1; t <= T; ++t)
        s += std::pow(theta, t) * w(t);
    return s;
}

bool close(double a, double b, double tol) { return std::abs(a - b) <= tol * std::max(1.0, std::abs(b)); }

} // namespace

TEST_CASE("summation closed forms") {
    CHECK(weighted_geo_sum(2.0, 3) == doctest::Approx(34.0));
    CHECK(weighted_geo_sum(0.0, 7) == 0.0);
    CHECK(weighted_geo_sum_inf(0.5) == doctest::Approx(2.0));
    double partial = 0.0;
    for (int t = 1; t < 200; ++t)
        partial += t * std::pow(0.5, t);
    CHECK(std::abs(partial - 2.0) < 1e-12);
    CHECK(fejer_geo_sum(2.0, 2) == doctest::Approx(0.5));
    CHECK(fejer_geo_sum(0.0, 4) == 0.0);
    CHECK(close(fejer_geo_sum(3.0, 5), brute_fejer(3.0, 5), 1e-12));

    for (double theta : {-3.0, -0.5, 0.5, 2.0, 3.0})
        for (int T = 1; T <= 20; ++T) {
            CHECK(close(weighted_geo_sum(theta, T), brute_weighted(theta, T), 1e-12));
            CHECK(close(fejer_geo_sum(theta, T), brute_fejer(theta, T), 1e-12));
        }
    CHECK_THROWS_AS(weighted_geo_sum(1.0, 3), Error);
    CHECK_THROWS_AS(weighted_geo_sum_inf(1.5), Error);
    CHECK_THROWS_AS(fejer_geo_sum(1.0, 3), Error);
}

TEST_CASE("explicit variance bound") {
    BoundInputs in{1.0, 4, 1.0, 3, 10, 40};
    auto b = explicit_variance_bound(in);
    // Hand assembly: K = 15/2, diag 1/3, walk 2*7.5*3*2/3, cycles (1/3)(3/4)(27)(10)/(9*40).
    CHECK(b.K == doctest::Approx(7.5));
    CHECK(b.diag == doctest::Approx(1.0 / 3.0));
    CHECK(b.walk == doctest::Approx(30.0));
    CHECK(b.cycles == doctest::Approx((1.0 / 3.0) * 0.75 * 27.0 * 10.0 / 360.0));
    CHECK(b.total == doctest::Approx(b.diag + b.walk + b.cycles));

    in.census = 0;
    CHECK(explicit_variance_bound(in).cycles == 0.0);

    BoundInputs base{1.0, 4, 0.8, 2, 12, 60};
    auto t0 = explicit_variance_bound(base);
    auto scaled = base;
    scaled.kappa = 3.0;
    auto t1 = explicit_variance_bound(scaled);
    CHECK(t1.diag == doctest::Approx(9.0 * t0.diag));
    CHECK(t1.walk == doctest::Approx(9.0 * t0.walk));
    CHECK(t1.cycles == doctest::Approx(9.0 * t0.cycles));
    auto probe = base;
    probe.kappa += 1e-3;
    CHECK(explicit_variance_bound(probe).total > t0.total);
    probe = base;
    probe.census += 1;
    CHECK(explicit_variance_bound(probe).total > t0.total);
    probe = base;
    probe.B += 1;
    CHECK(explicit_variance_bound(probe).total < t0.total);

    // Gap above the decay-estimate range is clamped.
    auto big = explicit_variance_bound({1.0, 4, 1.9, 1, 0, 10});
    CHECK(big.beta_eff == doctest::Approx(3.0 - std::sqrt(3.0)));

    try {
        explicit_variance_bound({1.0, 4, 2.5, 2, 0, 10});
        FAIL("expected error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::domain);
    }
}

TEST_CASE("horizon") {
    CHECK(choose_horizon(81, 4) == 1);
    CHECK(choose_horizon(59049, 4) == 3);
    CHECK(choose_horizon(2, 4) == 1);
    CHECK(choose_horizon(1 << 20, 3) == 6);
}

TEST_CASE("Wormald evaluator") {
    WormaldParams p{100.0, 4, 3.0, 500.0, std::exp(1.0)};
    CHECK(wormald_log_probability(p) == doctest::Approx(-5.0 * 27.0));
    WormaldParams q{100.0, 4, 3.0, 500.0, 4.0};
    auto q2 = q;
    q2.S *= 2;
    CHECK(wormald_probability(q2) < wormald_probability(q));

    auto s = wormald_setup(243.0, 4);
    CHECK(s.k == doctest::Approx(3.0));
    CHECK(s.S == 5670.0);
    CHECK(s.A == doctest::Approx(3.5));
    CHECK(wormald_log_probability(s) <= -5.0 * std::pow(243.0, 0.6) + 1e-9);
    CHECK_THROWS_AS(wormald_probability({10.0, 4, 2.0, 1.0, 2.0}), Error);
    CHECK_THROWS_AS(wormald_probability({10.0, 4, 3.0, 1.0, 1.0}), Error);
}

TEST_CASE("experiment config") {
    auto c = parse_experiment_config("# sweep\nd=4\nn_list=10,20\nseeds=1-3,7\nK=50\nsamples=20\nkappa=1\n");
    CHECK(c.n_list == std::vector<int>{10, 20});
    CHECK(c.seeds == std::vector<std::uint64_t>{1, 2, 3, 7});
    CHECK(c.K == 50.0);
    CHECK_THROWS_AS(parse_experiment_config("d=4\nseeds=1\n"), Error);
    CHECK_THROWS_AS(parse_experiment_config("d=4\nn_list=10\nseeds=1\nbogus=2\n"), Error);
    CHECK_THROWS_AS(parse_experiment_config("d=3\nn_list=9\nseeds=1\n"), Error);
    try {
        parse_experiment_config("d=4\nn_list=10\nseeds=x\n");
        FAIL("expected error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::parse);
    }
}

TEST_CASE("small family experiment") {
    auto c = parse_experiment_config("d=4\nn_list=10,12\nseeds=1,2\nK=40\nsamples=16\n");
    auto r = family_experiment(c);
    REQUIRE(r.rows.size() == 5);
    CHECK(r.rows[0].n == 10);
    CHECK(r.rows[2].n == 12);
    CHECK(r.rows[4].observable == "constant");
    CHECK(r.rows[4].variance == 0.0);
    for (int i = 0; i < 4; ++i) {
        CHECK(r.rows[i].variance > 0.0);
        if (!std::isnan(r.rows[i].bound))
            CHECK(r.rows[i].variance <= r.rows[i].bound);
    }
    auto csv = experiment_csv(r);
    CHECK(csv.rfind("n,B,beta,girth,census,T,variance,bound,seed,stderr,observable,status\n", 0) == 0);
    CHECK(csv == experiment_csv(family_experiment(c)));
    CHECK(experiment_metadata_json(r).find("\"terms\"") != std::string::npos);
}
