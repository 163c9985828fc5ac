#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "nczw/stopping_czd.hpp"

using namespace nczw;

namespace {

struct Case {
    OperatorField f;
    Weight w;
    double lambda;
};

Case make_case(int d, int J, int m, std::uint64_t seed, double lambda_scale) {
    DyadicGrid g(d, J);
    Rng rng = Rng::split(900, seed);
    Case c{random_positive_field(g, m, rng, true), cascade_weight(g, 2.0, seed + 1), 0.0};
    c.lambda = lambda_scale * std::max(1e-8, lp_norm(c.f, 1.0));
    return c;
}

}  // namespace

TEST_CASE("cuculescu contract: membership, monotone, commutation, level bound") {
    for (std::uint64_t seed = 0; seed < 12; ++seed) {
        auto c = make_case(1, 5, 2, seed, 0.8);
        auto sf = cuculescu(c.f, c.lambda, c.w);
        CHECK(sf.max_commutator <= 1e-10);
        CHECK(sf.max_level_excess <= 1e-10);
        const auto& g = c.f.grid;
        for (int n = 1; n <= g.J; ++n) {
            for (long q = 0; q < g.cubes_at(n); ++q) {
                // q_n <= q_{n-1}: the product equals q_n
                auto cc = g.coords(q, n);
                long parent = g.index_of({cc[0] >> 1, cc[1] >> 1}, n - 1);
                Mat prod = sf.q_cube(n - 1, parent) * sf.q_cube(n, q);
                CHECK((prod - sf.q_cube(n, q)).cwiseAbs().maxCoeff() <= 1e-10);
                CHECK(is_projection(sf.q_cube(n, q), 1e-9));
            }
        }
    }
}

TEST_CASE("lambda above the sup norm stops nothing") {
    auto c = make_case(1, 4, 2, 3, 1.0);
    double lambda = c.f.max_norm() + 1.0;
    auto sf = cuculescu(c.f, lambda, c.w);
    for (int n = 1; n <= c.f.grid.J; ++n)
        for (long q = 0; q < c.f.grid.cubes_at(n); ++q)
            CHECK((sf.q_cube(n, q) - identity_matrix(2)).cwiseAbs().maxCoeff() <= 1e-12);
    auto parts = cz_decompose(c.f, sf);
    CHECK((parts.g - c.f).max_norm() <= 1e-10);
    CHECK(parts.b_d.max_norm() <= 1e-12);
    CHECK(parts.b_off.max_norm() <= 1e-12);
    CHECK(level_set_bound(sf) == doctest::Approx(0.0));
}

TEST_CASE("m=1 stopping matches the scalar maximal oracle cellwise") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto c = make_case(1, 6, 1, 40 + seed, 0.9);
        auto sf = cuculescu(c.f, c.lambda, c.w);
        auto oracle = scalar_stopping_oracle(c.f, c.lambda);
        const auto& g = c.f.grid;
        for (int n = 1; n <= g.J; ++n)
            for (long q = 0; q < g.cubes_at(n); ++q)
                CHECK(sf.q_cube(n, q)(0, 0).real() ==
                      doctest::Approx(oracle[static_cast<size_t>(n)][static_cast<size_t>(q)])
                          .epsilon(1e-12));
    }
}

TEST_CASE("diagonal m=2 fields stop entrywise") {
    DyadicGrid g(1, 5);
    Rng rng(77);
    OperatorField f(g, 2);
    OperatorField d0(g, 1), d1(g, 1);
    for (long i = 0; i < g.num_cells(); ++i) {
        double a = rng.uniform(0.0, 2.0), b = rng.uniform(0.0, 2.0);
        f.at(i)(0, 0) = a;
        f.at(i)(1, 1) = b;
        d0.at(i)(0, 0) = a;
        d1.at(i)(0, 0) = b;
    }
    double lambda = 0.7;
    Weight w = constant_weight(g, 1.0);
    auto sf = cuculescu(f, lambda, w);
    auto o0 = scalar_stopping_oracle(d0, lambda);
    auto o1 = scalar_stopping_oracle(d1, lambda);
    for (int n = 1; n <= g.J; ++n)
        for (long q = 0; q < g.cubes_at(n); ++q) {
            CHECK(sf.q_cube(n, q)(0, 0).real() ==
                  doctest::Approx(o0[static_cast<size_t>(n)][static_cast<size_t>(q)]));
            CHECK(sf.q_cube(n, q)(1, 1).real() ==
                  doctest::Approx(o1[static_cast<size_t>(n)][static_cast<size_t>(q)]));
            CHECK(std::abs(sf.q_cube(n, q)(0, 1)) <= 1e-12);
        }
}

TEST_CASE("CZ reconstruction and level identities") {
    for (int m : {1, 2, 4}) {
        for (std::uint64_t seed = 0; seed < 6; ++seed) {
            auto c = make_case(1, 5, m, 100 + seed, 0.6);
            auto sf = cuculescu(c.f, c.lambda, c.w);
            auto parts = cz_decompose(c.f, sf);
            // g + b_d + b_off = f
            CHECK((parts.g + parts.b_d + parts.b_off - c.f).max_norm() <= 1e-10);
            // both b_off forms agree (Cuculescu commutation)
            CHECK(parts.off_form_gap <= 1e-9);
            // sum p_n = 1 - q
            OperatorField psum(c.f.grid, m);
            for (int n = 1; n <= c.f.grid.J; ++n) psum += sf.p_field(n);
            OperatorField expect = OperatorField::identity(c.f.grid, m) - sf.terminal();
            CHECK((psum - expect).max_norm() <= 1e-11);
            // E_k(b_{d,k}) = E_k(b_{off,k}) = 0
            for (int k = 1; k <= c.f.grid.J; ++k) {
                CHECK(conditional_expectation(parts.b_d_levels[static_cast<size_t>(k - 1)], k)
                          .max_norm() <= 1e-10);
                CHECK(conditional_expectation(parts.b_off_levels[static_cast<size_t>(k - 1)], k)
                          .max_norm() <= 1e-10);
            }
            if (m == 1) CHECK(parts.b_off.max_norm() <= 1e-12);
        }
    }
}

TEST_CASE("per-cube projections annihilate each other") {
    auto c = make_case(1, 5, 2, 321, 0.5);
    auto sf = cuculescu(c.f, c.lambda, c.w);
    const auto& g = c.f.grid;
    for (int n = 1; n <= g.J; ++n)
        for (long q = 0; q < g.cubes_at(n); ++q) {
            Mat pq = sf.p_cube(n, q);
            Mat qq = sf.q_cube(n, q);
            CHECK((pq * qq).cwiseAbs().maxCoeff() <= 1e-11);
            CHECK((qq * pq).cwiseAbs().maxCoeff() <= 1e-11);
        }
}

TEST_CASE("trace of p levels matches the terminal complement") {
    auto c = make_case(1, 6, 2, 200, 0.5);
    auto sf = cuculescu(c.f, c.lambda, c.w);
    double sum = 0.0;
    for (int n = 1; n <= c.f.grid.J; ++n) sum += trace_functional(sf.p_field(n), &c.w);
    OperatorField complement = OperatorField::identity(c.f.grid, 2) - sf.terminal();
    CHECK(sum == doctest::Approx(trace_functional(complement, &c.w)).epsilon(1e-10));
}

TEST_CASE("level-set bound: scalar unweighted stays below 1, trace monotone in lambda") {
    DyadicGrid g(1, 7);
    Weight w = constant_weight(g, 1.0);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Rng rng = Rng::split(300, seed);
        auto f = random_positive_field(g, 1, rng, true);
        double base = lp_norm(f, 1.0);
        double prev_mass = std::numeric_limits<double>::infinity();
        for (double t : {0.5, 1.0, 2.0, 4.0}) {
            auto sf = cuculescu(f, t * base, w);
            CHECK(level_set_bound(sf) <= 1.0 + 1e-9);
            OperatorField comp = OperatorField::identity(g, 1) - sf.terminal();
            double mass = trace_functional(comp);
            CHECK(mass <= prev_mass + 1e-12);
            prev_mass = mass;
        }
    }
}

TEST_CASE("trace monotonicity in lambda for matrix fields") {
    auto c = make_case(1, 5, 2, 400, 0.0);
    Weight w = c.w;
    double base = lp_norm(c.f, 1.0);
    double prev = std::numeric_limits<double>::infinity();
    for (double t : {0.4, 0.8, 1.6, 3.2}) {
        auto sf = cuculescu(c.f, t * base, w);
        OperatorField comp = OperatorField::identity(c.f.grid, 2) - sf.terminal();
        double mass = trace_functional(comp);
        CHECK(mass <= prev + 1e-12);
        prev = mass;
    }
}

TEST_CASE("good and bad part bounds") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        auto c = make_case(1, 6, 2, 500 + seed, 0.7);
        auto sf = cuculescu(c.f, c.lambda, c.w);
        auto parts = cz_decompose(c.f, sf);
        auto report = good_bad_bounds(parts, sf);
        double a1 = ap_characteristic(c.w, 1.0);
        CHECK(report.g_inf_ratio <= std::pow(2.0, c.f.grid.d) + 1e-8);
        CHECK(report.bd_sum_ratio <= 2.0 * (1.0 + a1) + 1e-8);
        CHECK(std::isfinite(report.g_l1_ratio));
    }
    // lambda above the sup norm: g = f so the ratio is below 1
    auto c = make_case(1, 5, 2, 777, 1.0);
    double lambda = c.f.max_norm() + 0.5;
    auto sf = cuculescu(c.f, lambda, c.w);
    auto report = good_bad_bounds(cz_decompose(c.f, sf), sf);
    CHECK(report.g_inf_ratio <= 1.0);
}

TEST_CASE("zeta projection: trivial and single-cube cases") {
    DyadicGrid g(1, 5);
    Weight w = constant_weight(g, 1.0);
    Rng rng(600);
    auto f = random_positive_field(g, 1, rng, true);
    // no bad cubes: zeta = identity
    auto sf = cuculescu(f, f.max_norm() + 1.0, w);
    auto dp = zeta_projection(sf);
    CHECK((dp.zeta - OperatorField::identity(g, 1)).max_norm() <= 1e-12);

    // spike field: 1 - zeta is an indicator field built from 5Q blocks
    OperatorField spike(g, 1);
    long hot = g.num_cells() / 2;
    spike.at(hot)(0, 0) = 32.0;
    auto sf2 = cuculescu(spike, 0.5, w);
    auto dp2 = zeta_projection(sf2);
    int bad_levels = 0;
    for (int n = 1; n <= g.J; ++n) {
        long count = 0;
        for (long q = 0; q < g.cubes_at(n); ++q)
            if (real_trace(sf2.p_cube(n, q)) > 0.5) ++count;
        if (count > 0) ++bad_levels;
    }
    CHECK(bad_levels >= 1);
    for (long cell = 0; cell < g.num_cells(); ++cell) {
        double z = dp2.zeta.at(cell)(0, 0).real();
        CHECK((std::abs(z) <= 1e-9 || std::abs(z - 1.0) <= 1e-9));
    }
}

TEST_CASE("zeta cancellation properties (exhaustive scan)") {
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        auto c = make_case(1, 6, 2, 800 + seed, 0.5);
        auto sf = cuculescu(c.f, c.lambda, c.w);
        auto parts = cz_decompose(c.f, sf);
        auto dp = zeta_projection(sf);
        CHECK(zeta_cancellation_p(sf, dp) <= 1e-12);
        double factor = 5.0 * std::sqrt(static_cast<double>(c.f.grid.d));
        CHECK(zeta_cancellation_b(sf, parts, dp, factor) <= 1e-12);
        double ratio = zeta_mass_ratio(sf, dp);
        CHECK(std::isfinite(ratio));
        CHECK(ratio <= std::pow(5.0, c.f.grid.d) * 8.0);
    }
}

TEST_CASE("mismatched field is rejected") {
    auto c = make_case(1, 4, 2, 900, 0.8);
    auto sf = cuculescu(c.f, c.lambda, c.w);
    Rng rng(901);
    auto other = random_positive_field(c.f.grid, 2, rng, true);
    CHECK_THROWS(cz_decompose(other, sf));
    CHECK_THROWS(cuculescu(c.f, -1.0, c.w));
}
