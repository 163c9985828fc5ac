#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "nczw/dyadic_model.hpp"
#include "nczw/weights.hpp"

using namespace nczw;

namespace {

OperatorField scalar_field(const DyadicGrid& g, std::vector<double> v) {
    OperatorField f(g, 1);
    for (long i = 0; i < g.num_cells(); ++i) f.at(i)(0, 0) = v[static_cast<size_t>(i)];
    return f;
}

double scalar_at(const OperatorField& f, long i) { return f.at(i)(0, 0).real(); }

}  // namespace

TEST_CASE("grid geometry") {
    DyadicGrid g(1, 3);
    CHECK(g.num_cells() == 8);
    CHECK(g.ancestor(5, 1) == 1);
    CHECK(g.center(0, 3)[0] == doctest::Approx(1.0 / 16.0));
    auto cells = g.cells_in_cube(1, 1);
    CHECK(cells.size() == 4);
    CHECK(cells.front() == 4);

    DyadicGrid h(2, 2);
    CHECK(h.num_cells() == 16);
    auto c = h.coords(7, 2);  // x=3, y=1
    CHECK(c[0] == 3);
    CHECK(c[1] == 1);
    CHECK(h.ancestor(7, 1) == 1);
    CHECK(h.cells_in_cube(1, 3).size() == 4);
}

TEST_CASE("dilated cube is the 5-cube block") {
    DyadicGrid g(1, 4);
    // level-2 cube 1 = [1/4, 1/2): 5Q covers level-2 cubes -1..3 clipped to 0..3
    auto cells = g.cells_in_dilated_cube(2, 1, 5.0);
    CHECK(cells.size() == 16);  // whole window
    auto cells2 = g.cells_in_dilated_cube(2, 3, 5.0);
    CHECK(cells2.size() == 12);  // cubes 1,2,3
    CHECK(cells2.front() == 4);
}

TEST_CASE("conditional expectation averages") {
    DyadicGrid g(1, 2);
    auto f = scalar_field(g, {1, 2, 3, 4});
    auto e1 = conditional_expectation(f, 1);
    CHECK(scalar_at(e1, 0) == doctest::Approx(1.5));
    CHECK(scalar_at(e1, 1) == doctest::Approx(1.5));
    CHECK(scalar_at(e1, 2) == doctest::Approx(3.5));
    CHECK(scalar_at(e1, 3) == doctest::Approx(3.5));
    auto e0 = conditional_expectation(f, 0);
    CHECK(scalar_at(e0, 3) == doctest::Approx(2.5));
    CHECK_THROWS(conditional_expectation(f, 3));
}

TEST_CASE("expectation projectivity and trace preservation") {
    DyadicGrid g(1, 5);
    for (std::uint64_t s = 0; s < 10; ++s) {
        Rng rng = Rng::split(41, s);
        auto f = random_field(g, 2, rng);
        auto a = conditional_expectation(conditional_expectation(f, 3), 2);
        auto b = conditional_expectation(f, 2);
        double gap = 0.0;
        for (long i = 0; i < g.num_cells(); ++i)
            gap = std::max(gap, (a.at(i) - b.at(i)).cwiseAbs().maxCoeff());
        CHECK(gap <= 1e-12);
        for (int n = 0; n <= g.J; ++n) {
            CHECK(std::abs(trace_functional(conditional_expectation(f, n)) -
                           trace_functional(f)) <= 1e-12);
        }
    }
}

TEST_CASE("bimodule identity phi^w(E_n f) = phi(f E_n w)") {
    DyadicGrid g(1, 4);
    Rng rng(43);
    auto f = random_field(g, 2, rng);
    Weight w = cascade_weight(g, 2.0, 5);
    for (int n = 0; n <= g.J; ++n) {
        Weight en_w = expectation_weight(w, n);
        double lhs = trace_functional(conditional_expectation(f, n), &w);
        double rhs = trace_functional(f, &en_w);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
}

TEST_CASE("martingale differences telescope and are mean zero") {
    DyadicGrid g(2, 3);
    Rng rng(47);
    auto f = random_field(g, 2, rng);
    auto diffs = martingale_differences(f);
    REQUIRE(static_cast<int>(diffs.size()) == g.J);
    OperatorField sum(g, 2);
    for (const auto& df : diffs) sum += df;
    double gap = 0.0;
    for (long i = 0; i < g.num_cells(); ++i)
        gap = std::max(gap, (sum.at(i) - f.at(i)).cwiseAbs().maxCoeff());
    CHECK(gap <= 1e-12);
    for (int n = 2; n <= g.J; ++n) {
        auto prev = conditional_expectation(diffs[static_cast<size_t>(n - 1)], n - 1);
        CHECK(prev.max_norm() <= 1e-12);
    }

    // constant field: df_1 = c, the rest vanish
    auto c = OperatorField::identity(g, 2);
    auto cd = martingale_differences(c);
    CHECK((cd[0].at(0) - identity_matrix(2)).cwiseAbs().maxCoeff() <= 1e-14);
    for (size_t n = 1; n < cd.size(); ++n) CHECK(cd[n].max_norm() <= 1e-14);
}

TEST_CASE("regularity of the filtration") {
    DyadicGrid g(1, 1);
    auto f = scalar_field(g, {1, 0});
    CHECK(regularity_check(f) == doctest::Approx(2.0));  // extremal: rho = 2^d

    auto c = OperatorField::identity(g, 2);
    CHECK(regularity_check(c) == doctest::Approx(1.0));

    DyadicGrid h(2, 2);
    for (std::uint64_t s = 0; s < 10; ++s) {
        Rng rng = Rng::split(53, s);
        auto r = random_positive_field(h, 2, rng);
        CHECK(regularity_check(r) <= 4.0 + 1e-8);
    }
}

TEST_CASE("weighted norms") {
    DyadicGrid g(1, 3);
    auto f = OperatorField::identity(g, 2);
    CHECK(lp_norm(f, 1.0) == doctest::Approx(2.0));  // phi(1) = |window| * nu(1)
    CHECK(lp_norm(3.0 * f, 1.0) == doctest::Approx(6.0));

    // scalar case agrees with classical quadrature of |f|^p w
    Rng rng(59);
    auto s = random_field(g, 1, rng);
    Weight w = dyadic_step_weight(g, 2.0, 1.0);
    double direct = 0.0;
    for (long i = 0; i < g.num_cells(); ++i)
        direct += std::pow(std::abs(s.at(i)(0, 0)), 1.7) * w.values[static_cast<size_t>(i)] *
                  g.cell_volume();
    CHECK(lp_norm(s, 1.7, &w) == doctest::Approx(std::pow(direct, 1.0 / 1.7)).epsilon(1e-12));
}

TEST_CASE("expectations contract Lp and preserve positivity") {
    DyadicGrid g(1, 4);
    for (std::uint64_t s = 0; s < 8; ++s) {
        Rng rng = Rng::split(61, s);
        auto f = random_positive_field(g, 2, rng);
        for (int n = 0; n < g.J; ++n) {
            auto en = conditional_expectation(f, n);
            CHECK(en.is_positive_field());
            for (double p : {1.0, 2.0, 3.0})
                CHECK(lp_norm(en, p) <= lp_norm(f, p) + 1e-10);
        }
    }
}

TEST_CASE("distribution projection") {
    DyadicGrid g(1, 3);
    Rng rng(67);
    auto f = random_field(g, 2, rng);
    CHECK(distribution_projection(f, f.max_norm() + 1.0).max_norm() <= 1e-12);

    // m = 1 equals the indicator of {|f| > lambda}
    auto s = random_field(g, 1, rng);
    auto proj = distribution_projection(s, 0.8);
    for (long i = 0; i < g.num_cells(); ++i) {
        double expect = std::abs(s.at(i)(0, 0)) > 0.8 ? 1.0 : 0.0;
        CHECK(std::abs(proj.at(i)(0, 0).real() - expect) <= 1e-12);
    }

    // weak mass is non-increasing in lambda
    double prev = std::numeric_limits<double>::infinity();
    for (double lam = 0.2; lam < 3.0; lam *= 1.4) {
        double mass = trace_functional(distribution_projection(f, lam));
        CHECK(mass <= prev + 1e-14);
        prev = mass;
    }
}

TEST_CASE("martingale L2 orthogonality (unweighted equality)") {
    DyadicGrid g(1, 5);
    for (std::uint64_t s = 0; s < 6; ++s) {
        Rng rng = Rng::split(71, s);
        auto f = random_field(g, 2, rng);
        auto diffs = martingale_differences(f);
        for (int l = 1; l <= g.J; ++l) {
            OperatorField tail(g, 2);
            double sq = 0.0;
            for (int n = l; n <= g.J; ++n) {
                tail += diffs[static_cast<size_t>(n - 1)];
                double nn = lp_norm(diffs[static_cast<size_t>(n - 1)], 2.0);
                sq += nn * nn;
            }
            double whole = lp_norm(tail, 2.0);
            CHECK(std::abs(whole * whole - sq) <= 1e-10 * (1.0 + sq));
        }
    }
}

TEST_CASE("weighted martingale L2 equivalence constants recorded (A_2 weight)") {
    DyadicGrid g(1, 5);
    Weight w = dyadic_step_weight(g, 2.0, 1.0);
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (std::uint64_t s = 0; s < 12; ++s) {
        Rng rng = Rng::split(73, s);
        auto f = random_field(g, 2, rng);
        auto diffs = martingale_differences(f);
        for (int l = 1; l <= g.J; ++l) {
            OperatorField tail(g, 2);
            double sq = 0.0;
            for (int n = l; n <= g.J; ++n) {
                tail += diffs[static_cast<size_t>(n - 1)];
                double nn = lp_norm(diffs[static_cast<size_t>(n - 1)], 2.0, &w);
                sq += nn * nn;
            }
            double whole = lp_norm(tail, 2.0, &w);
            if (sq <= 1e-14) continue;
            double ratio = whole * whole / sq;
            lo = std::min(lo, ratio);
            hi = std::max(hi, ratio);
        }
    }
    CHECK(lo > 0.05);
    CHECK(hi < 20.0);
}

TEST_CASE("json round trip is bit exact") {
    DyadicGrid g(2, 2);
    Rng rng(79);
    auto f = random_field(g, 2, rng);
    auto text = field_to_json(f);
    auto back = field_from_json(text);
    REQUIRE(back.grid == f.grid);
    REQUIRE(back.m == f.m);
    for (long i = 0; i < g.num_cells(); ++i) {
        for (int r = 0; r < f.m; ++r)
            for (int c = 0; c < f.m; ++c) {
                CHECK(back.at(i)(r, c).real() == f.at(i)(r, c).real());
                CHECK(back.at(i)(r, c).imag() == f.at(i)(r, c).imag());
            }
    }
    CHECK(field_to_json(back) == text);
}
