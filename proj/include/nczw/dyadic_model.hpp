#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "nczw/matrix_algebra.hpp"

namespace nczw {

struct Weight;  // weights.hpp

// Depth-J dyadic grid on the unit cube [0,1)^d, d in {1,2}. Level n holds
// 2^{nd} cubes of side 2^{-n}; level 0 is the whole window. Fields live on
// level-J cells and are piecewise constant.
struct DyadicGrid {
    int d = 1;
    int J = 1;

    DyadicGrid() = default;
    DyadicGrid(int dim, int depth);

    long cubes_at(int n) const { return 1L << (n * d); }
    long num_cells() const { return cubes_at(J); }
    double side(int n) const { return std::pow(0.5, n); }
    double cell_volume() const { return std::pow(0.5, J * d); }

    std::array<long, 2> coords(long index, int n) const;
    long index_of(const std::array<long, 2>& c, int n) const;
    // Level-n ancestor cube of a level-J cell.
    long ancestor(long cell, int n) const;
    std::array<double, 2> center(long index, int n) const;
    double center_distance(long cell_a, long cell_b) const;  // Euclidean, level J

    // Level-J cells inside the level-n cube q.
    std::vector<long> cells_in_cube(int n, long q) const;
    // Level-J cells whose center lies in the axis-aligned cube of side
    // factor * 2^{-n} centered at c_Q, clipped to the window.
    std::vector<long> cells_in_dilated_cube(int n, long q, double factor) const;
    bool cell_center_in_dilated_cube(long cell, int n, long q, double factor) const;

    bool operator==(const DyadicGrid& o) const { return d == o.d && J == o.J; }
};

// Piecewise-constant map from level-J cells to elements of the matrix algebra.
struct OperatorField {
    DyadicGrid grid;
    int m = 1;
    std::vector<Mat> cells;

    OperatorField() = default;
    OperatorField(const DyadicGrid& g, int dim_m);
    static OperatorField constant(const DyadicGrid& g, const Mat& value);
    static OperatorField identity(const DyadicGrid& g, int dim_m);

    const Mat& at(long cell) const { return cells[static_cast<size_t>(cell)]; }
    Mat& at(long cell) { return cells[static_cast<size_t>(cell)]; }

    OperatorField adjoint() const;
    OperatorField cwise_abs() const;  // cellwise |a| = (a*a)^{1/2}
    bool is_hermitian_field(double tol = 1e-9) const;
    bool is_positive_field(double tol = 1e-9) const;
    bool is_projection_field(double tol = 1e-8) const;
    double max_norm() const;  // L_infinity norm

    OperatorField& operator+=(const OperatorField& o);
    OperatorField& operator-=(const OperatorField& o);
    OperatorField& operator*=(double t);
    friend OperatorField operator+(OperatorField a, const OperatorField& b) { return a += b; }
    friend OperatorField operator-(OperatorField a, const OperatorField& b) { return a -= b; }
    friend OperatorField operator*(double t, OperatorField a) { return a *= t; }
};

// Cellwise matrix product (a b)(x) = a(x) b(x).
OperatorField field_product(const OperatorField& a, const OperatorField& b);
OperatorField field_product(const OperatorField& a, const OperatorField& b,
                            const OperatorField& c);

// E_n: averages over level-n cubes (Kahan-compensated); output is constant on
// each level-n cube. Rejects n > J.
OperatorField conditional_expectation(const OperatorField& f, int n);

// df_1 = E_1 f, df_n = E_n f - E_{n-1} f for 2 <= n <= J; sums back to f.
std::vector<OperatorField> martingale_differences(const OperatorField& f);

// Smallest rho with E_n f <= rho * E_{n-1} f in operator order, max over
// n = 1..J and cells. Rejects non-positive input; contract: rho <= 2^d.
double regularity_check(const OperatorField& f);

// phi = int dx (x) nu and its weighted version phi^w; weight == nullptr means
// Lebesgue. Exact finite sums on piecewise-constant fields.
double trace_functional(const OperatorField& f, const Weight* w = nullptr);
// ||f||_{L_p^w} = phi(|f|^p w)^{1/p}; p = inf gives the essential sup norm.
double lp_norm(const OperatorField& f, double p, const Weight* w = nullptr);

// Cellwise chi_{(lambda,inf)}(|f|).
OperatorField distribution_projection(const OperatorField& f, double lambda);
// lambda * phi^w(distribution_projection(f, lambda)): weak-norm estimator.
double weak_mass(const OperatorField& f, double lambda, const Weight* w = nullptr);

// JSON serialization: {d, J, m, cells: [[row-major re/im pairs]]};
// round-trips bit-exactly.
std::string field_to_json(const OperatorField& f);
OperatorField field_from_json(const std::string& text);

// Random suites. Fields are supported in the middle third of the window when
// `middle_third` is set, so that dilations stay clear of the boundary.
OperatorField random_field(const DyadicGrid& g, int m, Rng& rng, bool middle_third = false);
OperatorField random_positive_field(const DyadicGrid& g, int m, Rng& rng,
                                    bool middle_third = false);

}  // namespace nczw
