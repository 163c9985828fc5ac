#pragma once

#include <Eigen/Dense>
#include <complex>
#include <limits>
#include <vector>

#include "nczw/rng.hpp"

namespace nczw {

using Cx = std::complex<double>;
using Mat = Eigen::MatrixXcd;

// Tolerances shared across the finite matrix model (N, nu).
constexpr double kHermitianTol = 1e-12;   // max-entry distance to own adjoint
constexpr double kProjectionTol = 1e-10;  // ||e^2 - e||
constexpr double kSpectralSnapTol = 1e-10;  // eigenvalue snap to interval endpoints
constexpr double kRankTol = 1e-10;          // singular-value threshold for ranges

Mat identity_matrix(int m);
Mat zero_matrix(int m);

bool is_hermitian(const Mat& a, double tol = kHermitianTol);
bool is_projection(const Mat& e, double tol = kProjectionTol);
bool is_positive_semidefinite(const Mat& a, double tol = kProjectionTol);

// nu = standard (unnormalized) matrix trace.
Cx trace_of(const Mat& a);
double real_trace(const Mat& a);

// |a| = (a* a)^{1/2}
Mat abs_op(const Mat& a);
// Square root of a PSD Hermitian matrix; negative eigenvalues are clamped to 0.
Mat sqrt_psd(const Mat& a);
// Inverse through the eigenbasis; eigenvalues below `floor` are replaced by it.
Mat inverse_psd(const Mat& a, double floor);

// Eigenvalues ascending, one orthogonal projection per distinct eigenvalue
// (clustered at kSpectralSnapTol); projections sum to the identity.
struct SpectralDecomposition {
    std::vector<double> eigenvalues;
    std::vector<Mat> projections;
};
SpectralDecomposition spectral_decomposition(const Mat& hermitian);

// Real interval with open/closed endpoint flags. Eigenvalues within
// kSpectralSnapTol of an endpoint are snapped onto it and then classified as
// inside a closed endpoint / outside an open endpoint.
struct Interval {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    bool lo_open = false;
    bool hi_open = false;

    static Interval closed(double lo, double hi) { return {lo, hi, false, false}; }
    static Interval above(double lo) {  // (lo, inf)
        return {lo, std::numeric_limits<double>::infinity(), true, false};
    }
    static Interval at_most(double hi) {  // (-inf, hi]
        return {-std::numeric_limits<double>::infinity(), hi, false, false};
    }
    bool contains(double x, double snap_tol = kSpectralSnapTol) const;
};

// chi_B(a) for Hermitian a; throws on non-Hermitian input.
Mat spectral_projection(const Mat& hermitian, const Interval& interval);

// ||a||_p = [nu(|a|^p)]^{1/p}; p = inf gives the operator norm. Rejects p < 1.
double schatten_norm(const Mat& a, double p);
double operator_norm(const Mat& a);

// Projection onto the closure of the range of a PSD matrix.
Mat range_projection(const Mat& psd);

// Meet/join of projections via orthonormal bases of ranges
// (rank decided by singular-value threshold kRankTol).
Mat lattice_join(const Mat& e, const Mat& f);
Mat lattice_meet(const Mat& e, const Mat& f);
Mat lattice_join(const std::vector<Mat>& projections, int m);

// Random elements for test suites and generators.
Mat random_matrix(int m, Rng& rng, double scale = 1.0);
Mat random_hermitian(int m, Rng& rng, double scale = 1.0);
Mat random_positive(int m, Rng& rng, double scale = 1.0);          // PSD
Mat random_positive_invertible(int m, Rng& rng, double floor_ev);  // >= floor_ev
Mat random_projection(int m, int rank, Rng& rng);

}  // namespace nczw
