#pragma once

#include <vector>

#include "nczw/dyadic_model.hpp"
#include "nczw/weights.hpp"

namespace nczw {

// Cuculescu stopping projections at height lambda: decreasing projections
// q_1 >= q_2 >= ... constant on level-n cubes, built by the recursion
// q_n = q_{n-1} chi_{[0,lambda]}(q_{n-1} f_n q_{n-1}) with q_0 = 1.
// At finite depth the terminal projection is q = q_J.
struct StoppingFamily {
    double lambda = 0.0;
    OperatorField source;                  // f
    Weight weight;                         // carried for diagnostics
    std::vector<OperatorField> martingale;  // f_n = E_n f, n = 1..J
    // q_cubes[n] holds the constant value of q_n on each level-n cube, n = 0..J.
    std::vector<std::vector<Mat>> q_cubes;

    int depth() const { return source.grid.J; }
    const Mat& q_cube(int n, long cube) const { return q_cubes[static_cast<size_t>(n)][static_cast<size_t>(cube)]; }
    // p_Q = q_{hat Q} - q_Q for Q in D_n, n >= 1.
    Mat p_cube(int n, long cube) const;
    OperatorField q_field(int n) const;
    OperatorField p_field(int n) const;  // p_n = q_{n-1} - q_n
    OperatorField terminal() const { return q_field(depth()); }

    // construction diagnostics
    double max_commutator = 0.0;    // sup ||[q_n, q_{n-1} f_n q_{n-1}]||
    double max_level_excess = 0.0;  // sup of top eigenvalue of q_n f_n q_n - lambda q_n
};

StoppingFamily cuculescu(const OperatorField& f, double lambda, const Weight& w);

// Scalar oracle for m = 1: stopped iff max_{k<=n} f_k(x) <= lambda, with the
// same endpoint snap used by the spectral calculus.
std::vector<std::vector<double>> scalar_stopping_oracle(const OperatorField& f, double lambda);

// lambda phi^w(1 - q) / ([w]_{A_1} ||f||_{L_1^w}); rejects ||f|| = 0.
double level_set_bound(const StoppingFamily& sf);

// f = g + b_d + b_off with g = qfq + sum_k p_k f_k p_k,
// b_{d,k} = p_k (f - f_k) p_k, b_{off,k} = p_k (f - f_k) q_k.
struct CZParts {
    double lambda = 0.0;
    OperatorField g, b_d, b_off;
    std::vector<OperatorField> b_d_levels;    // b_{d,k}
    std::vector<OperatorField> b_off_levels;  // b_{off,k} (not symmetrized)
    // max-norm gap between b_off and its commutation form sum p_k f q_k + q_k f p_k
    double off_form_gap = 0.0;
};

CZParts cz_decompose(const OperatorField& f, const StoppingFamily& sf);

struct GoodBadReport {
    double g_l1_ratio = 0.0;    // ||g||_{L_1^w} / ([w]_{A_1} ||f||_{L_1^w})
    double g_inf_ratio = 0.0;   // ||g||_inf / lambda
    double bd_sum_ratio = 0.0;  // sum_k ||b_{d,k}||_{L_1^w} / ||f||_{L_1^w}
};
GoodBadReport good_bad_bounds(const CZParts& parts, const StoppingFamily& sf);

// zeta = 1 - join of p_Q chi_{5Q} over all bad cubes (window-clipped), plus the
// single-level eta variant.
struct DilationProjections {
    OperatorField zeta;
    double dilation = 5.0;
};
DilationProjections zeta_projection(const StoppingFamily& sf, double dilation = 5.0);
// eta = join_{Q in D_k} p_Q chi_{(dilation)Q} for one level, from given cube projections.
OperatorField eta_field(const DyadicGrid& g, int level, const std::vector<Mat>& cube_projections,
                        double dilation = 5.0);

// lambda phi^w(1 - zeta) / ([w]_{A_1} ||f||_{L_1^w}).
double zeta_mass_ratio(const StoppingFamily& sf, const DilationProjections& dp);

// Exhaustive cancellation scans. Both return the largest violation norm.
// (ii): zeta(x) p_Q = 0 whenever x in 5Q.
double zeta_cancellation_p(const StoppingFamily& sf, const DilationProjections& dp);
// (iii): zeta(x) b_{d,n}(y) zeta(x) = 0 and the b_off analogue whenever
// y lies in the cube of side (factor * side(n)) centered at c_{Q_{x,n}}.
double zeta_cancellation_b(const StoppingFamily& sf, const CZParts& parts,
                           const DilationProjections& dp, double factor);

}  // namespace nczw
