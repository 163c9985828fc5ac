#pragma once

#include <array>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nczw/dyadic_model.hpp"
#include "nczw/weights.hpp"

namespace nczw {

using Point = std::array<double, 2>;

// Scalar CZ kernel K(x,y), x != y.
struct Kernel {
    std::string name;
    int d = 1;
    enum class Smoothness { Lipschitz, Hormander, None } tag = Smoothness::None;
    std::function<double(const Point&, const Point&)> eval;
};

Kernel hilbert_kernel();
Kernel riesz_kernel(int component, int d);

// Finite kernel family (K_k)_{k=1..count} with the ell_2 size condition.
struct VectorKernel {
    std::string name;
    int d = 1;
    int count = 0;
    std::function<double(int, const Point&, const Point&)> eval;

    double l2_at(const Point& x, const Point& y) const;
};

VectorKernel single_kernel_family(const Kernel& k);
// Littlewood-Paley pieces of the Poisson kernel at dyadic scales 2^{-k}.
VectorKernel dyadic_poisson_family(int count, int d);
// "hilbert" | "riesz:j" | "dyadic-poisson:N"
Kernel parse_kernel_spec(const std::string& spec, int d);
VectorKernel parse_vector_kernel_spec(const std::string& spec, int d);

// sup over sampled pairs of |K(x,y)| |x-y|^d.
double size_condition_constant(const Kernel& k, const DyadicGrid& g);
double size_condition_constant(const VectorKernel& k, const DyadicGrid& g);

// Dyadic partition of unity: psi supported in [1,2], psi_i(z) = psi(2^i|z|/sqrt d),
// sum_i psi_i = 1 for z != 0. Built from a fixed C-infinity bump normalized by
// its telescoping sum; octave boundaries follow the half-open convention [1,2).
double psi_bump(double t);
double psi_weight(double dist, int i, int d);
// Smallest/largest annulus index i with psi_i nonzero somewhere on the grid.
std::pair<int, int> resolvable_annuli(const DyadicGrid& g);

// T_eps f(x) = int_{|x-y|>eps} K(x,y) f(y) dy, midpoint quadrature at cell
// centers, diagonal cells excluded.
OperatorField truncated_apply(const Kernel& k, const OperatorField& f, double eps);
// T_j f = sum_{i<j} int K_i(x,y) f(y) dy.
OperatorField lacunary_apply(const Kernel& k, const OperatorField& f, int j);
// int K_i(x,y) f(y) dy for one annulus.
OperatorField annulus_apply(const Kernel& k, const OperatorField& f, int i);
// Boundary term T_{eps,j_eps} f = int_{|x-y|>eps} K_{j_eps}(x,y) f(y) dy.
OperatorField boundary_apply(const Kernel& k, const OperatorField& f, double eps);
int lacunary_index(double eps, int d);  // j_eps = floor(log2(2 sqrt d / eps))

// M_r f(x) = r^{-d} int_{|x-y|<=r} f.
OperatorField averaging_apply(const OperatorField& f, double r);

// L_r-Hormander modulus tables over dyadic annuli.
struct ModulusEntry {
    int level = 0;
    long cube = 0;
    int j = 0;
    double value = 0.0;
    bool truncated = false;  // annulus extends beyond the window
};
struct HormanderModulus {
    double r = 1.0;
    int j_max = 0;
    std::vector<ModulusEntry> entries;
    double sup_partial_sum = 0.0;  // sup over Q of sum_j m_r(Q, j)
    double max_over_q(int j) const;
    // least-squares slope of -log2 m(j) against j over untruncated annuli
    double geometric_decay_exponent() const;
    std::string to_csv() const;
};

// K_Q(x,y) = K(x,y) - K(x,c_Q); `transposed` uses the adjoint kernel
// K*(x,y) = K(y,x) instead.
HormanderModulus hormander_modulus(const VectorKernel& k, double r, const DyadicGrid& g,
                                   std::span<const std::pair<int, long>> cubes, int j_max,
                                   bool transposed = false);
// Default cube set: a stride sample of interior cubes per level.
std::vector<std::pair<int, long>> default_modulus_cubes(const DyadicGrid& g, int per_level = 16);

// Vector application and the c/r/cr norms.
std::vector<OperatorField> vector_apply(const VectorKernel& k, const OperatorField& f);
double column_norm(std::span<const OperatorField> fields, double p, const Weight* w = nullptr);
double row_norm(std::span<const OperatorField> fields, double p, const Weight* w = nullptr);
// p >= 2: max of the two; p < 2: upper bound via a fixed median split.
double cr_norm(std::span<const OperatorField> fields, double p, const Weight* w = nullptr);

// Explicit-majorant bound for || (a_n) ||_{L_p^w(M; ell_inf)} on self-adjoint
// families: (upper, lower) with upper from an alternating-projection shrink of
// b = sum (a_n^2 + delta)^{1/2}, lower = max_n ||a_n||.
std::pair<double, double> maximal_linfty_bound(std::span<const OperatorField> fields, double p,
                                               const Weight* w = nullptr, int iterations = 200);

// Witness check for the weak maximal pair: ||e a_k e||_inf <= lambda for all k,
// mass = lambda phi^w(1 - e).
struct CertificateCheck {
    bool pass = false;
    double compression = 0.0;  // sup_k ||e a_k e||_inf
    double mass = 0.0;
};
CertificateCheck weak_maximal_certificate(std::span<const OperatorField> fields, double lambda,
                                          const OperatorField& e, const Weight* w = nullptr);

// Annular kernel-sum contracts behind the good-lambda estimates:
// ratio of the weighted annulus sums to ||chi_Q f||_{L_1^w}^{1/p}.
double annular_sum_ratio(const Kernel& k, const OperatorField& f, const Weight& w, double p,
                         int level, long cube);
double annular_sum_ratio_5k(const VectorKernel& k, const OperatorField& f, const Weight& w,
                            double p, int level, long cube);

}  // namespace nczw
