#pragma once

#include <span>
#include <vector>

#include "nczw/dyadic_model.hpp"
#include "nczw/weights.hpp"

namespace nczw {

// Column/row square functions and their conditional versions.
struct SquareFunctionBundle {
    std::vector<OperatorField> diff;  // df_n, n = 1..J
    OperatorField S_c, S_r, s_c, s_r;
    std::vector<OperatorField> S_c_partial;  // S_{c,n}
    std::vector<OperatorField> s_c_partial;  // s_{c,n}
};
SquareFunctionBundle square_functions(const OperatorField& f);

// ||S_c(f)||_{L_1^w} and ||s_c(f)||_{L_1^w}.
double hardy_norm_c(const OperatorField& f, const Weight* w = nullptr);
double conditional_hardy_norm_c(const OperatorField& f, const Weight* w = nullptr);
// (min, max) of the H/h norm ratio across a suite of fields; zero fields skipped.
std::pair<double, double> hardy_equivalence_ratio(std::span<const OperatorField> fields,
                                                  const Weight& w);

// Simple (1,2)_c^w-atom: a = ae, E_k(a) = 0, ||a||_{L_2^w} <= phi(ew)^{-1/2}.
struct SimpleAtom {
    OperatorField a;
    OperatorField e;  // projection field in M_k
    int level = 1;
};
// Crude atom: a = y b with E_k(y) = 0, ||y|| <= 1, b in M_k, ||b|| <= 1.
struct CrudeAtom {
    OperatorField y;
    OperatorField b;
    int level = 1;
};
// Algebraic atom: z = sum_k a_k b_k with E_k(a_k) = 0, sum ||a_k||^2 <= 1,
// b_k in M_k, ||(sum |b_k|^2)^{1/2}|| <= 1. Index k runs over grid levels.
struct AlgebraicAtom {
    std::vector<OperatorField> a;  // a_k, k = 1..J-1 (index 0 -> level 1)
    std::vector<OperatorField> b;
};

struct AtomValidation {
    bool ok = false;
    double support_error = 0.0;   // ||a - a e||
    double mean_error = 0.0;      // ||E_k a||
    double norm_slack = 0.0;      // ||a||_{L_2^w} - phi(ew)^{-1/2}
    double l1_norm = 0.0;
    double per_cube_error = 0.0;  // max_Q ||int_Q a||
};
AtomValidation validate_simple_atom(const SimpleAtom& atom, const Weight& w, double tol = 1e-9);
bool validate_crude_atom(const CrudeAtom& atom, const Weight& w, double tol = 1e-9);
bool validate_algebraic_atom(const AlgebraicAtom& atom, const Weight& w, double tol = 1e-9);

// Constructive decomposition f = sum_l alpha_l beta_l of a mean-zero field,
// packaged as one algebraic atom with coefficient lambda.
struct AtomicDecomposition {
    double lambda = 0.0;  // atomic-norm upper bound
    AlgebraicAtom atom;
    double delta = 0.0;
    double reconstruction_error = 0.0;  // max-norm gap of sum alpha_l beta_l vs f
    double alpha_sq_sum = 0.0;          // sum_l ||alpha_l||^2_{L_2^w}
    double beta_sq = 0.0;               // ||(sum |beta_l|^2)^{1/2}||^2_{L_2^w}
    double conditional_hardy_norm = 0.0;
};
// delta < 0 picks the default 1e-8 ||f||_{L_2^w}; delta = 0 with singular
// conditional square functions is rejected.
AtomicDecomposition atomic_decompose(const OperatorField& f, const Weight& w, double delta = -1.0);

// Lemma-A.2-style rewriting: one crude atom per nonzero factor pair,
// sum of coefficients <= 1.
std::vector<std::pair<double, CrudeAtom>> algebraic_to_crude(const AlgebraicAtom& atom,
                                                             const Weight& w);
// Lemma-A.3-style spectral slicing at ratio l > 1: sum of coefficients <= l.
std::vector<std::pair<double, SimpleAtom>> crude_to_simple(const CrudeAtom& atom, double l,
                                                           const Weight& w);

// ||a||_{H_{1w}^c} of a validated atom.
double atom_hardy_norm_check(const SimpleAtom& atom, const Weight& w);

SimpleAtom random_simple_atom(const DyadicGrid& g, int m, const Weight& w, Rng& rng,
                              int level = -1);

// Rademacher machinery.
OperatorField rademacher_randomize(std::span<const OperatorField> fields,
                                   std::span<const int> signs);
// Mean over sign patterns of ||sum eps_k a_k||^2_{L_2^w} divided by
// sum_k ||a_k||^2_{L_2^w}; exhaustive for <= 12 fields, sampled otherwise.
double khintchine_l2_ratio(std::span<const OperatorField> fields, const Weight* w = nullptr,
                           int samples = 256, std::uint64_t seed = 1);
// Mean over patterns of ||sum eps_k a_k||_{L_1^w} divided by the column L_1 norm.
double khintchine_l1_ratio(std::span<const OperatorField> fields, const Weight* w = nullptr);
// ||(a_k)||_{L_{1,inf}^w(cr)} upper bound divided by the randomized weak norm.
double khintchine_weak_ratio(std::span<const OperatorField> fields, const Weight* w = nullptr,
                             int samples = 64, std::uint64_t seed = 1);

}  // namespace nczw
