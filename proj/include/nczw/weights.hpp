#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nczw/dyadic_model.hpp"

namespace nczw {

// Positive scalar field on the grid modeling w (x) 1_N. Constructed once and
// frozen; A_p / reverse-Holder diagnostics are computed on demand and cached.
struct Weight {
    DyadicGrid grid;
    std::vector<double> values;  // per level-J cell, all > 0

    Weight() = default;
    Weight(const DyadicGrid& g, std::vector<double> v);

    double average(int n, long q) const;  // mean over the level-n cube q
    double min_over_cube(int n, long q) const;
    double measure(const std::vector<long>& cells) const;  // w(S), S a cell set
    double total() const;                                  // w(window)

    mutable std::optional<double> cached_a1;
    mutable std::optional<double> cached_a2;
};

// [w]_{A_p} over all dyadic cubes of the grid (levels 0..J); p = 1 uses
// avg_Q w / min_Q w with ess-inf realized as the min over level-J cells.
double ap_characteristic(const Weight& w, double p);

// Best reverse-Holder constant sup_Q (avg_Q w^q)^{1/q} / (avg_Q w), q > 1.
double reverse_holder(const Weight& w, double q);

// Largest grid exponent q with reverse_holder(w, q) <= threshold, plus the
// conjugate r_w' = r_w/(r_w - 1) used by the theorem hypotheses.
struct RwResult {
    bool found = false;
    double rw = 0.0;
    double rw_conjugate = 0.0;
    double rh_constant = 0.0;
};
std::vector<double> default_rw_grid();
RwResult find_rw(const Weight& w, std::span<const double> q_grid = {},
                 double threshold = 4.0);

// sup_n ||E_n(w)/w||_inf over levels 0..J.
double martingale_a1_check(const Weight& w);

// max over sampled pairs (S subset of Q) of (|S|/|Q|) * (w(Q)/w(S)).
double measure_doubling_check(const Weight& w, int samples, std::uint64_t seed);

Weight constant_weight(const DyadicGrid& g, double c);
// a on the lower half of the first axis, b on the upper half.
Weight dyadic_step_weight(const DyadicGrid& g, double a, double b);
// |x - x0|^{-alpha} evaluated at cell centers; requires 0 <= alpha < d.
Weight power_weight(const DyadicGrid& g, double alpha, double x0 = 0.0);
// Multiplicative cascade with per-level sibling ratios bounded by R.
Weight cascade_weight(const DyadicGrid& g, double ratio_bound, std::uint64_t seed);

// E_n(w) as a Weight.
Weight expectation_weight(const Weight& w, int n);

// "const:c" | "step:a,b" | "power:alpha,x0" | "cascade:R,seed"
Weight parse_weight_spec(const DyadicGrid& g, const std::string& spec);

// phi^w(f) = phi(f w).
double weighted_trace(const OperatorField& f, const Weight& w);

}  // namespace nczw
