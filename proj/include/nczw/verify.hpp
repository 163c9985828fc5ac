#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nczw/hardy_atoms.hpp"
#include "nczw/kernels_operators.hpp"
#include "nczw/stopping_czd.hpp"

namespace nczw {

// Experiment configuration, loadable from JSON (schema in the README).
struct ExperimentConfig {
    int d = 1;
    std::vector<int> depths = {6};
    std::vector<int> dims = {2};  // matrix sizes m
    std::vector<std::string> weights = {"const:1"};
    std::string kernel = "hilbert";
    std::string vector_kernel = "dyadic-poisson:6";
    int lambda_count = 8;
    double lambda_lo_factor = 1.0;  // times ||f||_{L_1^w}
    double lambda_hi_factor = 4.0;  // times ||f||_inf
    std::vector<std::uint64_t> seeds = {1, 2};
    std::vector<std::string> suites = {"identities", "cuculescu", "czd-ratios",
                                       "lemmas",     "thm12",     "thm14",
                                       "thm16",      "kernel-diagnostics"};
    int atom_count = 50;
    int sign_samples = 32;
    int lemma_samples = 200;
    int threads = 0;  // 0: NCZW_THREADS env or hardware

    void validate() const;
    static ExperimentConfig from_json_text(const std::string& text);
    std::string to_json_text() const;
};

std::vector<double> lambda_grid(const OperatorField& f, const Weight& w, int count,
                                double lo_factor, double hi_factor);

// Theorem 1.2-style certificate for the lacunary family (T_j f)_j.
struct CertificateResult {
    double lambda = 0.0;
    double compression_ratio = 0.0;  // sup_j ||e (T_j f) e|| / lambda
    double mass_ratio = 0.0;         // lambda phi^w(1-e) / ||f||_{L_1^w}
    bool witness_verified = false;
};
CertificateResult theorem12_certificate(const OperatorField& f, double lambda, const Weight& w,
                                        const Kernel& kernel);

// Scalar distributional oracle for the m = 1 shadow:
// lambda w{ sup_j |T_j f| > lambda } / ||f||_{L_1^w}.
double scalar_weak_oracle_ratio(const OperatorField& f, double lambda, const Weight& w,
                                const Kernel& kernel);

// Theorem 1.4: randomized weak-norm ratio, plus the I/II/III split path.
struct RandomizedWeakResult {
    double lambda = 0.0;
    double direct_ratio = 0.0;  // lambda phit^w(chi_(lambda,inf)(|T~f|)) / ||f||
    double split_ratio = 0.0;   // I + II + III path at the same lambda
};
RandomizedWeakResult theorem14_weak_norm(const OperatorField& f, double lambda, const Weight& w,
                                         const VectorKernel& kernel,
                                         std::span<const OperatorField> applied, int sign_samples,
                                         std::uint64_t seed);

// Theorem 1.6: sup over generated atoms of ||T a||_{L_1^w(ell_2^c)}.
struct AtomSweepResult {
    double max_norm = 0.0;
    double mean_norm = 0.0;
    int atoms = 0;
    double consequence_ratio = 0.0;  // ||Tf|| over sum lambda_k ||T a_k|| on one decomposition
};
AtomSweepResult theorem16_atom_sweep(const Weight& w, const VectorKernel& kernel,
                                     const DyadicGrid& g, int m, int atom_count,
                                     std::uint64_t seed);

// One ratio observation inside a sweep.
struct RatioSample {
    std::string suite;
    int J = 0;
    int m = 0;
    std::string weight;
    std::uint64_t seed = 0;
    double lambda = 0.0;
    double value = 0.0;
};

struct SuiteSummary {
    std::string suite;
    double max = 0.0;
    double median = 0.0;
    bool stable = true;    // J-grid max <= 2x min and no monotone trend
    bool finite = true;
    double spearman = 0.0;
};

struct ConstantReport {
    ExperimentConfig config;
    std::vector<RatioSample> samples;
    std::vector<SuiteSummary> summaries;
    std::map<std::string, double> checks;  // exact-identity residuals
    bool identities_pass = true;
    bool all_finite_stable = true;

    std::string to_json_text() const;
    std::string ratios_csv() const;
};

ConstantReport run_config(const ExperimentConfig& cfg);

// Stability per the J-grid rule; exposed for tests.
SuiteSummary summarize_suite(const std::string& name, std::span<const RatioSample> samples);
double spearman_rho(std::span<const double> xs, std::span<const double> ys);

int resolve_threads(int requested);

}  // namespace nczw
