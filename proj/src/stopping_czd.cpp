#include "nczw/stopping_czd.hpp"

#include <cmath>
#include <stdexcept>

namespace nczw {

Mat StoppingFamily::p_cube(int n, long cube) const {
    auto c = source.grid.coords(cube, n);
    const long parent = source.grid.index_of({c[0] >> 1, c[1] >> 1}, n - 1);
    return q_cube(n - 1, parent) - q_cube(n, cube);
}

OperatorField StoppingFamily::q_field(int n) const {
    OperatorField out(source.grid, source.m);
    for (long q = 0; q < source.grid.cubes_at(n); ++q) {
        const Mat& v = q_cube(n, q);
        for (long cell : source.grid.cells_in_cube(n, q)) out.at(cell) = v;
    }
    return out;
}

OperatorField StoppingFamily::p_field(int n) const {
    OperatorField out(source.grid, source.m);
    for (long q = 0; q < source.grid.cubes_at(n); ++q) {
        const Mat v = p_cube(n, q);
        for (long cell : source.grid.cells_in_cube(n, q)) out.at(cell) = v;
    }
    return out;
}

StoppingFamily cuculescu(const OperatorField& f, double lambda, const Weight& w) {
    if (lambda <= 0.0) throw std::invalid_argument("cuculescu requires lambda > 0");
    if (!f.is_positive_field()) throw std::invalid_argument("cuculescu requires a positive field");
    const auto& g = f.grid;

    StoppingFamily sf;
    sf.lambda = lambda;
    sf.source = f;
    sf.weight = w;
    sf.martingale.reserve(static_cast<size_t>(g.J));
    for (int n = 1; n <= g.J; ++n) sf.martingale.push_back(conditional_expectation(f, n));

    sf.q_cubes.assign(static_cast<size_t>(g.J + 1), {});
    sf.q_cubes[0] = {identity_matrix(f.m)};
    for (int n = 1; n <= g.J; ++n) {
        const auto& fn = sf.martingale[static_cast<size_t>(n - 1)];
        auto& level = sf.q_cubes[static_cast<size_t>(n)];
        level.resize(static_cast<size_t>(g.cubes_at(n)));
        for (long q = 0; q < g.cubes_at(n); ++q) {
            auto c = g.coords(q, n);
            const long parent = g.index_of({c[0] >> 1, c[1] >> 1}, n - 1);
            const Mat& prev = sf.q_cubes[static_cast<size_t>(n - 1)][static_cast<size_t>(parent)];
            const Mat fn_q = fn.at(g.cells_in_cube(n, q).front());
            const Mat compressed = prev * fn_q * prev;
            const Mat sym = 0.5 * (compressed + compressed.adjoint());
            const Mat keep = spectral_projection(sym, Interval::closed(0.0, lambda));
            Mat qn = prev * keep;
            qn = 0.5 * (qn + qn.adjoint()).eval();
            if (!is_projection(qn, 1e-9))
                throw std::runtime_error("cuculescu recursion produced a non-projection");
            level[static_cast<size_t>(q)] = qn;

            sf.max_commutator = std::max(sf.max_commutator, operator_norm(qn * sym - sym * qn));
            Eigen::SelfAdjointEigenSolver<Mat> excess((qn * fn_q * qn - lambda * qn).eval(),
                                                      Eigen::EigenvaluesOnly);
            sf.max_level_excess = std::max(sf.max_level_excess, excess.eigenvalues().maxCoeff());
        }
    }
    if (sf.max_commutator > 1e-10)
        throw std::runtime_error("cuculescu commutation check failed (eigensolver trouble)");
    return sf;
}

std::vector<std::vector<double>> scalar_stopping_oracle(const OperatorField& f, double lambda) {
    if (f.m != 1) throw std::invalid_argument("scalar oracle needs m = 1");
    const auto& g = f.grid;
    std::vector<std::vector<double>> q(static_cast<size_t>(g.J + 1));
    q[0] = {1.0};
    std::vector<OperatorField> mart;
    for (int n = 1; n <= g.J; ++n) mart.push_back(conditional_expectation(f, n));
    for (int n = 1; n <= g.J; ++n) {
        q[static_cast<size_t>(n)].resize(static_cast<size_t>(g.cubes_at(n)));
        for (long cube = 0; cube < g.cubes_at(n); ++cube) {
            auto c = g.coords(cube, n);
            const long parent = g.index_of({c[0] >> 1, c[1] >> 1}, n - 1);
            const double prev = q[static_cast<size_t>(n - 1)][static_cast<size_t>(parent)];
            const double value =
                mart[static_cast<size_t>(n - 1)].at(g.cells_in_cube(n, cube).front())(0, 0).real();
            // same endpoint snap as the spectral calculus
            const bool keep = value <= lambda || std::abs(value - lambda) <= kSpectralSnapTol;
            q[static_cast<size_t>(n)][static_cast<size_t>(cube)] = prev * (keep ? 1.0 : 0.0);
        }
    }
    return q;
}

double level_set_bound(const StoppingFamily& sf) {
    const double l1 = lp_norm(sf.source, 1.0, &sf.weight);
    if (l1 <= 0.0) throw std::invalid_argument("level_set_bound requires a nonzero field");
    OperatorField complement =
        OperatorField::identity(sf.source.grid, sf.source.m) - sf.terminal();
    const double mass = trace_functional(complement, &sf.weight);
    return sf.lambda * mass / (ap_characteristic(sf.weight, 1.0) * l1);
}

CZParts cz_decompose(const OperatorField& f, const StoppingFamily& sf) {
    const auto& g = f.grid;
    if (!(g == sf.source.grid) || f.m != sf.source.m)
        throw std::invalid_argument("cz_decompose: field does not match the stopping family");
    for (long i = 0; i < g.num_cells(); ++i)
        if ((f.at(i) - sf.source.at(i)).cwiseAbs().maxCoeff() > 0.0)
            throw std::invalid_argument("cz_decompose: field does not match the stopping family");

    CZParts parts;
    parts.lambda = sf.lambda;
    OperatorField q = sf.terminal();
    parts.g = field_product(q, f, q);
    parts.b_d = OperatorField(g, f.m);
    parts.b_off = OperatorField(g, f.m);
    OperatorField off_alt(g, f.m);

    for (int k = 1; k <= g.J; ++k) {
        const auto& fk = sf.martingale[static_cast<size_t>(k - 1)];
        OperatorField pk = sf.p_field(k);
        OperatorField qk = sf.q_field(k);
        OperatorField fmfk = f - fk;
        OperatorField bd_k = field_product(pk, fmfk, pk);
        OperatorField boff_k = field_product(pk, fmfk, qk);
        parts.g += field_product(pk, fk, pk);
        parts.b_d += bd_k;
        parts.b_off += boff_k + boff_k.adjoint();
        OperatorField alt_k = field_product(pk, f, qk);
        off_alt += alt_k + alt_k.adjoint();
        parts.b_d_levels.push_back(std::move(bd_k));
        parts.b_off_levels.push_back(std::move(boff_k));
    }
    parts.off_form_gap = (parts.b_off - off_alt).max_norm();
    return parts;
}

GoodBadReport good_bad_bounds(const CZParts& parts, const StoppingFamily& sf) {
    GoodBadReport report;
    const double l1 = lp_norm(sf.source, 1.0, &sf.weight);
    if (l1 <= 0.0) return report;
    report.g_l1_ratio =
        lp_norm(parts.g, 1.0, &sf.weight) / (ap_characteristic(sf.weight, 1.0) * l1);
    report.g_inf_ratio = parts.g.max_norm() / parts.lambda;
    double bd_sum = 0.0;
    for (const auto& bdk : parts.b_d_levels) bd_sum += lp_norm(bdk, 1.0, &sf.weight);
    report.bd_sum_ratio = bd_sum / l1;
    return report;
}

OperatorField eta_field(const DyadicGrid& g, int level, const std::vector<Mat>& cube_projections,
                        double dilation) {
    const int m = static_cast<int>(cube_projections.front().rows());
    std::vector<std::vector<Mat>> buckets(static_cast<size_t>(g.num_cells()));
    for (long q = 0; q < g.cubes_at(level); ++q) {
        const Mat& p = cube_projections[static_cast<size_t>(q)];
        if (real_trace(p) < 0.5) continue;
        for (long cell : g.cells_in_dilated_cube(level, q, dilation))
            buckets[static_cast<size_t>(cell)].push_back(p);
    }
    OperatorField eta(g, m);
    for (long cell = 0; cell < g.num_cells(); ++cell) {
        auto& bucket = buckets[static_cast<size_t>(cell)];
        if (!bucket.empty()) eta.at(cell) = lattice_join(bucket, m);
    }
    return eta;
}

DilationProjections zeta_projection(const StoppingFamily& sf, double dilation) {
    const auto& g = sf.source.grid;
    const int m = sf.source.m;
    std::vector<std::vector<Mat>> buckets(static_cast<size_t>(g.num_cells()));
    for (int n = 1; n <= g.J; ++n) {
        for (long q = 0; q < g.cubes_at(n); ++q) {
            Mat p = sf.p_cube(n, q);
            if (real_trace(p) < 0.5) continue;
            for (long cell : g.cells_in_dilated_cube(n, q, dilation))
                buckets[static_cast<size_t>(cell)].push_back(p);
        }
    }
    DilationProjections dp;
    dp.dilation = dilation;
    dp.zeta = OperatorField::identity(g, m);
    for (long cell = 0; cell < g.num_cells(); ++cell) {
        auto& bucket = buckets[static_cast<size_t>(cell)];
        if (!bucket.empty()) dp.zeta.at(cell) -= lattice_join(bucket, m);
    }
    return dp;
}

double zeta_mass_ratio(const StoppingFamily& sf, const DilationProjections& dp) {
    const double l1 = lp_norm(sf.source, 1.0, &sf.weight);
    if (l1 <= 0.0) throw std::invalid_argument("zeta_mass_ratio requires a nonzero field");
    OperatorField complement = OperatorField::identity(sf.source.grid, sf.source.m) - dp.zeta;
    return sf.lambda * trace_functional(complement, &sf.weight) /
           (ap_characteristic(sf.weight, 1.0) * l1);
}

double zeta_cancellation_p(const StoppingFamily& sf, const DilationProjections& dp) {
    const auto& g = sf.source.grid;
    double worst = 0.0;
    for (int n = 1; n <= g.J; ++n) {
        for (long q = 0; q < g.cubes_at(n); ++q) {
            Mat p = sf.p_cube(n, q);
            if (real_trace(p) < 0.5) continue;
            for (long cell : g.cells_in_dilated_cube(n, q, dp.dilation))
                worst = std::max(worst, operator_norm(dp.zeta.at(cell) * p));
        }
    }
    return worst;
}

double zeta_cancellation_b(const StoppingFamily& sf, const CZParts& parts,
                           const DilationProjections& dp, double factor) {
    const auto& g = sf.source.grid;
    double worst = 0.0;
    for (int n = 1; n <= g.J; ++n) {
        const auto& bd = parts.b_d_levels[static_cast<size_t>(n - 1)];
        const auto& boff = parts.b_off_levels[static_cast<size_t>(n - 1)];
        for (long xq = 0; xq < g.cubes_at(n); ++xq) {
            auto xcells = g.cells_in_cube(n, xq);
            auto ycells = g.cells_in_dilated_cube(n, xq, factor);
            for (long x : xcells) {
                const Mat& z = dp.zeta.at(x);
                for (long y : ycells) {
                    worst = std::max(worst, operator_norm(z * bd.at(y) * z));
                    Mat off = boff.at(y) + boff.at(y).adjoint();
                    worst = std::max(worst, operator_norm(z * off * z));
                }
            }
        }
    }
    return worst;
}

}  // namespace nczw
