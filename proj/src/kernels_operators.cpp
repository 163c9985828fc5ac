#include "nczw/kernels_operators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace nczw {

namespace {

double sq_dist(const Point& x, const Point& y, int d) {
    double s = 0.0;
    for (int i = 0; i < d; ++i) s += (x[i] - y[i]) * (x[i] - y[i]);
    return s;
}

double dist(const Point& x, const Point& y, int d) { return std::sqrt(sq_dist(x, y, d)); }

// Poisson kernel on R^d at height t, c_d t / (t^2 + |z|^2)^{(d+1)/2}.
double poisson(double t, double r2, int d) {
    const double cd = d == 1 ? 1.0 / M_PI : 1.0 / (2.0 * M_PI);
    return cd * t / std::pow(t * t + r2, 0.5 * (d + 1));
}

}  // namespace

Kernel hilbert_kernel() {
    Kernel k;
    k.name = "hilbert";
    k.d = 1;
    k.tag = Kernel::Smoothness::Lipschitz;
    k.eval = [](const Point& x, const Point& y) { return 1.0 / (x[0] - y[0]); };
    return k;
}

Kernel riesz_kernel(int component, int d) {
    if (component < 0 || component >= d) throw std::invalid_argument("riesz component out of range");
    Kernel k;
    k.name = "riesz:" + std::to_string(component);
    k.d = d;
    k.tag = Kernel::Smoothness::Lipschitz;
    k.eval = [component, d](const Point& x, const Point& y) {
        double r = dist(x, y, d);
        return (x[static_cast<size_t>(component)] - y[static_cast<size_t>(component)]) /
               std::pow(r, d + 1);
    };
    return k;
}

double VectorKernel::l2_at(const Point& x, const Point& y) const {
    double s = 0.0;
    for (int k = 0; k < count; ++k) {
        double v = eval(k, x, y);
        s += v * v;
    }
    return std::sqrt(s);
}

VectorKernel single_kernel_family(const Kernel& k) {
    VectorKernel v;
    v.name = k.name;
    v.d = k.d;
    v.count = 1;
    auto base = k.eval;
    v.eval = [base](int, const Point& x, const Point& y) { return base(x, y); };
    return v;
}

VectorKernel dyadic_poisson_family(int count, int d) {
    if (count < 1 || count > 64) throw std::invalid_argument("family size out of range");
    VectorKernel v;
    v.name = "dyadic-poisson:" + std::to_string(count);
    v.d = d;
    v.count = count;
    v.eval = [d](int k, const Point& x, const Point& y) {
        double r2 = sq_dist(x, y, d);
        double t = std::pow(0.5, k + 1);
        return poisson(t, r2, d) - poisson(0.5 * t, r2, d);
    };
    return v;
}

Kernel parse_kernel_spec(const std::string& spec, int d) {
    if (spec == "hilbert") {
        if (d != 1) throw std::invalid_argument("hilbert kernel lives on d = 1");
        return hilbert_kernel();
    }
    if (spec.rfind("riesz:", 0) == 0) return riesz_kernel(std::stoi(spec.substr(6)), d);
    throw std::invalid_argument("unknown scalar kernel spec: " + spec);
}

VectorKernel parse_vector_kernel_spec(const std::string& spec, int d) {
    if (spec.rfind("dyadic-poisson:", 0) == 0)
        return dyadic_poisson_family(std::stoi(spec.substr(15)), d);
    return single_kernel_family(parse_kernel_spec(spec, d));
}

double size_condition_constant(const Kernel& k, const DyadicGrid& g) {
    return size_condition_constant(single_kernel_family(k), g);
}

double size_condition_constant(const VectorKernel& k, const DyadicGrid& g) {
    double worst = 0.0;
    const long stride = std::max(1L, g.num_cells() / 64);
    for (long i = 0; i < g.num_cells(); i += stride)
        for (long j = 0; j < g.num_cells(); j += stride) {
            if (i == j) continue;
            Point x = g.center(i, g.J), y = g.center(j, g.J);
            double r = dist(x, y, g.d);
            worst = std::max(worst, k.l2_at(x, y) * std::pow(r, g.d));
        }
    if (!std::isfinite(worst)) throw std::runtime_error("kernel fails the size condition");
    return worst;
}

double psi_bump(double t) {
    if (t <= 1.0 || t >= 2.0) return 0.0;
    return std::exp(-1.0 / ((t - 1.0) * (2.0 - t)));
}

namespace {

// B(t) / sum_j B(2^j t); at octave boundaries (where every term underflows)
// fall back to the half-open convention (1, 2], which makes the annuli tile
// (0, inf) exactly and keeps them inside strict truncations r > eps.
double psi_normalized(double t) {
    if (t <= 0.0) return 0.0;
    double denom = 0.0;
    const int j0 = static_cast<int>(std::floor(std::log2(t)));
    for (int j = -j0 - 2; j <= -j0 + 2; ++j) denom += psi_bump(std::ldexp(t, j));
    if (denom > 0.0) return psi_bump(t) / denom;
    return (t > 1.0 && t <= 2.0) ? 1.0 : 0.0;
}

}  // namespace

double psi_weight(double r, int i, int d) {
    if (r <= 0.0) return 0.0;
    return psi_normalized(std::ldexp(r, i) / std::sqrt(static_cast<double>(d)));
}

std::pair<int, int> resolvable_annuli(const DyadicGrid& g) {
    // annulus i covers |z| in [sqrt(d) 2^{-i}, sqrt(d) 2^{-i+1})
    return {0, g.J + 1};
}

int lacunary_index(double eps, int d) {
    return static_cast<int>(
        std::floor(std::log2(2.0 * std::sqrt(static_cast<double>(d)) / eps)));
}

namespace {

// Generic pairwise reduction out(x) = sum_y vol * weight(x, y) K(x,y) f(y).
template <typename WeightFn>
OperatorField pair_apply(const Kernel& k, const OperatorField& f, WeightFn&& wfn) {
    const auto& g = f.grid;
    OperatorField out(g, f.m);
    const double vol = g.cell_volume();
    std::vector<Point> centers(static_cast<size_t>(g.num_cells()));
    for (long i = 0; i < g.num_cells(); ++i) centers[static_cast<size_t>(i)] = g.center(i, g.J);
    for (long x = 0; x < g.num_cells(); ++x) {
        Mat acc = Mat::Zero(f.m, f.m);
        for (long y = 0; y < g.num_cells(); ++y) {
            if (y == x) continue;
            if (f.at(y).isZero(0.0)) continue;
            const double r = dist(centers[static_cast<size_t>(x)],
                                  centers[static_cast<size_t>(y)], g.d);
            const double wq = wfn(r);
            if (wq == 0.0) continue;
            acc += (vol * wq *
                    k.eval(centers[static_cast<size_t>(x)], centers[static_cast<size_t>(y)])) *
                   f.at(y);
        }
        out.at(x) = acc;
    }
    return out;
}

}  // namespace

OperatorField truncated_apply(const Kernel& k, const OperatorField& f, double eps) {
    if (eps <= 0.0) throw std::invalid_argument("truncation radius must be positive");
    return pair_apply(k, f, [eps](double r) { return r > eps ? 1.0 : 0.0; });
}

OperatorField lacunary_apply(const Kernel& k, const OperatorField& f, int j) {
    const int d = f.grid.d;
    return pair_apply(k, f, [j, d](double r) {
        double w = 0.0;
        // at most one annulus contains r; probe the candidates around log2
        const int base = static_cast<int>(
            std::floor(std::log2(std::sqrt(static_cast<double>(d)) / r)));
        for (int i = base - 1; i <= base + 1; ++i)
            if (i < j) w += psi_weight(r, i, d);
        return w;
    });
}

OperatorField annulus_apply(const Kernel& k, const OperatorField& f, int i) {
    const int d = f.grid.d;
    return pair_apply(k, f, [i, d](double r) { return psi_weight(r, i, d); });
}

OperatorField boundary_apply(const Kernel& k, const OperatorField& f, double eps) {
    const int d = f.grid.d;
    const int je = lacunary_index(eps, d);
    return pair_apply(k, f, [je, eps, d](double r) {
        return r > eps ? psi_weight(r, je, d) : 0.0;
    });
}

OperatorField averaging_apply(const OperatorField& f, double r) {
    if (r <= 0.0) throw std::invalid_argument("averaging radius must be positive");
    const auto& g = f.grid;
    OperatorField out(g, f.m);
    const double scale = g.cell_volume() / std::pow(r, g.d);
    for (long x = 0; x < g.num_cells(); ++x) {
        Mat acc = Mat::Zero(f.m, f.m);
        for (long y = 0; y < g.num_cells(); ++y)
            if (g.center_distance(x, y) <= r) acc += f.at(y);
        out.at(x) = scale * acc;
    }
    return out;
}

double HormanderModulus::max_over_q(int j) const {
    double v = 0.0;
    for (const auto& e : entries)
        if (e.j == j) v = std::max(v, e.value);
    return v;
}

double HormanderModulus::geometric_decay_exponent() const {
    std::vector<double> xs, ys;
    for (int j = 1; j <= j_max; ++j) {
        bool truncated = true;
        double v = 0.0;
        for (const auto& e : entries)
            if (e.j == j && !e.truncated) {
                truncated = false;
                v = std::max(v, e.value);
            }
        if (truncated || v <= 0.0) continue;
        xs.push_back(static_cast<double>(j));
        ys.push_back(std::log2(v));
    }
    if (xs.size() < 2) return 0.0;
    const double n = static_cast<double>(xs.size());
    double sx = std::accumulate(xs.begin(), xs.end(), 0.0);
    double sy = std::accumulate(ys.begin(), ys.end(), 0.0);
    double sxx = 0.0, sxy = 0.0;
    for (size_t i = 0; i < xs.size(); ++i) {
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return -slope;
}

std::string HormanderModulus::to_csv() const {
    std::ostringstream os;
    os << "level,cube,j,m_r,partial_sum,truncated\n";
    double partial = 0.0;
    int last_level = -1;
    long last_cube = -1;
    for (const auto& e : entries) {
        if (e.level != last_level || e.cube != last_cube) {
            partial = 0.0;
            last_level = e.level;
            last_cube = e.cube;
        }
        partial += e.value;
        os << e.level << "," << e.cube << "," << e.j << "," << e.value << "," << partial << ","
           << (e.truncated ? 1 : 0) << "\n";
    }
    return os.str();
}

HormanderModulus hormander_modulus(const VectorKernel& k, double r, const DyadicGrid& g,
                                   std::span<const std::pair<int, long>> cubes, int j_max,
                                   bool transposed) {
    if (r < 1.0) throw std::invalid_argument("Hormander exponent requires r >= 1");
    HormanderModulus out;
    out.r = r;
    out.j_max = j_max;
    const double vol = g.cell_volume();
    for (auto [level, cube] : cubes) {
        Point cq = g.center(cube, level);
        const double ell = g.side(level);
        auto ycells = g.cells_in_cube(level, cube);
        const long ystride = std::max(1L, static_cast<long>(ycells.size()) / 32);
        double partial = 0.0;
        for (int j = 1; j <= j_max; ++j) {
            const double lo = std::ldexp(ell, j), hi = std::ldexp(ell, j + 1);
            // annulus fully inside the window?
            bool truncated = false;
            for (int axis = 0; axis < g.d; ++axis)
                if (cq[axis] - hi < 0.0 || cq[axis] + hi > 1.0) truncated = true;
            std::vector<long> annulus;
            for (long x = 0; x < g.num_cells(); ++x) {
                Point cx = g.center(x, g.J);
                double rr = dist(cx, cq, g.d);
                if (rr >= lo && rr <= hi) annulus.push_back(x);
            }
            double best = 0.0;
            for (size_t yi = 0; yi < ycells.size(); yi += static_cast<size_t>(ystride)) {
                Point y = g.center(ycells[yi], g.J);
                double sum = 0.0;
                for (long x : annulus) {
                    Point cx = g.center(x, g.J);
                    double v = 0.0;
                    for (int comp = 0; comp < k.count; ++comp) {
                        double kv = transposed ? k.eval(comp, y, cx) - k.eval(comp, cq, cx)
                                               : k.eval(comp, cx, y) - k.eval(comp, cx, cq);
                        v += kv * kv;
                    }
                    sum += std::pow(std::sqrt(v), r) * vol;
                }
                const double mean = sum / std::pow(lo, g.d);
                best = std::max(best, std::pow(lo, g.d) * std::pow(mean, 1.0 / r));
            }
            partial += best;
            out.entries.push_back({level, cube, j, best, truncated});
        }
        out.sup_partial_sum = std::max(out.sup_partial_sum, partial);
    }
    return out;
}

std::vector<std::pair<int, long>> default_modulus_cubes(const DyadicGrid& g, int per_level) {
    std::vector<std::pair<int, long>> cubes;
    for (int n = 2; n <= g.J; ++n) {
        const long total = g.cubes_at(n);
        const long stride = std::max(1L, total / per_level);
        for (long q = 0; q < total; q += stride) cubes.emplace_back(n, q);
    }
    return cubes;
}

std::vector<OperatorField> vector_apply(const VectorKernel& k, const OperatorField& f) {
    std::vector<OperatorField> out;
    out.reserve(static_cast<size_t>(k.count));
    for (int comp = 0; comp < k.count; ++comp) {
        Kernel piece;
        piece.d = k.d;
        piece.eval = [&k, comp](const Point& x, const Point& y) { return k.eval(comp, x, y); };
        out.push_back(pair_apply(piece, f, [](double) { return 1.0; }));
    }
    return out;
}

namespace {

OperatorField column_square(std::span<const OperatorField> fields) {
    OperatorField s(fields.front().grid, fields.front().m);
    for (const auto& a : fields)
        for (long i = 0; i < s.grid.num_cells(); ++i)
            s.at(i) += a.at(i).adjoint() * a.at(i);
    for (long i = 0; i < s.grid.num_cells(); ++i) s.at(i) = sqrt_psd(s.at(i));
    return s;
}

}  // namespace

double column_norm(std::span<const OperatorField> fields, double p, const Weight* w) {
    return lp_norm(column_square(fields), p, w);
}

double row_norm(std::span<const OperatorField> fields, double p, const Weight* w) {
    std::vector<OperatorField> adj;
    adj.reserve(fields.size());
    for (const auto& a : fields) adj.push_back(a.adjoint());
    return column_norm(adj, p, w);
}

double cr_norm(std::span<const OperatorField> fields, double p, const Weight* w) {
    const double col = column_norm(fields, p, w);
    const double row = row_norm(fields, p, w);
    if (p >= 2.0) return std::max(col, row);
    // p < 2: upper bound from a fixed median split of the components
    std::vector<double> norms;
    for (const auto& a : fields) norms.push_back(lp_norm(a, p, w));
    std::vector<double> sorted = norms;
    std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
    const double median = sorted[sorted.size() / 2];
    std::vector<OperatorField> colpart, rowpart;
    OperatorField zero(fields.front().grid, fields.front().m);
    for (size_t i = 0; i < fields.size(); ++i) {
        colpart.push_back(norms[i] >= median ? fields[i] : zero);
        rowpart.push_back(norms[i] >= median ? zero : fields[i]);
    }
    const double split = column_norm(colpart, p, w) + row_norm(rowpart, p, w);
    return std::min({col, row, split});
}

std::pair<double, double> maximal_linfty_bound(std::span<const OperatorField> fields, double p,
                                               const Weight* w, int iterations) {
    const auto& g = fields.front().grid;
    const int m = fields.front().m;
    double lower = 0.0;
    for (const auto& a : fields) lower = std::max(lower, lp_norm(a, p, w));

    OperatorField majorant(g, m);
    const double delta = 1e-9 * std::max(1.0, lower);
    for (long cell = 0; cell < g.num_cells(); ++cell) {
        std::vector<Mat> local;
        local.reserve(fields.size());
        for (const auto& a : fields) local.push_back(a.at(cell));
        Mat b = Mat::Zero(m, m);
        for (const auto& a : local)
            b += sqrt_psd((a * a + delta * delta * identity_matrix(m)).eval());
        auto feasible = [&](const Mat& c) {
            for (const auto& a : local) {
                Eigen::SelfAdjointEigenSolver<Mat> lo((c - a).eval(), Eigen::EigenvaluesOnly);
                if (lo.eigenvalues().minCoeff() < -1e-9) return false;
                Eigen::SelfAdjointEigenSolver<Mat> hi((c + a).eval(), Eigen::EigenvaluesOnly);
                if (hi.eigenvalues().minCoeff() < -1e-9) return false;
            }
            return true;
        };
        auto positive_part = [](const Mat& x) {
            Eigen::SelfAdjointEigenSolver<Mat> es(x);
            Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
            return (es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint()).eval();
        };
        int stale = 0;
        for (int iter = 0; iter < iterations && stale < 12; ++iter) {
            Mat cand = 0.97 * b;
            for (int round = 0; round < 6; ++round) {
                for (const auto& a : local) {
                    cand += positive_part((a - cand).eval());
                    cand += positive_part((-a - cand).eval());
                }
                cand = 0.5 * (cand + cand.adjoint()).eval();
            }
            if (feasible(cand) && schatten_norm(cand, 2.0) < schatten_norm(b, 2.0) - 1e-12) {
                b = cand;
                stale = 0;
            } else {
                ++stale;
            }
        }
        majorant.at(cell) = b;
    }
    double upper = lp_norm(majorant, p, w);
    return {std::max(upper, lower), lower};
}

CertificateCheck weak_maximal_certificate(std::span<const OperatorField> fields, double lambda,
                                          const OperatorField& e, const Weight* w) {
    if (!e.is_projection_field()) throw std::invalid_argument("witness must be projection-valued");
    CertificateCheck out;
    for (const auto& a : fields)
        for (long i = 0; i < e.grid.num_cells(); ++i)
            out.compression =
                std::max(out.compression, operator_norm(e.at(i) * a.at(i) * e.at(i)));
    OperatorField complement = OperatorField::identity(e.grid, e.m) - e;
    out.mass = lambda * trace_functional(complement, w);
    out.pass = out.compression <= lambda * (1.0 + 1e-9);
    return out;
}

namespace {

double dist_to_cube(const DyadicGrid& g, const Point& x, int level, long cube) {
    Point cq = g.center(cube, level);
    const double half = 0.5 * g.side(level);
    double s = 0.0;
    for (int i = 0; i < g.d; ++i) {
        double gap = std::max(0.0, std::abs(x[i] - cq[i]) - half);
        s += gap * gap;
    }
    return std::sqrt(s);
}

}  // namespace

double annular_sum_ratio(const Kernel& k, const OperatorField& f, const Weight& w, double p,
                         int level, long cube) {
    const auto& g = f.grid;
    const double vol = g.cell_volume();
    const double sd = std::sqrt(static_cast<double>(g.d));
    Point cq = g.center(cube, level);
    auto ycells = g.cells_in_cube(level, cube);

    double denom = 0.0;  // ||chi_Q f||_{L_1^w}
    for (long y : ycells)
        denom += schatten_norm(f.at(y), 1.0) * w.values[static_cast<size_t>(y)] * vol;
    if (denom <= 0.0) return 0.0;

    double lhs = 0.0;
    for (int i = 0; i <= level - 1; ++i) {
        // Q_i: cells within distance ~2^{-i} of Q, |Q_i| ~ 2^{-id}
        const double reach = std::ldexp(2.0 * sd, -i);
        std::vector<long> qi;
        for (long x = 0; x < g.num_cells(); ++x)
            if (dist_to_cube(g, g.center(x, g.J), level, cube) <= reach) qi.push_back(x);
        const double qi_vol = static_cast<double>(qi.size()) * vol;
        if (qi.empty()) continue;
        double inner = 0.0;
        for (long y : ycells) {
            const double fy = schatten_norm(f.at(y), 1.0);
            if (fy <= 0.0) continue;
            Point py = g.center(y, g.J);
            double xsum = 0.0;
            for (long x : qi) {
                Point px = g.center(x, g.J);
                const double w1 = psi_weight(dist(px, py, g.d), i, g.d);
                const double w2 = psi_weight(dist(px, cq, g.d), i, g.d);
                double kiq = (w1 > 0.0 ? k.eval(px, py) * w1 : 0.0) -
                             (w2 > 0.0 ? k.eval(px, cq) * w2 : 0.0);
                xsum += std::pow(std::abs(kiq), p) * w.values[static_cast<size_t>(x)] * vol;
            }
            inner += fy * xsum * vol;
        }
        lhs += qi_vol * std::pow(inner / qi_vol, 1.0 / p);
    }
    return lhs / std::pow(denom, 1.0 / p);
}

double annular_sum_ratio_5k(const VectorKernel& k, const OperatorField& f, const Weight& w,
                            double p, int level, long cube) {
    const auto& g = f.grid;
    const double vol = g.cell_volume();
    Point cq = g.center(cube, level);
    auto ycells = g.cells_in_cube(level, cube);

    double denom = 0.0;
    for (long y : ycells)
        denom += schatten_norm(f.at(y), 1.0) * w.values[static_cast<size_t>(y)] * vol;
    if (denom <= 0.0) return 0.0;

    double lhs = 0.0;
    double inner_factor = 5.0;
    for (int kk = 1; inner_factor * g.side(level) <= 10.0; ++kk) {
        const double outer_factor = 5.0 * inner_factor;
        auto outer = g.cells_in_dilated_cube(level, cube, outer_factor);
        auto innerc = g.cells_in_dilated_cube(level, cube, inner_factor);
        std::vector<char> is_inner(static_cast<size_t>(g.num_cells()), 0);
        for (long c : innerc) is_inner[static_cast<size_t>(c)] = 1;
        std::vector<long> shell;
        for (long c : outer)
            if (!is_inner[static_cast<size_t>(c)]) shell.push_back(c);
        const double nominal = std::pow(outer_factor * g.side(level), g.d);
        if (!shell.empty()) {
            double inner_sum = 0.0;
            for (long y : ycells) {
                const double fy = schatten_norm(f.at(y), 1.0);
                if (fy <= 0.0) continue;
                Point py = g.center(y, g.J);
                double xsum = 0.0;
                for (long x : shell) {
                    Point px = g.center(x, g.J);
                    double v = 0.0;
                    for (int comp = 0; comp < k.count; ++comp) {
                        double kv = k.eval(comp, px, py) - k.eval(comp, px, cq);
                        v += kv * kv;
                    }
                    xsum += std::pow(std::sqrt(v), p) * w.values[static_cast<size_t>(x)] * vol;
                }
                inner_sum += fy * xsum * vol;
            }
            lhs += nominal * std::pow(inner_sum / nominal, 1.0 / p);
        }
        inner_factor = outer_factor;
    }
    return lhs / std::pow(denom, 1.0 / p);
}

}  // namespace nczw
