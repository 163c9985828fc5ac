#include "nczw/dyadic_model.hpp"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "nczw/weights.hpp"

namespace nczw {

DyadicGrid::DyadicGrid(int dim, int depth) : d(dim), J(depth) {
    if (dim != 1 && dim != 2) throw std::invalid_argument("grid dimension must be 1 or 2");
    if (depth < 1 || depth > 14) throw std::invalid_argument("grid depth out of range");
}

std::array<long, 2> DyadicGrid::coords(long index, int n) const {
    if (d == 1) return {index, 0};
    const long side_cubes = 1L << n;
    return {index % side_cubes, index / side_cubes};
}

long DyadicGrid::index_of(const std::array<long, 2>& c, int n) const {
    if (d == 1) return c[0];
    return c[1] * (1L << n) + c[0];
}

long DyadicGrid::ancestor(long cell, int n) const {
    const int shift = J - n;
    if (d == 1) return cell >> shift;
    auto c = coords(cell, J);
    return index_of({c[0] >> shift, c[1] >> shift}, n);
}

std::array<double, 2> DyadicGrid::center(long index, int n) const {
    auto c = coords(index, n);
    const double h = side(n);
    return {(static_cast<double>(c[0]) + 0.5) * h, (static_cast<double>(c[1]) + 0.5) * h};
}

double DyadicGrid::center_distance(long a, long b) const {
    auto ca = center(a, J), cb = center(b, J);
    if (d == 1) return std::abs(ca[0] - cb[0]);
    return std::hypot(ca[0] - cb[0], ca[1] - cb[1]);
}

std::vector<long> DyadicGrid::cells_in_cube(int n, long q) const {
    const int shift = J - n;
    std::vector<long> out;
    if (d == 1) {
        out.reserve(1L << shift);
        for (long i = q << shift; i < (q + 1) << shift; ++i) out.push_back(i);
        return out;
    }
    auto c = coords(q, n);
    out.reserve(1L << (2 * shift));
    for (long y = c[1] << shift; y < (c[1] + 1) << shift; ++y)
        for (long x = c[0] << shift; x < (c[0] + 1) << shift; ++x)
            out.push_back(index_of({x, y}, J));
    return out;
}

bool DyadicGrid::cell_center_in_dilated_cube(long cell, int n, long q, double factor) const {
    auto cq = center(q, n);
    auto cx = center(cell, J);
    const double half = 0.5 * factor * side(n);
    for (int i = 0; i < d; ++i)
        if (std::abs(cx[i] - cq[i]) > half) return false;
    return true;
}

std::vector<long> DyadicGrid::cells_in_dilated_cube(int n, long q, double factor) const {
    auto cq = center(q, n);
    const double half = 0.5 * factor * side(n);
    const double hJ = side(J);
    std::vector<long> out;
    auto axis_range = [&](int i) -> std::array<long, 2> {
        long lo = static_cast<long>(std::floor((cq[i] - half) / hJ - 0.5));
        long hi = static_cast<long>(std::ceil((cq[i] + half) / hJ + 0.5));
        lo = std::max(lo, 0L);
        hi = std::min(hi, (1L << J) - 1);
        return {lo, hi};
    };
    auto rx = axis_range(0);
    if (d == 1) {
        for (long x = rx[0]; x <= rx[1]; ++x)
            if (cell_center_in_dilated_cube(x, n, q, factor)) out.push_back(x);
        return out;
    }
    auto ry = axis_range(1);
    for (long y = ry[0]; y <= ry[1]; ++y)
        for (long x = rx[0]; x <= rx[1]; ++x) {
            long cell = index_of({x, y}, J);
            if (cell_center_in_dilated_cube(cell, n, q, factor)) out.push_back(cell);
        }
    return out;
}

OperatorField::OperatorField(const DyadicGrid& g, int dim_m) : grid(g), m(dim_m) {
    cells.assign(static_cast<size_t>(g.num_cells()), Mat::Zero(m, m));
}

OperatorField OperatorField::constant(const DyadicGrid& g, const Mat& value) {
    OperatorField f(g, static_cast<int>(value.rows()));
    for (auto& c : f.cells) c = value;
    return f;
}

OperatorField OperatorField::identity(const DyadicGrid& g, int dim_m) {
    return constant(g, identity_matrix(dim_m));
}

OperatorField OperatorField::adjoint() const {
    OperatorField out = *this;
    for (auto& c : out.cells) c = c.adjoint().eval();
    return out;
}

OperatorField OperatorField::cwise_abs() const {
    OperatorField out = *this;
    for (auto& c : out.cells) c = abs_op(c);
    return out;
}

bool OperatorField::is_hermitian_field(double tol) const {
    for (const auto& c : cells)
        if (!is_hermitian(c, tol)) return false;
    return true;
}

bool OperatorField::is_positive_field(double tol) const {
    for (const auto& c : cells)
        if (!is_positive_semidefinite(c, tol)) return false;
    return true;
}

bool OperatorField::is_projection_field(double tol) const {
    for (const auto& c : cells)
        if (!is_projection(c, tol)) return false;
    return true;
}

double OperatorField::max_norm() const {
    double v = 0.0;
    for (const auto& c : cells) v = std::max(v, operator_norm(c));
    return v;
}

OperatorField& OperatorField::operator+=(const OperatorField& o) {
    for (size_t i = 0; i < cells.size(); ++i) cells[i] += o.cells[i];
    return *this;
}
OperatorField& OperatorField::operator-=(const OperatorField& o) {
    for (size_t i = 0; i < cells.size(); ++i) cells[i] -= o.cells[i];
    return *this;
}
OperatorField& OperatorField::operator*=(double t) {
    for (auto& c : cells) c *= t;
    return *this;
}

OperatorField field_product(const OperatorField& a, const OperatorField& b) {
    OperatorField out = a;
    for (size_t i = 0; i < out.cells.size(); ++i) out.cells[i] = a.cells[i] * b.cells[i];
    return out;
}

OperatorField field_product(const OperatorField& a, const OperatorField& b,
                            const OperatorField& c) {
    OperatorField out = a;
    for (size_t i = 0; i < out.cells.size(); ++i)
        out.cells[i] = a.cells[i] * b.cells[i] * c.cells[i];
    return out;
}

OperatorField conditional_expectation(const OperatorField& f, int n) {
    const auto& g = f.grid;
    if (n < 0 || n > g.J) throw std::invalid_argument("conditional expectation level out of range");
    if (n == g.J) return f;
    OperatorField out(g, f.m);
    const double inv_count = std::pow(0.5, (g.J - n) * g.d);
    for (long q = 0; q < g.cubes_at(n); ++q) {
        auto members = g.cells_in_cube(n, q);
        // Kahan-compensated entrywise sum
        Mat sum = Mat::Zero(f.m, f.m), comp = Mat::Zero(f.m, f.m);
        for (long cell : members) {
            Mat y = f.at(cell) - comp;
            Mat t = sum + y;
            comp = (t - sum) - y;
            sum = t;
        }
        Mat avg = sum * inv_count;
        for (long cell : members) out.at(cell) = avg;
    }
    return out;
}

std::vector<OperatorField> martingale_differences(const OperatorField& f) {
    std::vector<OperatorField> out;
    out.reserve(static_cast<size_t>(f.grid.J));
    OperatorField prev = conditional_expectation(f, 1);
    out.push_back(prev);
    for (int n = 2; n <= f.grid.J; ++n) {
        OperatorField cur = conditional_expectation(f, n);
        out.push_back(cur - prev);
        prev = cur;
    }
    return out;
}

double regularity_check(const OperatorField& f) {
    if (!f.is_positive_field())
        throw std::invalid_argument("regularity_check requires a positive field");
    const auto& g = f.grid;
    double rho = 0.0;
    OperatorField prev = conditional_expectation(f, 0);
    for (int n = 1; n <= g.J; ++n) {
        OperatorField cur = conditional_expectation(f, n);
        for (long q = 0; q < g.cubes_at(n); ++q) {
            long cell = g.cells_in_cube(n, q).front();
            const Mat& a = cur.at(cell);
            const Mat& b = prev.at(cell);
            Eigen::SelfAdjointEigenSolver<Mat> es(b);
            const double scale = std::max(1e-300, es.eigenvalues().maxCoeff());
            // restrict to the support of b; positivity forces ker b <= ker a
            int rank = 0;
            for (int k = 0; k < f.m; ++k)
                if (es.eigenvalues()(k) > 1e-13 * scale) ++rank;
            if (rank == 0) continue;
            Mat basis(f.m, rank);
            Eigen::VectorXd ev(rank);
            int c = 0;
            for (int k = 0; k < f.m; ++k) {
                if (es.eigenvalues()(k) > 1e-13 * scale) {
                    basis.col(c) = es.eigenvectors().col(k);
                    ev(c++) = es.eigenvalues()(k);
                }
            }
            Mat w = ev.cwiseSqrt().cwiseInverse().asDiagonal();
            Mat reduced = w * (basis.adjoint() * a * basis) * w;
            Eigen::SelfAdjointEigenSolver<Mat> er(reduced, Eigen::EigenvaluesOnly);
            rho = std::max(rho, er.eigenvalues().maxCoeff());
        }
        prev = cur;
    }
    return rho;
}

double trace_functional(const OperatorField& f, const Weight* w) {
    const double vol = f.grid.cell_volume();
    double sum = 0.0, comp = 0.0;
    for (size_t i = 0; i < f.cells.size(); ++i) {
        double v = real_trace(f.cells[i]) * vol * (w ? w->values[i] : 1.0);
        double y = v - comp;
        double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    return sum;
}

double lp_norm(const OperatorField& f, double p, const Weight* w) {
    if (p < 1.0) throw std::invalid_argument("lp_norm requires p >= 1");
    if (std::isinf(p)) return f.max_norm();
    const double vol = f.grid.cell_volume();
    double sum = 0.0;
    for (size_t i = 0; i < f.cells.size(); ++i) {
        Eigen::JacobiSVD<Mat> svd(f.cells[i]);
        double cell = 0.0;
        for (int k = 0; k < svd.singularValues().size(); ++k)
            cell += std::pow(svd.singularValues()(k), p);
        sum += cell * vol * (w ? w->values[i] : 1.0);
    }
    return std::pow(sum, 1.0 / p);
}

OperatorField distribution_projection(const OperatorField& f, double lambda) {
    if (lambda <= 0.0) throw std::invalid_argument("distribution_projection requires lambda > 0");
    OperatorField out(f.grid, f.m);
    for (size_t i = 0; i < f.cells.size(); ++i)
        out.cells[i] = spectral_projection(abs_op(f.cells[i]), Interval::above(lambda));
    return out;
}

double weak_mass(const OperatorField& f, double lambda, const Weight* w) {
    return lambda * trace_functional(distribution_projection(f, lambda), w);
}

std::string field_to_json(const OperatorField& f) {
    nlohmann::ordered_json j;
    j["d"] = f.grid.d;
    j["J"] = f.grid.J;
    j["m"] = f.m;
    auto cells = nlohmann::ordered_json::array();
    for (const auto& c : f.cells) {
        auto entry = nlohmann::ordered_json::array();
        for (int r = 0; r < f.m; ++r)
            for (int col = 0; col < f.m; ++col) {
                entry.push_back(c(r, col).real());
                entry.push_back(c(r, col).imag());
            }
        cells.push_back(std::move(entry));
    }
    j["cells"] = std::move(cells);
    return j.dump();
}

OperatorField field_from_json(const std::string& text) {
    auto j = nlohmann::json::parse(text);
    DyadicGrid g(j.at("d").get<int>(), j.at("J").get<int>());
    OperatorField f(g, j.at("m").get<int>());
    const auto& cells = j.at("cells");
    if (cells.size() != f.cells.size()) throw std::invalid_argument("cell count mismatch");
    for (size_t i = 0; i < f.cells.size(); ++i) {
        const auto& entry = cells[i];
        int k = 0;
        for (int r = 0; r < f.m; ++r)
            for (int col = 0; col < f.m; ++col) {
                f.cells[i](r, col) = Cx(entry[k].get<double>(), entry[k + 1].get<double>());
                k += 2;
            }
    }
    return f;
}

namespace {

bool in_middle_third(const DyadicGrid& g, long cell) {
    auto c = g.center(cell, g.J);
    for (int i = 0; i < g.d; ++i)
        if (c[i] < 1.0 / 3.0 || c[i] >= 2.0 / 3.0) return false;
    return true;
}

}  // namespace

OperatorField random_field(const DyadicGrid& g, int m, Rng& rng, bool middle_third) {
    OperatorField f(g, m);
    for (long i = 0; i < g.num_cells(); ++i) {
        if (middle_third && !in_middle_third(g, i)) continue;
        f.at(i) = random_matrix(m, rng);
    }
    return f;
}

OperatorField random_positive_field(const DyadicGrid& g, int m, Rng& rng, bool middle_third) {
    OperatorField f(g, m);
    for (long i = 0; i < g.num_cells(); ++i) {
        if (middle_third && !in_middle_third(g, i)) continue;
        f.at(i) = random_positive(m, rng);
    }
    return f;
}

}  // namespace nczw
