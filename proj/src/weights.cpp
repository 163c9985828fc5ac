#include "nczw/weights.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace nczw {

Weight::Weight(const DyadicGrid& g, std::vector<double> v) : grid(g), values(std::move(v)) {
    if (static_cast<long>(values.size()) != g.num_cells())
        throw std::invalid_argument("weight value count does not match the grid");
    for (double x : values)
        if (!(x > 0.0)) throw std::invalid_argument("weight values must be positive");
}

double Weight::average(int n, long q) const {
    auto cells = grid.cells_in_cube(n, q);
    double sum = 0.0;
    for (long c : cells) sum += values[static_cast<size_t>(c)];
    return sum / static_cast<double>(cells.size());
}

double Weight::min_over_cube(int n, long q) const {
    auto cells = grid.cells_in_cube(n, q);
    double v = values[static_cast<size_t>(cells.front())];
    for (long c : cells) v = std::min(v, values[static_cast<size_t>(c)]);
    return v;
}

double Weight::measure(const std::vector<long>& cells) const {
    double sum = 0.0;
    for (long c : cells) sum += values[static_cast<size_t>(c)];
    return sum * grid.cell_volume();
}

double Weight::total() const {
    return std::accumulate(values.begin(), values.end(), 0.0) * grid.cell_volume();
}

double ap_characteristic(const Weight& w, double p) {
    if (p < 1.0) throw std::invalid_argument("A_p characteristic requires p >= 1");
    if (p == 1.0 && w.cached_a1) return *w.cached_a1;
    if (p == 2.0 && w.cached_a2) return *w.cached_a2;
    double best = 1.0;
    for (int n = 0; n <= w.grid.J; ++n) {
        for (long q = 0; q < w.grid.cubes_at(n); ++q) {
            const double avg = w.average(n, q);
            double value;
            if (p == 1.0) {
                value = avg / w.min_over_cube(n, q);
            } else {
                auto cells = w.grid.cells_in_cube(n, q);
                double dual = 0.0;
                for (long c : cells)
                    dual += std::pow(w.values[static_cast<size_t>(c)], 1.0 / (1.0 - p));
                dual /= static_cast<double>(cells.size());
                value = avg * std::pow(dual, p - 1.0);
            }
            best = std::max(best, value);
        }
    }
    if (p == 1.0) w.cached_a1 = best;
    if (p == 2.0) w.cached_a2 = best;
    return best;
}

double reverse_holder(const Weight& w, double q) {
    if (q <= 1.0) throw std::invalid_argument("reverse Holder exponent must exceed 1");
    double best = 0.0;
    for (int n = 0; n <= w.grid.J; ++n) {
        for (long cube = 0; cube < w.grid.cubes_at(n); ++cube) {
            auto cells = w.grid.cells_in_cube(n, cube);
            double mq = 0.0, m1 = 0.0;
            for (long c : cells) {
                mq += std::pow(w.values[static_cast<size_t>(c)], q);
                m1 += w.values[static_cast<size_t>(c)];
            }
            mq /= static_cast<double>(cells.size());
            m1 /= static_cast<double>(cells.size());
            best = std::max(best, std::pow(mq, 1.0 / q) / m1);
        }
    }
    return best;
}

std::vector<double> default_rw_grid() {
    return {1.05, 1.1, 1.2, 1.4, 1.6, 1.8, 1.9, 2.0, 2.5, 3.0, 4.0};
}

RwResult find_rw(const Weight& w, std::span<const double> q_grid, double threshold) {
    std::vector<double> fallback;
    if (q_grid.empty()) {
        fallback = default_rw_grid();
        q_grid = fallback;
    }
    RwResult out;
    for (double q : q_grid) {
        double c = reverse_holder(w, q);
        if (c <= threshold && q > out.rw) {
            out.found = true;
            out.rw = q;
            out.rh_constant = c;
        }
    }
    if (out.found) out.rw_conjugate = out.rw / (out.rw - 1.0);
    return out;
}

double martingale_a1_check(const Weight& w) {
    double worst = 0.0;
    for (int n = 0; n <= w.grid.J; ++n) {
        for (long q = 0; q < w.grid.cubes_at(n); ++q) {
            const double avg = w.average(n, q);
            worst = std::max(worst, avg / w.min_over_cube(n, q));
        }
    }
    return worst;
}

double measure_doubling_check(const Weight& w, int samples, std::uint64_t seed) {
    Rng rng = Rng::split(seed, 0x5eed);
    double worst = 0.0;
    for (int s = 0; s < samples; ++s) {
        int n = static_cast<int>(rng.integer(static_cast<std::uint64_t>(w.grid.J + 1)));
        long q = static_cast<long>(rng.integer(static_cast<std::uint64_t>(w.grid.cubes_at(n))));
        auto cells = w.grid.cells_in_cube(n, q);
        std::vector<long> subset;
        for (long c : cells)
            if (rng.uniform() < 0.5) subset.push_back(c);
        if (subset.empty()) subset.push_back(cells[rng.integer(cells.size())]);
        const double frac =
            static_cast<double>(subset.size()) / static_cast<double>(cells.size());
        worst = std::max(worst, frac * w.measure(cells) / w.measure(subset));
    }
    return worst;
}

Weight constant_weight(const DyadicGrid& g, double c) {
    return Weight(g, std::vector<double>(static_cast<size_t>(g.num_cells()), c));
}

Weight dyadic_step_weight(const DyadicGrid& g, double a, double b) {
    std::vector<double> v(static_cast<size_t>(g.num_cells()));
    for (long i = 0; i < g.num_cells(); ++i)
        v[static_cast<size_t>(i)] = g.center(i, g.J)[0] < 0.5 ? a : b;
    return Weight(g, std::move(v));
}

Weight power_weight(const DyadicGrid& g, double alpha, double x0) {
    if (alpha < 0.0 || alpha >= g.d)
        throw std::invalid_argument("power weight requires 0 <= alpha < d");
    std::vector<double> v(static_cast<size_t>(g.num_cells()));
    for (long i = 0; i < g.num_cells(); ++i) {
        auto c = g.center(i, g.J);
        double r = g.d == 1 ? std::abs(c[0] - x0) : std::hypot(c[0] - x0, c[1] - x0);
        v[static_cast<size_t>(i)] = std::pow(std::max(r, 0.25 * g.side(g.J)), -alpha);
    }
    return Weight(g, std::move(v));
}

Weight cascade_weight(const DyadicGrid& g, double ratio_bound, std::uint64_t seed) {
    if (ratio_bound < 1.0) throw std::invalid_argument("cascade ratio bound must be >= 1");
    const double r = std::sqrt(ratio_bound);
    std::vector<double> level(1, 1.0);
    for (int n = 1; n <= g.J; ++n) {
        Rng rng = Rng::split(seed, static_cast<std::uint64_t>(n));
        std::vector<double> next(static_cast<size_t>(g.cubes_at(n)));
        const int kids = 1 << g.d;
        for (long parent = 0; parent < g.cubes_at(n - 1); ++parent) {
            std::vector<double> u(static_cast<size_t>(kids));
            double mean = 0.0;
            for (int k = 0; k < kids; ++k) {
                u[static_cast<size_t>(k)] = rng.uniform(1.0 / r, r);
                mean += u[static_cast<size_t>(k)];
            }
            mean /= kids;
            auto pc = g.coords(parent, n - 1);
            int k = 0;
            for (long dy = 0; dy < (g.d == 2 ? 2 : 1); ++dy)
                for (long dx = 0; dx < 2; ++dx) {
                    long child = g.index_of({2 * pc[0] + dx, 2 * pc[1] + dy}, n);
                    next[static_cast<size_t>(child)] =
                        level[static_cast<size_t>(parent)] * u[static_cast<size_t>(k++)] / mean;
                }
        }
        level = std::move(next);
    }
    return Weight(g, std::move(level));
}

Weight expectation_weight(const Weight& w, int n) {
    if (n < 0 || n > w.grid.J) throw std::invalid_argument("expectation level out of range");
    std::vector<double> v(w.values.size());
    for (long q = 0; q < w.grid.cubes_at(n); ++q) {
        const double avg = w.average(n, q);
        for (long c : w.grid.cells_in_cube(n, q)) v[static_cast<size_t>(c)] = avg;
    }
    return Weight(w.grid, std::move(v));
}

Weight parse_weight_spec(const DyadicGrid& g, const std::string& spec) {
    auto colon = spec.find(':');
    const std::string kind = spec.substr(0, colon);
    std::vector<double> args;
    if (colon != std::string::npos) {
        std::stringstream ss(spec.substr(colon + 1));
        std::string tok;
        while (std::getline(ss, tok, ',')) args.push_back(std::stod(tok));
    }
    if (kind == "const") return constant_weight(g, args.empty() ? 1.0 : args[0]);
    if (kind == "step") {
        if (args.size() != 2) throw std::invalid_argument("step weight needs two values");
        return dyadic_step_weight(g, args[0], args[1]);
    }
    if (kind == "power") {
        if (args.empty()) throw std::invalid_argument("power weight needs an exponent");
        return power_weight(g, args[0], args.size() > 1 ? args[1] : 0.0);
    }
    if (kind == "cascade") {
        if (args.empty()) throw std::invalid_argument("cascade weight needs a ratio bound");
        std::uint64_t seed = args.size() > 1 ? static_cast<std::uint64_t>(args[1]) : 1;
        return cascade_weight(g, args[0], seed);
    }
    throw std::invalid_argument("unknown weight spec: " + spec);
}

double weighted_trace(const OperatorField& f, const Weight& w) {
    return trace_functional(f, &w);
}

}  // namespace nczw
