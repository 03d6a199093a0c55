#include "rcla/pde_engine.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

namespace rcla {

void GridSpec::validate() const {
    if (!std::isfinite(z_min) || !std::isfinite(z_max) || !(z_max > z_min)) {
        throw DomainError("GridSpec: need finite z_max > z_min");
    }
    if (z_steps < 2 || t_steps < 2) throw DomainError("GridSpec: z_steps and t_steps must be >= 2");
    if (!(t_max > 0.0) || !std::isfinite(t_max)) throw DomainError("GridSpec: t_max must be > 0");
    if (!(stretch >= 0.0) || !std::isfinite(stretch)) throw DomainError("GridSpec: stretch must be >= 0");
    if (z_steps < 4) throw DomainError("GridSpec: at least 4 space intervals are needed");
}

std::vector<double> GridSpec::nodes() const {
    validate();
    std::vector<double> z(z_steps + 1);
    if (stretch == 0.0) {
        const double h = (z_max - z_min) / z_steps;
        for (int i = 0; i <= z_steps; ++i) z[i] = z_min + i * h;
    } else {
        const double width = (z_max - z_min) / stretch;
        const double c1 = std::asinh((z_min - stretch_anchor) / width);
        const double c2 = std::asinh((z_max - stretch_anchor) / width);
        for (int i = 0; i <= z_steps; ++i) {
            z[i] = stretch_anchor + width * std::sinh(c1 + (c2 - c1) * i / z_steps);
        }
    }
    z.front() = z_min;
    z.back() = z_max;
    for (int i = 1; i <= z_steps; ++i) {
        if (!(z[i] > z[i - 1])) throw DomainError("GridSpec: node spacing collapsed");
    }
    return z;
}

BoundarySpec BoundarySpec::dirichlet(Side side, std::function<double(double)> g) {
    return BoundarySpec{Kind::dirichlet, side, 1.0, 0.0, std::move(g)};
}

BoundarySpec BoundarySpec::neumann(Side side, double slope) {
    return BoundarySpec{Kind::neumann, side, 0.0, 1.0, [slope](double) { return slope; }};
}

BoundarySpec BoundarySpec::robin(Side side, double alpha, double beta, std::function<double(double)> g) {
    BoundarySpec spec{Kind::robin, side, alpha, beta, std::move(g)};
    spec.validate();
    return spec;
}

void BoundarySpec::validate() const {
    if (!std::isfinite(alpha) || !std::isfinite(beta)) throw DomainError("BoundarySpec: non-finite coefficients");
    if (alpha == 0.0 && beta == 0.0) throw DomainError("BoundarySpec: alpha and beta cannot both vanish");
    if (kind == Kind::dirichlet && (alpha == 0.0 || beta != 0.0)) {
        throw DomainError("BoundarySpec: dirichlet needs alpha != 0 and beta == 0");
    }
    if (kind == Kind::neumann && (alpha != 0.0 || beta == 0.0)) {
        throw DomainError("BoundarySpec: neumann needs alpha == 0 and beta != 0");
    }
}

std::vector<double> time_levels(const GridSpec& grid, const std::vector<double>& breakpoints) {
    grid.validate();
    std::vector<double> cuts{0.0};
    std::vector<double> sorted = breakpoints;
    std::sort(sorted.begin(), sorted.end());
    for (double b : sorted) {
        if (b > cuts.back() + 1e-12 && b < grid.t_max - 1e-12) cuts.push_back(b);
    }
    cuts.push_back(grid.t_max);

    const double dt = grid.nominal_dt();
    std::vector<double> levels{0.0};
    for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
        const double lo = cuts[s];
        const double hi = cuts[s + 1];
        const int steps = std::max(1, static_cast<int>(std::ceil((hi - lo) / dt - 1e-9)));
        for (int k = 1; k < steps; ++k) levels.push_back(lo + (hi - lo) * k / steps);
        levels.push_back(hi);
    }
    return levels;
}

namespace detail {

double solve_tridiagonal(const std::vector<double>& lower, const std::vector<double>& diag,
                         const std::vector<double>& upper, const std::vector<double>& rhs,
                         std::vector<double>& x, std::vector<double>& scratch) {
    const std::size_t n = diag.size();
    x.resize(n);
    scratch.resize(n);
    double pivot = diag[0];
    if (!(std::abs(pivot) > 1e-300)) throw SolverError("tridiagonal solve: singular pivot at row 0");
    x[0] = rhs[0] / pivot;
    for (std::size_t i = 1; i < n; ++i) {
        scratch[i] = upper[i - 1] / pivot;
        pivot = diag[i] - lower[i] * scratch[i];
        if (!(std::abs(pivot) > 1e-300) || !std::isfinite(pivot)) {
            throw SolverError("tridiagonal solve: singular pivot at row " + std::to_string(i));
        }
        x[i] = (rhs[i] - lower[i] * x[i - 1]) / pivot;
    }
    for (std::size_t i = n - 1; i-- > 0;) x[i] -= scratch[i + 1] * x[i + 1];

    double residual = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double ax = diag[i] * x[i];
        if (i > 0) ax += lower[i] * x[i - 1];
        if (i + 1 < n) ax += upper[i] * x[i + 1];
        residual = std::max(residual, std::abs(ax - rhs[i]));
    }
    return residual;
}

}  // namespace detail

namespace {

// Interior operator rows L V_{i-1} + D V_i + U V_{i+1} at one time.
struct OperatorRows {
    std::vector<double> lower, diag, upper, source;
};

class SpatialOperator {
public:
    SpatialOperator(const std::vector<double>& z, DriftScheme scheme) : z_(z), scheme_(scheme) {
        const std::size_t n = z.size();
        l1_.resize(n); d1_.resize(n); u1_.resize(n);
        l2_.resize(n); d2_.resize(n); u2_.resize(n);
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const double hm = z[i] - z[i - 1];
            const double hp = z[i + 1] - z[i];
            l1_[i] = -hp / (hm * (hm + hp));
            u1_[i] = hm / (hp * (hm + hp));
            d1_[i] = -l1_[i] - u1_[i];
            l2_[i] = 2.0 / (hm * (hm + hp));
            u2_[i] = 2.0 / (hp * (hm + hp));
            d2_[i] = -l2_[i] - u2_[i];
        }
    }

    void assemble(const CoefficientField& c, double t, OperatorRows& rows) const {
        const std::size_t n = z_.size();
        rows.lower.assign(n, 0.0);
        rows.diag.assign(n, 0.0);
        rows.upper.assign(n, 0.0);
        rows.source.assign(n, 0.0);
        const double k = c.discount ? c.discount(t) : 0.0;
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const double a = c.drift ? c.drift(t, z_[i]) : 0.0;
            const double d = c.diffusion_sq ? 0.5 * c.diffusion_sq(t, z_[i]) : 0.0;
            if (d < 0.0 || !std::isfinite(d) || !std::isfinite(a)) {
                throw SolverError("pde: invalid coefficient at z=" + std::to_string(z_[i]));
            }
            double l1 = l1_[i], d1 = d1_[i], u1 = u1_[i];
            if (scheme_ == DriftScheme::peclet_upwind) {
                const double hm = z_[i] - z_[i - 1];
                const double hp = z_[i + 1] - z_[i];
                if (std::abs(a) * std::max(hm, hp) > 2.0 * d) {
                    if (a > 0.0) {
                        l1 = 0.0; d1 = -1.0 / hp; u1 = 1.0 / hp;
                    } else {
                        l1 = -1.0 / hm; d1 = 1.0 / hm; u1 = 0.0;
                    }
                }
            }
            rows.lower[i] = a * l1 + d * l2_[i];
            rows.diag[i] = a * d1 + d * d2_[i] - k;
            rows.upper[i] = a * u1 + d * u2_[i];
            rows.source[i] = c.source ? c.source(t, z_[i]) : 0.0;
        }
    }

private:
    const std::vector<double>& z_;
    DriftScheme scheme_;
    std::vector<double> l1_, d1_, u1_, l2_, d2_, u2_;
};

// Replaces the boundary row of the system with α V + β V_z = g, using a
// second-order one-sided difference whose third point is eliminated with the
// adjacent interior row.
void close_boundary(const BoundarySpec& spec, const std::vector<double>& z, double t, std::vector<double>& lower,
                    std::vector<double>& diag, std::vector<double>& upper, std::vector<double>& rhs) {
    const std::size_t n = z.size();
    const double g = spec.at(t);
    const bool low = spec.side == BoundarySpec::Side::lower;
    const std::size_t b = low ? 0 : n - 1;
    const std::size_t nb = low ? 1 : n - 2;

    if (spec.beta == 0.0) {
        if (low) upper[0] = 0.0; else lower[n - 1] = 0.0;
        diag[b] = spec.alpha;
        rhs[b] = g;
        return;
    }

    const double h1 = low ? z[1] - z[0] : z[n - 1] - z[n - 2];
    const double h2 = low ? z[2] - z[1] : z[n - 2] - z[n - 3];
    const double H = h1 + h2;
    const double sign = low ? -1.0 : 1.0;
    const double w0 = sign * (2.0 * h1 + h2) / (h1 * H);
    const double w1 = -sign * H / (h1 * h2);
    const double w2 = sign * h1 / (h2 * H);
    const double c0 = spec.alpha + spec.beta * w0;
    double c1 = spec.beta * w1;
    const double c2 = spec.beta * w2;

    // Coefficient of the far point in the adjacent row.
    const double far = low ? upper[nb] : lower[nb];
    double row_b = c0;
    double row_nb = c1;
    double row_rhs = g;
    if (std::abs(far) > 1e-300) {
        const double f = c2 / far;
        const double near_b = low ? lower[nb] : upper[nb];
        row_b -= f * near_b;
        row_nb -= f * diag[nb];
        row_rhs -= f * rhs[nb];
    } else {
        // Adjacent row has no coupling outward; fall back to the two-point slope.
        row_b = spec.alpha + spec.beta * (-sign / h1);
        row_nb = spec.beta * (sign / h1);
    }
    diag[b] = row_b;
    if (low) upper[0] = row_nb; else lower[n - 1] = row_nb;
    rhs[b] = row_rhs;
}

double interior_time(double t, double lo, double hi) {
    if (t <= lo) return std::nextafter(lo, hi);
    if (t >= hi) return std::nextafter(hi, lo);
    return t;
}

void check_finite(const std::vector<double>& v, int step, double t) {
    for (double x : v) {
        if (!std::isfinite(x)) {
            std::ostringstream msg;
            msg << "pde: non-finite value at step " << step << " (t=" << t << ")";
            throw SolverError(msg.str());
        }
    }
}

}  // namespace

PriceSurface solve_backward(const CoefficientField& coeffs, const GridSpec& grid,
                            const std::function<double(double z)>& terminal, const BoundarySpec& lower,
                            const BoundarySpec& upper, const SolveOptions& options) {
    grid.validate();
    lower.validate();
    upper.validate();
    if (lower.side != BoundarySpec::Side::lower || upper.side != BoundarySpec::Side::upper) {
        throw DomainError("solve_backward: boundary sides do not match their slots");
    }
    if (!(options.theta >= 0.0 && options.theta <= 1.0)) throw DomainError("solve_backward: theta must be in [0,1]");
    if (options.rannacher_half_steps < 0 || options.history_stride < 0) {
        throw DomainError("solve_backward: negative step option");
    }

    const std::vector<double> z = grid.nodes();
    const std::vector<double> levels = time_levels(grid, options.breakpoints);
    const std::size_t n = z.size();
    const int last = static_cast<int>(levels.size()) - 1;

    // A level is a segment top when a breakpoint lands on it; the implicit
    // startup restarts there.
    std::vector<bool> segment_top(levels.size(), false);
    segment_top[last] = true;
    for (double b : options.breakpoints) {
        for (int j = 1; j < last; ++j) {
            if (std::abs(levels[j] - b) < 1e-12) segment_top[j] = true;
        }
    }
    // Segment bounds for each step j -> j-1.
    std::vector<double> seg_lo(levels.size()), seg_hi(levels.size());
    {
        double hi = levels[last];
        for (int j = last; j >= 1; --j) {
            if (segment_top[j]) hi = levels[j];
            seg_hi[j] = hi;
        }
        double lo = 0.0;
        for (int j = 1; j <= last; ++j) {
            if (segment_top[j - 1]) lo = levels[j - 1];
            seg_lo[j] = lo;
        }
    }

    SpatialOperator op(z, options.drift_scheme);
    OperatorRows old_rows, new_rows;
    std::vector<double> V(n), rhs(n), lo_v(n), di_v(n), up_v(n), next(n), scratch(n);
    for (std::size_t i = 0; i < n; ++i) V[i] = terminal ? terminal(z[i]) : 0.0;
    check_finite(V, 0, levels[last]);

    PriceSurface surface;
    surface.grid = grid;
    surface.z = z;
    surface.label = options.label;
    std::vector<std::pair<double, std::vector<double>>> history;
    auto keep = [&](int j) {
        if (j == 0 || j == last) return true;
        return options.history_stride > 0 && j % options.history_stride == 0;
    };
    if (keep(last)) history.emplace_back(levels[last], V);

    double max_residual = 0.0;
    int step_count = 0;

    auto advance = [&](double t_old, double t_new, double theta, double lo, double hi, bool fresh_old) {
        const double d = t_old - t_new;
        const double te_old = interior_time(t_old, lo, hi);
        const double te_new = interior_time(t_new, lo, hi);
        if (fresh_old) op.assemble(coeffs, te_old, old_rows);
        op.assemble(coeffs, te_new, new_rows);
        for (std::size_t i = 1; i + 1 < n; ++i) {
            double r = V[i];
            if (theta < 1.0) {
                r += (1.0 - theta) * d *
                     (old_rows.lower[i] * V[i - 1] + old_rows.diag[i] * V[i] + old_rows.upper[i] * V[i + 1] +
                      old_rows.source[i]);
            }
            r += theta * d * new_rows.source[i];
            rhs[i] = r;
            lo_v[i] = -theta * d * new_rows.lower[i];
            di_v[i] = 1.0 - theta * d * new_rows.diag[i];
            up_v[i] = -theta * d * new_rows.upper[i];
        }
        lo_v[0] = 0.0; up_v[n - 1] = 0.0;
        close_boundary(lower, z, te_new, lo_v, di_v, up_v, rhs);
        close_boundary(upper, z, te_new, lo_v, di_v, up_v, rhs);
        max_residual = std::max(max_residual, detail::solve_tridiagonal(lo_v, di_v, up_v, rhs, next, scratch));
        V.swap(next);
        ++step_count;
        check_finite(V, step_count, t_new);
        std::swap(old_rows, new_rows);
    };

    for (int j = last; j >= 1; --j) {
        const double t_old = levels[j];
        const double t_new = levels[j - 1];
        const double lo = seg_lo[j];
        const double hi = seg_hi[j];
        if (segment_top[j] && options.rannacher_half_steps > 0) {
            const int k = options.rannacher_half_steps;
            for (int s = 0; s < k; ++s) {
                const double a = t_old - (t_old - t_new) * s / k;
                const double b = (s + 1 == k) ? t_new : t_old - (t_old - t_new) * (s + 1) / k;
                advance(a, b, 1.0, lo, hi, false);
            }
        } else {
            advance(t_old, t_new, options.theta, lo, hi, segment_top[j]);
        }
        if (keep(j - 1)) history.emplace_back(t_new, V);
    }

    std::reverse(history.begin(), history.end());
    surface.t.reserve(history.size());
    surface.values.reserve(history.size() * n);
    for (auto& [t, row] : history) {
        surface.t.push_back(t);
        surface.values.insert(surface.values.end(), row.begin(), row.end());
    }
    surface.diagnostics.time_steps = step_count;
    surface.diagnostics.max_residual = max_residual;
    return surface;
}

std::vector<double> solve_stationary(const CoefficientField& coeffs, const GridSpec& grid,
                                     const BoundarySpec& lower, const BoundarySpec& upper, double t,
                                     DriftScheme drift_scheme) {
    grid.validate();
    lower.validate();
    upper.validate();
    const std::vector<double> z = grid.nodes();
    const std::size_t n = z.size();
    SpatialOperator op(z, drift_scheme);
    OperatorRows rows;
    op.assemble(coeffs, t, rows);
    std::vector<double> rhs(n, 0.0), x, scratch;
    for (std::size_t i = 1; i + 1 < n; ++i) rhs[i] = -rows.source[i];
    rows.lower[0] = 0.0;
    rows.upper[n - 1] = 0.0;
    close_boundary(lower, z, t, rows.lower, rows.diag, rows.upper, rhs);
    close_boundary(upper, z, t, rows.lower, rows.diag, rows.upper, rhs);
    detail::solve_tridiagonal(rows.lower, rows.diag, rows.upper, rhs, x, scratch);
    check_finite(x, 0, t);
    return x;
}

namespace {

std::size_t stencil_start(const std::vector<double>& z, double x, std::size_t width) {
    auto it = std::upper_bound(z.begin(), z.end(), x);
    std::size_t k = it == z.begin() ? 0 : static_cast<std::size_t>(it - z.begin()) - 1;
    const std::size_t half = (width - 1) / 2;
    std::size_t start = k >= half ? k - half : 0;
    return std::min(start, z.size() - width);
}

double lagrange(const double* zs, const double* vs, std::size_t m, double x) {
    double total = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        double basis = 1.0;
        for (std::size_t l = 0; l < m; ++l) {
            if (l != j) basis *= (x - zs[l]) / (zs[j] - zs[l]);
        }
        total += basis * vs[j];
    }
    return total;
}

double lagrange_slope(const double* zs, const double* vs, std::size_t m, double x) {
    double total = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        double dj = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
            if (k == j) continue;
            double term = 1.0 / (zs[j] - zs[k]);
            for (std::size_t l = 0; l < m; ++l) {
                if (l != j && l != k) term *= (x - zs[l]) / (zs[j] - zs[l]);
            }
            dj += term;
        }
        total += dj * vs[j];
    }
    return total;
}

void check_hull(const PriceSurface& s, double t, double z) {
    if (s.t.empty() || s.z.size() < 5) throw RangeError("sample_surface: empty surface");
    const double t_tol = 1e-9 * std::max(1.0, std::abs(s.t.back()));
    const double z_tol = 1e-12 * std::max(1.0, std::abs(s.z.back()));
    if (!(t >= s.t.front() - t_tol && t <= s.t.back() + t_tol)) {
        throw RangeError("sample_surface: t=" + std::to_string(t) + " outside stored time levels");
    }
    if (!(z >= s.z.front() - z_tol && z <= s.z.back() + z_tol)) {
        throw RangeError("sample_surface: z=" + std::to_string(z) + " outside grid");
    }
}

template <class RowEval>
double blend_rows(const PriceSurface& s, double t, RowEval&& eval) {
    if (s.t.size() == 1) return eval(0);
    auto it = std::upper_bound(s.t.begin(), s.t.end(), t);
    std::size_t j = it == s.t.begin() ? 0 : static_cast<std::size_t>(it - s.t.begin()) - 1;
    j = std::min(j, s.t.size() - 2);
    const double w = std::clamp((t - s.t[j]) / (s.t[j + 1] - s.t[j]), 0.0, 1.0);
    if (w == 0.0) return eval(j);
    if (w == 1.0) return eval(j + 1);
    return (1.0 - w) * eval(j) + w * eval(j + 1);
}

}  // namespace

double sample_surface(const PriceSurface& s, double t, double z) {
    check_hull(s, t, z);
    z = std::clamp(z, s.z.front(), s.z.back());
    const std::size_t start = stencil_start(s.z, z, 4);
    return blend_rows(s, t, [&](std::size_t row) {
        return lagrange(&s.z[start], &s.values[row * s.cols() + start], 4, z);
    });
}

double sample_surface_dz(const PriceSurface& s, double t, double z) {
    check_hull(s, t, z);
    z = std::clamp(z, s.z.front(), s.z.back());
    const std::size_t start = stencil_start(s.z, z, 4);
    return blend_rows(s, t, [&](std::size_t row) {
        const double* v = &s.values[row * s.cols()];
        double slopes[4];
        for (std::size_t k = 0; k < 4; ++k) {
            const std::size_t node = start + k;
            const std::size_t ws = std::min(node >= 2 ? node - 2 : 0, s.z.size() - 5);
            slopes[k] = lagrange_slope(&s.z[ws], v + ws, 5, s.z[node]);
        }
        return lagrange(&s.z[start], slopes, 4, z);
    });
}

void write_surface_csv(const PriceSurface& s, std::ostream& out) {
    out << "t,z,value\n";
    out << std::setprecision(17);
    for (std::size_t r = 0; r < s.rows(); ++r) {
        for (std::size_t c = 0; c < s.cols(); ++c) {
            out << s.t[r] << ',' << s.z[c] << ',' << s.at(r, c) << '\n';
        }
    }
}

}  // namespace rcla
