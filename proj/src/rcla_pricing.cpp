#include "rcla/rcla_pricing.hpp"

#include <cmath>
#include <memory>

namespace rcla {

void MarketParams::validate() const {
    if (!std::isfinite(mu)) throw DomainError("MarketParams: mu must be finite");
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw DomainError("MarketParams: sigma must be > 0");
    if (!std::isfinite(rho)) throw DomainError("MarketParams: rho must be finite");
    if (!(gamma >= 0.0)) throw DomainError("MarketParams: gamma must be >= 0 or inf");
    if (!(I0 > 0.0) || !std::isfinite(I0)) throw DomainError("MarketParams: I0 must be > 0");
    if (!(tau >= 0.0) || !std::isfinite(tau)) throw DomainError("MarketParams: tau must be >= 0");
    if (!(beta >= 0.0) || !std::isfinite(beta)) throw DomainError("MarketParams: beta must be >= 0");
    if (!std::isfinite(delta)) throw DomainError("MarketParams: delta must be finite");
}

GridSpec default_rcla_grid(const MortalityParams& mort, double scale) {
    mort.validate();
    if (!(scale > 0.0)) throw DomainError("default_rcla_grid: scale must be > 0");
    GridSpec grid;
    grid.z_min = 0.0;
    grid.z_max = 400.0;
    grid.z_steps = static_cast<int>(std::lround(7000 / scale));
    grid.stretch = 8.0;
    grid.stretch_anchor = 0.0;
    grid.t_max = mort.horizon();
    grid.t_steps = std::max(2, static_cast<int>(std::ceil(mort.horizon() / (0.02 * scale) - 1e-9)));
    return grid;
}

namespace {

struct NormalizedSolution {
    PriceSurface u;
    std::shared_ptr<DeferredFactorTable> factors;
};

NormalizedSolution solve_normalized(const MarketParams& mkt, const MortalityParams& mort, const GridSpec& grid,
                                    bool keep_history) {
    mkt.validate();
    mort.validate();
    grid.validate();
    if (grid.z_min != 0.0) throw DomainError("price_rcla: normalized grid must start at z = 0");
    if (std::abs(grid.t_max - mort.horizon()) > 1e-9) throw DomainError("price_rcla: grid t_max must equal max_age - x");

    auto table = std::make_shared<DeferredFactorTable>(mort, mkt.rho, grid.t_max,
                                                       std::max(200, 2 * grid.t_steps));
    const double mu = mkt.mu;
    const double var = mkt.sigma * mkt.sigma;
    const double rho = mkt.rho;
    CoefficientField c;
    c.drift = [mu](double, double z) { return mu * z - 1.0; };
    c.diffusion_sq = [var](double, double z) { return var * z * z; };
    c.discount = [rho, mort](double t) { return hazard_rate(t, mort) + rho; };

    auto lower = BoundarySpec::dirichlet(BoundarySpec::Side::lower, [table](double t) { return table->ratio(t); });
    auto upper = BoundarySpec::dirichlet(BoundarySpec::Side::upper, {});
    SolveOptions options;
    options.label = "u";
    options.history_stride = keep_history ? 1 : 0;
    return {solve_backward(c, grid, {}, lower, upper, options), table};
}

double read_price(const PriceSurface& u, double gamma) {
    if (gamma == 0.0) return 0.0;
    const double z = 1.0 / gamma;
    if (z > u.z.back()) {
        throw RangeError("price_rcla: 1/gamma = " + std::to_string(z) + " exceeds z_max");
    }
    // f = F'(0) u with F'(0) = -1.
    return -sample_surface(u, 0.0, z);
}

}  // namespace

RclaPrice price_rcla(const MarketParams& mkt, const MortalityParams& mort, const GridSpec& grid,
                     bool keep_surface) {
    mkt.validate();
    mort.validate();
    RclaPrice price;
    price.market = mkt;
    price.mortality = mort;
    price.grid = grid;
    if (mkt.gamma == 0.0) return price;
    if (mkt.immediate()) {
        price.value = spia_factor(mkt.rho, mort);
        return price;
    }
    if (1.0 / mkt.gamma > grid.z_max) {
        throw RangeError("price_rcla: 1/gamma exceeds z_max");
    }
    NormalizedSolution sol = solve_normalized(mkt, mort, grid, keep_surface);
    price.value = read_price(sol.u, mkt.gamma);
    price.diagnostics = sol.u.diagnostics;
    if (keep_surface) {
        PriceSurface f = std::move(sol.u);
        for (std::size_t r = 0; r < f.rows(); ++r) {
            const double slope = sol.factors->Fprime(f.t[r]);
            for (std::size_t c = 0; c < f.cols(); ++c) f.at(r, c) *= slope;
        }
        f.label = "f";
        price.surface = std::move(f);
    }
    return price;
}

std::vector<double> price_rcla_many(const MarketParams& mkt, const MortalityParams& mort,
                                    const std::vector<double>& gammas, const GridSpec& grid) {
    std::vector<double> out(gammas.size(), 0.0);
    bool need_solve = false;
    for (double g : gammas) {
        if (!(g >= 0.0)) throw DomainError("price_rcla_many: gamma must be >= 0 or inf");
        if (g > 0.0 && std::isfinite(g)) {
            need_solve = true;
            if (1.0 / g > grid.z_max) throw RangeError("price_rcla_many: 1/gamma exceeds z_max");
        }
    }
    PriceSurface u;
    if (need_solve) u = solve_normalized(mkt, mort, grid, false).u;
    for (std::size_t i = 0; i < gammas.size(); ++i) {
        const double g = gammas[i];
        if (g == 0.0) out[i] = 0.0;
        else if (!std::isfinite(g)) out[i] = spia_factor(mkt.rho, mort);
        else out[i] = read_price(u, g);
    }
    return out;
}

PriceSurface rcla_surface(const MarketParams& mkt, const MortalityParams& mort, const GridSpec& grid) {
    if (mkt.gamma == 0.0 || mkt.immediate()) {
        throw DomainError("rcla_surface: needs a finite positive gamma");
    }
    return price_rcla(mkt, mort, grid, true).surface;
}

RclaPrice price_rcla_direct(const MarketParams& mkt, const MortalityParams& mort, const GridSpec& grid,
                            bool keep_surface) {
    mkt.validate();
    mort.validate();
    grid.validate();
    if (!(mkt.gamma > 0.0) || mkt.immediate()) throw DomainError("price_rcla_direct: needs a finite positive gamma");
    if (grid.z_min != 0.0 || mkt.I0 > grid.z_max) throw DomainError("price_rcla_direct: grid must cover [0, I0]");

    auto table = std::make_shared<DeferredFactorTable>(mort, mkt.rho, grid.t_max, std::max(200, 2 * grid.t_steps));
    const double mu = mkt.mu;
    const double var = mkt.sigma * mkt.sigma;
    const double spend = mkt.gamma * mkt.I0;
    CoefficientField c;
    c.drift = [mu, spend](double, double w) { return mu * w - spend; };
    c.diffusion_sq = [var](double, double w) { return var * w * w; };
    auto lower = BoundarySpec::dirichlet(BoundarySpec::Side::lower, [table](double t) { return table->F(t); });
    auto upper = BoundarySpec::dirichlet(BoundarySpec::Side::upper, {});
    SolveOptions options;
    options.label = "f";
    options.history_stride = keep_surface ? 1 : 0;

    RclaPrice price;
    price.market = mkt;
    price.mortality = mort;
    price.grid = grid;
    PriceSurface f = solve_backward(c, grid, {}, lower, upper, options);
    price.value = sample_surface(f, 0.0, mkt.I0);
    price.diagnostics = f.diagnostics;
    if (keep_surface) price.surface = std::move(f);
    return price;
}

RclaPrice price_rcla_constant_hazard(const MarketParams& mkt, double lambda, const GridSpec& grid) {
    mkt.validate();
    grid.validate();
    if (!(lambda + mkt.rho > 0.0)) throw DomainError("price_rcla_constant_hazard: need lambda + rho > 0");
    if (!(mkt.gamma > 0.0) || mkt.immediate()) throw DomainError("price_rcla_constant_hazard: needs finite gamma > 0");
    if (1.0 / mkt.gamma > grid.z_max) throw RangeError("price_rcla_constant_hazard: 1/gamma exceeds z_max");

    const double mu = mkt.mu;
    const double var = mkt.sigma * mkt.sigma;
    const double rate = lambda + mkt.rho;
    CoefficientField c;
    c.drift = [mu](double, double z) { return mu * z - 1.0; };
    c.diffusion_sq = [var](double, double z) { return var * z * z; };
    c.discount = [rate](double) { return rate; };
    auto lower = BoundarySpec::dirichlet(BoundarySpec::Side::lower, [rate](double) { return 1.0 / rate; });
    auto upper = BoundarySpec::dirichlet(BoundarySpec::Side::upper, {});
    std::vector<double> h = solve_stationary(c, grid, lower, upper);

    RclaPrice price;
    price.market = mkt;
    price.grid = grid;
    price.mortality.lambda = lambda;
    price.mortality.m = std::numeric_limits<double>::infinity();
    price.surface.grid = grid;
    price.surface.z = grid.nodes();
    price.surface.t = {0.0};
    price.surface.values = std::move(h);
    price.surface.label = "h";
    price.value = sample_surface(price.surface, 0.0, 1.0 / mkt.gamma);
    return price;
}

}  // namespace rcla
