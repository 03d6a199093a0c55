#include "rcla/glwb_pricing.hpp"

#include <cmath>
#include <memory>

namespace rcla {

void MoneynessState::validate() const {
    if (!(y >= 0.0 && y <= 1.0)) throw DomainError("MoneynessState: y must lie in [0,1]");
    if (!(mbar > 0.0) || !std::isfinite(mbar)) throw DomainError("MoneynessState: mbar must be > 0");
}

MoneynessState MoneynessState::initial(double w0, double tau, double beta) {
    const double floor = w0 * std::exp(beta * tau);
    MoneynessState s{w0 / floor, floor};
    s.validate();
    return s;
}

GridSpec default_moneyness_grid(const MortalityParams& mort, double scale) {
    mort.validate();
    if (!(scale > 0.0)) throw DomainError("default_moneyness_grid: scale must be > 0");
    GridSpec grid;
    grid.z_min = 0.0;
    grid.z_max = 1.0;
    grid.z_steps = static_cast<int>(std::lround(1000 / scale));
    grid.stretch = 1.0;
    grid.stretch_anchor = 1.0;
    grid.t_max = mort.horizon();
    grid.t_steps = std::max(2, static_cast<int>(std::ceil(mort.horizon() / (0.02 * scale) - 1e-9)));
    return grid;
}

RatchetSolution solve_ratchet(const MarketParams& mkt, const MortalityParams& mort, const GridSpec& grid,
                              bool super_payout, const RatchetOptions& options) {
    mkt.validate();
    mort.validate();
    grid.validate();
    if (grid.z_min != 0.0 || grid.z_max != 1.0) throw DomainError("ratchet pricing: grid must span y in [0,1]");
    if (std::abs(grid.t_max - mort.horizon()) > 1e-9) throw DomainError("ratchet pricing: grid t_max must equal max_age - x");
    if (!(mkt.gamma > 0.0) || mkt.immediate()) throw DomainError("ratchet pricing: needs a finite gamma > 0");
    if (mkt.tau >= grid.t_max) throw DomainError("ratchet pricing: deferral must end before the horizon");

    auto table = std::make_shared<DeferredFactorTable>(mort, mkt.rho, grid.t_max, std::max(200, 2 * grid.t_steps));
    const double mu = mkt.mu;
    const double var = mkt.sigma * mkt.sigma;
    const double gamma = mkt.gamma;
    const double tau = mkt.tau;
    CoefficientField c;
    c.drift = [mu, gamma, tau](double t, double y) { return mu * y - (t > tau ? gamma : 0.0); };
    c.diffusion_sq = [var](double, double y) { return var * y * y; };

    const double before = options.pre_deferral_boundary;
    const double payout = super_payout ? gamma : 1.0;
    auto lower = BoundarySpec::dirichlet(BoundarySpec::Side::lower, [table, tau, before, payout](double t) {
        return t < tau ? before : payout * table->F(t);
    });
    // Reflection at y = 1: h_y = 0, or h = h_y when the payout ratchets with the maximum.
    auto upper = super_payout ? BoundarySpec::robin(BoundarySpec::Side::upper, 1.0, -1.0)
                              : BoundarySpec::neumann(BoundarySpec::Side::upper, 0.0);
    SolveOptions solve;
    solve.label = "h";
    solve.history_stride = options.keep_surface ? 1 : 0;
    if (tau > 0.0) solve.breakpoints = {tau};

    RatchetSolution out;
    out.surface = solve_backward(c, grid, {}, lower, upper, solve);
    out.h0 = sample_surface(out.surface, 0.0, std::exp(-mkt.beta * tau));
    return out;
}

RclaPrice price_frcla(const MarketParams& mkt, const MortalityParams& mort, const GridSpec& grid,
                      const RatchetOptions& options) {
    RatchetSolution sol = solve_ratchet(mkt, mort, grid, false, options);
    RclaPrice price;
    price.value = sol.h0;
    price.grid = grid;
    price.market = mkt;
    price.mortality = mort;
    price.diagnostics = sol.surface.diagnostics;
    if (options.keep_surface) price.surface = std::move(sol.surface);
    return price;
}

GlwbQuote price_srcla(const MarketParams& mkt, const MortalityParams& mort, const GridSpec& grid,
                      const RatchetOptions& options) {
    RatchetSolution sol = solve_ratchet(mkt, mort, grid, true, options);
    GlwbQuote quote;
    quote.unit_value = std::exp(mkt.beta * mkt.tau) * sol.h0 / mkt.gamma;
    quote.guaranteed_dollars = mkt.gamma * mkt.I0;
    quote.dollar_value = quote.unit_value * quote.guaranteed_dollars;
    quote.diagnostics = sol.surface.diagnostics;
    return quote;
}

GlwbQuote price_glwb(double deposit, const MarketParams& mkt, const MortalityParams& mort, const GridSpec& grid) {
    if (!(deposit > 0.0) || !std::isfinite(deposit)) throw DomainError("price_glwb: deposit must be > 0");
    GlwbQuote quote = price_srcla(mkt, mort, grid);
    quote.guaranteed_dollars = mkt.gamma * deposit;
    quote.dollar_value = quote.unit_value * quote.guaranteed_dollars;
    return quote;
}

}  // namespace rcla
