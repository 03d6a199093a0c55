#pragma once

#include <limits>
#include <vector>

#include "rcla/mortality.hpp"
#include "rcla/pde_engine.hpp"

namespace rcla {

/// Index dynamics dW = (μW - withdrawal) dt + σW dB and contract terms.
struct MarketParams {
    double mu = 0.05;
    double sigma = 0.17;
    double rho = 0.05;
    double gamma = 0.05;  ///< withdrawal fraction; +infinity means immediate income
    double I0 = 100.0;
    double tau = 0.0;     ///< deferral before withdrawals start
    double beta = 0.0;    ///< bonus rate on the guaranteed base during deferral
    double delta = 0.0;   ///< payout growth rate; hedging uses rho = mu - delta

    void validate() const;
    bool immediate() const { return gamma == std::numeric_limits<double>::infinity(); }
};

struct RclaPrice {
    double value = 0.0;
    PriceSurface surface;
    GridSpec grid;
    SolveDiagnostics diagnostics;
    MarketParams market;
    MortalityParams mortality;
};

/// Default grid for the withdrawal-normalized problem: z in [0, 400] with sinh
/// clustering toward z = 0 (δz ≈ 0.02 for z < 20, ≈ 0.03 at z = 50) and
/// δt = 0.02 over the mortality horizon. `scale` multiplies both steps.
GridSpec default_rcla_grid(const MortalityParams& mort, double scale = 1.0);

/// Price of $1/yr of lifetime income that starts when the index is ruined.
/// Solves the normalized problem for u = f / F' and reads -u(0, 1/γ).
/// With `keep_surface` the returned surface holds f on the normalized axis.
RclaPrice price_rcla(const MarketParams& mkt, const MortalityParams& mort, const GridSpec& grid,
                     bool keep_surface = false);
inline RclaPrice price_rcla(const MarketParams& mkt, const MortalityParams& mort) {
    return price_rcla(mkt, mort, default_rcla_grid(mort));
}

/// Prices for several withdrawal rates from one normalized solve.
std::vector<double> price_rcla_many(const MarketParams& mkt, const MortalityParams& mort,
                                    const std::vector<double>& gammas, const GridSpec& grid);

/// Surface of f(t, w̃) with w̃ = W / (γ I0).
PriceSurface rcla_surface(const MarketParams& mkt, const MortalityParams& mort, const GridSpec& grid);

/// Solves for f directly with f(t,0) = F(t), no discounting, on the grid given
/// in index units (withdrawal γ·I0 per year). Reads f(0, I0).
RclaPrice price_rcla_direct(const MarketParams& mkt, const MortalityParams& mort, const GridSpec& grid,
                            bool keep_surface = false);

/// Constant hazard λ: time-independent ODE with h(0) = 1/(λ+ρ), h(z_max) = 0.
/// Only the space part of `grid` is used.
RclaPrice price_rcla_constant_hazard(const MarketParams& mkt, double lambda, const GridSpec& grid);

}  // namespace rcla
