#pragma once

#include <optional>

#include "rcla/rcla_pricing.hpp"

namespace rcla {

/// Index relative to its running maximum, the maximum carrying the bonus floor.
struct MoneynessState {
    double y = 1.0;
    double mbar = 1.0;

    void validate() const;
    static MoneynessState initial(double w0, double tau, double beta);
};

struct GlwbQuote {
    double unit_value = 0.0;          ///< per $1/yr of guaranteed base income
    double dollar_value = 0.0;
    double guaranteed_dollars = 0.0;  ///< γ × deposit
    SolveDiagnostics diagnostics;
};

struct RatchetOptions {
    /// Value imposed at y = 0 before the deferral ends. Ruin cannot happen
    /// there, so the price should not depend on it.
    double pre_deferral_boundary = 0.0;
    bool keep_surface = false;
};

/// Moneyness grid on [0, 1]: 1000 intervals with mild clustering toward y = 1,
/// δt = 0.02 over the mortality horizon.
GridSpec default_moneyness_grid(const MortalityParams& mort, double scale = 1.0);

/// Ratcheting withdrawals γ·M̄ after the deferral; pays $1/yr after ruin.
/// Value is h(0, e^{-βτ}).
RclaPrice price_frcla(const MarketParams& mkt, const MortalityParams& mort, const GridSpec& grid,
                      const RatchetOptions& options = {});

/// Ratcheting withdrawals whose post-ruin income equals the last withdrawal,
/// quoted per $1/yr of initial guaranteed income.
GlwbQuote price_srcla(const MarketParams& mkt, const MortalityParams& mort, const GridSpec& grid,
                      const RatchetOptions& options = {});

/// Guarantee on a deposit: S-RCLA units times γ × deposit.
GlwbQuote price_glwb(double deposit, const MarketParams& mkt, const MortalityParams& mort, const GridSpec& grid);

/// h(0, e^{-βτ}) and, with keep_surface, the full h(t, y) surface.
struct RatchetSolution {
    double h0 = 0.0;
    PriceSurface surface;
};
RatchetSolution solve_ratchet(const MarketParams& mkt, const MortalityParams& mort, const GridSpec& grid,
                              bool super_payout, const RatchetOptions& options = {});

}  // namespace rcla
