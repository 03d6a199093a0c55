#pragma once

#include <iosfwd>
#include <vector>

#include "rcla/mc_oracle.hpp"
#include "rcla/rcla_pricing.hpp"

namespace rcla {

/// Rebalance-date record of a hedge for a book of `contracts` RCLAs.
/// `outflows` accumulates annuity payments, each rebalance interval's payments
/// carried at the money-market rate to the interval end.
struct HedgeLedger {
    std::vector<double> times;
    std::vector<double> V;
    std::vector<double> stock_value;
    std::vector<double> money_market;
    std::vector<double> outflows;
    std::vector<double> index_level;  ///< W at each rebalance date
    double ruin_time = 0.0;
    double terminal_error = 0.0;
    double contracts = 0.0;
};

struct HedgeStudy {
    double initial_cost = 0.0;   ///< V0 / N
    double rms_error = 0.0;      ///< per contract
    double mean_error = 0.0;     ///< per contract
    double std_error = 0.0;      ///< of mean_error
    long paths = 0;
};

/// Stock position value per contract e^{rt}·w·f_w(t, w); zero at w = 0.
/// `priced` must carry the f surface on the withdrawal-normalized axis.
double delta_per_contract(double t, double w, const RclaPrice& priced, double r);

/// One hedge path. S and W share the Brownian increments on the fine grid
/// spec.dt, which must divide `rebalance_dt`. Ruin freezes the stock position
/// at zero and the money market funds the annuity from then on.
HedgeLedger simulate_hedge(const MarketParams& mkt, const MortalityParams& mort, const RclaPrice& priced,
                           double contracts, double rebalance_dt, const PathSpec& spec, long path_index = 0);

/// Terminal-error statistics over spec.paths hedge paths.
HedgeStudy simulate_hedge_study(const MarketParams& mkt, const MortalityParams& mort, const RclaPrice& priced,
                                double contracts, double rebalance_dt, const PathSpec& spec);

void write_ledger_csv(const HedgeLedger& ledger, std::ostream& out);

}  // namespace rcla
