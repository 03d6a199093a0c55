#include "rcla/hedging.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

#include "rcla/detail/parallel.hpp"

namespace rcla {

namespace {

double spend_scale(const RclaPrice& priced) { return priced.market.gamma * priced.market.I0; }

void check_priced(const RclaPrice& priced) {
    if (priced.surface.label != "f" || priced.surface.rows() < 2) {
        throw DomainError("hedging: price must carry the full f surface");
    }
    if (!(priced.market.gamma > 0.0) || priced.market.immediate()) {
        throw DomainError("hedging: needs a finite positive gamma");
    }
}

// f(t, w) with the far-field value beyond the grid.
double liability(const RclaPrice& priced, const DeferredFactorTable& factors, double t, double w) {
    if (w <= 0.0) return factors.F(t);
    const double z = w / spend_scale(priced);
    if (z >= priced.surface.z.back()) return 0.0;
    return sample_surface(priced.surface, t, z);
}

double stock_per_contract(const RclaPrice& priced, double t, double w, double r) {
    if (w <= 0.0) return 0.0;
    if (w / spend_scale(priced) >= priced.surface.z.back()) return 0.0;
    return delta_per_contract(t, w, priced, r);
}

}  // namespace

double delta_per_contract(double t, double w, const RclaPrice& priced, double r) {
    check_priced(priced);
    if (w < 0.0) throw DomainError("delta_per_contract: w must be >= 0");
    if (w == 0.0) return 0.0;
    const double scale = spend_scale(priced);
    const double slope = sample_surface_dz(priced.surface, t, w / scale) / scale;
    return std::exp(r * t) * w * slope;
}

HedgeLedger simulate_hedge(const MarketParams& mkt, const MortalityParams& mort, const RclaPrice& priced,
                           double contracts, double rebalance_dt, const PathSpec& spec, long path_index) {
    mkt.validate();
    mort.validate();
    spec.validate();
    check_priced(priced);
    if (mkt.sigma != priced.market.sigma || mkt.gamma != priced.market.gamma || mkt.mu != priced.market.mu ||
        mkt.rho != priced.market.rho || mkt.I0 != priced.market.I0) {
        throw DomainError("simulate_hedge: market differs from the one the surface was priced under");
    }
    if (std::abs(mkt.rho - (mkt.mu - mkt.delta)) > 1e-12) {
        throw DomainError("simulate_hedge: valuation rate must equal r - delta");
    }
    if (!(contracts > 0.0)) throw DomainError("simulate_hedge: contracts must be > 0");
    const long sub = std::lround(rebalance_dt / spec.dt);
    if (sub < 1 || std::abs(sub * spec.dt - rebalance_dt) > 1e-9 * rebalance_dt) {
        throw DomainError("simulate_hedge: rebalance_dt must be a multiple of spec.dt");
    }
    const double horizon = std::min(spec.resolved_horizon(mort), priced.surface.t.back());
    const long periods = static_cast<long>(std::floor(horizon / rebalance_dt + 1e-9));
    if (periods < 1) throw DomainError("simulate_hedge: horizon shorter than one rebalance period");

    const DeferredFactorTable factors(mort, mkt.rho, mort.horizon(), std::max(200, static_cast<int>(mort.horizon() * 50)));
    const double r = mkt.mu;
    const double sigma = mkt.sigma;
    const double dt = spec.dt;
    const double sqrt_dt = std::sqrt(dt);
    const double spend = mkt.gamma * mkt.I0;
    const double s_drift = (r - 0.5 * sigma * sigma) * dt;
    const double withdraw_factor = r != 0.0 ? std::expm1(r * dt) / r : dt;
    const double N = contracts;

    PathRng rng(spec.seed, static_cast<std::uint64_t>(path_index));
    double S = mkt.I0;
    double W = mkt.I0;
    double ruin = std::numeric_limits<double>::infinity();

    HedgeLedger ledger;
    ledger.contracts = N;
    double V = N * liability(priced, factors, 0.0, W);
    double units = N * stock_per_contract(priced, 0.0, W, r) / S;
    double psi = V - units * S;
    double paid = 0.0;
    auto record = [&](double t) {
        ledger.times.push_back(t);
        ledger.V.push_back(V);
        ledger.stock_value.push_back(units * S);
        ledger.money_market.push_back(psi);
        ledger.outflows.push_back(paid);
        ledger.index_level.push_back(W);
    };
    record(0.0);

    double t = 0.0;
    for (long p = 0; p < periods; ++p) {
        const double a = t;
        for (long k = 0; k < sub; ++k) {
            const double z = rng.normal();
            const double step_start = a + k * dt;
            S *= std::exp(s_drift + sigma * sqrt_dt * z);
            if (std::isinf(ruin)) {
                double next;
                if (spec.scheme == PathScheme::euler) {
                    next = W + (r * W - spend) * dt + sigma * W * sqrt_dt * z;
                } else {
                    next = W * std::exp(s_drift + sigma * sqrt_dt * z) - spend * withdraw_factor;
                }
                if (next <= 0.0) {
                    const double frac = spec.ruin_interpolation ? W / (W - next) : 1.0;
                    ruin = step_start + frac * dt;
                    W = 0.0;
                } else {
                    W = next;
                }
            }
        }
        const double b = (p + 1) * rebalance_dt;
        t = b;
        psi *= std::exp(r * (b - a));
        if (ruin < b) {
            const double out = N * std::exp(r * b) * (factors.F(std::max(a, ruin)) - factors.F(b));
            psi -= out;
            paid += out;
        }
        V = units * S + psi;
        units = std::isinf(ruin) ? N * stock_per_contract(priced, b, W, r) / S : 0.0;
        psi = V - units * S;
        record(b);
    }

    ledger.ruin_time = ruin;
    const double T = t;
    ledger.terminal_error = V - N * std::exp(r * T) * liability(priced, factors, T, W);
    return ledger;
}

HedgeStudy simulate_hedge_study(const MarketParams& mkt, const MortalityParams& mort, const RclaPrice& priced,
                                double contracts, double rebalance_dt, const PathSpec& spec) {
    spec.validate();
    std::vector<double> errors(static_cast<std::size_t>(spec.paths));
    std::vector<double> costs(static_cast<std::size_t>(spec.paths));
    detail::run_partitioned(spec.paths, spec.workers, [&](long lo, long hi) {
        for (long i = lo; i < hi; ++i) {
            const HedgeLedger ledger = simulate_hedge(mkt, mort, priced, contracts, rebalance_dt, spec, i);
            errors[static_cast<std::size_t>(i)] = ledger.terminal_error / contracts;
            costs[static_cast<std::size_t>(i)] = ledger.V.front() / contracts;
        }
    });
    HedgeStudy study;
    study.paths = spec.paths;
    study.initial_cost = costs.front();
    double sum = 0.0, sq = 0.0;
    for (double e : errors) {
        sum += e;
        sq += e * e;
    }
    const double n = static_cast<double>(errors.size());
    study.mean_error = sum / n;
    study.rms_error = std::sqrt(sq / n);
    double dev = 0.0;
    for (double e : errors) dev += (e - study.mean_error) * (e - study.mean_error);
    study.std_error = std::sqrt(dev / (n - 1.0) / n);
    return study;
}

void write_ledger_csv(const HedgeLedger& ledger, std::ostream& out) {
    out << "t,V,stock_value,money_market,cum_outflow\n" << std::setprecision(17);
    for (std::size_t i = 0; i < ledger.times.size(); ++i) {
        out << ledger.times[i] << ',' << ledger.V[i] << ',' << ledger.stock_value[i] << ',' << ledger.money_market[i]
            << ',' << ledger.outflows[i] << '\n';
    }
}

}  // namespace rcla
