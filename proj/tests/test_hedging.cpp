#include <algorithm>
#include <cmath>
#include <sstream>

#include "doctest.h"
#include "rcla/csv_io.hpp"
#include "rcla/hedging.hpp"

using namespace rcla;

namespace {

MarketParams market(double sigma, double r = 0.03, double gamma = 0.05) {
    MarketParams m;
    m.gamma = gamma;
    m.rho = m.mu = r;
    m.sigma = sigma;
    return m;
}

MortalityParams at_age(double x) {
    MortalityParams p;
    p.x = x;
    return p;
}

PathSpec fine_steps(double dt, long n, double horizon = 0.0) {
    PathSpec s;
    s.dt = dt;
    s.paths = n;
    s.seed = 2024;
    s.horizon = horizon;
    return s;
}

}  // namespace

TEST_SUITE("hedging") {

TEST_CASE("stock position at the edges and its sign") {
    const MortalityParams mort = at_age(65);
    const MarketParams mkt = market(0.1);
    const RclaPrice p = price_rcla(mkt, mort, default_rcla_grid(mort, 2.0), true);
    CHECK(delta_per_contract(0.0, 0.0, p, 0.03) == 0.0);
    const double unit = mkt.gamma * mkt.I0;
    CHECK(std::abs(delta_per_contract(0.0, 0.6 * p.surface.z.back() * unit, p, 0.03)) < 1e-8);
    for (double t : {0.0, 5.0, 20.0}) {
        for (double w : {1.0, 50.0, 100.0, 300.0, 1000.0}) REQUIRE(delta_per_contract(t, w, p, 0.03) <= 1e-12);
    }
    CHECK_THROWS_AS(delta_per_contract(0.0, -1.0, p, 0.03), DomainError);
}

TEST_CASE("ledger bookkeeping along one path") {
    const MortalityParams mort = at_age(65);
    const MarketParams mkt = market(0.25);
    const RclaPrice p = price_rcla(mkt, mort, default_rcla_grid(mort, 2.0), true);
    const double rebalance = 1.0 / 252.0;
    bool saw_ruin = false;
    for (long path = 0; path < 40 && !saw_ruin; ++path) {
        const HedgeLedger L = simulate_hedge(mkt, mort, p, 10.0, rebalance, fine_steps(rebalance / 4, 2), path);
        CHECK(L.V.front() / 10.0 == doctest::Approx(p.value).epsilon(1e-12));
        double worst_gap = 0.0;
        for (std::size_t i = 0; i < L.times.size(); ++i) {
            REQUIRE(std::abs(L.V[i] - (L.stock_value[i] + L.money_market[i])) <= 1e-9 * (1.0 + std::abs(L.V[i])));
            if (i > 0) REQUIRE(L.outflows[i] >= L.outflows[i - 1]);
            if (L.times[i] <= L.ruin_time) REQUIRE(L.outflows[i] == 0.0);
            if (L.index_level[i] == 0.0) REQUIRE(L.stock_value[i] == 0.0);
            const double t = L.times[i];
            const double z = L.index_level[i] / (mkt.gamma * mkt.I0);
            const double f = L.index_level[i] == 0.0 ? deferred_factor_F(t, mkt.rho, mort)
                                                     : (z < p.surface.z.back() ? sample_surface(p.surface, t, z) : 0.0);
            const double target = 10.0 * std::exp(mkt.mu * t) * f;
            worst_gap = std::max(worst_gap, std::abs(L.V[i] - target) / (10.0 * std::exp(mkt.mu * t) * p.value));
        }
        CHECK(worst_gap < 0.05);
        saw_ruin = std::isfinite(L.ruin_time);
        if (saw_ruin) CHECK(L.outflows.back() > 0.0);
    }
    CHECK(saw_ruin);
}

TEST_CASE("deterministic index replicates exactly") {
    const MortalityParams mort = at_age(65);
    const MarketParams mkt = market(1e-6);
    const RclaPrice p = price_rcla(mkt, mort, default_rcla_grid(mort), true);
    const HedgeLedger L = simulate_hedge(mkt, mort, p, 1.0, 1.0 / 52.0, fine_steps(1.0 / 520.0, 2));
    CHECK(std::isfinite(L.ruin_time));
    CHECK(std::abs(L.terminal_error) < 1e-3);
}

TEST_CASE("hedging error shrinks with rebalancing frequency and has mean zero") {
    const MortalityParams mort = at_age(65);
    const MarketParams mkt = market(0.25);
    const RclaPrice p = price_rcla(mkt, mort, default_rcla_grid(mort, 2.0), true);
    const double horizon = 10.0;
    const HedgeStudy monthly = simulate_hedge_study(mkt, mort, p, 1.0, 1.0 / 12.0, fine_steps(1.0 / 252.0 / 4.0 * 3.0, 400, horizon));
    const HedgeStudy daily = simulate_hedge_study(mkt, mort, p, 1.0, 1.0 / 252.0, fine_steps(1.0 / 252.0, 400, horizon));
    CHECK(monthly.initial_cost == doctest::Approx(p.value).epsilon(1e-12));
    CHECK(daily.rms_error < monthly.rms_error);
    CHECK(std::abs(daily.mean_error) <= 3.0 * daily.std_error);
}

TEST_CASE("payout growth prices at r minus delta") {
    const MortalityParams mort = at_age(70);
    MarketParams mkt = market(0.2, 0.02);
    mkt.mu = 0.04;
    mkt.delta = 0.02;
    const RclaPrice p = price_rcla(mkt, mort, default_rcla_grid(mort, 2.0), true);
    const HedgeStudy s = simulate_hedge_study(mkt, mort, p, 1.0, 1.0 / 252.0, fine_steps(1.0 / 252.0, 200, 10.0));
    CHECK(s.initial_cost == doctest::Approx(p.value).epsilon(1e-12));
    CHECK(std::abs(s.mean_error) <= 3.0 * s.std_error + 1e-3);
}

TEST_CASE("mismatched inputs are rejected") {
    const MortalityParams mort = at_age(65);
    const MarketParams mkt = market(0.25);
    const RclaPrice p = price_rcla(mkt, mort, default_rcla_grid(mort, 4.0), true);
    CHECK_THROWS_AS(simulate_hedge(market(0.2), mort, p, 1.0, 1.0 / 52.0, fine_steps(1.0 / 520.0, 2)), DomainError);
    CHECK_THROWS_AS(simulate_hedge(market(0.25, 0.03, 0.06), mort, p, 1.0, 1.0 / 52.0, fine_steps(1.0 / 520.0, 2)),
                    DomainError);
    CHECK_THROWS_AS(simulate_hedge(mkt, mort, p, 1.0, 1.0 / 52.0, fine_steps(1.0 / 300.0, 2)), DomainError);
    MarketParams drifted = mkt;
    drifted.delta = 0.01;
    CHECK_THROWS_AS(simulate_hedge(drifted, mort, p, 1.0, 1.0 / 52.0, fine_steps(1.0 / 520.0, 2)), DomainError);
    const RclaPrice bare = price_rcla(mkt, mort, default_rcla_grid(mort, 4.0), false);
    CHECK_THROWS_AS(simulate_hedge(mkt, mort, bare, 1.0, 1.0 / 52.0, fine_steps(1.0 / 520.0, 2)), DomainError);
}

TEST_CASE("ledger csv") {
    const MortalityParams mort = at_age(65);
    const MarketParams mkt = market(0.25);
    const RclaPrice p = price_rcla(mkt, mort, default_rcla_grid(mort, 4.0), true);
    const HedgeLedger L = simulate_hedge(mkt, mort, p, 3.0, 1.0 / 12.0, fine_steps(1.0 / 120.0, 2, 2.0));
    std::stringstream out;
    write_ledger_csv(L, out);
    const io::CsvTable t = io::read_csv(out);
    CHECK(t.header == std::vector<std::string>{"t", "V", "stock_value", "money_market", "cum_outflow"});
    REQUIRE(t.rows.size() == L.times.size());
    for (std::size_t i = 0; i < t.rows.size(); ++i) CHECK(t.number(i, "V") == L.V[i]);
}

}
