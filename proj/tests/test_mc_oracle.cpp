#include <cmath>
#include <sstream>

#include "doctest.h"
#include "rcla/csv_io.hpp"
#include "rcla/glwb_pricing.hpp"
#include "rcla/mc_oracle.hpp"

using namespace rcla;

namespace {

MarketParams market(double gamma, double rho, double sigma) {
    MarketParams m;
    m.gamma = gamma;
    m.rho = m.mu = rho;
    m.sigma = sigma;
    return m;
}

MortalityParams at_age(double x) {
    MortalityParams p;
    p.x = x;
    return p;
}

PathSpec paths(long n, std::uint64_t seed = 11) {
    PathSpec s;
    s.paths = n;
    s.seed = seed;
    return s;
}

void check_agrees(double pde, const McEstimate& mc) {
    CAPTURE(pde);
    CAPTURE(mc.price);
    CAPTURE(mc.std_error);
    CHECK(std::abs(pde - mc.price) <= 3.0 * mc.std_error);
}

}  // namespace

TEST_SUITE("mc_oracle") {

TEST_CASE("no withdrawals means no ruin") {
    const std::vector<RuinSample> r = simulate_ruin_time(market(0.0, 0.05, 0.3), paths(500), RuinVariant::basic, 30.0);
    for (const RuinSample& s : r) REQUIRE(std::isinf(s.time));
}

TEST_CASE("deterministic depletion time") {
    MarketParams m = market(0.1, 0.0, 1e-6);
    PathSpec spec = paths(200);
    const std::vector<RuinSample> r = simulate_ruin_time(m, spec, RuinVariant::basic, 30.0);
    for (const RuinSample& s : r) REQUIRE(std::abs(s.time - 10.0) <= 2.0 * spec.dt);
}

TEST_CASE("fixed seed gives bit-identical results for any worker count") {
    const MortalityParams mort = at_age(75);
    const MarketParams mkt = market(0.07, 0.05, 0.25);
    PathSpec one = paths(4000, 99);
    PathSpec three = one;
    three.workers = 3;
    const McEstimate a = estimate_price(mkt, mort, one, PayoffVariant::basic);
    const McEstimate b = estimate_price(mkt, mort, one, PayoffVariant::basic);
    const McEstimate c = estimate_price(mkt, mort, three, PayoffVariant::basic);
    CHECK(a.price == b.price);
    CHECK(a.std_error == b.std_error);
    CHECK(a.price == c.price);
    CHECK(a.std_error == c.std_error);
    CHECK(a.ruin_fraction == c.ruin_fraction);
    PathSpec other = one;
    other.seed = 100;
    CHECK(estimate_price(mkt, mort, other, PayoffVariant::basic).price != a.price);
}

TEST_CASE("agrees with the basic PDE price") {
    const MortalityParams mort = at_age(75);
    const MarketParams mkt = market(0.07, 0.05, 0.25);
    check_agrees(price_rcla(mkt, mort).value, estimate_price(mkt, mort, paths(40000), PayoffVariant::basic));
}

TEST_CASE("agrees with the ratchet PDE prices") {
    const MortalityParams mort = at_age(72);
    const MarketParams mkt = market(0.055, 0.05, 0.2);
    const GridSpec grid = default_moneyness_grid(mort);
    check_agrees(price_frcla(mkt, mort, grid).value, estimate_price(mkt, mort, paths(20000), PayoffVariant::fast));
    check_agrees(price_srcla(mkt, mort, grid).unit_value, estimate_price(mkt, mort, paths(20000), PayoffVariant::super));
}

TEST_CASE("deferral and bonus floor agree with the PDE") {
    // Withdrawals start after 10 years at 5% of 100 e^{0.5}, about 8.2 a year.
    const MortalityParams mort = at_age(65);
    MarketParams mkt = market(0.05, 0.05, 0.2);
    mkt.tau = 10.0;
    mkt.beta = 0.05;
    const GridSpec grid = default_moneyness_grid(mort);
    check_agrees(price_frcla(mkt, mort, grid).value, estimate_price(mkt, mort, paths(20000), PayoffVariant::fast));
}

TEST_CASE("antithetic pairs leave the estimate unbiased") {
    const MortalityParams mort = at_age(75);
    const MarketParams mkt = market(0.06, 0.05, 0.25);
    PathSpec anti = paths(20000, 5);
    anti.antithetic = true;
    const McEstimate a = estimate_price(mkt, mort, anti, PayoffVariant::basic);
    const McEstimate p = estimate_price(mkt, mort, paths(20000, 6), PayoffVariant::basic);
    CHECK(std::abs(a.price - p.price) <= 3.0 * std::hypot(a.std_error, p.std_error));
}

TEST_CASE("standard error halves with four times the paths") {
    const MortalityParams mort = at_age(78);
    const MarketParams mkt = market(0.07, 0.05, 0.25);
    const McEstimate small = estimate_price(mkt, mort, paths(10000, 21), PayoffVariant::basic);
    const McEstimate large = estimate_price(mkt, mort, paths(40000, 22), PayoffVariant::basic);
    CHECK(small.std_error / large.std_error == doctest::Approx(2.0).epsilon(0.2));
    CHECK(small.std_error > 0.0);
    CHECK(small.ruin_fraction > 0.0);
    CHECK(small.ruin_fraction < 1.0);
}

TEST_CASE("halving the time step moves the estimate by less than its noise") {
    const MortalityParams mort = at_age(80);
    const MarketParams mkt = market(0.07, 0.05, 0.25);
    PathSpec coarse = paths(100000, 31);
    PathSpec fine = coarse;
    fine.dt = coarse.dt / 2.0;
    const McEstimate a = estimate_price(mkt, mort, coarse, PayoffVariant::basic);
    const McEstimate b = estimate_price(mkt, mort, fine, PayoffVariant::basic);
    CHECK(std::abs(a.price - b.price) < a.std_error);
}

TEST_CASE("log-euler scheme agrees with euler") {
    const MortalityParams mort = at_age(75);
    const MarketParams mkt = market(0.07, 0.05, 0.25);
    PathSpec log_spec = paths(20000, 41);
    log_spec.scheme = PathScheme::log_euler;
    const McEstimate a = estimate_price(mkt, mort, log_spec, PayoffVariant::basic);
    check_agrees(price_rcla(mkt, mort).value, a);
}

TEST_CASE("the empty payout window pays nothing") {
    const McEstimate e = estimate_price(market(0.07, 0.05, 0.25), at_age(75), paths(1000), PayoffVariant::super,
                                        PayoutWindow::meet);
    CHECK(e.price == 0.0);
}

TEST_CASE("path dump") {
    std::stringstream out;
    write_paths_csv(market(0.1, 0.05, 0.3), paths(10), RuinVariant::ratchet, 5.0, 3, 50, out);
    const io::CsvTable t = io::read_csv(out);
    CHECK(t.header == std::vector<std::string>{"path_id", "t", "W", "M"});
    CHECK(t.number(0, "W") == 100.0);
    CHECK(t.number(t.rows.size() - 1, "path_id") == 2.0);
    for (std::size_t i = 0; i < t.rows.size(); ++i) REQUIRE(t.number(i, "M") >= t.number(i, "W"));
    std::stringstream sink;
    CHECK_THROWS_AS(write_paths_csv(market(0.1, 0.05, 0.3), paths(10), RuinVariant::basic, 5.0, 101, 1, sink),
                    DomainError);
}

TEST_CASE("path settings are validated") {
    PathSpec s;
    s.dt = 0.02;
    CHECK_THROWS_AS(s.validate(), DomainError);
    s = {};
    s.antithetic = true;
    s.paths = 1001;
    CHECK_THROWS_AS(s.validate(), DomainError);
    s = {};
    s.paths = 1;
    CHECK_THROWS_AS(s.validate(), DomainError);
    s = {};
    s.horizon = 80.0;
    CHECK_THROWS_AS(s.resolved_horizon(at_age(65)), DomainError);
}

}
