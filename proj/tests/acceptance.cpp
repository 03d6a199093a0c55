// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "rcla/glwb_pricing.hpp"
#include "rcla/hedging.hpp"
#include "rcla/mc_oracle.hpp"
#include "rcla/rcla_pricing.hpp"
#include "tables.hpp"

using namespace rcla;

namespace {

// Pinned thresholds.
constexpr double kTable1Seconds = 1.0;
constexpr double kLifeExpectancy = 18.714;
constexpr double kLifeExpectancyTol = 1e-3;
constexpr double kTable2Seconds = 30.0;
constexpr long kBackstopPaths = 100000;
constexpr double kBackstopSigmas = 3.0;
constexpr double kTable3Seconds = 60.0;
constexpr double kIdentityTol = 1e-8;
constexpr double kBoundaryTol = 1e-8;
constexpr double kFormEquivalenceTol = 1e-5;
constexpr double kIndexInvarianceTol = 1e-10;
constexpr double kRichardsonLow = 3.2;
constexpr double kRichardsonHigh = 4.8;
constexpr double kInitialCostTol = 1e-6;
constexpr long kHedgePaths = 1000;
constexpr double kHedgeStep = 1.0 / 3276.0;  // divides 1/12, 1/52 and 1/252
constexpr double kDeterministicHedgeTol = 1e-3;
constexpr double kHedgeSeconds = 120.0;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
    bool pass = true;
    std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const Outcome& o) {
    std::printf("%s  criterion %d  %s: %s\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failures;
}

template <class... Args>
std::string format(const char* fmt, Args... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, fmt, args...);
    return buf;
}

MortalityParams at_age(double x) {
    MortalityParams p;
    p.x = x;
    return p;
}

MarketParams market(double gamma, double rho, double sigma) {
    MarketParams m;
    m.gamma = gamma;
    m.rho = m.mu = rho;
    m.sigma = sigma;
    return m;
}

std::string worst_cell(const tables::Report& r) {
    const tables::Cell* worst = nullptr;
    double excess = 0.0;
    for (const tables::Cell& c : r.cells) {
        const double e = c.abs_diff() / c.tolerance;
        if (!worst || e > excess) {
            worst = &c;
            excess = e;
        }
    }
    if (!worst) return "none";
    std::string labels;
    for (std::size_t i = 0; i < worst->labels.size(); ++i) {
        labels += (i ? "," : "") + r.label_names[i] + "=" + worst->labels[i];
    }
    return format("worst %s %s: %.6g vs %.6g", labels.c_str(), worst->quantity.c_str(), worst->computed,
                  worst->reference);
}

std::string table_summary(const tables::Report& r) {
    return format("table %s %zu/%zu within tolerance in %.2f s (%s)", r.id.c_str(), r.cells.size() - r.breaches(),
                  r.cells.size(), r.seconds, worst_cell(r).c_str());
}

Outcome criterion_table1(const std::filesystem::path& data) {
    const tables::Report r = tables::reproduce("1", data);
    return {r.all_within() && r.cells.size() == 48 && r.seconds < kTable1Seconds, table_summary(r)};
}

Outcome criterion_life_expectancy() {
    const double v = alda_factor(0.0, 0.0, at_age(65)).value;
    return {std::abs(v - kLifeExpectancy) <= kLifeExpectancyTol,
            format("computed %.6f, expected %.3f +- %.0e", v, kLifeExpectancy, kLifeExpectancyTol)};
}

struct BackstopCell {
    double age, gamma, rho, sigma;
};

// PDE against simulation on cells spread over both volatility tables.
Outcome mc_backstop(const std::map<std::string, const tables::Report*>& reports) {
    const std::vector<BackstopCell> cells{
        {50, 0.10, 0.03, 0.10}, {65, 0.05, 0.03, 0.10}, {65, 0.07, 0.05, 0.10}, {75, 0.10, 0.07, 0.10},
        {50, 0.04, 0.05, 0.10}, {75, 0.06, 0.03, 0.10}, {50, 0.03, 0.03, 0.25}, {65, 0.05, 0.03, 0.25},
        {65, 0.10, 0.05, 0.25}, {75, 0.05, 0.07, 0.25}, {50, 0.07, 0.07, 0.25}, {75, 0.04, 0.03, 0.25},
    };
    int agree = 0;
    int printed_agree = 0;
    double worst_z = 0.0;
    const int workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const BackstopCell& c = cells[i];
        const tables::Report& r = *reports.at(c.sigma < 0.2 ? "2a" : "2b");
        const tables::Cell* cell = nullptr;
        for (const tables::Cell& x : r.cells) {
            if (std::stod(x.labels[0]) == c.age && std::stod(x.labels[1]) == c.gamma && std::stod(x.labels[2]) == c.rho) {
                cell = &x;
            }
        }
        if (!cell) return {false, "backstop cell missing from table"};
        PathSpec spec;
        spec.paths = kBackstopPaths;
        spec.seed = 1000 + i;
        spec.workers = workers;
        const McEstimate mc = estimate_price(market(c.gamma, c.rho, c.sigma), at_age(c.age), spec, PayoffVariant::basic);
        const double z = std::abs(cell->computed - mc.price) / mc.std_error;
        worst_z = std::max(worst_z, z);
        if (z <= kBackstopSigmas) ++agree;
        if (std::abs(cell->reference - mc.price) <= kBackstopSigmas * mc.std_error) ++printed_agree;
    }
    return {agree == static_cast<int>(cells.size()),
            format("simulation agrees with the PDE on %d/%zu cells (max %.2f SE); with the reference values on %d/%zu",
                   agree, cells.size(), worst_z, printed_agree, cells.size())};
}

Outcome criterion_tables2(const std::filesystem::path& data, tables::Report& a, tables::Report& b) {
    a = tables::reproduce("2a", data);
    b = tables::reproduce("2b", data);
    const bool fast = a.seconds < kTable2Seconds && b.seconds < kTable2Seconds;
    std::string detail = table_summary(a) + "; " + table_summary(b);
    if (a.all_within() && b.all_within()) return {fast, detail};
    const Outcome backstop = mc_backstop({{"2a", &a}, {"2b", &b}});
    return {fast && backstop.pass, detail + "; backstop: " + backstop.detail};
}

Outcome criterion_table3(const std::filesystem::path& data) {
    const tables::Report r = tables::reproduce("3", data);
    return {r.all_within() && r.seconds < kTable3Seconds, table_summary(r)};
}

Outcome criterion_table4(const std::filesystem::path& data) {
    const tables::Report r = tables::reproduce("4", data);
    std::size_t premium_ok = 0, premium_total = 0;
    for (const tables::Cell& c : r.cells) {
        if (c.quantity != "super_premium") continue;
        ++premium_total;
        if (c.within()) ++premium_ok;
    }
    return {r.all_within(), table_summary(r) + format("; premium within 2 points on %zu/%zu rows", premium_ok, premium_total)};
}

Outcome criterion_tables5(const std::filesystem::path& data) {
    const tables::Report a = tables::reproduce("5a", data);
    const tables::Report b = tables::reproduce("5b", data);
    return {a.all_within() && b.all_within(), table_summary(a) + "; " + table_summary(b)};
}

struct PropertyLog {
    std::vector<std::string> failed;
    int checked = 0;
    void check(bool ok, const std::string& what) {
        ++checked;
        if (!ok) failed.push_back(what);
    }
};

Outcome criterion_properties(const tables::Report& t2a, const tables::Report& t2b) {
    PropertyLog log;

    // Deferred annuity identity on random inputs.
    std::mt19937_64 gen(20240611);
    std::uniform_real_distribution<double> age(40.0, 80.0), tau(0.0, 25.0), rate(0.0, 0.08);
    double worst_identity = 0.0;
    for (int i = 0; i < 200; ++i) {
        const double x = age(gen), d = tau(gen), r = rate(gen);
        const double lhs = alda_factor(d, r, at_age(x)).value;
        const double rhs = spia_factor(r, at_age(x + d)) * survival_probability(d, at_age(x)) * std::exp(-r * d);
        worst_identity = std::max(worst_identity, std::abs(lhs - rhs) / rhs);
    }
    log.check(worst_identity <= kIdentityTol, format("annuity identity %.2e", worst_identity));

    const MortalityParams m65 = at_age(65);
    const MarketParams base = market(0.05, 0.03, 0.25);
    const GridSpec grid = default_rcla_grid(m65);

    // Boundary identity and form equivalence.
    const RclaPrice u = price_rcla(base, m65, grid, true);
    double worst_boundary = 0.0;
    for (std::size_t r = 0; r < u.surface.rows(); ++r) {
        worst_boundary = std::max(worst_boundary, std::abs(u.surface.at(r, 0) - deferred_factor_F(u.surface.t[r], 0.03, m65)));
    }
    log.check(worst_boundary <= kBoundaryTol, format("f(t,0)=F(t) %.2e", worst_boundary));

    GridSpec index_grid = default_rcla_grid(m65, 2.0);
    const double unit = base.gamma * base.I0;
    const RclaPrice u_coarse = price_rcla(base, m65, index_grid, true);
    index_grid.z_max *= unit;
    const RclaPrice f = price_rcla_direct(base, m65, index_grid, true);
    double worst_form = 0.0;
    for (std::size_t r = 0; r < u_coarse.surface.rows(); r += 5) {
        for (std::size_t c = 0; c < u_coarse.surface.cols(); ++c) {
            const double w = u_coarse.surface.z[c] * unit;
            worst_form = std::max(worst_form, std::abs(u_coarse.surface.at(r, c) -
                                                       sample_surface(f.surface, u_coarse.surface.t[r], w)));
        }
    }
    log.check(worst_form <= kFormEquivalenceTol, format("u/f forms %.2e", worst_form));

    // Initial index level scales out.
    MarketParams doubled = base;
    doubled.I0 = 2.0 * base.I0;
    GridSpec g100 = default_rcla_grid(m65, 4.0);
    g100.z_max *= unit;
    GridSpec g200 = g100;
    g200.z_max *= 2.0;
    const double invariance = std::abs(price_rcla_direct(base, m65, g100).value - price_rcla_direct(doubled, m65, g200).value);
    log.check(invariance <= kIndexInvarianceTol && price_rcla(base, m65).value == price_rcla(doubled, m65).value,
              format("I0 invariance %.2e", invariance));

    // Ordering at matched terms.
    for (double x : {57.0, 67.0}) {
        for (double sigma : {0.08, 0.2}) {
            const MortalityParams mort = at_age(x);
            const MarketParams mkt = market(0.05, 0.05, sigma);
            const double basic = price_rcla(mkt, mort).value;
            const double fast = price_frcla(mkt, mort, default_moneyness_grid(mort)).value;
            const double super_value = price_srcla(mkt, mort, default_moneyness_grid(mort)).unit_value;
            log.check(basic <= fast && fast <= super_value,
                      format("ordering at x=%g sigma=%g: %.5f %.5f %.5f", x, sigma, basic, fast, super_value));
        }
    }

    // Monotonicity over the withdrawal-rate tables.
    for (const tables::Report* r : {&t2a, &t2b}) {
        std::map<std::tuple<double, double, double>, double> v;  // (age, gamma, rho)
        for (const tables::Cell& c : r->cells) {
            const double g = std::stod(c.labels[1]);
            if (std::isfinite(g)) v[{std::stod(c.labels[0]), g, std::stod(c.labels[2])}] = c.computed;
        }
        const std::vector<double> ages{50, 65, 75}, gammas{0.03, 0.04, 0.05, 0.06, 0.07, 0.10}, rhos{0.03, 0.05, 0.07};
        for (double a : ages) {
            for (double g : gammas) {
                for (double rho : rhos) {
                    const double p = v.at({a, g, rho});
                    if (g != gammas.back()) {
                        const double next = *std::upper_bound(gammas.begin(), gammas.end(), g);
                        log.check(p < v.at({a, next, rho}), format("increasing in gamma at %g,%g,%g", a, g, rho));
                    }
                    if (a != ages.back()) {
                        const double next = *std::upper_bound(ages.begin(), ages.end(), a);
                        log.check(p > v.at({next, g, rho}), format("decreasing in age at %g,%g,%g", a, g, rho));
                    }
                    if (rho != rhos.back()) {
                        const double next = *std::upper_bound(rhos.begin(), rhos.end(), rho);
                        log.check(p > v.at({a, g, next}), format("decreasing in rho at %g,%g,%g", a, g, rho));
                    }
                    if (r == &t2a) {
                        for (const tables::Cell& c : t2b.cells) {
                            if (std::stod(c.labels[0]) == a && std::stod(c.labels[1]) == g && std::stod(c.labels[2]) == rho) {
                                log.check(p < c.computed, format("increasing in sigma at %g,%g,%g", a, g, rho));
                            }
                        }
                    }
                }
            }
        }
    }

    // Richardson ratio of successive refinements.
    const double p4 = price_rcla(base, m65, default_rcla_grid(m65, 4.0)).value;
    const double p2 = price_rcla(base, m65, default_rcla_grid(m65, 2.0)).value;
    const double p1 = u.value;
    const double ratio = (p4 - p2) / (p2 - p1);
    log.check(ratio >= kRichardsonLow && ratio <= kRichardsonHigh, format("Richardson ratio %.3f", ratio));

    // Limits in the withdrawal rate.
    MarketParams never = base;
    never.gamma = 0.0;
    MarketParams immediate = base;
    immediate.gamma = HUGE_VAL;
    log.check(price_rcla(never, m65).value == 0.0, "gamma = 0 gives 0");
    log.check(price_rcla(immediate, m65).value == spia_factor(base.rho, m65), "gamma = inf gives the immediate annuity");

    std::string detail = format("%d checks, %zu failed; Richardson ratio %.3f, identity %.1e, boundary %.1e, forms %.1e, "
                                "I0 %.1e",
                                log.checked, log.failed.size(), ratio, worst_identity, worst_boundary, worst_form,
                                invariance);
    for (std::size_t i = 0; i < std::min<std::size_t>(3, log.failed.size()); ++i) detail += "; " + log.failed[i];
    return {log.failed.empty(), detail};
}

Outcome criterion_hedging() {
    const auto start = Clock::now();
    const MortalityParams mort = at_age(65);
    const MarketParams mkt = market(0.05, 0.03, 0.25);
    const RclaPrice priced = price_rcla(mkt, mort, default_rcla_grid(mort), true);
    PathSpec spec;
    spec.dt = kHedgeStep;
    spec.paths = kHedgePaths;
    spec.seed = 77;
    spec.workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));

    const double rebalance[] = {1.0 / 12.0, 1.0 / 52.0, 1.0 / 252.0};
    std::vector<HedgeStudy> studies;
    for (double dt : rebalance) studies.push_back(simulate_hedge_study(mkt, mort, priced, 1.0, dt, spec));
    const double cost_gap = std::abs(studies.front().initial_cost - priced.value);
    const bool decreasing = studies[0].rms_error > studies[1].rms_error && studies[1].rms_error > studies[2].rms_error;

    const MarketParams calm = market(0.05, 0.03, 1e-6);
    const RclaPrice calm_price = price_rcla(calm, mort, default_rcla_grid(mort), true);
    PathSpec calm_spec = spec;
    calm_spec.paths = 4;
    double calm_error = 0.0;
    for (long i = 0; i < calm_spec.paths; ++i) {
        const HedgeLedger L = simulate_hedge(calm, mort, calm_price, 1.0, 1.0 / 52.0, calm_spec, i);
        calm_error = std::max(calm_error, std::abs(L.terminal_error));
    }
    const double elapsed = seconds_since(start);
    const bool pass = cost_gap <= kInitialCostTol && decreasing && calm_error < kDeterministicHedgeTol &&
                      elapsed < kHedgeSeconds;
    return {pass, format("V0/N-price %.1e; RMS %.4f > %.4f > %.4f; mean error %.4f +- %.4f at daily; "
                         "deterministic error %.1e; %.1f s",
                         cost_gap, studies[0].rms_error, studies[1].rms_error, studies[2].rms_error,
                         studies[2].mean_error, studies[2].std_error, calm_error, elapsed)};
}

Outcome criterion_determinism() {
    const MortalityParams mort = at_age(70);
    MarketParams mkt = market(0.06, 0.04, 0.2);
    PathSpec spec;
    spec.paths = 20000;
    spec.seed = 4242;
    const McEstimate a = estimate_price(mkt, mort, spec, PayoffVariant::basic);
    const McEstimate b = estimate_price(mkt, mort, spec, PayoffVariant::basic);
    spec.workers = 4;
    const McEstimate c = estimate_price(mkt, mort, spec, PayoffVariant::basic);
    mkt.tau = 3.0;
    mkt.beta = 0.04;
    spec.workers = 1;
    const McEstimate s1 = estimate_price(mkt, mort, spec, PayoffVariant::super);
    spec.workers = 3;
    const McEstimate s3 = estimate_price(mkt, mort, spec, PayoffVariant::super);
    const bool same = a.price == b.price && a.std_error == b.std_error && a.price == c.price &&
                      a.std_error == c.std_error && s1.price == s3.price && s1.std_error == s3.std_error;
    return {same, format("basic %.17g over repeated runs and 1/4 workers; super %.17g over 1/3 workers", a.price,
                         s1.price)};
}

}  // namespace

int main() {
    const std::filesystem::path data = tables::default_data_dir();
    report(1, "annuity factor table", criterion_table1(data));
    report(2, "life expectancy at 65", criterion_life_expectancy());
    tables::Report t2a, t2b;
    report(3, "basic ruin-contingent annuity tables", criterion_tables2(data, t2a, t2b));
    report(4, "ratcheting annuity table", criterion_table3(data));
    report(5, "step-up premium table", criterion_table4(data));
    report(6, "withdrawal guarantee tables", criterion_tables5(data));
    report(7, "property suite", criterion_properties(t2a, t2b));
    report(8, "delta hedging", criterion_hedging());
    report(9, "simulation determinism", criterion_determinism());
    std::printf("%d of 9 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
