#include "rcla/mc_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

#include <boost/random/normal_distribution.hpp>

#include "rcla/detail/parallel.hpp"

namespace rcla {

void PathSpec::validate() const {
    if (!(dt > 0.0) || dt > 0.01) throw DomainError("PathSpec: dt must lie in (0, 0.01]");
    if (!(horizon >= 0.0) || !std::isfinite(horizon)) throw DomainError("PathSpec: horizon must be >= 0");
    if (paths < 2) throw DomainError("PathSpec: need at least 2 paths");
    if (antithetic && paths % 2 != 0) throw DomainError("PathSpec: antithetic sampling needs an even path count");
    if (workers < 1) throw DomainError("PathSpec: workers must be >= 1");
}

double PathSpec::resolved_horizon(const MortalityParams& mort) const {
    const double full = mort.horizon();
    if (horizon == 0.0) return full;
    if (horizon > full + 1e-12) throw DomainError("PathSpec: horizon exceeds max_age - x");
    return horizon;
}

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

Xoshiro256pp::Xoshiro256pp(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t state = seed;
    const std::uint64_t mixed = splitmix64(state) ^ stream;
    state = mixed;
    for (auto& word : s_) word = splitmix64(state);
}

Xoshiro256pp::result_type Xoshiro256pp::operator()() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double PathRng::normal() {
    boost::random::normal_distribution<double> dist;
    return dist(engine_);
}

double PathRng::uniform() {
    return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;
}

namespace {

// Bridge crossings with probability below e^{-50} are not sampled.
constexpr double kBridgeCutoff = 50.0;

struct PathStep {
    double t;
    double w;
    double m;
};

template <class Observer>
RuinSample simulate_path(const MarketParams& mkt, const PathSpec& spec, RuinVariant variant, double horizon,
                         long index, Observer&& observe) {
    const long stream = spec.antithetic ? index / 2 : index;
    const double sign = (spec.antithetic && index % 2 == 1) ? -1.0 : 1.0;
    PathRng rng(spec.seed, static_cast<std::uint64_t>(stream));

    const long steps = std::max(1L, std::lround(horizon / spec.dt));
    const double dt = horizon / steps;
    const double sqrt_dt = std::sqrt(dt);
    const long start_step = std::lround(mkt.tau / dt);
    const double mu = mkt.mu;
    const double sigma = mkt.sigma;
    const double log_drift = (mu - 0.5 * sigma * sigma) * dt;
    const double withdraw_factor = mu != 0.0 ? std::expm1(mu * dt) / mu : dt;
    const bool ratchet = variant == RuinVariant::ratchet;

    double w = mkt.I0;
    double mbar = ratchet ? mkt.I0 * std::exp(mkt.beta * mkt.tau) : mkt.I0;
    double log_w = std::log(w);
    double log_mbar = std::log(mbar);
    observe(PathStep{0.0, w, mbar});
    for (long s = 0; s < steps; ++s) {
        const double t = s * dt;
        double spend = 0.0;
        if (ratchet) {
            if (s >= start_step) spend = mkt.gamma * mbar;
        } else {
            spend = mkt.gamma * mkt.I0;
        }
        const double z = sign * rng.normal();
        double next;
        if (spec.scheme == PathScheme::euler) {
            next = w + (mu * w - spend) * dt + sigma * w * sqrt_dt * z;
        } else {
            next = w * std::exp(log_drift + sigma * sqrt_dt * z) - spend * withdraw_factor;
        }
        if (next <= 0.0) {
            const double frac = spec.ruin_interpolation ? w / (w - next) : 1.0;
            RuinSample hit{t + frac * dt, mbar};
            observe(PathStep{hit.time, 0.0, mbar});
            return hit;
        }
        if (ratchet) {
            if (spec.continuous_max) {
                // Bridge maximum of log W over the step. It can only move the
                // floor when -ln U exceeds 2(L-a)(L-b)/(σ²dt) with L = ln M̄.
                const double a = log_w;
                const double b = std::log(next);
                log_w = b;
                const double bridge_var = sigma * sigma * dt;
                const double gap = std::max(0.0, log_mbar - a) * std::max(0.0, log_mbar - b);
                if (2.0 * gap < kBridgeCutoff * bridge_var) {
                    const double spread = (b - a) * (b - a) - 2.0 * bridge_var * std::log(rng.uniform());
                    const double peak = 0.5 * (a + b + std::sqrt(spread));
                    if (peak > log_mbar) {
                        log_mbar = peak;
                        mbar = std::exp(peak);
                    }
                }
            } else if (next > mbar) {
                mbar = next;
            }
        }
        w = next;
        observe(PathStep{t + dt, w, mbar});
    }
    return RuinSample{std::numeric_limits<double>::infinity(), mbar};
}

}  // namespace

std::vector<RuinSample> simulate_ruin_time(const MarketParams& mkt, const PathSpec& spec, RuinVariant variant,
                                           double horizon) {
    mkt.validate();
    spec.validate();
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw DomainError("simulate_ruin_time: horizon must be > 0");
    std::vector<RuinSample> out(static_cast<std::size_t>(spec.paths));
    if (mkt.gamma == 0.0) return out;
    if (mkt.immediate()) throw DomainError("simulate_ruin_time: gamma must be finite");
    detail::run_partitioned(spec.paths, spec.workers, [&](long lo, long hi) {
        for (long i = lo; i < hi; ++i) {
            out[static_cast<std::size_t>(i)] = simulate_path(mkt, spec, variant, horizon, i, [](const PathStep&) {});
        }
    });
    if (variant == RuinVariant::basic) {
        for (auto& r : out) r.mbar = mkt.I0;
    }
    return out;
}

McEstimate estimate_price(const MarketParams& mkt, const MortalityParams& mort, const PathSpec& spec,
                          PayoffVariant variant, PayoutWindow window) {
    mort.validate();
    spec.validate();
    const double horizon = spec.resolved_horizon(mort);
    const RuinVariant ruin = variant == PayoffVariant::basic ? RuinVariant::basic : RuinVariant::ratchet;
    const std::vector<RuinSample> samples = simulate_ruin_time(mkt, spec, ruin, horizon);
    const DeferredFactorTable factors(mort, mkt.rho, horizon, std::max(200, static_cast<int>(std::ceil(horizon * 50))));

    const std::size_t n = samples.size();
    std::vector<double> payoff(n, 0.0);
    long ruined = 0;
    double ruin_time_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const RuinSample& r = samples[i];
        if (!std::isfinite(r.time)) continue;
        ++ruined;
        ruin_time_sum += r.time;
        if (window == PayoutWindow::meet) continue;
        double value = factors.F(std::min(r.time, horizon));
        if (variant == PayoffVariant::super) value *= r.mbar / mkt.I0;
        payoff[i] = value;
    }

    McEstimate est;
    est.paths = spec.paths;
    est.ruin_fraction = static_cast<double>(ruined) / static_cast<double>(n);
    est.mean_ruin_time = ruined > 0 ? ruin_time_sum / static_cast<double>(ruined) : 0.0;

    // Antithetic pairs are averaged first so the error uses independent samples.
    std::vector<double> draws;
    if (spec.antithetic) {
        draws.resize(n / 2);
        for (std::size_t k = 0; k < n / 2; ++k) draws[k] = 0.5 * (payoff[2 * k] + payoff[2 * k + 1]);
    } else {
        draws = payoff;
    }
    double sum = 0.0;
    for (double v : draws) sum += v;
    const double mean = sum / static_cast<double>(draws.size());
    double sq = 0.0;
    for (double v : draws) sq += (v - mean) * (v - mean);
    const double var = sq / static_cast<double>(draws.size() - 1);
    est.price = mean;
    est.std_error = std::sqrt(var / static_cast<double>(draws.size()));
    return est;
}

void write_paths_csv(const MarketParams& mkt, const PathSpec& spec, RuinVariant variant, double horizon, int count,
                     int stride, std::ostream& out) {
    mkt.validate();
    spec.validate();
    if (count < 1 || count > 100) throw DomainError("write_paths_csv: count must lie in [1, 100]");
    if (stride < 1) throw DomainError("write_paths_csv: stride must be >= 1");
    out << "path_id,t,W,M\n" << std::setprecision(17);
    for (int p = 0; p < count; ++p) {
        long step = 0;
        simulate_path(mkt, spec, variant, horizon, p, [&](const PathStep& s) {
            if (step % stride == 0 || s.w == 0.0) out << p << ',' << s.t << ',' << s.w << ',' << s.m << '\n';
            ++step;
        });
    }
}

}  // namespace rcla
