#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <vector>

#include "rcla/mortality.hpp"
#include "rcla/rcla_pricing.hpp"

namespace rcla {

enum class PathScheme { euler, log_euler };
enum class RuinVariant { basic, ratchet };
enum class PayoffVariant { basic, fast, super };

/// Post-ruin income window. `join` pays from ruin until death; `meet` pays
/// over [R, min(R, T_x)], which is empty.
enum class PayoutWindow { join, meet };

struct PathSpec {
    double dt = 1.0 / 500.0;
    double horizon = 0.0;  ///< 0 means max_age - x
    long paths = 100000;
    std::uint64_t seed = 1;
    PathScheme scheme = PathScheme::euler;
    bool antithetic = false;
    /// Sample the running maximum inside each step from the Brownian bridge.
    bool continuous_max = true;
    /// Place the ruin time at the linear zero crossing inside the step.
    bool ruin_interpolation = true;
    int workers = 1;

    void validate() const;
    double resolved_horizon(const MortalityParams& mort) const;
};

struct McEstimate {
    double price = 0.0;
    double std_error = 0.0;
    double ruin_fraction = 0.0;
    double mean_ruin_time = 0.0;
    long paths = 0;
};

/// Ruin time of one path (infinity when the index survives the horizon) and
/// the bonus-floored running maximum at that time.
struct RuinSample {
    double time = std::numeric_limits<double>::infinity();
    double mbar = 0.0;
};

/// xoshiro256++ with state expanded from (seed, stream) by splitmix64.
class Xoshiro256pp {
public:
    using result_type = std::uint64_t;

    Xoshiro256pp(std::uint64_t seed, std::uint64_t stream);
    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type{0}; }
    result_type operator()();

private:
    std::uint64_t s_[4];
};

/// Standard normal and uniform draws for one path. Streams are keyed by
/// (seed, path index) so results do not depend on scheduling.
class PathRng {
public:
    PathRng(std::uint64_t seed, std::uint64_t stream) : engine_(seed, stream) {}
    double normal();
    /// Uniform on (0, 1].
    double uniform();

private:
    Xoshiro256pp engine_;
};

/// Simulates ruin times of the index started at I0. The ratchet variant
/// withdraws γ·M̄ per year after the deferral, M̄ starting at I0·e^{βτ}.
std::vector<RuinSample> simulate_ruin_time(const MarketParams& mkt, const PathSpec& spec, RuinVariant variant,
                                           double horizon);

/// Mean of F(R) (basic, fast) or (M̄_R / I0)·F(R) (super) with F(∞) = 0.
McEstimate estimate_price(const MarketParams& mkt, const MortalityParams& mort, const PathSpec& spec,
                          PayoffVariant variant, PayoutWindow window = PayoutWindow::join);

/// Writes `path_id,t,W,M` for the first `count` paths (at most 100), one row
/// every `stride` steps plus the ruin step.
void write_paths_csv(const MarketParams& mkt, const PathSpec& spec, RuinVariant variant, double horizon, int count,
                     int stride, std::ostream& out);

}  // namespace rcla
