#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "rcla/glwb_pricing.hpp"
#include "rcla/mc_oracle.hpp"
#include "rcla/rcla_pricing.hpp"

namespace rcla::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitSolver = 3;
inline constexpr int kExitTolerance = 4;

/// Fully resolved settings of one CLI run.
struct RunConfig {
    std::string product = "rcla";
    MortalityParams mortality;
    MarketParams market;
    std::optional<double> mu;  ///< unset: mu = rho + delta
    double deposit = 100.0;
    double grid_scale = 1.0;
    bool mc_check = false;
    std::optional<long> paths;  ///< unset: 100000 for mc, 1000 for hedge
    std::uint64_t seed = 1;
    double dt = 1.0 / 500.0;
    int workers = 1;
    bool antithetic = false;
    std::string scheme = "euler";
    double horizon = 0.0;
    double contracts = 1.0;
    std::string rebalance = "1/52";
    std::string out;
    std::string format = "csv";
    std::string surface_out;
    std::string ledger_out;
    std::string table_id;
    std::string data_dir;

    /// Copies mu into the market and checks every field.
    void resolve();
    nlohmann::json to_json() const;
};

/// Applies a JSON object to `cfg`. Unknown keys and mistyped values throw
/// DomainError naming the field.
void apply_config(const nlohmann::json& j, RunConfig& cfg);

/// Parses "1/252", "0.25" or "inf".
double parse_number(const std::string& text, const std::string& field);

/// Joins a relative output path onto RCLA_OUTPUT_DIR when that is set.
std::string resolve_output_path(const std::string& path);

/// Entry point shared by the executable and the tests. `args` excludes argv[0].
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rcla::cli
