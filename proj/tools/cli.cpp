#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "rcla/csv_io.hpp"
#include "rcla/errors.hpp"
#include "rcla/hedging.hpp"
#include "rcla/mortality.hpp"
#include "tables.hpp"

#ifndef RCLA_VERSION
#define RCLA_VERSION "0.0.0"
#endif

namespace rcla::cli {

namespace {

using Record = nlohmann::ordered_json;

constexpr long kMcDefaultPaths = 100000;
constexpr long kHedgeDefaultPaths = 1000;

// Flag name and config key for every settable field.
struct FieldSpec {
    const char* flag;
    const char* key;
    const char* help;
};

const std::vector<FieldSpec>& value_fields() {
    static const std::vector<FieldSpec> fields{
        {"--product", "product", "spia | alda | rcla | frcla | srcla | glwb"},
        {"--age", "age", "purchase age x"},
        {"--lambda", "lambda", "constant hazard component"},
        {"--modal-age", "modal_age", "Gompertz modal age m"},
        {"--dispersion", "dispersion", "Gompertz dispersion b"},
        {"--max-age", "max_age", "terminal age"},
        {"--mu", "mu", "index drift (default rho + delta)"},
        {"--sigma", "sigma", "index volatility"},
        {"--rho", "rho", "valuation rate"},
        {"--gamma", "gamma", "withdrawal rate, or inf"},
        {"--I0", "I0", "initial index level"},
        {"--tau", "tau", "deferral in years"},
        {"--beta", "beta", "bonus rate during deferral"},
        {"--delta", "delta", "payout growth rate"},
        {"--deposit", "deposit", "GLWB deposit"},
        {"--grid-scale", "grid_scale", "multiplies the default grid steps"},
        {"--paths", "paths", "Monte Carlo paths"},
        {"--seed", "seed", "random seed"},
        {"--dt", "dt", "simulation step in years"},
        {"--workers", "workers", "simulation threads"},
        {"--scheme", "scheme", "euler | log-euler"},
        {"--horizon", "horizon", "simulation horizon in years (0: to max age)"},
        {"--contracts", "contracts", "number of contracts hedged"},
        {"--rebalance", "rebalance", "rebalance interval in years, e.g. 1/252"},
        {"--out", "out", "output file (default stdout)"},
        {"--format", "format", "csv | json"},
        {"--surface", "surface_out", "write the solved surface as CSV"},
        {"--ledger", "ledger_out", "write the first hedge path as CSV"},
        {"--id", "id", "table id: 1, 2a, 2b, 3, 4, 5a, 5b"},
        {"--data-dir", "data_dir", "directory of reference tables"},
    };
    return fields;
}

const std::vector<FieldSpec>& flag_fields() {
    static const std::vector<FieldSpec> fields{
        {"--mc-check", "mc_check", "also estimate the price by simulation"},
        {"--antithetic", "antithetic", "antithetic path pairs"},
    };
    return fields;
}

double json_number(const nlohmann::json& v, const std::string& key) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) return parse_number(v.get<std::string>(), key);
    throw DomainError(key + ": expected a number");
}

std::string json_string(const nlohmann::json& v, const std::string& key) {
    if (!v.is_string()) throw DomainError(key + ": expected a string");
    return v.get<std::string>();
}

bool json_bool(const nlohmann::json& v, const std::string& key) {
    if (v.is_boolean()) return v.get<bool>();
    if (v.is_string()) {
        const std::string s = v.get<std::string>();
        if (s == "true" || s == "1") return true;
        if (s == "false" || s == "0") return false;
    }
    throw DomainError(key + ": expected true or false");
}

long json_count(const nlohmann::json& v, const std::string& key) {
    const double d = json_number(v, key);
    if (!(d >= 0.0) || d != std::floor(d) || d > 9.0e15) throw DomainError(key + ": expected a non-negative integer");
    return static_cast<long>(d);
}

void check_choice(const std::string& value, std::initializer_list<const char*> allowed, const std::string& key) {
    for (const char* a : allowed) {
        if (value == a) return;
    }
    std::string list;
    for (const char* a : allowed) list += (list.empty() ? "" : ", ") + std::string(a);
    throw DomainError(key + ": '" + value + "' is not one of " + list);
}

std::string number_text(double v) { return io::format_double(v); }

nlohmann::json number_or_text(double v) {
    if (std::isfinite(v)) return v;
    return number_text(v);
}

void emit(const RunConfig& cfg, const std::string& command, const std::vector<Record>& records, std::ostream& out) {
    if (cfg.format == "json") {
        Record doc;
        doc["version"] = RCLA_VERSION;
        doc["command"] = command;
        doc["seed"] = cfg.seed;
        doc["config"] = cfg.to_json();
        doc["records"] = records;
        out << doc.dump(2) << '\n';
        return;
    }
    io::CsvTable table;
    table.comments = {"rcla " RCLA_VERSION, "command: " + command, "seed: " + std::to_string(cfg.seed),
                      "config: " + cfg.to_json().dump()};
    if (!records.empty()) {
        for (const auto& [key, value] : records.front().items()) table.header.push_back(key);
    }
    for (const Record& r : records) {
        std::vector<std::string> row;
        for (const auto& [key, value] : r.items()) {
            if (value.is_number_float()) row.push_back(number_text(value.get<double>()));
            else if (value.is_string()) row.push_back(value.get<std::string>());
            else row.push_back(value.dump());
        }
        table.rows.push_back(std::move(row));
    }
    io::write_csv(out, table);
}

void write_output(const RunConfig& cfg, const std::string& command, const std::vector<Record>& records,
                  std::ostream& out) {
    if (cfg.out.empty()) {
        emit(cfg, command, records, out);
        return;
    }
    const std::filesystem::path path = resolve_output_path(cfg.out);
    std::ofstream file(path);
    if (!file) throw DomainError("out: cannot open '" + path.string() + "'");
    emit(cfg, command, records, file);
}

void write_surface(const PriceSurface& s, const std::string& target) {
    const std::filesystem::path path = resolve_output_path(target);
    std::ofstream file(path);
    if (!file) throw DomainError("surface: cannot open '" + path.string() + "'");
    write_surface_csv(s, file);
}

PathSpec path_spec(const RunConfig& cfg, long default_paths) {
    PathSpec spec;
    spec.dt = cfg.dt;
    spec.paths = cfg.paths.value_or(default_paths);
    spec.seed = cfg.seed;
    spec.scheme = cfg.scheme == "log-euler" ? PathScheme::log_euler : PathScheme::euler;
    spec.antithetic = cfg.antithetic;
    spec.horizon = cfg.horizon;
    spec.workers = cfg.workers;
    spec.validate();
    return spec;
}

void add_diagnostics(Record& r, const GridSpec& grid, const SolveDiagnostics& d) {
    r["z_max"] = grid.z_max;
    r["z_steps"] = grid.z_steps;
    r["t_steps"] = d.time_steps;
    r["max_residual"] = d.max_residual;
}

void add_mc(Record& r, const McEstimate& mc, double scale, double pde_value) {
    r["mc_price"] = scale * mc.price;
    r["mc_std_error"] = scale * mc.std_error;
    r["mc_paths"] = mc.paths;
    r["mc_z_score"] = mc.std_error > 0.0 ? (pde_value - scale * mc.price) / (scale * mc.std_error) : 0.0;
}

int cmd_price(const RunConfig& cfg, std::ostream& out) {
    const MarketParams& mkt = cfg.market;
    const MortalityParams& mort = cfg.mortality;
    Record r;
    r["product"] = cfg.product;
    if (cfg.product == "spia" || cfg.product == "alda") {
        const double tau = cfg.product == "spia" ? 0.0 : mkt.tau;
        r["value"] = alda_factor(tau, mkt.rho, mort).value;
    } else if (cfg.product == "rcla") {
        const GridSpec grid = default_rcla_grid(mort, cfg.grid_scale);
        const RclaPrice p = price_rcla(mkt, mort, grid, !cfg.surface_out.empty());
        r["value"] = p.value;
        add_diagnostics(r, grid, p.diagnostics);
        if (cfg.mc_check && mkt.gamma > 0.0 && !mkt.immediate()) {
            add_mc(r, estimate_price(mkt, mort, path_spec(cfg, kMcDefaultPaths), PayoffVariant::basic), 1.0, p.value);
        }
        if (!cfg.surface_out.empty() && p.surface.rows() > 0) write_surface(p.surface, cfg.surface_out);
    } else {
        const GridSpec grid = default_moneyness_grid(mort, cfg.grid_scale);
        const bool super_payout = cfg.product != "frcla";
        double value = 0.0;
        double scale = 1.0;
        SolveDiagnostics diag;
        if (cfg.product == "frcla") {
            const RclaPrice p = price_frcla(mkt, mort, grid);
            value = p.value;
            diag = p.diagnostics;
        } else {
            const double deposit = cfg.product == "glwb" ? cfg.deposit : mkt.I0;
            const GlwbQuote q = price_glwb(deposit, mkt, mort, grid);
            r["unit_value"] = q.unit_value;
            r["guaranteed_dollars"] = q.guaranteed_dollars;
            r["dollar_value"] = q.dollar_value;
            value = cfg.product == "glwb" ? q.dollar_value : q.unit_value;
            scale = cfg.product == "glwb" ? q.guaranteed_dollars : 1.0;
            diag = q.diagnostics;
        }
        r["value"] = value;
        add_diagnostics(r, grid, diag);
        if (cfg.mc_check) {
            const PayoffVariant v = super_payout ? PayoffVariant::super : PayoffVariant::fast;
            add_mc(r, estimate_price(mkt, mort, path_spec(cfg, kMcDefaultPaths), v), scale, value);
        }
        if (!cfg.surface_out.empty()) {
            RatchetOptions options;
            options.keep_surface = true;
            write_surface(solve_ratchet(mkt, mort, grid, super_payout, options).surface, cfg.surface_out);
        }
    }
    write_output(cfg, "price", {r}, out);
    return kExitOk;
}

int cmd_mc(const RunConfig& cfg, std::ostream& out) {
    PayoffVariant variant = PayoffVariant::basic;
    if (cfg.product == "frcla") variant = PayoffVariant::fast;
    else if (cfg.product == "srcla") variant = PayoffVariant::super;
    else if (cfg.product != "rcla") throw DomainError("product: mc supports rcla, frcla and srcla");
    const PathSpec spec = path_spec(cfg, kMcDefaultPaths);
    const McEstimate e = estimate_price(cfg.market, cfg.mortality, spec, variant);
    Record r;
    r["product"] = cfg.product;
    r["price"] = e.price;
    r["std_error"] = e.std_error;
    r["ruin_fraction"] = e.ruin_fraction;
    r["mean_ruin_time"] = e.mean_ruin_time;
    r["paths"] = e.paths;
    r["dt"] = spec.dt;
    write_output(cfg, "mc", {r}, out);
    return kExitOk;
}

int cmd_hedge(const RunConfig& cfg, std::ostream& out) {
    if (cfg.product != "rcla") throw DomainError("product: hedge supports rcla only");
    const double rebalance = parse_number(cfg.rebalance, "rebalance");
    if (!(rebalance > 0.0) || !std::isfinite(rebalance)) throw DomainError("rebalance: must be a positive interval");
    // The simulation step must divide the rebalance interval.
    const long substeps = std::max(1L, std::lround(std::ceil(rebalance / cfg.dt - 1e-9)));
    RunConfig fine = cfg;
    fine.dt = rebalance / static_cast<double>(substeps);
    const PathSpec spec = path_spec(fine, kHedgeDefaultPaths);

    const RclaPrice priced = price_rcla(cfg.market, cfg.mortality, default_rcla_grid(cfg.mortality, cfg.grid_scale), true);
    const HedgeStudy study = simulate_hedge_study(cfg.market, cfg.mortality, priced, cfg.contracts, rebalance, spec);
    if (!cfg.ledger_out.empty()) {
        const HedgeLedger ledger = simulate_hedge(cfg.market, cfg.mortality, priced, cfg.contracts, rebalance, spec, 0);
        const std::filesystem::path path = resolve_output_path(cfg.ledger_out);
        std::ofstream file(path);
        if (!file) throw DomainError("ledger: cannot open '" + path.string() + "'");
        write_ledger_csv(ledger, file);
    }
    Record r;
    r["product"] = cfg.product;
    r["rebalance_dt"] = rebalance;
    r["dt"] = spec.dt;
    r["paths"] = study.paths;
    r["contracts"] = cfg.contracts;
    r["pde_price"] = priced.value;
    r["initial_cost_per_contract"] = study.initial_cost;
    r["rms_error"] = study.rms_error;
    r["mean_error"] = study.mean_error;
    r["std_error"] = study.std_error;
    write_output(cfg, "hedge", {r}, out);
    return kExitOk;
}

int cmd_table(const RunConfig& cfg, std::ostream& out) {
    if (cfg.table_id.empty()) throw DomainError("id: required");
    const auto& ids = tables::table_ids();
    if (std::find(ids.begin(), ids.end(), cfg.table_id) == ids.end()) {
        throw DomainError("id: unknown table '" + cfg.table_id + "'");
    }
    const std::filesystem::path data_dir =
        cfg.data_dir.empty() ? tables::default_data_dir() : std::filesystem::path(cfg.data_dir);
    const tables::Report report = tables::reproduce(cfg.table_id, data_dir, cfg.grid_scale);

    RunConfig target = cfg;
    if (target.out.empty()) target.out = "table_" + cfg.table_id + (cfg.format == "json" ? ".json" : ".csv");
    const std::filesystem::path path = resolve_output_path(target.out);
    std::ofstream file(path);
    if (!file) throw DomainError("out: cannot open '" + path.string() + "'");
    io::CsvTable csv = report.to_csv();
    if (cfg.format == "json") {
        std::vector<Record> records;
        for (const auto& row : csv.rows) {
            Record r;
            for (std::size_t k = 0; k < csv.header.size(); ++k) r[csv.header[k]] = row[k];
            records.push_back(std::move(r));
        }
        emit(cfg, "table", records, file);
    } else {
        csv.comments = {"rcla " RCLA_VERSION, "command: table", "seed: " + std::to_string(cfg.seed),
                        "config: " + cfg.to_json().dump()};
        io::write_csv(file, csv);
    }
    out << "table " << report.id << ": " << report.cells.size() << " cells, " << report.breaches()
        << " outside tolerance, " << report.seconds << " s -> " << path.string() << '\n';
    return report.all_within() ? kExitOk : kExitTolerance;
}

std::vector<std::string> without_config(const std::vector<std::string>& args, std::string& config_path) {
    std::vector<std::string> kept;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config") {
            if (i + 1 >= args.size()) throw DomainError("config: missing file name");
            config_path = args[++i];
        } else if (args[i].rfind("--config=", 0) == 0) {
            config_path = args[i].substr(9);
        } else {
            kept.push_back(args[i]);
        }
    }
    return kept;
}

}  // namespace

double parse_number(const std::string& text, const std::string& field) {
    try {
        if (const auto slash = text.find('/'); slash != std::string::npos) {
            const double num = io::parse_double(text.substr(0, slash));
            const double den = io::parse_double(text.substr(slash + 1));
            if (den == 0.0) throw DomainError("zero denominator");
            return num / den;
        }
        return io::parse_double(text);
    } catch (const std::exception&) {
        throw DomainError(field + ": cannot parse '" + text + "' as a number");
    }
}

std::string resolve_output_path(const std::string& path) {
    const std::filesystem::path p(path);
    const char* dir = std::getenv("RCLA_OUTPUT_DIR");
    if (p.is_relative() && dir && *dir) return (std::filesystem::path(dir) / p).string();
    return path;
}

void apply_config(const nlohmann::json& j, RunConfig& cfg) {
    if (!j.is_object()) throw DomainError("config: expected a JSON object");
    for (const auto& [key, v] : j.items()) {
        if (key == "product") cfg.product = json_string(v, key);
        else if (key == "age") cfg.mortality.x = json_number(v, key);
        else if (key == "lambda") cfg.mortality.lambda = json_number(v, key);
        else if (key == "modal_age") cfg.mortality.m = json_number(v, key);
        else if (key == "dispersion") cfg.mortality.b = json_number(v, key);
        else if (key == "max_age") cfg.mortality.max_age = json_number(v, key);
        else if (key == "mu") cfg.mu = json_number(v, key);
        else if (key == "sigma") cfg.market.sigma = json_number(v, key);
        else if (key == "rho") cfg.market.rho = json_number(v, key);
        else if (key == "gamma") cfg.market.gamma = json_number(v, key);
        else if (key == "I0") cfg.market.I0 = json_number(v, key);
        else if (key == "tau") cfg.market.tau = json_number(v, key);
        else if (key == "beta") cfg.market.beta = json_number(v, key);
        else if (key == "delta") cfg.market.delta = json_number(v, key);
        else if (key == "deposit") cfg.deposit = json_number(v, key);
        else if (key == "grid_scale") cfg.grid_scale = json_number(v, key);
        else if (key == "mc_check") cfg.mc_check = json_bool(v, key);
        else if (key == "paths") cfg.paths = json_count(v, key);
        else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(json_count(v, key));
        else if (key == "dt") cfg.dt = json_number(v, key);
        else if (key == "workers") cfg.workers = static_cast<int>(json_count(v, key));
        else if (key == "antithetic") cfg.antithetic = json_bool(v, key);
        else if (key == "scheme") cfg.scheme = json_string(v, key);
        else if (key == "horizon") cfg.horizon = json_number(v, key);
        else if (key == "contracts") cfg.contracts = json_number(v, key);
        else if (key == "rebalance") cfg.rebalance = v.is_string() ? v.get<std::string>() : number_text(json_number(v, key));
        else if (key == "out") cfg.out = json_string(v, key);
        else if (key == "format") cfg.format = json_string(v, key);
        else if (key == "surface_out") cfg.surface_out = json_string(v, key);
        else if (key == "ledger_out") cfg.ledger_out = json_string(v, key);
        else if (key == "id") cfg.table_id = json_string(v, key);
        else if (key == "data_dir") cfg.data_dir = json_string(v, key);
        else throw DomainError("config: unknown key '" + key + "'");
    }
}

void RunConfig::resolve() {
    check_choice(product, {"spia", "alda", "rcla", "frcla", "srcla", "glwb"}, "product");
    check_choice(format, {"csv", "json"}, "format");
    check_choice(scheme, {"euler", "log-euler"}, "scheme");
    market.mu = mu.value_or(market.rho + market.delta);
    mortality.validate();
    market.validate();
    if (!(deposit > 0.0) || !std::isfinite(deposit)) throw DomainError("deposit: must be > 0");
    if (!(grid_scale > 0.0) || !std::isfinite(grid_scale)) throw DomainError("grid_scale: must be > 0");
    if (!(contracts > 0.0) || !std::isfinite(contracts)) throw DomainError("contracts: must be > 0");
    if (workers < 1) throw DomainError("workers: must be >= 1");
}

nlohmann::json RunConfig::to_json() const {
    nlohmann::ordered_json j;
    j["product"] = product;
    j["age"] = mortality.x;
    j["lambda"] = mortality.lambda;
    j["modal_age"] = number_or_text(mortality.m);
    j["dispersion"] = mortality.b;
    j["max_age"] = mortality.max_age;
    j["mu"] = market.mu;
    j["sigma"] = market.sigma;
    j["rho"] = market.rho;
    j["gamma"] = number_or_text(market.gamma);
    j["I0"] = market.I0;
    j["tau"] = market.tau;
    j["beta"] = market.beta;
    j["delta"] = market.delta;
    j["deposit"] = deposit;
    j["grid_scale"] = grid_scale;
    j["mc_check"] = mc_check;
    if (paths) j["paths"] = *paths;
    j["seed"] = seed;
    j["dt"] = dt;
    j["workers"] = workers;
    j["antithetic"] = antithetic;
    j["scheme"] = scheme;
    j["horizon"] = horizon;
    j["contracts"] = contracts;
    j["rebalance"] = rebalance;
    j["format"] = format;
    if (!table_id.empty()) j["id"] = table_id;
    return nlohmann::json(j);
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Ruin-contingent annuity pricing"};
    app.set_version_flag("--version", RCLA_VERSION);
    app.require_subcommand(1);
    std::map<std::string, std::string> values;
    std::map<std::string, bool> flags;
    const std::vector<std::pair<const char*, const char*>> commands{
        {"price", "price one contract"},
        {"table", "reproduce a reference table"},
        {"mc", "Monte Carlo estimate"},
        {"hedge", "discrete delta-hedging study"},
    };
    for (const auto& [name, help] : commands) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--config", "JSON file of settings; flags override it");
        for (const FieldSpec& f : value_fields()) {
            sub->add_option_function<std::string>(
                f.flag, [&values, key = std::string(f.key)](const std::string& v) { values[key] = v; }, f.help);
        }
        for (const FieldSpec& f : flag_fields()) {
            sub->add_flag_callback(f.flag, [&flags, key = std::string(f.key)] { flags[key] = true; }, f.help);
        }
    }

    try {
        std::string config_path;
        std::vector<std::string> rest = without_config(args, config_path);
        std::reverse(rest.begin(), rest.end());
        app.parse(rest);

        nlohmann::json merged = nlohmann::json::object();
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) throw DomainError("config: cannot open '" + config_path + "'");
            merged = nlohmann::json::parse(in);
            if (!merged.is_object()) throw DomainError("config: expected a JSON object");
        }
        for (const auto& [key, v] : values) merged[key] = v;
        for (const auto& [key, v] : flags) merged[key] = v;

        RunConfig cfg;
        apply_config(merged, cfg);
        cfg.resolve();

        const std::string command = app.get_subcommands().front()->get_name();
        if (command == "price") return cmd_price(cfg, out);
        if (command == "table") return cmd_table(cfg, out);
        if (command == "mc") return cmd_mc(cfg, out);
        return cmd_hedge(cfg, out);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::CallForVersion&) {
        out << RCLA_VERSION << '\n';
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const nlohmann::json::exception& e) {
        err << "error: config: " << e.what() << '\n';
        return kExitConfig;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const RangeError& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const SolverError& e) {
        err << "solver error: " << e.what() << '\n';
        return kExitSolver;
    } catch (const ConvergenceError& e) {
        err << "solver error: " << e.what() << '\n';
        return kExitSolver;
    }
}

}  // namespace rcla::cli
