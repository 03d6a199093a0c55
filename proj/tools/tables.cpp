#include "tables.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <map>

#include "rcla/errors.hpp"
#include "rcla/glwb_pricing.hpp"
#include "rcla/mortality.hpp"
#include "rcla/rcla_pricing.hpp"

#ifndef RCLA_DATA_DIR
#define RCLA_DATA_DIR "data"
#endif

namespace rcla::tables {

namespace {

constexpr double kTable1Abs = 5e-4;
constexpr double kTable2Rel = 0.01;
constexpr double kTable2Abs = 5e-3;
constexpr double kRatchetRel = 0.02;
constexpr double kRatchetAbs = 1e-2;
constexpr double kPremiumPoints = 2.0;

MortalityParams mortality_at(double age) {
    MortalityParams m;
    m.x = age;
    return m;
}

io::CsvTable load(const std::filesystem::path& dir, const std::string& id) {
    return io::read_csv_file(dir / ("table" + id + ".csv"));
}

Report table1(const std::filesystem::path& dir) {
    const io::CsvTable data = load(dir, "1");
    Report r{"1", {"age", "tau", "rho"}, {}, 0.0};
    for (std::size_t i = 0; i < data.rows.size(); ++i) {
        const double age = data.number(i, "age");
        const double tau = data.number(i, "tau");
        const double rho = data.number(i, "rho");
        const double ref = data.number(i, "value");
        const double v = alda_factor(tau, rho, mortality_at(age)).value;
        r.cells.push_back({{data.text(i, "age"), data.text(i, "tau"), data.text(i, "rho")}, "alda", ref, v, kTable1Abs});
    }
    return r;
}

Report table2(const std::filesystem::path& dir, const std::string& id, double scale) {
    const io::CsvTable data = load(dir, id);
    Report r{id, {"age", "gamma", "rho", "sigma"}, {}, 0.0};
    // One normalized solve per (age, rho, sigma) serves every withdrawal rate.
    std::map<std::tuple<double, double, double>, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < data.rows.size(); ++i) {
        groups[{data.number(i, "age"), data.number(i, "rho"), data.number(i, "sigma")}].push_back(i);
    }
    std::vector<double> computed(data.rows.size());
    for (const auto& [key, rows] : groups) {
        const auto [age, rho, sigma] = key;
        MarketParams mkt;
        mkt.mu = rho;
        mkt.rho = rho;
        mkt.sigma = sigma;
        std::vector<double> gammas;
        for (std::size_t i : rows) gammas.push_back(data.number(i, "gamma"));
        const MortalityParams mort = mortality_at(age);
        const std::vector<double> prices = price_rcla_many(mkt, mort, gammas, default_rcla_grid(mort, scale));
        for (std::size_t k = 0; k < rows.size(); ++k) computed[rows[k]] = prices[k];
    }
    for (std::size_t i = 0; i < data.rows.size(); ++i) {
        const double ref = data.number(i, "value");
        r.cells.push_back({{data.text(i, "age"), data.text(i, "gamma"), data.text(i, "rho"), data.text(i, "sigma")},
                           "rcla", ref, computed[i], mixed_tolerance(ref, kTable2Rel, kTable2Abs)});
    }
    return r;
}

Report table3(const std::filesystem::path& dir, double scale) {
    const io::CsvTable data = load(dir, "3");
    Report r{"3", {"age", "gamma", "rho", "sigma"}, {}, 0.0};
    for (std::size_t i = 0; i < data.rows.size(); ++i) {
        MarketParams mkt;
        mkt.rho = mkt.mu = data.number(i, "rho");
        mkt.sigma = data.number(i, "sigma");
        mkt.gamma = data.number(i, "gamma");
        const MortalityParams mort = mortality_at(data.number(i, "age"));
        const double v = price_srcla(mkt, mort, default_moneyness_grid(mort, scale)).unit_value;
        const double ref = data.number(i, "value");
        r.cells.push_back({{data.text(i, "age"), data.text(i, "gamma"), data.text(i, "rho"), data.text(i, "sigma")},
                           "srcla", ref, v, mixed_tolerance(ref, kRatchetRel, kRatchetAbs)});
    }
    return r;
}

Report table4(const std::filesystem::path& dir, double scale) {
    const io::CsvTable data = load(dir, "4");
    Report r{"4", {"age", "sigma"}, {}, 0.0};
    for (std::size_t i = 0; i < data.rows.size(); ++i) {
        MarketParams mkt;
        mkt.rho = mkt.mu = 0.05;
        mkt.gamma = 0.05;
        mkt.sigma = data.number(i, "sigma");
        const MortalityParams mort = mortality_at(data.number(i, "age"));
        const double basic = price_rcla(mkt, mort, default_rcla_grid(mort, scale)).value;
        const double super_value = price_srcla(mkt, mort, default_moneyness_grid(mort, scale)).unit_value;
        const double premium = 100.0 * (super_value / basic - 1.0);
        const std::vector<std::string> labels{data.text(i, "age"), data.text(i, "sigma")};
        const double ref_basic = data.number(i, "rcla");
        const double ref_super = data.number(i, "srcla");
        r.cells.push_back({labels, "rcla", ref_basic, basic, mixed_tolerance(ref_basic, kRatchetRel, kRatchetAbs)});
        r.cells.push_back({labels, "srcla", ref_super, super_value, mixed_tolerance(ref_super, kRatchetRel, kRatchetAbs)});
        r.cells.push_back({labels, "super_premium", data.number(i, "super_premium"), premium, kPremiumPoints});
    }
    return r;
}

Report table5(const std::filesystem::path& dir, const std::string& id, double scale) {
    const io::CsvTable data = load(dir, id);
    Report r{id, {"age", "tau", "rho", "sigma"}, {}, 0.0};
    for (std::size_t i = 0; i < data.rows.size(); ++i) {
        MarketParams mkt;
        mkt.rho = mkt.mu = data.number(i, "rho");
        mkt.sigma = data.number(i, "sigma");
        mkt.gamma = data.number(i, "gamma");
        mkt.beta = data.number(i, "beta");
        mkt.tau = data.number(i, "tau");
        const MortalityParams mort = mortality_at(data.number(i, "age"));
        const double v = price_glwb(data.number(i, "deposit"), mkt, mort, default_moneyness_grid(mort, scale)).dollar_value;
        const double ref = data.number(i, "value");
        r.cells.push_back({{data.text(i, "age"), data.text(i, "tau"), data.text(i, "rho"), data.text(i, "sigma")},
                           "glwb", ref, v, mixed_tolerance(ref, kRatchetRel, kRatchetAbs)});
    }
    return r;
}

}  // namespace

double mixed_tolerance(double reference, double rel, double abs) { return std::max(rel * std::abs(reference), abs); }

double Cell::abs_diff() const { return std::abs(computed - reference); }

double Cell::rel_diff() const {
    return reference != 0.0 ? abs_diff() / std::abs(reference) : (computed == 0.0 ? 0.0 : HUGE_VAL);
}

bool Cell::within() const {
    if (std::isinf(reference) || std::isinf(computed)) return reference == computed;
    return abs_diff() <= tolerance;
}

bool Report::all_within() const { return breaches() == 0; }

std::size_t Report::breaches() const {
    return static_cast<std::size_t>(std::count_if(cells.begin(), cells.end(), [](const Cell& c) { return !c.within(); }));
}

io::CsvTable Report::to_csv() const {
    io::CsvTable t;
    t.header = label_names;
    for (const char* name : {"quantity", "paper_value", "computed", "abs_diff", "rel_diff", "tolerance", "within"}) {
        t.header.emplace_back(name);
    }
    for (const Cell& c : cells) {
        std::vector<std::string> row = c.labels;
        row.push_back(c.quantity);
        row.push_back(io::format_double(c.reference));
        row.push_back(io::format_double(c.computed));
        row.push_back(io::format_double(c.abs_diff()));
        row.push_back(io::format_double(c.rel_diff()));
        row.push_back(io::format_double(c.tolerance));
        row.push_back(c.within() ? "1" : "0");
        t.rows.push_back(std::move(row));
    }
    return t;
}

const std::vector<std::string>& table_ids() {
    static const std::vector<std::string> ids{"1", "2a", "2b", "3", "4", "5a", "5b"};
    return ids;
}

std::filesystem::path default_data_dir() {
    if (const char* env = std::getenv("RCLA_DATA_DIR"); env && *env) return env;
    return RCLA_DATA_DIR;
}

Report reproduce(const std::string& id, const std::filesystem::path& data_dir, double grid_scale) {
    if (!(grid_scale > 0.0)) throw DomainError("table: grid scale must be > 0");
    const auto start = std::chrono::steady_clock::now();
    Report r;
    if (id == "1") r = table1(data_dir);
    else if (id == "2a" || id == "2b") r = table2(data_dir, id, grid_scale);
    else if (id == "3") r = table3(data_dir, grid_scale);
    else if (id == "4") r = table4(data_dir, grid_scale);
    else if (id == "5a" || id == "5b") r = table5(data_dir, id, grid_scale);
    else throw DomainError("table: unknown id '" + id + "'");
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
}

}  // namespace rcla::tables
