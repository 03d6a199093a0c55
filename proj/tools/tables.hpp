#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "rcla/csv_io.hpp"

namespace rcla::tables {

/// One reproduced cell: the layout labels plus the comparison.
struct Cell {
    std::vector<std::string> labels;
    std::string quantity;
    double reference = 0.0;
    double computed = 0.0;
    double tolerance = 0.0;

    double abs_diff() const;
    double rel_diff() const;
    bool within() const;
};

struct Report {
    std::string id;
    std::vector<std::string> label_names;
    std::vector<Cell> cells;
    double seconds = 0.0;

    bool all_within() const;
    std::size_t breaches() const;
    io::CsvTable to_csv() const;
};

const std::vector<std::string>& table_ids();

/// Directory holding the reference CSVs: RCLA_DATA_DIR from the environment,
/// else the compiled-in default.
std::filesystem::path default_data_dir();

/// Reprices every reference cell of a table. `grid_scale` multiplies the
/// default space and time steps.
Report reproduce(const std::string& id, const std::filesystem::path& data_dir, double grid_scale = 1.0);

/// max(rel·|reference|, abs)
double mixed_tolerance(double reference, double rel, double abs);

}  // namespace rcla::tables
