#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace rcla::io {

/// Comma-separated table with `#` comment lines ahead of the header.
struct CsvTable {
    std::vector<std::string> comments;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(const std::string& name) const;
    double number(std::size_t row, const std::string& name) const;
    const std::string& text(std::size_t row, const std::string& name) const;
};

/// 17 significant digits; infinities as `inf`/`-inf`.
std::string format_double(double v);
/// Accepts anything format_double writes, plus `infinity`.
double parse_double(const std::string& s);

CsvTable read_csv(std::istream& in);
CsvTable read_csv_file(const std::filesystem::path& path);
void write_csv(std::ostream& out, const CsvTable& table);
void write_csv_file(const std::filesystem::path& path, const CsvTable& table);

}  // namespace rcla::io
