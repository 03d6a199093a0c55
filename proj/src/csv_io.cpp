#include "rcla/csv_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "rcla/errors.hpp"

namespace rcla::io {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

}  // namespace

std::size_t CsvTable::column(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw DomainError("csv: no column named '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
}

const std::string& CsvTable::text(std::size_t row, const std::string& name) const {
    const std::size_t c = column(name);
    if (row >= rows.size() || c >= rows[row].size()) throw RangeError("csv: cell out of range");
    return rows[row][c];
}

double CsvTable::number(std::size_t row, const std::string& name) const { return parse_double(text(row, name)); }

std::string format_double(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return "nan";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
    const std::string t = trim(s);
    if (t == "inf" || t == "+inf" || t == "infinity" || t == "Inf") return HUGE_VAL;
    if (t == "-inf") return -HUGE_VAL;
    double v = 0.0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (res.ec != std::errc() || res.ptr != t.data() + t.size()) {
        throw DomainError("csv: not a number: '" + s + "'");
    }
    return v;
}

CsvTable read_csv(std::istream& in) {
    CsvTable table;
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::string body = line.substr(1);
            if (!body.empty() && body[0] == ' ') body.erase(0, 1);
            table.comments.push_back(body);
            continue;
        }
        if (!have_header) {
            table.header = split(line);
            have_header = true;
        } else {
            table.rows.push_back(split(line));
        }
    }
    if (!have_header) throw DomainError("csv: missing header row");
    return table;
}

CsvTable read_csv_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DomainError("csv: cannot open " + path.string());
    return read_csv(in);
}

void write_csv(std::ostream& out, const CsvTable& table) {
    for (const auto& c : table.comments) out << "# " << c << '\n';
    auto emit = [&out](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out << ',';
            out << cells[i];
        }
        out << '\n';
    };
    emit(table.header);
    for (const auto& row : table.rows) emit(row);
}

void write_csv_file(const std::filesystem::path& path, const CsvTable& table) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw DomainError("csv: cannot write " + path.string());
    write_csv(out, table);
}

}  // namespace rcla::io
