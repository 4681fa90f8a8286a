#include "qfuel/csv.hpp"

#include <cmath>
#include <cstdio>

#include "qfuel/errors.hpp"

namespace qfuel::cli {

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (v == 0.0) v = 0.0;  // drop the sign of -0
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    std::string s(buf);
    return s == "-0" ? "0" : s;
}

CsvTable::CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

void CsvTable::add_row(std::vector<double> row) {
    if (row.size() != columns_.size()) {
        throw DimensionError("csv row has " + std::to_string(row.size()) + " fields, expected " +
                             std::to_string(columns_.size()));
    }
    rows_.push_back(std::move(row));
}

void CsvTable::add_footer(std::string line) { footer_.push_back(std::move(line)); }

void CsvTable::write(std::ostream& os, const KeyValues& header) const {
    for (const auto& [key, value] : header) os << "# " << key << '=' << value << '\n';
    for (std::size_t c = 0; c < columns_.size(); ++c) os << (c ? "," : "") << columns_[c];
    os << '\n';
    for (const auto& row : rows_) {
        for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << format_number(row[c]);
        os << '\n';
    }
    for (const auto& line : footer_) os << "# " << line << '\n';
}

}  // namespace qfuel::cli
