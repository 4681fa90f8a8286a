#pragma once

#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace qfuel::cli {

using KeyValues = std::vector<std::pair<std::string, std::string>>;

// 12 significant digits; "inf"/"-inf"/"nan" for non-finite values; -0 prints as 0.
std::string format_number(double v);

// Numeric table written as CSV under a '#'-prefixed metadata header.
class CsvTable {
  public:
    explicit CsvTable(std::vector<std::string> columns);

    void add_row(std::vector<double> row);
    // Comment line emitted after the data rows.
    void add_footer(std::string line);

    const std::vector<std::string>& columns() const { return columns_; }
    const std::vector<std::vector<double>>& rows() const { return rows_; }

    void write(std::ostream& os, const KeyValues& header) const;

  private:
    std::vector<std::string> columns_;
    std::vector<std::vector<double>> rows_;
    std::vector<std::string> footer_;
};

}  // namespace qfuel::cli
