#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "nmfvar/matrix.hpp"
#include "nmfvar/preprocessing.hpp"

namespace nmfvar::io {

/// Header row, then one row per record: a label cell followed by numbers.
/// Lines starting with '#' before the header are kept as comments.
struct CsvTable {
    std::vector<std::string> comments;
    std::vector<std::string> header;      // includes the label column's name
    std::vector<std::string> row_labels;
    Matrix values;                        // rows x (header.size() - 1)
};

CsvTable parse_csv(std::string_view text, const std::string& source = "<memory>");
CsvTable read_csv(const std::filesystem::path& path);
std::string format_csv(const CsvTable& table);
void write_csv(const std::filesystem::path& path, const CsvTable& table);
void write_text(const std::filesystem::path& path, const std::string& text);

/// Shortest text that parses back to the same double.
std::string format_number(double v);

/// Rows are time points, columns are variables; the frame is stored P x T.
prep::TimeSeriesFrame frame_from_table(const CsvTable& table);
CsvTable table_from_frame(const prep::TimeSeriesFrame& frame, const std::string& time_header = "time");

} // namespace nmfvar::io
