#include "nmfvar/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "nmfvar/error.hpp"

namespace nmfvar::io {

namespace {

struct Record {
    std::size_t line = 0;
    std::vector<std::string> cells;
};

// RFC 4180 style: quoted fields may contain separators, quotes ("") and newlines.
std::vector<Record> tokenize(std::string_view text, const std::string& source, std::vector<std::string>& comments) {
    std::vector<Record> out;
    std::size_t i = 0, line = 1;
    bool seen_data = false;
    while (i < text.size()) {
        if (!seen_data && text[i] == '#') {
            const auto end = text.find('\n', i);
            std::string c(text.substr(i, end == std::string_view::npos ? std::string_view::npos : end - i));
            if (!c.empty() && c.back() == '\r') c.pop_back();
            comments.push_back(std::move(c));
            i = end == std::string_view::npos ? text.size() : end + 1;
            ++line;
            continue;
        }
        Record rec;
        rec.line = line;
        std::string cell;
        bool quoted = false, done = false;
        while (!done) {
            if (i >= text.size()) {
                if (quoted) throw InputError(source + ":" + std::to_string(rec.line) + ": unterminated quoted field");
                done = true;
                break;
            }
            const char ch = text[i++];
            if (quoted) {
                if (ch == '"') {
                    if (i < text.size() && text[i] == '"') {
                        cell += '"';
                        ++i;
                    } else {
                        quoted = false;
                    }
                } else {
                    if (ch == '\n') ++line;
                    cell += ch;
                }
            } else if (ch == '"' && cell.empty()) {
                quoted = true;
            } else if (ch == ',') {
                rec.cells.push_back(std::move(cell));
                cell.clear();
            } else if (ch == '\n' || ch == '\r') {
                if (ch == '\r' && i < text.size() && text[i] == '\n') ++i;
                ++line;
                done = true;
            } else {
                cell += ch;
            }
        }
        rec.cells.push_back(std::move(cell));
        const bool blank = rec.cells.size() == 1 && rec.cells[0].empty();
        if (!blank) {
            out.push_back(std::move(rec));
            seen_data = true;
        }
    }
    return out;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

bool needs_quotes(const std::string& s) {
    return s.find_first_of(",\"\r\n") != std::string::npos || (!s.empty() && (s.front() == ' ' || s.back() == ' ')) ||
           (!s.empty() && s.front() == '#');
}

std::string quote(const std::string& s) {
    if (!needs_quotes(s)) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

} // namespace

CsvTable parse_csv(std::string_view text, const std::string& source) {
    CsvTable table;
    const auto records = tokenize(text, source, table.comments);
    if (records.empty()) throw InputError(source + ": no header row");
    table.header = records.front().cells;
    const std::size_t width = table.header.size();
    if (width < 2) throw InputError(source + ": header needs a label column and at least one value column");
    const std::size_t rows = records.size() - 1;
    std::vector<double> values;
    values.reserve(rows * (width - 1));
    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& rec = records[r];
        const std::string where = source + ":" + std::to_string(rec.line);
        if (rec.cells.size() != width) {
            throw InputError(where + ": row has " + std::to_string(rec.cells.size()) + " cells, expected " +
                             std::to_string(width));
        }
        table.row_labels.push_back(rec.cells[0]);
        for (std::size_t c = 1; c < width; ++c) {
            const std::string cell = trim(rec.cells[c]);
            if (cell.empty()) throw InputError(where + ": missing value in column '" + table.header[c] + "'");
            double v = 0.0;
            const char* first = cell.data();
            if (*first == '+') ++first;
            auto [p, ec] = std::from_chars(first, cell.data() + cell.size(), v);
            if (ec != std::errc{} || p != cell.data() + cell.size()) {
                throw InputError(where + ": column '" + table.header[c] + "': cannot parse '" + cell + "' as a number");
            }
            values.push_back(v);
        }
    }
    table.values = Matrix(rows, width - 1, std::move(values));
    return table;
}

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open input file '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_csv(ss.str(), path.string());
}

std::string format_number(double v) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc{}) throw std::logic_error("format_number failed");
    return std::string(buf, p);
}

std::string format_csv(const CsvTable& t) {
    if (t.values.rows() != t.row_labels.size() || t.values.cols() + 1 != t.header.size()) {
        throw std::logic_error("format_csv: inconsistent table");
    }
    std::string out;
    for (const auto& c : t.comments) out += c + '\n';
    for (std::size_t c = 0; c < t.header.size(); ++c) {
        if (c) out += ',';
        out += quote(t.header[c]);
    }
    out += '\n';
    for (std::size_t r = 0; r < t.row_labels.size(); ++r) {
        out += quote(t.row_labels[r]);
        for (double v : t.values.row(r)) {
            out += ',';
            out += format_number(v);
        }
        out += '\n';
    }
    return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw InputError("failed writing '" + path.string() + "'");
}

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
    write_text(path, format_csv(table));
}

prep::TimeSeriesFrame frame_from_table(const CsvTable& t) {
    std::vector<std::string> names(t.header.begin() + 1, t.header.end());
    return prep::make_frame(std::move(names), t.row_labels, t.values.transpose());
}

CsvTable table_from_frame(const prep::TimeSeriesFrame& f, const std::string& time_header) {
    CsvTable t;
    t.header.push_back(time_header);
    t.header.insert(t.header.end(), f.variable_names.begin(), f.variable_names.end());
    t.row_labels = f.time_labels;
    t.values = f.values.transpose();
    return t;
}

} // namespace nmfvar::io
