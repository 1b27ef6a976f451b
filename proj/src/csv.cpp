#include "fvnn/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "fvnn/error.hpp"

namespace fvnn::csv {

std::size_t Table::column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return i;
    fail(ErrorCode::schema, "missing column '" + std::string(name) + "'");
}

std::vector<std::string> split_record(std::string_view line, char delimiter) {
    std::vector<std::string> fields;
    std::string current;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    current.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                current.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == delimiter) {
            fields.push_back(std::move(current));
            current.clear();
        } else if (c != '\r') {
            current.push_back(c);
        }
    }
    fields.push_back(std::move(current));
    return fields;
}

Table read(const std::filesystem::path& path, char delimiter, const std::vector<std::string>& header) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::io, "cannot open '" + path.string() + "'");
    Table table;
    std::string line;
    if (!header.empty()) {
        table.header = header;
    } else {
        if (!std::getline(in, line)) fail(ErrorCode::schema, "'" + path.string() + "' has no header row");
        table.header = split_record(line, delimiter);
    }
    for (auto& name : table.header) {
        auto first = name.find_first_not_of(" \t");
        auto last = name.find_last_not_of(" \t");
        name = first == std::string::npos ? std::string() : name.substr(first, last - first + 1);
    }
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split_record(line, delimiter);
        if (fields.size() != table.header.size())
            fail(ErrorCode::parse, "row " + std::to_string(table.rows.size() + 1) + " of '" + path.string() +
                                       "' has " + std::to_string(fields.size()) + " fields, expected " +
                                       std::to_string(table.header.size()));
        table.rows.push_back(std::move(fields));
    }
    return table;
}

std::string format(double value) {
    if (std::isnan(value)) return "nan";
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    (void)ec;
    return std::string(buf, end);
}

std::string join(const std::vector<std::string>& fields, char delimiter) {
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out.push_back(delimiter);
        out += fields[i];
    }
    return out;
}

void write_text(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::io, "cannot write '" + path.string() + "'");
    out << content;
}

void write_matrix(const std::filesystem::path& path, const Matrix& m) {
    std::ostringstream out;
    for (Index i = 0; i < m.rows(); ++i) {
        for (Index j = 0; j < m.cols(); ++j) {
            if (j) out << ',';
            out << format(m(i, j));
        }
        out << '\n';
    }
    write_text(path, out.str());
}

Matrix read_matrix(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::io, "cannot open '" + path.string() + "'");
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        for (const auto& field : split_record(line, ',')) {
            double v = 0;
            auto [p, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
            if (ec != std::errc() || p != field.data() + field.size())
                fail(ErrorCode::parse, "non-numeric entry '" + field + "' at row " + std::to_string(rows.size() + 1));
            row.push_back(v);
        }
        if (!rows.empty() && row.size() != rows.front().size())
            fail(ErrorCode::parse, "ragged matrix row " + std::to_string(rows.size() + 1));
        rows.push_back(std::move(row));
    }
    Matrix m(static_cast<Index>(rows.size()), rows.empty() ? 0 : static_cast<Index>(rows.front().size()));
    for (Index i = 0; i < m.rows(); ++i)
        for (Index j = 0; j < m.cols(); ++j) m(i, j) = rows[i][j];
    return m;
}

}  // namespace fvnn::csv
