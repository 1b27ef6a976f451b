#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "fvnn/types.hpp"

namespace fvnn::csv {

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Column position by name; throws schema error when absent.
    std::size_t column(std::string_view name) const;
};

/// Splits one record on `delimiter`, honouring double-quoted fields.
std::vector<std::string> split_record(std::string_view line, char delimiter);

/// With `header` given the file has no header row and every line is data.
Table read(const std::filesystem::path& path, char delimiter = ',', const std::vector<std::string>& header = {});

/// Shortest round-trippable decimal rendering of a double ("nan" for NaN).
std::string format(double value);

std::string join(const std::vector<std::string>& fields, char delimiter = ',');

void write_matrix(const std::filesystem::path& path, const Matrix& m);
Matrix read_matrix(const std::filesystem::path& path);

/// Writes `content` atomically enough for our purposes: truncate + write.
void write_text(const std::filesystem::path& path, const std::string& content);

}  // namespace fvnn::csv
