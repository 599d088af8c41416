#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace edgeprice {

/// Shortest decimal that round-trips to the same double ('.' decimal point,
/// locale independent).
std::string format_number(double v);
std::string format_optional(const std::optional<double>& v);

/// Comma-separated file with a header row; cells are written unquoted.
class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);

    void row(const std::vector<std::string>& cells);
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
    std::ofstream out_;
    std::size_t columns_;
};

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Throws std::runtime_error if the column is missing.
    std::size_t column(std::string_view name) const;
    double number(std::size_t row, std::string_view name) const;
    std::optional<double> optional_number(std::size_t row, std::string_view name) const;
    const std::string& text(std::size_t row, std::string_view name) const;

    static CsvTable read(const std::filesystem::path& path);
};

double parse_number(std::string_view text);

}  // namespace edgeprice
