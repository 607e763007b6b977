#pragma once

#include <json.hpp>

#include <string>
#include <vector>

namespace longrun {

/// Shortest "%.17g" text, which reads back to the same double.
std::string format_double(double x);

/// Writes to a temporary sibling and renames it over `path`.
void write_file_atomic(const std::string& path, const std::string& content);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void add_row(std::vector<std::string> row);
    std::string str() const;
};

std::string csv_cell(double x);
std::string csv_cell(long long x);
inline std::string csv_cell(int x) { return csv_cell(static_cast<long long>(x)); }
inline std::string csv_cell(bool x) { return x ? "1" : "0"; }
std::string csv_cell(const std::string& x);

/// Splits CSV text produced by CsvTable back into rows (header first).
std::vector<std::vector<std::string>> parse_csv(const std::string& text);

/// JSON value for a double; non-finite values become the strings "inf", "-inf", "nan".
nlohmann::json json_number(double x);

void write_json(const std::string& path, const nlohmann::json& doc);

/// Creates the directory and its parents.
void ensure_directory(const std::string& dir);

}  // namespace longrun
