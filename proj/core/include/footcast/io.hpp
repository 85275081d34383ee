#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace footcast::io {

// Shortest decimal representation that round-trips to the same double.
std::string format_double(double value);

// Parses a full token as a double; throws LoadError mentioning `field`.
double parse_double(std::string_view token, std::string_view field);

std::vector<std::string_view> split(std::string_view line, char sep);

std::string join(std::span<const double> values, char sep = ',');

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

// Minimal CSV table: header row plus numeric rows.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::size_t column(std::string_view name) const;
};

CsvTable read_csv(const std::filesystem::path& path);

}  // namespace footcast::io
