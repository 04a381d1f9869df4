#pragma once

#include "mcrkit/matcore.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace mcr {

struct CsvMatrix {
    Matrix data;
    std::vector<std::string> header;
};

// Shortest form that round-trips: 17 significant digits.
std::string format_double(double x);

std::string format_matrix_csv(const Matrix& m, const std::vector<std::string>& header = {});
CsvMatrix parse_matrix_csv(std::string_view text, bool has_header, const std::string& source = "<memory>");

CsvMatrix read_matrix_csv(const std::filesystem::path& path, bool has_header);
void write_matrix_csv(const std::filesystem::path& path, const Matrix& m,
                      const std::vector<std::string>& header = {});

std::string read_text_file(const std::filesystem::path& path);
// Writes to a sibling temp file and renames it over the target.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace mcr
