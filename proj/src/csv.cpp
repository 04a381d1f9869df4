#include "mcrkit/csv.hpp"

#include "mcrkit/error.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

namespace mcr {

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string format_matrix_csv(const Matrix& m, const std::vector<std::string>& header) {
    std::string out;
    if (!header.empty()) {
        for (size_t j = 0; j < header.size(); ++j) {
            if (j) out += ',';
            out += header[j];
        }
        out += '\n';
    }
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) out += ',';
            out += format_double(m(i, j));
        }
        out += '\n';
    }
    return out;
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> out;
    size_t pos = 0;
    while (true) {
        const size_t c = line.find(',', pos);
        out.push_back(trim(line.substr(pos, c == std::string_view::npos ? std::string_view::npos : c - pos)));
        if (c == std::string_view::npos) break;
        pos = c + 1;
    }
    return out;
}

}  // namespace

CsvMatrix parse_matrix_csv(std::string_view text, bool has_header, const std::string& source) {
    CsvMatrix res;
    std::vector<std::vector<double>> rows;
    size_t line_no = 0;
    bool header_pending = has_header;
    size_t pos = 0;
    while (pos <= text.size()) {
        size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        std::string_view line = trim(text.substr(pos, nl - pos));
        pos = nl + 1;
        ++line_no;
        if (line.empty()) {
            if (nl >= text.size()) break;
            continue;
        }
        auto fields = split_commas(line);
        if (header_pending) {
            for (auto f : fields) res.header.emplace_back(f);
            header_pending = false;
            continue;
        }
        std::vector<double> row;
        row.reserve(fields.size());
        for (size_t j = 0; j < fields.size(); ++j) {
            std::string_view f = fields[j];
            if (!f.empty() && f.front() == '+') f.remove_prefix(1);
            double v = 0.0;
            auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
            if (f.empty() || ec != std::errc() || ptr != f.data() + f.size())
                throw InputError(source + ":" + std::to_string(line_no) + ": field " + std::to_string(j + 1) +
                                 " is not a number: '" + std::string(fields[j]) + "'");
            row.push_back(v);
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw InputError(source + ":" + std::to_string(line_no) + ": expected " +
                             std::to_string(rows.front().size()) + " fields, got " + std::to_string(row.size()));
        rows.push_back(std::move(row));
        if (nl >= text.size()) break;
    }
    if (rows.empty()) throw InputError(source + ": no data rows");
    res.data.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
    for (size_t i = 0; i < rows.size(); ++i)
        for (size_t j = 0; j < rows[i].size(); ++j) res.data(i, j) = rows[i][j];
    if (!res.header.empty() && res.header.size() != rows.front().size())
        throw InputError(source + ": header has " + std::to_string(res.header.size()) + " fields, data has " +
                         std::to_string(rows.front().size()));
    require_finite(res.data, source);
    return res;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

CsvMatrix read_matrix_csv(const std::filesystem::path& path, bool has_header) {
    return parse_matrix_csv(read_text_file(path), has_header, path.string());
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw InputError("cannot write " + tmp.string());
        out << content;
        out.flush();
        if (!out) throw InputError("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

void write_matrix_csv(const std::filesystem::path& path, const Matrix& m, const std::vector<std::string>& header) {
    write_file_atomic(path, format_matrix_csv(m, header));
}

}  // namespace mcr
