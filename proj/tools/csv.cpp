#include "csv.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <vector>

#include "longmem/error.hpp"

namespace longmem::cli {

namespace {

bool parse_field(const std::string& field, double& out) {
    const char* begin = field.c_str();
    char* end = nullptr;
    errno = 0;
    out = std::strtod(begin, &end);
    if (end == begin || errno == ERANGE) return false;
    while (*end == ' ' || *end == '\t' || *end == '\r') ++end;
    return *end == '\0';
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

} // namespace

TimeSeries read_matrix_csv(std::istream& in) {
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t line_no = 0;
    bool first_content_line = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_fields(line);
        std::vector<double> row;
        row.reserve(fields.size());
        bool numeric = true;
        for (const auto& f : fields) {
            double v = 0.0;
            if (!parse_field(f, v)) {
                numeric = false;
                break;
            }
            row.push_back(v);
        }
        if (!numeric) {
            if (first_content_line) { // header row
                first_content_line = false;
                continue;
            }
            throw validation_error("non-numeric value at line " + std::to_string(line_no));
        }
        first_content_line = false;
        if (!rows.empty() && row.size() != rows.front().size())
            throw validation_error("ragged row at line " + std::to_string(line_no));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw validation_error("input contains no numeric rows");

    Eigen::MatrixXd values(static_cast<Eigen::Index>(rows.size()),
                           static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t t = 0; t < rows.size(); ++t)
        for (std::size_t c = 0; c < rows[t].size(); ++c)
            values(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(c)) = rows[t][c];
    TimeSeries x(std::move(values));
    validate(x);
    return x;
}

TimeSeries read_matrix_csv(const std::string& path) {
    if (path == "-") return read_matrix_csv(std::cin);
    std::ifstream file(path);
    if (!file) throw validation_error("cannot open input file: " + path);
    return read_matrix_csv(file);
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_matrix_csv(std::ostream& out, const TimeSeries& x) {
    for (Eigen::Index c = 0; c < x.dims(); ++c)
        out << (c == 0 ? "x" : ",x") << (c + 1);
    out << '\n';
    for (Eigen::Index t = 0; t < x.length(); ++t) {
        for (Eigen::Index c = 0; c < x.dims(); ++c) {
            if (c > 0) out << ',';
            out << format_double(x.values(t, c));
        }
        out << '\n';
    }
}

} // namespace longmem::cli
