#pragma once

// Minimal CSV for design files (x1,...,xd,y) and feature tables. Fields are
// comma separated; double quotes protect commas and are doubled inside.

#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "lkit/error.hpp"
#include "lkit/feature_vector.hpp"
#include "lkit/linalg.hpp"

namespace lkit {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

inline std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
    return out + "\"";
}

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> line_numbers;  // 1-based source line of each row

    long column(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return static_cast<long>(i);
        return -1;
    }
};

/// Blank lines are skipped.
inline CsvTable read_csv(std::istream& in) {
    CsvTable t;
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto fields = split_csv_line(line);
        for (auto& f : fields) {
            const auto b = f.find_first_not_of(' ');
            const auto e = f.find_last_not_of(' ');
            f = b == std::string::npos ? "" : f.substr(b, e - b + 1);
        }
        if (!have_header) {
            t.header = std::move(fields);
            have_header = true;
        } else {
            t.rows.push_back(std::move(fields));
            t.line_numbers.push_back(line_no);
        }
    }
    if (!have_header) throw ParseError("empty CSV input", 1);
    return t;
}

inline CsvTable read_csv_text(const std::string& text) {
    std::istringstream in(text);
    return read_csv(in);
}

struct Design {
    Matrix x;
    Vector y;
};

/// Header x1..xd,y in this order; every field a finite number.
inline Design read_design(std::istream& in) {
    const auto t = read_csv(in);
    const auto cols = t.header.size();
    if (cols < 2 || t.header.back() != "y") throw InvalidArgument("design CSV header must be x1,...,xd,y");
    for (std::size_t j = 0; j + 1 < cols; ++j)
        if (t.header[j] != "x" + std::to_string(j + 1))
            throw InvalidArgument("design CSV header must be x1,...,xd,y (column " + std::to_string(j + 1) + " is '" + t.header[j] + "')");
    Design d{Matrix(static_cast<Eigen::Index>(t.rows.size()), static_cast<Eigen::Index>(cols - 1)),
             Vector(static_cast<Eigen::Index>(t.rows.size()))};
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const auto& r = t.rows[i];
        if (r.size() != cols)
            throw InvalidArgument("design CSV line " + std::to_string(t.line_numbers[i]) + ": expected " + std::to_string(cols) + " fields");
        for (std::size_t j = 0; j < cols; ++j) {
            double v = 0.0;
            try {
                std::size_t used = 0;
                v = std::stod(r[j], &used);
                if (used != r[j].size()) throw std::invalid_argument(r[j]);
            } catch (const std::exception&) {
                throw InvalidArgument("design CSV line " + std::to_string(t.line_numbers[i]) + ": '" + r[j] + "' is not a number");
            }
            if (j + 1 < cols)
                d.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
            else
                d.y[static_cast<Eigen::Index>(i)] = v;
        }
    }
    return d;
}

inline Design read_design_text(const std::string& text) {
    std::istringstream in(text);
    return read_design(in);
}

inline void write_design(std::ostream& out, const Matrix& x, const Vector& y) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) out << "x" << j + 1 << ",";
    out << "y\n";
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        for (Eigen::Index j = 0; j < x.cols(); ++j) out << FeatureValue::real(x(i, j)).to_string() << ",";
        out << FeatureValue::real(y[i]).to_string() << "\n";
    }
}

/// Header line of a feature table: metadata columns followed by feature names.
inline void write_csv_row(std::ostream& out, const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) out << (i ? "," : "") << csv_escape(fields[i]);
    out << "\n";
}

} // namespace lkit
