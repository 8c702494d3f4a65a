#include "sparsestab/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace sparsestab::io {

std::string fmt_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string matrix_to_csv(const Mat& m) {
    std::string out;
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            if (j) out += ',';
            out += fmt_double(m(i, j));
        }
        out += '\n';
    }
    return out;
}

std::string vector_to_csv(const Vec& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        out += fmt_double(v[i]);
    }
    out += '\n';
    return out;
}

namespace {

std::vector<std::vector<double>> parse_rows(const std::string& text) {
    std::vector<std::vector<double>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::size_t pos = 0;
        while (pos <= line.size()) {
            std::size_t comma = line.find(',', pos);
            std::string cell = line.substr(pos, comma == std::string::npos ? std::string::npos
                                                                           : comma - pos);
            try {
                row.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw ParseError("csv: bad number '" + cell + "'");
            }
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

Mat matrix_from_csv(const std::string& text) {
    auto rows = parse_rows(text);
    if (rows.empty()) throw ParseError("csv: empty matrix");
    Mat m(rows.size(), rows[0].size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != rows[0].size()) throw ParseError("csv: ragged rows");
        for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
    }
    return m;
}

Vec vector_from_csv(const std::string& text) {
    auto rows = parse_rows(text);
    if (rows.size() != 1) throw ParseError("csv: expected a single line");
    return Vec(rows[0]);
}

std::string matrix_to_json(const Mat& m) {
    nlohmann::json j = nlohmann::json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (std::size_t k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
        j.push_back(row);
    }
    return j.dump();
}

std::string vector_to_json(const Vec& v) {
    nlohmann::json j = v.raw();
    return j.dump();
}

Mat matrix_from_json(const std::string& text) {
    auto j = nlohmann::json::parse(text);
    if (!j.is_array() || j.empty()) throw ParseError("json: expected nested arrays");
    Mat m(j.size(), j[0].size());
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (j[i].size() != j[0].size()) throw ParseError("json: ragged rows");
        for (std::size_t k = 0; k < j[i].size(); ++k) m(i, k) = j[i][k].get<double>();
    }
    return m;
}

Vec vector_from_json(const std::string& text) {
    auto j = nlohmann::json::parse(text);
    if (!j.is_array()) throw ParseError("json: expected an array");
    std::vector<double> v;
    for (const auto& x : j) v.push_back(x.get<double>());
    return Vec(std::move(v));
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write " + path);
    out << content;
}

}  // namespace sparsestab::io
