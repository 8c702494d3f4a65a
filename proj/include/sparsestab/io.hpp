#pragma once

#include <string>

#include "sparsestab/numerics.hpp"

namespace sparsestab::io {

// CSV: comma separated, one matrix row per line, 17 significant digits so the
// decimal text round-trips bit-exactly.
std::string matrix_to_csv(const Mat& m);
std::string vector_to_csv(const Vec& v);
Mat matrix_from_csv(const std::string& text);
Vec vector_from_csv(const std::string& text);

// JSON: nested arrays.
std::string matrix_to_json(const Mat& m);
std::string vector_to_json(const Vec& v);
Mat matrix_from_json(const std::string& text);
Vec vector_from_json(const std::string& text);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

/// 17-significant-digit decimal rendering (exact double round trip).
std::string fmt_double(double x);

}  // namespace sparsestab::io
