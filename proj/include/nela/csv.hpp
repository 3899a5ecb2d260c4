#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace nela::csv {

/// Reads a header-less numeric CSV into a dense matrix. Every row must have
/// the same number of fields. Throws LoadError naming the offending line.
Eigen::MatrixXd read_matrix(const std::filesystem::path& path);

/// Writes a matrix with full round-trip precision (17 significant digits).
void write_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& m);

/// Reads one integer per line (blank lines ignored).
std::vector<int> read_int_column(const std::filesystem::path& path);

void write_int_column(const std::filesystem::path& path, const std::vector<int>& values);

/// Formats a double the same way on every run (shortest round-trip form).
std::string format_double(double v);

std::vector<std::string> split(const std::string& line, char sep);

}  // namespace nela::csv
