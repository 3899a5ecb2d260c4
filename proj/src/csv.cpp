#include "nela/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "nela/errors.hpp"

namespace nela::csv {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_double(const std::string& field, const std::filesystem::path& path, int line,
                    int col) {
  const std::string t = trim(field);
  double value = 0.0;
  const auto* begin = t.data();
  const auto* end = t.data() + t.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (t.empty() || ec != std::errc() || ptr != end) {
    throw LoadError(path.string() + ": row " + std::to_string(line) + ", column " +
                    std::to_string(col) + ": not a number '" + t + "'");
  }
  return value;
}

}  // namespace

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

Eigen::MatrixXd read_matrix(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open " + path.string());

  std::vector<std::vector<double>> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto fields = split(trim(line), ',');
    std::vector<double> row;
    row.reserve(fields.size());
    for (std::size_t c = 0; c < fields.size(); ++c) {
      row.push_back(parse_double(fields[c], path, line_no, static_cast<int>(c)));
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw LoadError(path.string() + ": row " + std::to_string(line_no) + " has " +
                      std::to_string(row.size()) + " fields, expected " +
                      std::to_string(rows.front().size()));
    }
    rows.push_back(std::move(row));
    ++line_no;
  }
  if (rows.empty()) throw LoadError(path.string() + ": empty matrix");

  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(rows.front().size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = rows[i][j];
  return m;
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

void write_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& m) {
  std::ofstream out(path);
  if (!out) throw LoadError("cannot write " + path.string());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

std::vector<int> read_int_column(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open " + path.string());
  std::vector<int> values;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    ++line_no;
    if (t.empty()) continue;
    int v = 0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size()) {
      throw LoadError(path.string() + ": line " + std::to_string(line_no) +
                      ": not an integer '" + t + "'");
    }
    values.push_back(v);
  }
  return values;
}

void write_int_column(const std::filesystem::path& path, const std::vector<int>& values) {
  std::ofstream out(path);
  if (!out) throw LoadError("cannot write " + path.string());
  for (int v : values) out << v << '\n';
}

}  // namespace nela::csv
