#include "dedem/config/field_table.hpp"

#include <charconv>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace dedem::config {

int FieldTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return static_cast<int>(i);
  }
  return -1;
}

void FieldTable::validate() const {
  if (values.rows() != static_cast<Eigen::Index>(points.size()) ||
      values.cols() != static_cast<Eigen::Index>(names.size())) {
    throw Error("config_io", "field table shape does not match its header");
  }
  std::set<std::string> seen{"x1", "x2"};
  for (const auto& n : names) {
    if (n.empty() || n.find_first_of(",\n\r") != std::string::npos) {
      throw Error("config_io", "invalid field column name '" + n + "'");
    }
    if (!seen.insert(n).second) throw Error("config_io", "duplicate field column '" + n + "'");
  }
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!points[i].allFinite()) {
      throw Error("config_io", "non-finite coordinate in row " + std::to_string(i + 1));
    }
  }
}

void write_field(const FieldTable& table, std::ostream& out) {
  table.validate();
  if (!table.values.allFinite()) throw Error("config_io", "refusing to export a field containing NaN/Inf");
  out << "x1,x2";
  for (const auto& n : table.names) out << ',' << n;
  out << '\n';
  char buf[32];
  auto put = [&](double v) {
    const int len = std::snprintf(buf, sizeof buf, "%.17g", v);
    out.write(buf, len);
  };
  for (std::size_t i = 0; i < table.rows(); ++i) {
    put(table.points[i].x());
    out << ',';
    put(table.points[i].y());
    for (Eigen::Index c = 0; c < table.values.cols(); ++c) {
      out << ',';
      put(table.values(static_cast<Eigen::Index>(i), c));
    }
    out << '\n';
  }
}

void export_field(const FieldTable& table, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("config_io", "cannot write '" + path.string() + "'");
  write_field(table, out);
  if (!out) throw Error("config_io", "failed writing '" + path.string() + "'");
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  for (auto& s : out) {
    const auto b = s.find_first_not_of(" \t");
    const auto e = s.find_last_not_of(" \t");
    s = b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  }
  return out;
}

double parse_number(const std::string& s, std::size_t line) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw Error("config_io", "line " + std::to_string(line) + ": invalid number '" + s + "'");
  }
  return v;
}

}  // namespace

FieldTable read_field(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error("config_io", "field file is empty");
  const std::vector<std::string> header = split_csv(line);
  int ix = -1, iy = -1;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == "x1") ix = static_cast<int>(i);
    if (header[i] == "x2") iy = static_cast<int>(i);
  }
  if (ix < 0) throw Error("config_io", "field file lacks the x1 column");
  if (iy < 0) throw Error("config_io", "field file lacks the x2 column");
  FieldTable t;
  std::vector<int> value_cols;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (static_cast<int>(i) == ix || static_cast<int>(i) == iy) continue;
    t.names.push_back(header[i]);
    value_cols.push_back(static_cast<int>(i));
  }
  std::vector<std::vector<double>> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::vector<std::string> cells = split_csv(line);
    if (cells.size() != header.size()) {
      throw Error("config_io", "line " + std::to_string(lineno) + ": expected " +
                                  std::to_string(header.size()) + " columns, found " +
                                  std::to_string(cells.size()));
    }
    t.points.emplace_back(parse_number(cells[static_cast<std::size_t>(ix)], lineno),
                          parse_number(cells[static_cast<std::size_t>(iy)], lineno));
    std::vector<double> r;
    for (int c : value_cols) r.push_back(parse_number(cells[static_cast<std::size_t>(c)], lineno));
    rows.push_back(std::move(r));
  }
  t.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(t.names.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t c = 0; c < rows[i].size(); ++c) {
      t.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = rows[i][c];
    }
  }
  t.validate();
  return t;
}

FieldTable load_reference_field(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("config_io", "cannot open '" + path.string() + "'");
  return read_field(in);
}

}  // namespace dedem::config
