#pragma once

#include "dedem/common.hpp"

#include <Eigen/Core>

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace dedem::config {

/// Point samples (x1, x2 in m) with named value columns.
struct FieldTable {
  std::vector<std::string> names;
  std::vector<Vec2> points;
  Eigen::MatrixXd values;  // rows = points, cols = names

  std::size_t rows() const { return points.size(); }
  /// Column index of `name`, or -1.
  int column(std::string_view name) const;
  /// Throws on inconsistent shapes, duplicate names or non-finite coordinates.
  void validate() const;
};

/// CSV with header `x1,x2,<names...>` and 17 significant digits. Refuses
/// tables containing NaN or infinite entries.
void write_field(const FieldTable& table, std::ostream& out);
void export_field(const FieldTable& table, const std::filesystem::path& path);

FieldTable read_field(std::istream& in);
FieldTable load_reference_field(const std::filesystem::path& path);

}  // namespace dedem::config
