#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace uwbloc {

using Cell = std::variant<double, std::int64_t, std::string>;

/// Column-named rows plus run metadata, written as CSV with "# key: value" preamble lines.
struct ResultTable
{
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  std::vector<std::pair<std::string, std::string>> metadata;

  /// Throws std::invalid_argument when the row width differs from the column count.
  void add_row(std::vector<Cell> row);
  void set_meta(const std::string& key, const std::string& value);
  void set_meta(const std::string& key, double value);
  /// Value of a metadata key, or "" when absent.
  std::string meta(const std::string& key) const;

  std::size_t column_index(const std::string& name) const;
  /// Numeric column as doubles; throws for a string column.
  std::vector<double> column(const std::string& name) const;

  /// Header row then one line per row. Doubles use 10 significant digits.
  std::string csv_body() const;
  /// Metadata preamble followed by csv_body().
  std::string to_csv() const;
  void write(const std::string& path) const;
};

/// Formats a double with 10 significant digits (shortest of fixed and exponent form).
std::string format_number(double v);

/// The body of a CSV file produced by to_csv(), i.e. everything after the metadata lines.
std::string strip_metadata(const std::string& csv);

/// Median of a copy of `v`; NaN for an empty input.
double median_of(std::vector<double> v);
/// Linear-interpolated quantile q in [0, 1]; NaN for an empty input.
double quantile_of(std::vector<double> v, double q);

}  // namespace uwbloc
