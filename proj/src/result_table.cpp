#include "uwbloc/result_table.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

namespace uwbloc {

std::string format_number(double v)
{
  return fmt::format("{:.10g}", v);
}

void ResultTable::add_row(std::vector<Cell> row)
{
  if (row.size() != columns.size()) {
    throw std::invalid_argument(fmt::format("row has {} cells for {} columns", row.size(), columns.size()));
  }
  rows.push_back(std::move(row));
}

void ResultTable::set_meta(const std::string& key, const std::string& value)
{
  for (auto& [k, v] : metadata) {
    if (k == key) {
      v = value;
      return;
    }
  }
  metadata.emplace_back(key, value);
}

void ResultTable::set_meta(const std::string& key, double value)
{
  set_meta(key, format_number(value));
}

std::string ResultTable::meta(const std::string& key) const
{
  for (const auto& [k, v] : metadata) {
    if (k == key) return v;
  }
  return {};
}

std::size_t ResultTable::column_index(const std::string& name) const
{
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw std::out_of_range("no column " + name);
  return static_cast<std::size_t>(it - columns.begin());
}

std::vector<double> ResultTable::column(const std::string& name) const
{
  const std::size_t c = column_index(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) {
    if (const auto* d = std::get_if<double>(&r[c])) out.push_back(*d);
    else if (const auto* i = std::get_if<std::int64_t>(&r[c])) out.push_back(static_cast<double>(*i));
    else throw std::invalid_argument("column " + name + " is not numeric");
  }
  return out;
}

std::string ResultTable::csv_body() const
{
  std::string out;
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (c) out += ',';
    out += columns[c];
  }
  out += '\n';
  for (const auto& r : rows) {
    for (std::size_t c = 0; c < r.size(); ++c) {
      if (c) out += ',';
      std::visit(
          [&out](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, double>) out += format_number(v);
            else if constexpr (std::is_same_v<T, std::int64_t>) out += std::to_string(v);
            else out += v;
          },
          r[c]);
    }
    out += '\n';
  }
  return out;
}

std::string ResultTable::to_csv() const
{
  std::string out;
  for (const auto& [k, v] : metadata) out += fmt::format("# {}: {}\n", k, v);
  return out + csv_body();
}

void ResultTable::write(const std::string& path) const
{
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << to_csv();
}

std::string strip_metadata(const std::string& csv)
{
  std::size_t pos = 0;
  while (pos < csv.size() && csv[pos] == '#') {
    const std::size_t nl = csv.find('\n', pos);
    if (nl == std::string::npos) return {};
    pos = nl + 1;
  }
  return csv.substr(pos);
}

double median_of(std::vector<double> v)
{
  return quantile_of(std::move(v), 0.5);
}

double quantile_of(std::vector<double> v, double q)
{
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const double pos = std::clamp(q, 0.0, 1.0) * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace uwbloc
