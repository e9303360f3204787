#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include "eomech/meanfield.hpp"
#include "eomech/sweep.hpp"

namespace eom {

using Cell = std::variant<double, std::int64_t, bool, std::string>;

enum class TableFormat { csv, json };

TableFormat parse_table_format(const std::string& s);

/// Streams rows with a fixed header as CSV (17 significant digits, '.' decimal)
/// or as a JSON array of objects with the same keys and values.
class TableWriter {
 public:
  TableWriter(std::ostream& out, TableFormat format, std::vector<std::string> columns);
  TableWriter(const TableWriter&) = delete;
  TableWriter& operator=(const TableWriter&) = delete;
  ~TableWriter();

  void row(const std::vector<Cell>& cells);
  /// Write the JSON closing bracket; called by the destructor if needed.
  void finish();
  std::size_t rows() const { return rows_; }

 private:
  std::ostream& out_;
  TableFormat format_;
  std::vector<std::string> columns_;
  std::size_t rows_ = 0;
  bool finished_ = false;
};

/// Shortest-safe textual form of a double: 17 significant digits, "nan"/"inf" for non-finite.
std::string format_double(double v);

std::vector<std::string> record_columns(const std::vector<Axis>& axes);
std::vector<Cell> record_cells(const ObservableRecord& r);

std::vector<std::string> full_series_columns();
std::vector<Cell> full_series_cells(const TimeSample& s);

}  // namespace eom
