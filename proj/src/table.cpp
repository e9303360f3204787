#include "eomech/table.hpp"

#include <cmath>
#include <cstdio>

#include "eomech/error.hpp"
#include "json.hpp"

namespace eom {

TableFormat parse_table_format(const std::string& s) {
  if (s == "csv") return TableFormat::csv;
  if (s == "json") return TableFormat::json;
  throw Error(ErrorKind::argument, "format must be csv or json, got '" + s + "'");
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

std::string csv_cell(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) return format_double(*d);
  if (const auto* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
  if (const auto* b = std::get_if<bool>(&c)) return *b ? "1" : "0";
  return csv_field(std::get<std::string>(c));
}

std::string json_cell(const Cell& c) {
  // Doubles use the same 17-digit text as CSV so both formats carry identical values.
  if (const auto* d = std::get_if<double>(&c)) return std::isfinite(*d) ? format_double(*d) : "null";
  if (const auto* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
  if (const auto* b = std::get_if<bool>(&c)) return *b ? "true" : "false";
  return nlohmann::json(std::get<std::string>(c)).dump();
}

}  // namespace

TableWriter::TableWriter(std::ostream& out, TableFormat format, std::vector<std::string> columns)
    : out_(out), format_(format), columns_(std::move(columns)) {
  if (format_ == TableFormat::csv) {
    for (std::size_t i = 0; i < columns_.size(); ++i) out_ << (i ? "," : "") << csv_field(columns_[i]);
    out_ << '\n';
  } else {
    out_ << "[";
  }
}

TableWriter::~TableWriter() {
  try {
    finish();
  } catch (...) {
  }
}

void TableWriter::row(const std::vector<Cell>& cells) {
  if (finished_) throw Error(ErrorKind::argument, "table already finished");
  if (cells.size() != columns_.size()) throw Error(ErrorKind::argument, "row width does not match header");
  if (format_ == TableFormat::csv) {
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << csv_cell(cells[i]);
    out_ << '\n';
  } else {
    out_ << (rows_ ? ",\n  {" : "\n  {");
    for (std::size_t i = 0; i < cells.size(); ++i)
      out_ << (i ? ", " : "") << nlohmann::json(columns_[i]).dump() << ": " << json_cell(cells[i]);
    out_ << "}";
  }
  ++rows_;
}

void TableWriter::finish() {
  if (finished_) return;
  finished_ = true;
  if (format_ == TableFormat::json) out_ << (rows_ ? "\n]\n" : "]\n");
  out_.flush();
}

std::vector<std::string> record_columns(const std::vector<Axis>& axes) {
  std::vector<std::string> cols;
  for (const Axis& a : axes) cols.push_back(to_string(a.param));
  for (const char* c : {"branch", "branch_count", "stable", "rh_stable", "abscissa", "Q_ss", "I", "Iw",
                        "delta_c", "delta_w", "omega_m_tilde", "EN_ow", "EN_om", "EN_mw", "n_eff",
                        "var_Q", "var_P", "S_Q", "S_P", "physicality", "error"})
    cols.emplace_back(c);
  return cols;
}

std::vector<Cell> record_cells(const ObservableRecord& r) {
  std::vector<Cell> cells(r.coords.begin(), r.coords.end());
  cells.insert(cells.end(), {std::int64_t{r.branch}, std::int64_t{r.branch_count}, r.stable, r.rh_stable,
                             r.abscissa, r.Q, r.I, r.Iw, r.delta_c, r.delta_w, r.omega_m_tilde,
                             r.obs.en_ow, r.obs.en_om, r.obs.en_mw, r.obs.n_eff, r.obs.var_q,
                             r.obs.var_p, r.obs.s_q, r.obs.s_p, r.obs.physicality, r.error});
  return cells;
}

std::vector<std::string> full_series_columns() {
  return {"t", "re_a", "im_a", "abs_a2", "Q", "P", "Q2", "P2", "PQQP", "re_aw", "im_aw"};
}

std::vector<Cell> full_series_cells(const TimeSample& s) {
  const MeanFieldState& m = s.state;
  return {s.t, m.a.real(), m.a.imag(), std::norm(m.a), m.Q, m.P, m.Q2, m.P2, m.PQQP, m.aw.real(),
          m.aw.imag()};
}

}  // namespace eom
