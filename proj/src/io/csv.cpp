#include "spinsense/io/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "spinsense/constants.hpp"
#include "spinsense/error.hpp"

namespace spinsense::io {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::IoError, "cannot write " + path);
  return out;
}

}  // namespace

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t k = 0; k < header.size(); ++k)
    if (header[k] == name) return k;
  fail(ErrorCode::ParseError, "missing CSV column '" + name + "'");
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_number(const std::string& text) {
  if (text == "inf") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const char* first = text.data();
  if (!text.empty() && text.front() == '+') ++first;
  const auto res = std::from_chars(first, text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size() || text.empty())
    fail(ErrorCode::ParseError, "not a number: '" + text + "'");
  return v;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot read " + path);
  CsvTable t;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split_line(line);
    if (t.header.empty()) {
      t.header = std::move(cells);
      continue;
    }
    if (cells.size() != t.header.size())
      fail(ErrorCode::ParseError, path + ":" + std::to_string(line_no) + ": expected " +
                                      std::to_string(t.header.size()) + " columns");
    t.rows.push_back(std::move(cells));
  }
  if (t.header.empty()) fail(ErrorCode::ParseError, path + ": missing header row");
  return t;
}

void write_csv(const std::string& path, const CsvTable& table) {
  auto out = open_out(path);
  auto emit = [&](const std::vector<std::string>& cells) {
    for (std::size_t k = 0; k < cells.size(); ++k) out << (k ? "," : "") << cells[k];
    out << '\n';
  };
  emit(table.header);
  for (const auto& r : table.rows) emit(r);
  if (!out) fail(ErrorCode::IoError, "write failed for " + path);
}

void write_numeric_csv(const std::string& path, const std::vector<std::string>& header,
                       const std::vector<std::vector<double>>& rows) {
  CsvTable t{header, {}};
  for (const auto& r : rows) {
    std::vector<std::string> cells;
    for (double v : r) cells.push_back(format_number(v));
    t.rows.push_back(std::move(cells));
  }
  write_csv(path, t);
}

void write_grid_csv(const std::string& path, const ComplexGrid2D& grid) {
  grid.validate();
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < grid.rows(); ++i)
    for (std::size_t j = 0; j < grid.cols(); ++j)
      rows.push_back({rad_to_hz(grid.spec.omega_s_values[i]), rad_to_hz(grid.spec.omega_d_values[j]),
                      grid.at(i, j).real(), grid.at(i, j).imag()});
  write_numeric_csv(path, {"omega_s_hz", "omega_d_hz", "re", "im"}, rows);
}

ComplexGrid2D read_grid_csv(const std::string& path, double drive_power) {
  const CsvTable t = read_csv(path);
  const std::size_t cs = t.column("omega_s_hz"), cd = t.column("omega_d_hz");
  const std::size_t cr = t.column("re"), ci = t.column("im");
  ComplexGrid2D g;
  g.spec.drive_power = drive_power;
  std::vector<double> s_hz, d_hz;
  for (const auto& r : t.rows) {
    const double s = parse_number(r[cs]);
    const double d = parse_number(r[cd]);
    if (s_hz.empty() || s != s_hz.back()) s_hz.push_back(s);
    if (s_hz.size() == 1) d_hz.push_back(d);
    const std::size_t j = (g.values.size()) % std::max<std::size_t>(d_hz.size(), 1);
    if (s_hz.size() > 1 && d != d_hz[j])
      fail(ErrorCode::ParseError, path + ": grid is not row-major over a shared omega_d axis");
    g.values.emplace_back(parse_number(r[cr]), parse_number(r[ci]));
  }
  for (double s : s_hz) g.spec.omega_s_values.push_back(hz_to_rad(s));
  for (double d : d_hz) g.spec.omega_d_values.push_back(hz_to_rad(d));
  if (g.values.size() != s_hz.size() * d_hz.size())
    fail(ErrorCode::ParseError, path + ": incomplete grid");
  g.validate();
  return g;
}

void write_noise_csv(const std::string& path, const NoiseSpectrum& spectrum) {
  spectrum.validate();
  CsvTable t{{"offset_hz", "value", "unit"}, {}};
  for (std::size_t k = 0; k < spectrum.offsets_hz.size(); ++k)
    t.rows.push_back({format_number(spectrum.offsets_hz[k]), format_number(spectrum.density[k]),
                      unit_name(spectrum.unit)});
  write_csv(path, t);
}

NoiseSpectrum read_noise_csv(const std::string& path) {
  const CsvTable t = read_csv(path);
  const std::size_t co = t.column("offset_hz"), cv = t.column("value"), cu = t.column("unit");
  NoiseSpectrum s;
  for (std::size_t k = 0; k < t.rows.size(); ++k) {
    const SpectrumUnit u = parse_unit(t.rows[k][cu]);
    if (k == 0) s.unit = u;
    if (u != s.unit) fail(ErrorCode::UnitMismatch, path + ": mixed units in one spectrum");
    s.offsets_hz.push_back(parse_number(t.rows[k][co]));
    s.density.push_back(parse_number(t.rows[k][cv]));
  }
  s.validate();
  return s;
}

std::vector<std::pair<double, double>> read_calibration_csv(const std::string& path) {
  const CsvTable t = read_csv(path);
  const std::size_t ci = t.column("current_a"), cf = t.column("field_t");
  std::vector<std::pair<double, double>> pts;
  for (const auto& r : t.rows) pts.emplace_back(parse_number(r[ci]), parse_number(r[cf]));
  return pts;
}

void write_sweep_csv(const std::string& path, const SweepTrace& trace, const std::string& axis_name) {
  std::vector<std::vector<double>> rows;
  for (std::size_t k = 0; k < trace.axis.size(); ++k)
    rows.push_back({trace.axis[k], trace.absorptive[k], trace.dispersive[k]});
  write_numeric_csv(path, {axis_name, "absorptive_v", "dispersive_v"}, rows);
}

void write_spectrum_csv(const std::string& path, const Spectrum& spectrum) {
  std::vector<std::vector<double>> rows;
  for (std::size_t k = 0; k < spectrum.freq_hz.size(); ++k)
    rows.push_back({spectrum.freq_hz[k], spectrum.asd[k]});
  write_numeric_csv(path, {"freq_hz", "asd_v_per_rthz"}, rows);
}

}  // namespace spinsense::io
