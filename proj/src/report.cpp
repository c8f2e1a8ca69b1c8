#include "noisyq/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "noisyq/qcore.hpp"

namespace noisyq {

namespace {

std::uint64_t splitmix(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double parse_cell(const std::string& cell, const std::string& column) {
  double v = 0.0;
  const auto* end = cell.data() + cell.size();
  const auto res = std::from_chars(cell.data(), end, v);
  if (cell.empty() || res.ec != std::errc() || res.ptr != end || !std::isfinite(v))
    throw Error("column '" + column + "' has non-numeric value '" + cell + "'");
  return v;
}

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index) {
  std::uint64_t s = base;
  const auto a = splitmix(s);
  s = a ^ stream;
  const auto b = splitmix(s);
  s = b ^ index;
  return splitmix(s);
}

std::size_t Table::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw Error("table has no column '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

void Table::add(std::vector<std::string> row) {
  if (row.size() != header.size()) throw Error("row width does not match the header");
  rows.push_back(std::move(row));
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string to_csv(const Table& table, const std::string& comment) {
  std::ostringstream out;
  out << "# " << comment << '\n';
  for (std::size_t i = 0; i < table.header.size(); ++i) out << (i ? "," : "") << table.header[i];
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << '\n';
  }
  return out.str();
}

void write_csv(const Table& table, const std::string& comment, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path.string());
  f << to_csv(table, comment);
}

std::string render_svg(const Table& table, const std::string& x_column, const std::vector<std::string>& y_columns,
                       const std::string& title) {
  if (table.rows.empty()) throw Error("cannot plot an empty table");
  if (y_columns.empty()) throw Error("no y columns to plot");
  const auto xi = table.column(x_column);
  std::vector<double> xs;
  for (const auto& r : table.rows) xs.push_back(parse_cell(r[xi], x_column));
  std::vector<std::vector<double>> ys;
  for (const auto& c : y_columns) {
    const auto ci = table.column(c);
    std::vector<double> col;
    for (const auto& r : table.rows) col.push_back(parse_cell(r[ci], c));
    ys.push_back(std::move(col));
  }

  double xmin = *std::min_element(xs.begin(), xs.end()), xmax = *std::max_element(xs.begin(), xs.end());
  double ymin = std::numeric_limits<double>::infinity(), ymax = -ymin;
  for (const auto& c : ys) {
    ymin = std::min(ymin, *std::min_element(c.begin(), c.end()));
    ymax = std::max(ymax, *std::max_element(c.begin(), c.end()));
  }
  if (xmax == xmin) xmax = xmin + 1.0;
  if (ymax == ymin) ymax = ymin + 1.0;

  const double w = 640, h = 400, left = 70, right = 20, top = 40, bottom = 50;
  auto px = [&](double x) { return left + (x - xmin) / (xmax - xmin) * (w - left - right); };
  auto py = [&](double y) { return h - bottom - (y - ymin) / (ymax - ymin) * (h - top - bottom); };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\" viewBox=\"0 0 " << w
    << ' ' << h << "\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!title.empty())
    s << "<text x=\"" << w / 2 << "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">"
      << escape_xml(title) << "</text>\n";
  s << "<line x1=\"" << left << "\" y1=\"" << h - bottom << "\" x2=\"" << w - right << "\" y2=\"" << h - bottom
    << "\" stroke=\"black\"/>\n";
  s << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << h - bottom
    << "\" stroke=\"black\"/>\n";
  s << "<text x=\"" << (left + w - right) / 2 << "\" y=\"" << h - 12
    << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << escape_xml(x_column) << "</text>\n";
  for (double v : {xmin, xmax})
    s << "<text x=\"" << fixed(px(v)) << "\" y=\"" << h - bottom + 16
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">" << format_number(v) << "</text>\n";
  for (double v : {ymin, ymax})
    s << "<text x=\"" << left - 6 << "\" y=\"" << fixed(py(v)) + "\""
      << " text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" << format_number(v) << "</text>\n";

  for (std::size_t k = 0; k < ys.size(); ++k) {
    const char* color = colors[k % 6];
    s << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < xs.size(); ++i) s << (i ? " " : "") << fixed(px(xs[i])) << ',' << fixed(py(ys[k][i]));
    s << "\"/>\n";
    const double ly = top + 14.0 * static_cast<double>(k);
    s << "<line x1=\"" << w - right - 130 << "\" y1=\"" << ly << "\" x2=\"" << w - right - 110 << "\" y2=\"" << ly
      << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    s << "<text x=\"" << w - right - 104 << "\" y=\"" << ly + 4
      << "\" font-family=\"sans-serif\" font-size=\"11\">" << escape_xml(y_columns[k]) << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

void emit_plot(const Table& table, const std::string& x_column, const std::vector<std::string>& y_columns,
               const std::filesystem::path& path, const std::string& title) {
  const auto svg = render_svg(table, x_column, y_columns, title);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path.string());
  f << svg;
}

}  // namespace noisyq
