#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "chern/barriers.hpp"
#include "chern/diagnostics.hpp"
#include "chern/monotone.hpp"

namespace chern {

/// Shortest decimal that round-trips: 17 significant digits.
inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v + 0.0);  // no "-0"
  return buf;
}

struct NamedColumn {
  std::string name;
  DiscreteField values;
};

/// Field CSV:
///   # kind,n,h,R
///   # radial,2,0.01,0.9
///   i,r,value[,extra...]      (tensor grids: i,j,x,y,value[,extra...])
/// Only active nodes are written.
inline void write_field(std::ostream& os, const DiscreteField& f, const std::vector<NamedColumn>& extra = {}) {
  const Grid& g = f.grid();
  os << "# kind,n,h,R\n# " << to_string(g.kind()) << ',' << g.dimension() << ',' << fmt(g.spacing()) << ','
     << fmt(g.radius()) << '\n';
  os << (g.kind() == GridKind::radial ? "i,r,value" : "i,j,x,y,value");
  for (const auto& c : extra) os << ',' << c.name;
  os << '\n';
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!g.active(i)) continue;
    if (g.kind() == GridKind::radial) {
      os << i << ',' << fmt(g.position(i).x);
    } else {
      const auto [a, b] = g.coordinates(i);
      const Point p = g.position(i);
      os << a << ',' << b << ',' << fmt(p.x) << ',' << fmt(p.y);
    }
    os << ',' << fmt(f[i]);
    for (const auto& c : extra) os << ',' << fmt(c.values[i]);
    os << '\n';
  }
}

namespace detail {

inline std::vector<std::string> split(const std::string& line, char sep = ',') {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, sep)) out.push_back(cell);
  return out;
}

inline double parse_double(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ConfigurationError("not a number: '" + s + "'");
  }
  if (used != s.size()) throw ConfigurationError("not a number: '" + s + "'");
  return v;
}

}  // namespace detail

inline DiscreteField read_field(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "# kind,n,h,R") throw ConfigurationError("field CSV: missing metadata header");
  if (!std::getline(is, line) || line.rfind("# ", 0) != 0) throw ConfigurationError("field CSV: missing metadata row");
  const auto meta = detail::split(line.substr(2));
  if (meta.size() != 4) throw ConfigurationError("field CSV: metadata row needs kind,n,h,R");
  const GridKind kind = grid_kind_from_string(meta[0]);
  const int n = static_cast<int>(detail::parse_double(meta[1]));
  const double h = detail::parse_double(meta[2]);
  const double R = detail::parse_double(meta[3]);
  const Grid g = kind == GridKind::radial ? Grid::radial(n, h, R) : Grid::tensor2d(h, R);
  if (!std::getline(is, line)) throw ConfigurationError("field CSV: missing column header");
  const std::size_t value_col = kind == GridKind::radial ? 2 : 4;
  DiscreteField f(g);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto cells = detail::split(line);
    if (cells.size() <= value_col) throw ConfigurationError("field CSV: short row '" + line + "'");
    const double idx = detail::parse_double(cells[0]);
    std::size_t node = 0;
    if (kind == GridKind::radial) {
      node = static_cast<std::size_t>(idx);
    } else {
      node = g.index(static_cast<std::size_t>(idx), static_cast<std::size_t>(detail::parse_double(cells[1])));
    }
    if (node >= g.size()) throw ConfigurationError("field CSV: node index out of range");
    f[node] = detail::parse_double(cells[value_col]);
  }
  return f;
}

inline void write_trace(std::ostream& os, const IterationTrace& t) {
  os << "level,iter,sup_delta,min_increment,residual\n";
  for (const auto& r : t.iterations) {
    os << r.level << ',' << r.iter << ',' << fmt(r.sup_delta) << ',' << fmt(r.min_increment) << ','
       << fmt(r.residual) << '\n';
  }
}

/// One report row: kind, min_margin, n_violations and a `name=value;...` list.
struct ReportRow {
  std::string kind;
  double min_margin = 0.0;
  std::size_t n_violations = 0;
  std::vector<std::pair<std::string, double>> params;
};

inline ReportRow report_row(const BarrierReport& r) {
  auto params = r.params;
  params.emplace_back("scale", r.scale);
  return {r.kind, r.min_margin, r.violations.size(), std::move(params)};
}

inline void write_report(std::ostream& os, const std::vector<ReportRow>& rows) {
  os << "kind,min_margin,n_violations,params\n";
  for (const auto& r : rows) {
    os << r.kind << ',' << fmt(r.min_margin) << ',' << r.n_violations << ',';
    for (std::size_t k = 0; k < r.params.size(); ++k) {
      os << (k ? ";" : "") << r.params[k].first << '=' << fmt(r.params[k].second);
    }
    os << '\n';
  }
}

inline void write_divergence(std::ostream& os, const DivergenceTrace& t) {
  os << "R,u_at_0,decrement\n";
  for (const auto& r : t.rows) os << fmt(r.R) << ',' << fmt(r.u_at_0) << ',' << fmt(r.decrement) << '\n';
}

struct Series {
  std::string label;
  std::vector<double> x, y;
};

/// Radial profile of a field: (r, value) at active nodes, sorted by r.
inline Series radial_series(const DiscreteField& f, std::string label) {
  const Grid& g = f.grid();
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g.active(i)) pts.emplace_back(g.radius_at(i), f[i]);
  }
  std::sort(pts.begin(), pts.end());
  Series s{std::move(label), {}, {}};
  for (const auto& [r, v] : pts) {
    s.x.push_back(r);
    s.y.push_back(v);
  }
  return s;
}

/// Bare SVG 1.1 line plot; one polyline per series.
inline void write_svg(std::ostream& os, const std::string& title, const std::vector<Series>& series) {
  const double W = 640, H = 400, m = 40;
  double x0 = HUGE_VAL, x1 = -HUGE_VAL, y0 = HUGE_VAL, y1 = -HUGE_VAL;
  for (const auto& s : series) {
    for (std::size_t k = 0; k < s.x.size(); ++k) {
      if (!std::isfinite(s.x[k]) || !std::isfinite(s.y[k])) continue;
      x0 = std::min(x0, s.x[k]);
      x1 = std::max(x1, s.x[k]);
      y0 = std::min(y0, s.y[k]);
      y1 = std::max(y1, s.y[k]);
    }
  }
  if (!(x1 > x0)) x1 = x0 + 1.0;
  if (!(y1 > y0)) y1 = y0 + 1.0;
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << W << "\" height=\"" << H << "\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
     << "<text x=\"" << m << "\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\">" << title << "</text>\n"
     << "<rect x=\"" << m << "\" y=\"" << m << "\" width=\"" << W - 2 * m << "\" height=\"" << H - 2 * m
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (std::size_t s = 0; s < series.size(); ++s) {
    os << "<polyline fill=\"none\" stroke=\"" << colors[s % 6] << "\" points=\"";
    for (std::size_t k = 0; k < series[s].x.size(); ++k) {
      if (!std::isfinite(series[s].x[k]) || !std::isfinite(series[s].y[k])) continue;
      const double px = m + (series[s].x[k] - x0) / (x1 - x0) * (W - 2 * m);
      const double py = H - m - (series[s].y[k] - y0) / (y1 - y0) * (H - 2 * m);
      os << px << ',' << py << ' ';
    }
    os << "\"/>\n";
    os << "<text x=\"" << W - m - 120 << "\" y=\"" << m + 16 * (s + 1) << "\" font-family=\"sans-serif\" font-size=\"12\" fill=\""
       << colors[s % 6] << "\">" << series[s].label << "</text>\n";
  }
  os << "<text x=\"" << m << "\" y=\"" << H - 10 << "\" font-size=\"11\" font-family=\"sans-serif\">x: " << fmt(x0)
     << " .. " << fmt(x1) << "   y: " << fmt(y0) << " .. " << fmt(y1) << "</text>\n</svg>\n";
}

}  // namespace chern
