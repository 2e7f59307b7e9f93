#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "fracgraph/diagnostics.hpp"
#include "fracgraph/flow.hpp"
#include "fracgraph/graph.hpp"
#include "fracgraph/operators.hpp"

namespace fracgraph {

/// 17 significant digits, enough for a double to survive a text round trip.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

/// Columns t, u_1..u_n, min_u, max_u, mass, dirichlet_p_energy.
inline void write_trajectory_csv(std::ostream& out, const Trajectory& traj, const FractionalKernel& k, double p,
                                 double q) {
  const std::size_t n = k.size();
  out << "t";
  for (std::size_t x = 1; x <= n; ++x) out << ",u_" << x;
  out << ",min_u,max_u,mass,dirichlet_p_energy\n";
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const VertexFunction& u = traj.states[i];
    out << format_double(traj.times[i]);
    for (double v : u) out << ',' << format_double(v);
    const auto [lo, hi] = std::minmax_element(u.begin(), u.end());
    out << ',' << format_double(*lo) << ',' << format_double(*hi) << ',' << format_double(mass(k.mu, u, q)) << ','
        << format_double(dirichlet_p_energy(k, u, p)) << '\n';
  }
}

/// Dense n x n table with vertex labels on both axes.
inline void write_matrix_csv(std::ostream& out, const Matrix& m, const std::vector<std::string>& labels) {
  out << "vertex";
  for (const std::string& l : labels) out << ',' << l;
  out << '\n';
  for (std::size_t i = 0; i < m.rows(); ++i) {
    out << labels[i];
    for (std::size_t j = 0; j < m.cols(); ++j) out << ',' << format_double(i == j ? 0.0 : m(i, j));
    out << '\n';
  }
}

struct PlotSeries {
  std::string name;
  std::vector<double> values;
};

/// Minimal line chart: frame, axis labels with the data range, one polyline per series.
inline void write_svg_plot(std::ostream& out, std::string_view title, std::span<const double> times,
                           std::span<const PlotSeries> series) {
  constexpr double width = 640, height = 400, left = 70, right = 20, top = 40, bottom = 40;
  static constexpr std::string_view colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};
  double lo = INFINITY, hi = -INFINITY;
  for (const PlotSeries& s : series) {
    for (double v : s.values) {
      if (std::isfinite(v)) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    }
  }
  if (!(lo <= hi)) lo = hi = 0.0;
  if (hi - lo < 1e-300) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double t0 = times.empty() ? 0.0 : times.front();
  const double t1 = times.empty() || times.back() == t0 ? t0 + 1.0 : times.back();
  auto sx = [&](double t) { return left + (t - t0) / (t1 - t0) * (width - left - right); };
  auto sy = [&](double v) { return height - bottom - (v - lo) / (hi - lo) * (height - top - bottom); };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\">" << title
      << "</text>\n";
  out << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << width - left - right << "\" height=\""
      << height - top - bottom << "\" fill=\"none\" stroke=\"black\"/>\n";
  out << "<text x=\"" << left - 4 << "\" y=\"" << top + 10 << "\" text-anchor=\"end\" font-size=\"10\">"
      << format_double(hi) << "</text>\n";
  out << "<text x=\"" << left - 4 << "\" y=\"" << height - bottom << "\" text-anchor=\"end\" font-size=\"10\">"
      << format_double(lo) << "</text>\n";
  out << "<text x=\"" << left << "\" y=\"" << height - bottom + 14 << "\" font-size=\"10\">t=" << format_double(t0)
      << "</text>\n";
  out << "<text x=\"" << width - right << "\" y=\"" << height - bottom + 14
      << "\" text-anchor=\"end\" font-size=\"10\">t=" << format_double(t1) << "</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const std::string_view color = colors[k % std::size(colors)];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" points=\"";
    const std::size_t m = std::min(times.size(), series[k].values.size());
    for (std::size_t i = 0; i < m; ++i) {
      if (!std::isfinite(series[k].values[i])) continue;
      out << sx(times[i]) << ',' << sy(series[k].values[i]) << ' ';
    }
    out << "\"/>\n";
    out << "<text x=\"" << left + 8 << "\" y=\"" << top + 14 + 14 * static_cast<double>(k) << "\" font-size=\"11\" fill=\""
        << color << "\">" << series[k].name << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace fracgraph
