#include "collapse/reports.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace collapse {

CsvTable trajectory_table(const Trajectory& traj) {
  const std::size_t n = traj.dim();
  CsvTable table;
  table.header.push_back("t");
  for (std::size_t k = 0; k < n; ++k) table.header.push_back("diag_" + std::to_string(k));
  for (const auto& p : traj.tracked()) {
    const std::string tag = std::to_string(p.row) + "_" + std::to_string(p.col);
    table.header.push_back("re_" + tag);
    table.header.push_back("im_" + tag);
  }
  table.header.push_back("entropy");
  for (std::size_t k = 0; k < n; ++k) table.header.push_back("eig_" + std::to_string(k));
  table.header.push_back("trace_dist_to_target");

  for (const auto& s : traj.samples()) {
    std::vector<double> row;
    row.reserve(table.header.size());
    row.push_back(s.t);
    row.insert(row.end(), s.diagonals.begin(), s.diagonals.end());
    for (const Complex& v : s.off_diagonals) {
      row.push_back(v.real());
      row.push_back(v.imag());
    }
    row.push_back(s.entropy);
    row.insert(row.end(), s.eigenvalues.begin(), s.eigenvalues.end());
    row.push_back(s.trace_distance);
    table.rows.push_back(std::move(row));
  }
  return table;
}

CsvTable spectrum_table(const GeneratorSpectrum& spectrum) {
  CsvTable table{{"k", "lambda_re", "lambda_im", "abs_lambda", "stationary"}, {}};
  for (std::size_t k = 0; k < spectrum.eigenvalues.size(); ++k) {
    const Complex l = spectrum.eigenvalues[k];
    table.rows.push_back({static_cast<double>(k), l.real(), l.imag(), std::abs(l),
                          spectrum.stationary[k]});
  }
  return table;
}

CsvTable qsl_table(const QslReport& report) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  return CsvTable{{"numerator", "denominator", "bound", "measured_tau", "ratio"},
                  {{report.numerator, report.denominator, report.bound,
                    report.measured_alignment_time.value_or(nan), report.ratio.value_or(nan)}}};
}

CsvTable sweep_table(std::span<const SweepRow> rows) {
  CsvTable table{{"gamma", "alignment_time", "gamma_times_tau"}, {}};
  for (const SweepRow& r : rows) table.rows.push_back({r.gamma, r.alignment_time, r.gamma_times_tau});
  return table;
}

namespace {

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string render_line_plot(const std::string& title, const std::string& x_label,
                             const std::string& y_label, std::span<const PlotSeries> series) {
  constexpr double width = 800, height = 450;
  constexpr double left = 80, right = 180, top = 40, bottom = 60;
  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;

  double x_lo = std::numeric_limits<double>::infinity(), x_hi = -x_lo;
  double y_lo = x_lo, y_hi = -x_lo;
  for (const auto& s : series) {
    for (std::size_t k = 0; k < std::min(s.x.size(), s.y.size()); ++k) {
      if (!std::isfinite(s.x[k]) || !std::isfinite(s.y[k])) continue;
      x_lo = std::min(x_lo, s.x[k]);
      x_hi = std::max(x_hi, s.x[k]);
      y_lo = std::min(y_lo, s.y[k]);
      y_hi = std::max(y_hi, s.y[k]);
    }
  }
  if (!std::isfinite(x_lo)) x_lo = 0, x_hi = 1, y_lo = 0, y_hi = 1;
  if (x_hi == x_lo) x_hi = x_lo + 1;
  if (y_hi == y_lo) y_hi = y_lo + 1;
  const double pad = 0.05 * (y_hi - y_lo);
  y_lo -= pad;
  y_hi += pad;

  auto px = [&](double x) { return left + (x - x_lo) / (x_hi - x_lo) * plot_w; };
  auto py = [&](double y) { return top + (y_hi - y) / (y_hi - y_lo) * plot_h; };

  std::ostringstream svg;
  svg.precision(6);
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
      << escape(title) << "</text>\n";
  svg << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << plot_w << "\" height=\""
      << plot_h << "\" fill=\"none\" stroke=\"black\"/>\n";

  constexpr int ticks = 5;
  for (int k = 0; k <= ticks; ++k) {
    const double xv = x_lo + (x_hi - x_lo) * k / ticks;
    const double yv = y_lo + (y_hi - y_lo) * k / ticks;
    svg << "<line x1=\"" << px(xv) << "\" y1=\"" << top + plot_h << "\" x2=\"" << px(xv)
        << "\" y2=\"" << top + plot_h + 5 << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << px(xv) << "\" y=\"" << top + plot_h + 18
        << "\" text-anchor=\"middle\">" << tick_label(xv) << "</text>\n";
    svg << "<line x1=\"" << left - 5 << "\" y1=\"" << py(yv) << "\" x2=\"" << left << "\" y2=\""
        << py(yv) << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << left - 8 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\">"
        << tick_label(yv) << "</text>\n";
  }
  svg << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 15
      << "\" text-anchor=\"middle\">" << escape(x_label) << "</text>\n";
  svg << "<text transform=\"translate(20," << top + plot_h / 2
      << ") rotate(-90)\" text-anchor=\"middle\">" << escape(y_label) << "</text>\n";

  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    svg << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t k = 0; k < std::min(s.x.size(), s.y.size()); ++k) {
      if (!std::isfinite(s.x[k]) || !std::isfinite(s.y[k])) continue;
      svg << px(s.x[k]) << ',' << py(s.y[k]) << ' ';
    }
    svg << "\"/>\n";
    const double ly = top + 10 + 18.0 * static_cast<double>(i);
    svg << "<line x1=\"" << left + plot_w + 10 << "\" y1=\"" << ly << "\" x2=\""
        << left + plot_w + 30 << "\" y2=\"" << ly << "\" stroke=\"" << s.color
        << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << left + plot_w + 35 << "\" y=\"" << ly + 4 << "\">" << escape(s.label)
        << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace collapse
