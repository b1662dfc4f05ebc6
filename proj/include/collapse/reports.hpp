#pragma once

#include <span>
#include <string>
#include <vector>

#include "collapse/analysis.hpp"
#include "collapse/csv.hpp"
#include "collapse/evolution.hpp"

namespace collapse {

// Columns: t, diag_0..diag_{N-1}, re_r_s, im_r_s per tracked pair, entropy,
// eig_0..eig_{N-1}, trace_dist_to_target.
CsvTable trajectory_table(const Trajectory& traj);

// Columns: k, lambda_re, lambda_im, abs_lambda, stationary.
CsvTable spectrum_table(const GeneratorSpectrum& spectrum);

// Columns: numerator, denominator, bound, measured_tau, ratio.
CsvTable qsl_table(const QslReport& report);

// Columns: gamma, alignment_time, gamma_times_tau.
CsvTable sweep_table(std::span<const SweepRow> rows);

struct PlotSeries {
  std::string label;
  std::string color;
  std::vector<double> x;
  std::vector<double> y;
};

// Standalone SVG document with axes, ticks, one polyline per series and a legend.
std::string render_line_plot(const std::string& title, const std::string& x_label,
                             const std::string& y_label, std::span<const PlotSeries> series);

}  // namespace collapse
