#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mjls/qlearn.hpp"

namespace mjls {

// Model file: JSON document with fields n, m, N, A, B, optional C, phi,
// Q, R and an optional "learning" section. Each matrix is given either as
// nested rows or as a flat row-major array.
struct ModelFile {
  MjlsModel model;
  CostWeights weights;
  std::optional<LearningConfig> learning;
};

ModelFile load_model_file(const std::string& path);

// Learning section from a standalone file ({"learning": {...}} or the bare
// object itself).
LearningConfig load_learning_file(const std::string& path, int n, int m, int mode_count);

// Riccati solution as JSON: per-mode P and K row-major arrays plus
// iterations and residual.
void save_riccati_json(const std::string& path, const RiccatiSolution& solution, int n, int m,
                       double tol);

// Reads the "K" field (list of N row-major m x n arrays) from a gains
// file; the riccati solution export qualifies.
NMatrixSet load_gains_json(const std::string& path, int n, int m, int mode_count);

// Floating-point formatting used for all emitted numbers: 9 significant
// digits.
std::string format_sig9(double v);

// CSV emitters. Headers are fixed; theta and mode columns are 1-based.
void write_trajectory_csv(const std::string& path, const Trajectory& traj);
void write_learning_report_csv(const std::string& path, const LearningReport& report);
void write_gains_trace_csv(const std::string& path, const LearningReport& report);
void write_closed_loop_csv(const std::string& path,
                           const std::vector<std::pair<int, Trajectory>>& snapshots);
void write_mode_trace_csv(const std::string& path, const std::vector<int>& modes);

// Minimal fixed-size SVG line chart (640x400, computed data range), one
// polyline per series. No plotting dependency on purpose.
void write_line_chart_svg(const std::string& path, const std::string& title,
                          const std::vector<std::string>& series_names,
                          const std::vector<std::vector<double>>& series);

}  // namespace mjls
