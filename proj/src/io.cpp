#include "mjls/io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace mjls {

namespace {

using nlohmann::json;

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::kParseError, "cannot open " + path);
  }
  try {
    json j;
    in >> j;
    return j;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, path + ": " + e.what());
  }
}

// A matrix is either nested rows [[...], ...] or a flat row-major array.
Eigen::MatrixXd parse_matrix(const json& j, int rows, int cols, const std::string& what) {
  Eigen::MatrixXd M(rows, cols);
  if (!j.is_array() || j.empty()) {
    throw Error(ErrorCode::kParseError, what + " must be a nonempty array");
  }
  try {
    if (j.front().is_array()) {
      if (static_cast<int>(j.size()) != rows) {
        throw Error(ErrorCode::kParseError, what + " has " + std::to_string(j.size()) +
                                                " rows, expected " + std::to_string(rows));
      }
      for (int r = 0; r < rows; ++r) {
        if (static_cast<int>(j[r].size()) != cols) {
          throw Error(ErrorCode::kParseError, what + " row " + std::to_string(r + 1) +
                                                  " has the wrong length");
        }
        for (int c = 0; c < cols; ++c) M(r, c) = j[r][c].get<double>();
      }
    } else {
      if (static_cast<int>(j.size()) != rows * cols) {
        throw Error(ErrorCode::kParseError, what + " has " + std::to_string(j.size()) +
                                                " entries, expected " +
                                                std::to_string(rows * cols));
      }
      for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) M(r, c) = j[r * cols + c].get<double>();
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, what + ": " + e.what());
  }
  return M;
}

NMatrixSet parse_matrix_set(const json& j, int N, int rows, int cols, const std::string& what) {
  if (!j.is_array() || static_cast<int>(j.size()) != N) {
    throw Error(ErrorCode::kParseError, what + " must list one matrix per mode");
  }
  std::vector<Eigen::MatrixXd> mats;
  mats.reserve(static_cast<std::size_t>(N));
  for (int i = 0; i < N; ++i) {
    mats.push_back(parse_matrix(j[i], rows, cols, what + "[" + std::to_string(i + 1) + "]"));
  }
  return NMatrixSet(std::move(mats));
}

int require_positive_int(const json& j, const std::string& key) {
  if (!j.contains(key) || !j[key].is_number_integer() || j[key].get<int>() < 1) {
    throw Error(ErrorCode::kParseError, "field '" + key + "' must be a positive integer");
  }
  return j[key].get<int>();
}

LearningConfig parse_learning(const json& j, int n, int m, int mode_count) {
  LearningConfig cfg;
  try {
    if (!j.contains("L") || !j.contains("eps")) {
      throw Error(ErrorCode::kParseError, "learning section needs at least 'L' and 'eps'");
    }
    cfg.L = j["L"].get<long>();
    cfg.eps = j["eps"].get<double>();
    cfg.max_outer_iter = j.value("max_outer_iter", 100);
    cfg.max_collect_steps = j.value("max_collect_steps", 100000L);
    cfg.noise.std = j.value("noise_std", 0.01);
    cfg.noise.seed = j.value("seed", 1ULL);
    if (j.contains("K0")) {
      cfg.K0 = parse_matrix_set(j["K0"], mode_count, m, n, "K0");
    }
    if (j.contains("Hbar0")) {
      const long lbar = static_cast<long>(n + m) * (n + m + 1) / 2;
      if (!j["Hbar0"].is_array() || static_cast<int>(j["Hbar0"].size()) != mode_count) {
        throw Error(ErrorCode::kParseError, "Hbar0 must list one vector per mode");
      }
      for (const auto& entry : j["Hbar0"]) {
        Eigen::VectorXd v(lbar);
        if (static_cast<long>(entry.size()) != lbar) {
          throw Error(ErrorCode::kParseError, "Hbar0 vectors must have length l(l+1)/2");
        }
        for (long p = 0; p < lbar; ++p) v(p) = entry[p].get<double>();
        cfg.Hbar0.push_back(std::move(v));
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("learning section: ") + e.what());
  }
  cfg.validate(n, m, mode_count);
  return cfg;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error(ErrorCode::kParseError, "cannot write " + path);
  }
  out << content;
}

std::vector<double> flatten_row_major(const Eigen::MatrixXd& M) {
  std::vector<double> flat;
  flat.reserve(static_cast<std::size_t>(M.size()));
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    for (Eigen::Index c = 0; c < M.cols(); ++c) flat.push_back(M(r, c));
  }
  return flat;
}

}  // namespace

ModelFile load_model_file(const std::string& path) {
  const json j = load_json(path);
  const int n = require_positive_int(j, "n");
  const int m = require_positive_int(j, "m");
  const int N = require_positive_int(j, "N");
  for (const char* key : {"A", "B", "phi", "Q", "R"}) {
    if (!j.contains(key)) {
      throw Error(ErrorCode::kParseError, std::string("missing field '") + key + "'");
    }
  }

  NMatrixSet A = parse_matrix_set(j["A"], N, n, n, "A");
  NMatrixSet B = parse_matrix_set(j["B"], N, n, m, "B");
  TransitionMatrix phi(parse_matrix(j["phi"], N, N, "phi"));
  std::optional<NMatrixSet> C;
  if (j.contains("C")) {
    const int q = static_cast<int>(j["C"][0].is_array() ? j["C"][0].size()
                                                        : j["C"][0].size() / n);
    C = parse_matrix_set(j["C"], N, q, n, "C");
  }
  CostWeights weights{parse_matrix_set(j["Q"], N, n, n, "Q"),
                      parse_matrix_set(j["R"], N, m, m, "R")};

  ModelFile mf{MjlsModel(std::move(A), std::move(B), std::move(phi), std::move(C)),
               std::move(weights), std::nullopt};
  if (j.contains("learning")) {
    mf.learning = parse_learning(j["learning"], n, m, N);
  }
  return mf;
}

LearningConfig load_learning_file(const std::string& path, int n, int m, int mode_count) {
  const json j = load_json(path);
  return parse_learning(j.contains("learning") ? j["learning"] : j, n, m, mode_count);
}

void save_riccati_json(const std::string& path, const RiccatiSolution& solution, int n, int m,
                       double tol) {
  json j;
  j["n"] = n;
  j["m"] = m;
  j["N"] = solution.P.count();
  j["iterations"] = solution.iterations;
  j["residual"] = solution.residual;
  j["tol"] = tol;
  j["P"] = json::array();
  j["K"] = json::array();
  for (int i = 0; i < solution.P.count(); ++i) {
    j["P"].push_back(flatten_row_major(solution.P[i]));
    j["K"].push_back(flatten_row_major(solution.K[i]));
  }
  write_file(path, j.dump(2) + "\n");
}

NMatrixSet load_gains_json(const std::string& path, int n, int m, int mode_count) {
  const json j = load_json(path);
  if (!j.contains("K")) {
    throw Error(ErrorCode::kParseError, path + " has no 'K' field");
  }
  return parse_matrix_set(j["K"], mode_count, m, n, "K");
}

std::string format_sig9(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
  std::ostringstream out;
  const int n = traj.records.empty() ? 0 : static_cast<int>(traj.records[0].x.size());
  const int m = traj.records.empty() ? 0 : static_cast<int>(traj.records[0].u.size());
  out << "k,theta";
  for (int c = 0; c < n; ++c) out << ",x_" << (c + 1);
  for (int c = 0; c < m; ++c) out << ",u_" << (c + 1);
  out << "\n";
  for (const auto& rec : traj.records) {
    out << rec.k << "," << (rec.theta + 1);
    for (int c = 0; c < n; ++c) out << "," << format_sig9(rec.x(c));
    for (int c = 0; c < m; ++c) out << "," << format_sig9(rec.u(c));
    out << "\n";
  }
  write_file(path, out.str());
}

namespace {

void append_gain_header(std::ostringstream& out, const NMatrixSet& K) {
  for (int i = 0; i < K.count(); ++i) {
    for (int e = 0; e < K.rows() * K.cols(); ++e) {
      out << ",K_" << (i + 1) << "_" << (e + 1);
    }
  }
}

void append_gain_row(std::ostringstream& out, const NMatrixSet& K) {
  for (int i = 0; i < K.count(); ++i) {
    for (int r = 0; r < K.rows(); ++r) {
      for (int c = 0; c < K.cols(); ++c) out << "," << format_sig9(K[i](r, c));
    }
  }
}

}  // namespace

void write_learning_report_csv(const std::string& path, const LearningReport& report) {
  std::ostringstream out;
  const NMatrixSet& K0 = report.K_history.front();
  out << "iter,e_K";
  for (int i = 0; i < K0.count(); ++i) out << ",cond_" << (i + 1);
  append_gain_header(out, K0);
  out << "\n";
  for (int it = 1; it <= report.iterations; ++it) {
    out << it << "," << format_sig9(report.e_K_history[static_cast<std::size_t>(it - 1)]);
    for (double c : report.condition_numbers[static_cast<std::size_t>(it - 1)]) {
      out << "," << format_sig9(c);
    }
    append_gain_row(out, report.K_history[static_cast<std::size_t>(it)]);
    out << "\n";
  }
  write_file(path, out.str());
}

void write_gains_trace_csv(const std::string& path, const LearningReport& report) {
  std::ostringstream out;
  out << "iter";
  append_gain_header(out, report.K_history.front());
  out << "\n";
  for (std::size_t it = 0; it < report.K_history.size(); ++it) {
    out << it;
    append_gain_row(out, report.K_history[it]);
    out << "\n";
  }
  write_file(path, out.str());
}

void write_closed_loop_csv(const std::string& path,
                           const std::vector<std::pair<int, Trajectory>>& snapshots) {
  std::ostringstream out;
  int n = 0, m = 0;
  for (const auto& [iter, traj] : snapshots) {
    if (!traj.records.empty()) {
      n = static_cast<int>(traj.records[0].x.size());
      m = static_cast<int>(traj.records[0].u.size());
      break;
    }
  }
  out << "iter,k,theta";
  for (int c = 0; c < n; ++c) out << ",x_" << (c + 1);
  for (int c = 0; c < m; ++c) out << ",u_" << (c + 1);
  out << "\n";
  for (const auto& [iter, traj] : snapshots) {
    for (const auto& rec : traj.records) {
      out << iter << "," << rec.k << "," << (rec.theta + 1);
      for (int c = 0; c < n; ++c) out << "," << format_sig9(rec.x(c));
      for (int c = 0; c < m; ++c) out << "," << format_sig9(rec.u(c));
      out << "\n";
    }
  }
  write_file(path, out.str());
}

void write_mode_trace_csv(const std::string& path, const std::vector<int>& modes) {
  std::ostringstream out;
  out << "k,theta\n";
  for (std::size_t k = 0; k < modes.size(); ++k) {
    out << k << "," << (modes[k] + 1) << "\n";
  }
  write_file(path, out.str());
}

void write_line_chart_svg(const std::string& path, const std::string& title,
                          const std::vector<std::string>& series_names,
                          const std::vector<std::vector<double>>& series) {
  constexpr int kW = 640, kH = 400, kPad = 48;
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                  "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
  double lo = 0.0, hi = 1.0;
  std::size_t len = 0;
  bool first = true;
  for (const auto& s : series) {
    len = std::max(len, s.size());
    for (double v : s) {
      if (first) {
        lo = hi = v;
        first = false;
      }
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (hi - lo < 1e-12) hi = lo + 1.0;

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
      << "\">\n";
  out << "<rect width=\"" << kW << "\" height=\"" << kH << "\" fill=\"white\"/>\n";
  out << "<text x=\"" << kW / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << title
      << "</text>\n";
  out << "<line x1=\"" << kPad << "\" y1=\"" << (kH - kPad) << "\" x2=\"" << (kW - kPad)
      << "\" y2=\"" << (kH - kPad) << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << kPad << "\" y1=\"" << kPad << "\" x2=\"" << kPad << "\" y2=\""
      << (kH - kPad) << "\" stroke=\"black\"/>\n";
  out << "<text x=\"" << kPad << "\" y=\"" << (kPad - 6) << "\" font-size=\"10\">"
      << format_sig9(hi) << "</text>\n";
  out << "<text x=\"" << kPad << "\" y=\"" << (kH - kPad + 14) << "\" font-size=\"10\">"
      << format_sig9(lo) << "</text>\n";
  for (std::size_t s = 0; s < series.size(); ++s) {
    const auto& data = series[s];
    if (data.size() < 2) continue;
    out << "<polyline fill=\"none\" stroke=\"" << kColors[s % 8] << "\" points=\"";
    for (std::size_t k = 0; k < data.size(); ++k) {
      const double fx = static_cast<double>(k) / static_cast<double>(len - 1);
      const double fy = (data[k] - lo) / (hi - lo);
      out << (kPad + fx * (kW - 2 * kPad)) << "," << (kH - kPad - fy * (kH - 2 * kPad)) << " ";
    }
    out << "\"/>\n";
    if (s < series_names.size()) {
      out << "<text x=\"" << (kW - kPad + 4) << "\" y=\"" << (kPad + 14 * s)
          << "\" font-size=\"10\" fill=\"" << kColors[s % 8] << "\">" << series_names[s]
          << "</text>\n";
    }
  }
  out << "</svg>\n";
  write_file(path, out.str());
}

}  // namespace mjls
