#pragma once

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "hyptree/configuration.hpp"
#include "hyptree/distance_matrix.hpp"
#include "hyptree/geometry.hpp"
#include "hyptree/optimizer.hpp"

namespace hyptree {

namespace detail {

// %.17g round-trips doubles exactly through the readers below
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

inline double parse_double(const std::string& s, const char* what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument(std::string(what) + ": bad number '" + s + "'");
  }
}

}  // namespace detail

/// Distance matrix CSV: header row "label,<l1>,...,<ln>", one labelled row
/// per taxon.
inline void write_distance_csv(std::ostream& out, const DistanceMatrix& dm) {
  out << "label";
  for (const auto& l : dm.labels) out << ',' << l;
  out << '\n';
  for (int i = 0; i < dm.size(); ++i) {
    out << dm.labels[i];
    for (int j = 0; j < dm.size(); ++j) out << ',' << detail::format_double(dm.d(i, j));
    out << '\n';
  }
}

inline DistanceMatrix read_distance_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("distance csv: empty input");
  auto header = detail::split_csv_line(line);
  if (header.size() < 2 || header[0] != "label")
    throw std::invalid_argument("distance csv: expected 'label,...' header");
  DistanceMatrix dm;
  dm.labels.assign(header.begin() + 1, header.end());
  const int n = dm.size();
  dm.d = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    if (!std::getline(in, line)) throw std::invalid_argument("distance csv: missing row");
    auto cells = detail::split_csv_line(line);
    if (static_cast<int>(cells.size()) != n + 1 || cells[0] != dm.labels[i])
      throw std::invalid_argument("distance csv: malformed row for '" + dm.labels[i] + "'");
    for (int j = 0; j < n; ++j)
      dm.d(i, j) = detail::parse_double(cells[j + 1], "distance csv");
  }
  validate_distance_matrix(dm);
  return dm;
}

/// Configuration CSV: header "label,rho,x1,...,x{m+1}"; one row per point in
/// Minkowski coordinates. Self-contained (rho repeats per row).
inline void write_config_csv(std::ostream& out, const PointConfiguration& config) {
  const int m = config.dim();
  out << "label,rho";
  for (int k = 0; k <= m; ++k) out << ",x" << (k + 1);
  out << '\n';
  for (int i = 0; i < config.size(); ++i) {
    out << config.labels[i] << ',' << detail::format_double(config.rho());
    for (int k = 0; k <= m; ++k)
      out << ',' << detail::format_double(config.points[i].coords[k]);
    out << '\n';
  }
}

inline PointConfiguration read_config_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("config csv: empty input");
  auto header = detail::split_csv_line(line);
  if (header.size() < 5 || header[0] != "label" || header[1] != "rho")
    throw std::invalid_argument("config csv: expected 'label,rho,x1,...' header");
  const int coords = static_cast<int>(header.size()) - 2;
  PointConfiguration config;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto cells = detail::split_csv_line(line);
    if (static_cast<int>(cells.size()) != coords + 2)
      throw std::invalid_argument("config csv: malformed row");
    config.labels.push_back(cells[0]);
    HyperPoint p;
    p.rho = detail::parse_double(cells[1], "config csv");
    p.coords = Vec(coords);
    for (int k = 0; k < coords; ++k)
      p.coords[k] = detail::parse_double(cells[k + 2], "config csv");
    config.points.push_back(std::move(p));
  }
  validate_configuration(config, 1e-6);
  return config;
}

/// Poincare coordinates (visualisation output for m = 2).
inline void write_poincare_csv(std::ostream& out, const PointConfiguration& config) {
  const int m = config.dim();
  out << "label";
  for (int k = 0; k < m; ++k) out << ",p" << (k + 1);
  out << '\n';
  for (int i = 0; i < config.size(); ++i) {
    const PoincarePoint p = to_poincare(config.points[i]);
    out << config.labels[i];
    for (int k = 0; k < m; ++k) out << ',' << detail::format_double(p.coords[k]);
    out << '\n';
  }
}

/// One trace record as a JSON line: iteration, objective, max_step, and the
/// optional rf / tree_loglik fields (null when absent).
inline void write_trace_record(std::ostream& out, const TraceRecord& rec) {
  nlohmann::json j;
  j["iteration"] = rec.iteration;
  j["objective"] = rec.objective;
  j["max_step"] = rec.max_step_taken;
  j["rf"] = rec.rf_to_reference ? nlohmann::json(*rec.rf_to_reference)
                                : nlohmann::json(nullptr);
  j["tree_loglik"] = rec.tree_loglik ? nlohmann::json(*rec.tree_loglik)
                                     : nlohmann::json(nullptr);
  out << j.dump() << '\n';
}

template <typename Writer>
void write_file(const std::string& path, Writer&& writer) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  writer(out);
}

inline std::string slurp_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Per-replicate record of a simulation study.
struct StudyRow {
  std::string kind;
  double grid_value = 0.0;
  int tree_id = 0;
  int replicate = 0;
  std::string method;
  int rf_distance = 0;
  bool topology_match = false;
  double loglik_inferred = 0.0;
  double loglik_generating = 0.0;
  bool loglik_success = false;
  double wall_time_s = 0.0;
  std::string status = "ok";
};

inline const char* k_study_csv_header =
    "kind,grid_value,tree_id,replicate,method,rf_distance,topology_match,"
    "loglik_inferred,loglik_generating,loglik_success,wall_time_s,status";

inline void write_study_row(std::ostream& out, const StudyRow& row) {
  out << row.kind << ',' << detail::format_double(row.grid_value) << ','
      << row.tree_id << ',' << row.replicate << ',' << row.method << ','
      << row.rf_distance << ',' << (row.topology_match ? 1 : 0) << ','
      << detail::format_double(row.loglik_inferred) << ','
      << detail::format_double(row.loglik_generating) << ','
      << (row.loglik_success ? 1 : 0) << ','
      << detail::format_double(row.wall_time_s) << ',' << row.status << '\n';
}

}  // namespace hyptree
