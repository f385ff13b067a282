#ifndef DISTFORM_IO_HPP_
#define DISTFORM_IO_HPP_

#include <charconv>
#include <cmath>
#include <fstream>
#include <string>
#include <system_error>

#include <json.hpp>

#include "distform/run.hpp"

#define DISTFORM_VERSION "0.1.0"

namespace distform
{

/// Shortest round-trip decimal, '.' separator, independent of the global locale.
inline std::string format_double(double v)
{
  if (std::isnan(v)) {
    return "nan";
  }
  if (std::isinf(v)) {
    return v > 0 ? "inf" : "-inf";
  }
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  if (res.ec != std::errc()) {
    throw NumericalError("format_double: conversion failed");
  }
  return std::string(buf, res.ptr);
}

inline std::string trajectory_csv_header(int agents, int n, bool with_locals)
{
  std::string h = "t";
  for (int i = 1; i <= agents; ++i) {
    for (int k = 1; k <= n; ++k) {
      h += ",p_" + std::to_string(i) + "_" + std::to_string(k);
    }
  }
  h += ",psi";
  if (with_locals) {
    for (int i = 1; i <= agents; ++i) {
      h += ",psi_" + std::to_string(i);
    }
  }
  return h;
}

/// Columns t, p_{1,1}..p_{N,n}, psi, psi_1..psi_N (the last group only when recorded).
inline void write_trajectory_csv(const std::string &path, const Trajectory &traj, int n)
{
  std::ofstream out(path);
  if (!out) {
    throw InvalidInput("cannot write '" + path + "'");
  }
  const int agents = traj.states.empty() ? 0 : static_cast<int>(traj.states.front().size()) / n;
  const bool locals = traj.psi_locals.cols() == static_cast<Eigen::Index>(traj.size()) && traj.psi_locals.rows() > 0;
  out << trajectory_csv_header(agents, n, locals) << '\n';
  std::string line;
  for (std::size_t s = 0; s < traj.size(); ++s) {
    line = format_double(traj.times[s]);
    for (Eigen::Index k = 0; k < traj.states[s].size(); ++k) {
      line += ',';
      line += format_double(traj.states[s](k));
    }
    line += ',';
    line += format_double(traj.psi[s]);
    if (locals) {
      for (Eigen::Index i = 0; i < traj.psi_locals.rows(); ++i) {
        line += ',';
        line += format_double(traj.psi_locals(i, static_cast<Eigen::Index>(s)));
      }
    }
    out << line << '\n';
  }
}

inline json to_json(const RankReport &r)
{
  return {{"rank_g", r.rank_g},
          {"affine_span_dim", r.affine_span_dim},
          {"required_rank", r.required_rank},
          {"tolerance", r.tolerance},
          {"is_inf_rigid", r.is_inf_rigid}};
}

inline json to_json(const PropertyReport &r)
{
  json checks = json::array();
  for (const auto &c : r.checks) {
    checks.push_back({{"name", c.name}, {"passed", c.passed}, {"witness", c.witness}, {"detail", c.detail}});
  }
  return {{"shape", r.shape}, {"r", r.r}, {"c_hat", r.c_hat}, {"all_passed", r.all_passed()}, {"checks", checks}};
}

inline json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json to_json(const BoundFit &b)
{
  return {{"c_hat", finite_or_null(b.c_hat)}, {"psi0", b.psi0}, {"floor", b.floor}, {"holds", b.holds}};
}

inline json to_json(const AveragingReport &a)
{
  return {{"t_start", a.t_start},
          {"t_end", a.t_end},
          {"psi_start", a.psi_start},
          {"samples", a.samples},
          {"refinement", a.refinement},
          {"max_residual", a.max_residual},
          {"relative_residual", a.relative_residual()},
          {"direct_residual", a.direct_residual},
          {"max_int_y", a.max_int_y},
          {"max_d1", a.max_d1},
          {"max_int_d2", a.max_int_d2},
          {"max_abs_d2", a.max_abs_d2},
          {"d1_ratio", a.d1_ratio},
          {"d2_ratio", a.d2_ratio}};
}

inline json to_json(const RunReport &r)
{
  json edges = json::array();
  for (const auto &e : r.edges) {
    edges.push_back({{"edge", {e.edge.i + 1, e.edge.j + 1}},
                     {"desired", e.desired},
                     {"achieved", e.achieved},
                     {"rel_error", e.rel_error}});
  }
  json j = {{"scenario", r.scenario},
            {"law", to_string(r.law)},
            {"omega", r.omega},
            {"dt", r.dt},
            {"t0", r.t0},
            {"t_final", r.t_final},
            {"psi0", r.psi0},
            {"psi_final", r.psi_final},
            {"psi_min", r.psi_min},
            {"psi_min_time", r.psi_min_time},
            {"max_edge_error", r.max_edge_error},
            {"converged", r.converged},
            {"edges", edges},
            {"bound_fit", to_json(r.bound)},
            {"runtime_s", r.runtime_s},
            {"warnings", r.trajectory.warnings}};
  if (r.residual) {
    j["averaging_residual"] = to_json(*r.residual);
  }
  return j;
}

inline json to_json(const SweepCell &c)
{
  json j = {{"omega", c.omega},
            {"dt_scale", c.dt_scale},
            {"phase_draw", c.phase_draw},
            {"frame_draw", c.frame_draw},
            {"converged", c.converged},
            {"psi_final", c.psi_final},
            {"psi_min", c.psi_min},
            {"c_hat", finite_or_null(c.c_hat)},
            {"runtime_s", c.runtime_s}};
  if (!c.error.empty()) {
    j["error"] = c.error;
  }
  return j;
}

/// Metadata sidecar for a trajectory CSV: scenario, schedule, dt, seed, code version, report.
inline json trajectory_sidecar(const Scenario &sc, const RunReport &r)
{
  const bool linear = sc.frequencies.rule == SinusoidSchedule::Rule::linear;
  const SinusoidSchedule s = linear ? sc.with_omega(r.omega).schedule() : sc.schedule();
  return {{"version", DISTFORM_VERSION},
          {"scenario", scenario_to_json(sc)},
          {"num_agents", sc.num_agents},
          {"dim", sc.dim},
          {"law", to_string(r.law)},
          {"schedule",
           {{"omega", r.omega},
            {"frequencies", detail::matrix_json(s.frequencies())},
            {"phases", detail::matrix_json(s.phases())}}},
          {"dt", r.dt},
          {"record_every", r.trajectory.record_every},
          {"seed", sc.seed},
          {"report", to_json(r)}};
}

inline void write_json(const std::string &path, const json &j)
{
  std::ofstream out(path);
  if (!out) {
    throw InvalidInput("cannot write '" + path + "'");
  }
  out << j.dump(2) << '\n';
}

} // namespace distform

#endif // DISTFORM_IO_HPP_
