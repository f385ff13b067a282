// Command-line front end: simulate, rigidity, verify-dither, verify-averaging, sweep, esc-demo.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "distform.hpp"

namespace fs = std::filesystem;
using namespace distform;

namespace
{

struct Common
{
  std::string scenario{"rectangle"};
  std::string law{"dither"};
  double omega{0.0};
  double t_final{0.0};
  double dt{0.0};
  long long seed{-1};
  std::string out;
  bool check_hypotheses{false};
  int record_every{0};
};

void add_common(CLI::App *cmd, Common &c)
{
  cmd->add_option("--scenario", c.scenario, "preset name (rectangle, double-tetrahedron) or JSON path");
  cmd->add_option("--law", c.law, "dither | lie-bracket | gradient");
  cmd->add_option("--omega", c.omega, "global frequency parameter (linear rule)");
  cmd->add_option("--t-final", c.t_final, "horizon override");
  cmd->add_option("--dt", c.dt, "step override");
  cmd->add_option("--seed", c.seed, "seed override");
  cmd->add_option("--out", c.out, "output directory");
  cmd->add_flag("--check-hypotheses", c.check_hypotheses, "refuse scenarios whose realization is not rigid");
  cmd->add_option("--record-every", c.record_every, "record every k-th step (0 = auto)");
}

Scenario load(const Common &c)
{
  Scenario sc = load_scenario(c.scenario);
  if (c.seed >= 0) {
    sc.seed = static_cast<std::uint64_t>(c.seed);
  }
  if (c.omega > 0.0) {
    sc = sc.with_omega(c.omega);
  }
  for (const auto &w : sc.warnings) {
    std::cerr << "warning: " << w << '\n';
  }
  return sc;
}

RunOptions options(const Common &c)
{
  RunOptions opt;
  opt.law = parse_law(c.law);
  if (c.t_final > 0.0) {
    opt.t_final = c.t_final;
  }
  if (c.dt > 0.0) {
    opt.dt = c.dt;
  }
  opt.record_every = c.record_every;
  return opt;
}

fs::path out_dir(const std::string &out)
{
  fs::path dir(out);
  fs::create_directories(dir);
  return dir;
}

void print_run(const RunReport &r)
{
  std::printf("%s law=%s omega=%g dt=%.6g T=%g\n", r.scenario.c_str(), to_string(r.law).c_str(), r.omega, r.dt,
              r.t_final);
  std::printf("  psi0=%.6g psi(T)=%.6g min psi=%.6g at t=%.4g\n", r.psi0, r.psi_final, r.psi_min, r.psi_min_time);
  for (const auto &e : r.edges) {
    std::printf("  edge %-6s desired %.4f achieved %.6f rel.err %.3e\n", to_string(e.edge).c_str(), e.desired,
                e.achieved, e.rel_error);
  }
  std::printf("  bound fit c_hat=%.6g holds=%s\n", r.bound.c_hat, r.bound.holds ? "yes" : "no");
  if (r.residual) {
    std::printf("  averaging residual %.3e (relative %.3e)\n", r.residual->max_residual,
                r.residual->relative_residual());
  }
  std::printf("  converged=%s runtime=%.2fs\n", r.converged ? "yes" : "no", r.runtime_s);
}

std::vector<double> parse_list(const std::string &s)
{
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos < s.size()) {
    const std::size_t next = s.find(',', pos);
    out.push_back(std::stod(s.substr(pos, next - pos)));
    if (next == std::string::npos) {
      break;
    }
    pos = next + 1;
  }
  return out;
}

} // namespace

int main(int argc, char **argv)
{
  CLI::App app{"distance-only formation control laboratory"};
  app.require_subcommand(1);

  Common sim;
  bool require_convergence = false;
  double residual_window = 0.0;
  auto *simulate_cmd = app.add_subcommand("simulate", "integrate a scenario and write trajectory + report");
  add_common(simulate_cmd, sim);
  simulate_cmd->add_flag("--require-convergence", require_convergence, "exit nonzero unless the run converges");
  simulate_cmd->add_option("--residual-window", residual_window, "also evaluate the averaging residual on [t0, t0+w]");

  Common rig;
  auto *rigidity_cmd = app.add_subcommand("rigidity", "rank test at the scenario's realization");
  add_common(rigidity_cmd, rig);

  std::string amplitude = "tanh";
  PropertyGrid grid;
  auto *dither_cmd = app.add_subcommand("verify-dither", "grid check of the dither-pair properties");
  dither_cmd->add_option("--amplitude", amplitude, "tanh | rational");
  dither_cmd->add_option("--r", grid.r, "right end of (0, r] for the bracket bound");
  dither_cmd->add_option("--points", grid.points, "geometric grid size");
  dither_cmd->add_option("--c-floor", grid.c_floor, "smallest admissible bracket constant");

  Common avg;
  double window = 5.0;
  int refinement = 2;
  double tolerance = 1e-3;
  auto *avg_cmd = app.add_subcommand("verify-averaging", "residual of the averaging integral identity");
  add_common(avg_cmd, avg);
  avg_cmd->add_option("--window", window, "window length");
  avg_cmd->add_option("--refinement", refinement, "even number of substeps per recorded step");
  avg_cmd->add_option("--tolerance", tolerance, "pass if residual < tolerance * psi(t0)");

  Common swp;
  std::string omegas = "1,3,5,7";
  std::string dt_scales = "1";
  SweepGrid sgrid;
  auto *sweep_cmd = app.add_subcommand("sweep", "parameter sweep over omega / dt / phases / frames");
  add_common(sweep_cmd, swp);
  sweep_cmd->add_option("--omegas", omegas, "comma-separated omega values");
  sweep_cmd->add_option("--dt-scales", dt_scales, "comma-separated multipliers of the default dt");
  sweep_cmd->add_option("--phase-draws", sgrid.phase_draws, "seeded random phase draws per cell");
  sweep_cmd->add_option("--frame-draws", sgrid.frame_draws, "seeded random frame draws per cell");
  sweep_cmd->add_option("--threads", sgrid.threads, "worker threads (0 = hardware)");

  std::string demo = "quadratic";
  std::string esc_omegas = "7,14";
  std::string p0_text = "1,1";
  double esc_t_final = 40000.0;
  double esc_dt = 0.0;
  double esc_tol = 1e-2;
  std::string esc_out;
  int esc_record = 0;
  auto *esc_cmd = app.add_subcommand("esc-demo", "output-only extremum seeking on a built-in system");
  esc_cmd->add_option("--demo", demo, "quadratic | quartic | unactuated");
  esc_cmd->add_option("--omega", esc_omegas, "comma-separated frequencies, one per field");
  esc_cmd->add_option("--p0", p0_text, "comma-separated initial state");
  esc_cmd->add_option("--t-final", esc_t_final, "horizon");
  esc_cmd->add_option("--dt", esc_dt, "step (default 2 pi/(64 omega_max))");
  esc_cmd->add_option("--tolerance", esc_tol, "pass if |p(T)| < tolerance");
  esc_cmd->add_option("--out", esc_out, "output directory");
  esc_cmd->add_option("--record-every", esc_record, "record every k-th step (0 = auto)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*simulate_cmd) {
      const Scenario sc = load(sim);
      bool ok = true;
      if (sim.check_hypotheses) {
        const RankReport rr = is_infinitesimally_rigid(sc.target_framework());
        if (!rr.is_inf_rigid) {
          std::cerr << "hypothesis check failed: realization is not infinitesimally rigid (rank " << rr.rank_g
                    << ", required " << rr.required_rank << ")\n";
          return 2;
        }
      }
      RunOptions opt = options(sim);
      if (residual_window > 0.0) {
        opt.residual_window = residual_window;
      }
      const RunReport r = run(sc, opt);
      print_run(r);
      if (!sim.out.empty()) {
        const fs::path dir = out_dir(sim.out);
        write_trajectory_csv((dir / "trajectory.csv").string(), r.trajectory, sc.dim);
        write_json((dir / "trajectory.json").string(), trajectory_sidecar(sc, r));
        write_json((dir / "report.json").string(), to_json(r));
      }
      if (require_convergence && !r.converged) {
        ok = false;
      }
      return ok ? 0 : 1;
    }

    if (*rigidity_cmd) {
      const Scenario sc = load(rig);
      const RankReport target = is_infinitesimally_rigid(sc.target_framework());
      const RankReport start = is_infinitesimally_rigid(Framework(sc.spec.graph(), sc.dim, sc.initial));
      json j = {{"scenario", sc.name}, {"realization", to_json(target)}, {"initial", to_json(start)}};
      std::cout << j.dump(2) << '\n';
      if (!rig.out.empty()) {
        write_json((out_dir(rig.out) / "rigidity.json").string(), j);
      }
      return target.is_inf_rigid ? 0 : 1;
    }

    if (*dither_cmd) {
      DitherConfig cfg;
      cfg.amplitude = amplitude;
      const PropertyReport rep = verify_properties(resolve_dither(cfg), grid);
      std::cout << to_json(rep).dump(2) << '\n';
      return rep.all_passed() ? 0 : 1;
    }

    if (*avg_cmd) {
      const Scenario sc = load(avg);
      const SystemDef sys = sc.system();
      const double dt = avg.dt > 0.0 ? avg.dt : sc.step();
      const Trajectory tr = simulate(sys, Law::dither, sc.initial, sc.t0, sc.t0 + window, dt, 1);
      const AveragingReport rep = averaging_residual(sys, tr, sc.t0, sc.t0 + window, refinement);
      json j = to_json(rep);
      j["tolerance"] = tolerance;
      j["passed"] = rep.relative_residual() < tolerance;
      std::cout << j.dump(2) << '\n';
      if (!avg.out.empty()) {
        write_json((out_dir(avg.out) / "averaging.json").string(), j);
      }
      return rep.relative_residual() < tolerance ? 0 : 1;
    }

    if (*sweep_cmd) {
      const Scenario sc = load(swp);
      sgrid.omegas = parse_list(omegas);
      sgrid.dt_scales = parse_list(dt_scales);
      sgrid.law = parse_law(swp.law);
      if (swp.t_final > 0.0) {
        sgrid.t_final = swp.t_final;
      }
      const auto cells = sweep(sc, sgrid, sc.seed);
      json table = json::array();
      bool clean = true;
      std::printf("%8s %8s %6s %6s %10s %12s %12s %8s\n", "omega", "dt_scale", "phase", "frame", "converged",
                  "psi(T)", "c_hat", "time[s]");
      for (const auto &c : cells) {
        std::printf("%8g %8g %6d %6d %10s %12.4e %12.4e %8.2f%s\n", c.omega, c.dt_scale, c.phase_draw, c.frame_draw,
                    c.converged ? "yes" : "no", c.psi_final, c.c_hat, c.runtime_s,
                    c.error.empty() ? "" : ("  error: " + c.error).c_str());
        clean = clean && c.error.empty();
        table.push_back(to_json(c));
      }
      if (!swp.out.empty()) {
        write_json((out_dir(swp.out) / "sweep.json").string(), table);
      }
      return clean ? 0 : 1;
    }

    if (*esc_cmd) {
      ControlAffineSystem sys = demo == "quadratic"    ? quadratic_demo(2)
                                : demo == "quartic"    ? quartic_demo(2)
                                : demo == "unactuated" ? unactuated_demo()
                                                       : throw InvalidInput("unknown demo '" + demo + "'");
      const SinusoidSchedule sched = esc_schedule(parse_list(esc_omegas));
      const std::vector<double> p0v = parse_list(p0_text);
      const Vec p0 = Eigen::Map<const Vec>(p0v.data(), static_cast<Eigen::Index>(p0v.size()));
      const DitherShape shape;
      const double dt = esc_dt > 0.0 ? esc_dt : default_dither_step(sched);
      const int stride = auto_stride(0.0, esc_t_final, dt, esc_record);
      const Trajectory tr = esc_integrate(sys, shape, sched, p0, 0.0, esc_t_final, dt, stride);
      const BoundFit fit = esc_bound_check(tr);
      const double norm = tr.final_state().norm();
      std::printf("esc %s T=%g |p(T)|=%.6g psi(T)=%.6g c_hat=%.6g holds=%s\n", demo.c_str(), esc_t_final, norm,
                  tr.psi.back(), fit.c_hat, fit.holds ? "yes" : "no");
      if (!esc_out.empty()) {
        const fs::path dir = out_dir(esc_out);
        write_trajectory_csv((dir / "trajectory.csv").string(), tr, sys.state_dim);
        write_json((dir / "report.json").string(),
                   {{"demo", demo}, {"final_norm", norm}, {"psi_final", tr.psi.back()}, {"bound_fit", to_json(fit)}});
      }
      return norm < esc_tol ? 0 : 1;
    }
  } catch (const std::exception &err) {
    std::cerr << "error: " << err.what() << '\n';
    return 3;
  }
  return 0;
}
