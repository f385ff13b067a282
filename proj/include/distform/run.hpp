#ifndef DISTFORM_RUN_HPP_
#define DISTFORM_RUN_HPP_

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "distform/averaging.hpp"
#include "distform/scenario.hpp"

namespace distform
{

inline constexpr double kEdgeTolerance = 0.01;
inline constexpr double kPsiTolerance = 1e-2;

struct EdgeResult
{
  Edge edge;
  double desired{0.0};
  double achieved{0.0};
  double rel_error{0.0};
};

inline std::vector<EdgeResult> edge_table(const FormationSpec &spec, const Vec &p)
{
  std::vector<EdgeResult> out;
  const Vec f = edge_map(spec.graph(), spec.dim(), p);
  const Vec d = spec.desired();
  for (std::size_t e = 0; e < spec.graph().num_edges(); ++e) {
    const auto k = static_cast<Eigen::Index>(e);
    EdgeResult r{spec.graph().edges()[e], d(k), std::sqrt(f(k)), 0.0};
    r.rel_error = r.desired > 0.0 ? std::abs(r.achieved - r.desired) / r.desired : std::abs(r.achieved);
    out.push_back(r);
  }
  return out;
}

/// Every edge within 1 % of its desired length and psi below 1e-2.
inline bool converged(const std::vector<EdgeResult> &edges, double psi_final)
{
  return psi_final < kPsiTolerance && std::all_of(edges.begin(), edges.end(), [](const EdgeResult &e) {
           return e.rel_error < kEdgeTolerance;
         });
}

struct RunOptions
{
  Law law{Law::dither};
  std::optional<double> omega;
  std::optional<double> t_final;
  std::optional<double> dt;
  int record_every{0}; ///< 0 picks a stride giving at most ~20000 samples
  std::optional<double> residual_window; ///< averaging residual over [t0, t0 + window]
  int residual_refinement{2};
};

struct RunReport
{
  std::string scenario;
  Law law{Law::dither};
  double omega{0.0};
  double dt{0.0};
  double t0{0.0};
  double t_final{0.0};
  double psi0{0.0};
  double psi_final{0.0};
  double psi_min{0.0};
  double psi_min_time{0.0};
  std::vector<EdgeResult> edges;
  double max_edge_error{0.0};
  bool converged{false};
  BoundFit bound;
  std::optional<AveragingReport> residual;
  double runtime_s{0.0};
  Trajectory trajectory;
};

inline int auto_stride(double t0, double tf, double dt, int requested)
{
  if (requested > 0) {
    return requested;
  }
  const long steps = step_count(t0, tf, dt);
  return static_cast<int>(std::max(1L, (steps + 19999) / 20000));
}

inline RunReport run(const Scenario &base, const RunOptions &opt = {})
{
  const Scenario sc = opt.omega ? base.with_omega(*opt.omega) : base;
  const SystemDef sys = sc.system();
  RunReport rep;
  rep.scenario = sc.name;
  rep.law = opt.law;
  rep.omega = sc.frequencies.omega;
  rep.t0 = sc.t0;
  rep.t_final = opt.t_final ? *opt.t_final : sc.t_final;
  rep.dt = opt.dt ? *opt.dt : sc.step();
  const int stride = auto_stride(rep.t0, rep.t_final, rep.dt, opt.record_every);

  const auto start = std::chrono::steady_clock::now();
  rep.trajectory = simulate(sys, opt.law, sc.initial, rep.t0, rep.t_final, rep.dt, stride);
  rep.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const Trajectory &tr = rep.trajectory;
  rep.trajectory.metadata["scenario"] = sc.name;
  rep.trajectory.metadata["seed"] = std::to_string(sc.seed);
  rep.psi0 = tr.psi.front();
  rep.psi_final = tr.psi.back();
  rep.psi_min = tr.psi_min;
  rep.psi_min_time = tr.psi_min_time;
  rep.edges = edge_table(sc.spec, tr.final_state());
  for (const auto &e : rep.edges) {
    rep.max_edge_error = std::max(rep.max_edge_error, e.rel_error);
  }
  rep.converged = converged(rep.edges, rep.psi_final);
  rep.bound = bound_fit(tr);

  if (opt.residual_window && opt.law == Law::dither) {
    const double t1 = rep.t0 + *opt.residual_window;
    const Trajectory window = simulate(sys, Law::dither, sc.initial, rep.t0, t1, rep.dt, 1);
    rep.residual = averaging_residual(sys, window, rep.t0, t1, opt.residual_refinement);
  }
  return rep;
}

// ---------------------------------------------------------------------------------------
// parameter sweeps

struct SweepGrid
{
  std::vector<double> omegas{7.0};
  std::vector<double> dt_scales{1.0}; ///< multiplies the default step 2 pi/(64 omega_max)
  int phase_draws{0};                 ///< 0: scenario phases; k: k seeded uniform draws on [0, 2 pi)
  int frame_draws{0};                 ///< 0: scenario frames; k: k seeded random orthonormal frames
  std::optional<double> t_final;
  Law law{Law::dither};
  int threads{0}; ///< 0: hardware concurrency
};

struct SweepCell
{
  double omega{0.0};
  double dt_scale{1.0};
  int phase_draw{-1};
  int frame_draw{-1};
  bool converged{false};
  double psi_final{0.0};
  double psi_min{0.0};
  double c_hat{0.0};
  double runtime_s{0.0};
  std::string error;
};

namespace detail
{
inline std::uint64_t cell_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t draw)
{
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(draw)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}
} // namespace detail

inline Mat random_phases(int agents, int n, std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 2.0 * std::numbers::pi);
  Mat ph(agents, n);
  for (int i = 0; i < agents; ++i) {
    for (int k = 0; k < n; ++k) {
      ph(i, k) = unif(rng);
    }
  }
  return ph;
}

inline std::vector<Mat> random_frames(int agents, int n, std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Mat> out;
  for (int i = 0; i < agents; ++i) {
    Mat m(n, n);
    for (Eigen::Index k = 0; k < m.size(); ++k) {
      m.data()[k] = normal(rng);
    }
    out.push_back(std::move(m));
  }
  return out;
}

/**
 * Independent runs over omega x dt scale x phase draw x frame draw. Cells run on a small
 * worker pool and are written back by index, so the table does not depend on scheduling.
 */
inline std::vector<SweepCell> sweep(const Scenario &sc, const SweepGrid &grid, std::uint64_t seed)
{
  if (grid.omegas.empty() || grid.dt_scales.empty()) {
    throw InvalidInput("sweep: grid must be nonempty");
  }
  std::vector<SweepCell> cells;
  const int phase_count = std::max(1, grid.phase_draws);
  const int frame_count = std::max(1, grid.frame_draws);
  for (double w : grid.omegas) {
    for (double s : grid.dt_scales) {
      for (int ph = 0; ph < phase_count; ++ph) {
        for (int fr = 0; fr < frame_count; ++fr) {
          SweepCell c;
          c.omega = w;
          c.dt_scale = s;
          c.phase_draw = grid.phase_draws > 0 ? ph : -1;
          c.frame_draw = grid.frame_draws > 0 ? fr : -1;
          cells.push_back(c);
        }
      }
    }
  }

  auto work = [&](SweepCell &c) {
    try {
      Scenario s = sc.with_omega(c.omega);
      if (c.phase_draw >= 0) {
        s.phases = random_phases(s.num_agents, s.dim, detail::cell_seed(seed, 1, static_cast<std::uint64_t>(c.phase_draw)));
      }
      if (c.frame_draw >= 0) {
        s.frame_config.rule = FrameConfig::Rule::vectors;
        s.frame_config.vectors =
            random_frames(s.num_agents, s.dim, detail::cell_seed(seed, 2, static_cast<std::uint64_t>(c.frame_draw)));
        s.frames = resolve_frames(s.frame_config, s.num_agents, s.dim);
      }
      RunOptions opt;
      opt.law = grid.law;
      opt.t_final = grid.t_final;
      opt.dt = s.step() * c.dt_scale;
      const RunReport r = run(s, opt);
      c.converged = r.converged;
      c.psi_final = r.psi_final;
      c.psi_min = r.psi_min;
      c.c_hat = r.bound.c_hat;
      c.runtime_s = r.runtime_s;
    } catch (const std::exception &err) {
      c.error = err.what();
    }
  };

  const unsigned hw = std::max(1U, std::thread::hardware_concurrency());
  const unsigned workers =
      std::min<unsigned>(grid.threads > 0 ? static_cast<unsigned>(grid.threads) : hw, static_cast<unsigned>(cells.size()));
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t k = next++; k < cells.size(); k = next++) {
        work(cells[k]);
      }
    });
  }
  for (auto &t : pool) {
    t.join();
  }
  return cells;
}

} // namespace distform

#endif // DISTFORM_RUN_HPP_
