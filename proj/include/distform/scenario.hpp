#ifndef DISTFORM_SCENARIO_HPP_
#define DISTFORM_SCENARIO_HPP_

#include <cmath>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "distform/dynamics.hpp"
#include "distform/rigidity.hpp"

namespace distform
{

using json = nlohmann::json;

inline constexpr int kScenarioSchemaVersion = 1;

/// How body frames are produced. Resolved into BodyFrames (Gram-Schmidt) at load.
struct FrameConfig
{
  enum class Rule
  {
    identity,
    planar_angles,    ///< b1 = (cos phi, sin phi), b2 = (-sin phi, cos phi)
    spherical_angles, ///< 3D (phi, theta) formulas; variant literal or corrected
    vectors           ///< literal per-agent column lists
  };
  Rule rule{Rule::identity};
  std::vector<double> phi;
  std::vector<double> theta;
  bool corrected{false};
  std::vector<Mat> vectors; ///< column k is b_{i,k}

  friend bool operator==(const FrameConfig &, const FrameConfig &) = default;
};

struct DitherConfig
{
  std::string amplitude{"tanh"}; ///< tanh | rational | table
  std::vector<double> table_y;
  std::vector<double> table_a;

  friend bool operator==(const DitherConfig &, const DitherConfig &) = default;
};

struct FrequencyConfig
{
  SinusoidSchedule::Rule rule{SinusoidSchedule::Rule::linear};
  double omega{1.0};
  Mat table; ///< N x n, explicit rule only

  friend bool operator==(const FrequencyConfig &a, const FrequencyConfig &b)
  {
    return a.rule == b.rule && a.omega == b.omega && a.table == b.table;
  }
};

inline std::vector<Mat> spherical_frames(const std::vector<double> &phi, const std::vector<double> &theta,
                                         bool corrected)
{
  std::vector<Mat> out;
  for (std::size_t i = 0; i < phi.size(); ++i) {
    const double f = phi[i];
    const double t = theta[i];
    Mat b(3, 3);
    b.col(0) << std::sin(t) * std::cos(f), std::sin(t) * std::sin(f), std::cos(t);
    b.col(1) << -std::sin(f), std::cos(f), 0.0;
    if (corrected) {
      b.col(2) << -std::cos(t) * std::cos(f), -std::cos(t) * std::sin(f), std::sin(t);
    } else {
      b.col(2) << -std::cos(t) * std::cos(f), -std::cos(t), std::sin(t);
    }
    out.push_back(std::move(b));
  }
  return out;
}

inline std::vector<Mat> planar_frames(const std::vector<double> &phi)
{
  std::vector<Mat> out;
  for (double f : phi) {
    Mat b(2, 2);
    b << std::cos(f), -std::sin(f), std::sin(f), std::cos(f);
    out.push_back(std::move(b));
  }
  return out;
}

/**
 * A formation experiment: targets, a known realization of them, initial state, frames,
 * dither and sinusoid configuration, and the time window. Agent indices in files are
 * one-based; everything in memory is zero-based.
 */
struct Scenario
{
  std::string name;
  int dim{0};
  int num_agents{0};
  FormationSpec spec;
  Vec realization;
  Vec initial;
  FrameConfig frame_config;
  BodyFrames frames;
  DitherConfig dither;
  DitherShape shape;
  FrequencyConfig frequencies;
  Mat phases;
  double t0{0.0};
  double t_final{0.0};
  std::optional<double> dt;
  std::uint64_t seed{0};
  std::vector<std::string> warnings;

  [[nodiscard]] SinusoidSchedule schedule() const
  {
    if (frequencies.rule == SinusoidSchedule::Rule::linear) {
      return SinusoidSchedule::linear(frequencies.omega, num_agents, dim, phases);
    }
    return SinusoidSchedule::explicit_table(frequencies.table, phases);
  }

  [[nodiscard]] SystemDef system() const { return SystemDef(spec, frames, shape, schedule()); }

  [[nodiscard]] double step() const { return dt ? *dt : default_dither_step(schedule()); }

  [[nodiscard]] Framework target_framework() const { return Framework(spec.graph(), dim, realization); }

  /// Same scenario at a different global frequency (linear rule only); dt falls back to the default.
  [[nodiscard]] Scenario with_omega(double omega) const
  {
    if (frequencies.rule != SinusoidSchedule::Rule::linear) {
      throw InvalidInput("scenario: omega override needs the linear frequency rule");
    }
    Scenario s = *this;
    s.frequencies.omega = omega;
    s.dt.reset();
    (void)s.schedule();
    return s;
  }

  friend bool operator==(const Scenario &a, const Scenario &b)
  {
    return a.name == b.name && a.dim == b.dim && a.num_agents == b.num_agents && a.spec == b.spec &&
           a.realization == b.realization && a.initial == b.initial && a.frame_config == b.frame_config &&
           a.dither == b.dither && a.frequencies == b.frequencies && a.phases == b.phases && a.t0 == b.t0 &&
           a.t_final == b.t_final && a.dt == b.dt && a.seed == b.seed;
  }
};

namespace detail
{

inline const json &field(const json &j, const std::string &key, const std::string &path)
{
  if (!j.is_object() || !j.contains(key)) {
    throw InvalidInput("scenario: missing field '" + path + key + "'");
  }
  return j.at(key);
}

inline double number(const json &j, const std::string &path)
{
  if (!j.is_number()) {
    throw InvalidInput("scenario: '" + path + "' must be a number");
  }
  return j.get<double>();
}

inline int integer(const json &j, const std::string &path)
{
  if (!j.is_number_integer()) {
    throw InvalidInput("scenario: '" + path + "' must be an integer");
  }
  return j.get<int>();
}

inline std::vector<double> numbers(const json &j, const std::string &path, std::size_t expected = 0)
{
  if (!j.is_array()) {
    throw InvalidInput("scenario: '" + path + "' must be an array");
  }
  if (expected != 0 && j.size() != expected) {
    throw InvalidInput("scenario: '" + path + "' must have " + std::to_string(expected) + " entries, has " +
                       std::to_string(j.size()));
  }
  std::vector<double> out;
  for (std::size_t k = 0; k < j.size(); ++k) {
    out.push_back(number(j[k], path + "[" + std::to_string(k) + "]"));
  }
  return out;
}

/// rows x cols nested array
inline Mat matrix(const json &j, const std::string &path, int rows, int cols)
{
  if (!j.is_array() || j.size() != static_cast<std::size_t>(rows)) {
    throw InvalidInput("scenario: '" + path + "' must be an array of " + std::to_string(rows) + " rows");
  }
  Mat m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    const auto row = numbers(j[static_cast<std::size_t>(r)], path + "[" + std::to_string(r) + "]",
                             static_cast<std::size_t>(cols));
    for (int c = 0; c < cols; ++c) {
      m(r, c) = row[static_cast<std::size_t>(c)];
    }
  }
  return m;
}

/// N points of dimension n, flattened
inline Vec points(const json &j, const std::string &path, int agents, int n)
{
  const Mat m = matrix(j, path, agents, n);
  Vec p(agents * n);
  for (int i = 0; i < agents; ++i) {
    p.segment(i * n, n) = m.row(i).transpose();
  }
  return p;
}

inline json points_json(const Vec &p, int n)
{
  json out = json::array();
  for (Eigen::Index i = 0; i < p.size() / n; ++i) {
    out.push_back(std::vector<double>(p.data() + i * n, p.data() + (i + 1) * n));
  }
  return out;
}

inline json matrix_json(const Mat &m)
{
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      row.push_back(m(r, c));
    }
    out.push_back(row);
  }
  return out;
}

inline FrameConfig parse_frames(const json &j, int agents, int n)
{
  FrameConfig cfg;
  const std::string rule = field(j, "rule", "frames.").get<std::string>();
  if (rule == "identity") {
    cfg.rule = FrameConfig::Rule::identity;
  } else if (rule == "planar_angles") {
    if (n != 2) {
      throw InvalidInput("scenario: 'frames.rule' planar_angles needs dim 2");
    }
    cfg.rule = FrameConfig::Rule::planar_angles;
    cfg.phi = numbers(field(j, "phi", "frames."), "frames.phi", static_cast<std::size_t>(agents));
  } else if (rule == "spherical_angles") {
    if (n != 3) {
      throw InvalidInput("scenario: 'frames.rule' spherical_angles needs dim 3");
    }
    cfg.rule = FrameConfig::Rule::spherical_angles;
    cfg.phi = numbers(field(j, "phi", "frames."), "frames.phi", static_cast<std::size_t>(agents));
    cfg.theta = numbers(field(j, "theta", "frames."), "frames.theta", static_cast<std::size_t>(agents));
    const std::string variant = j.value("variant", std::string("literal"));
    if (variant != "corrected" && variant != "literal") {
      throw InvalidInput("scenario: 'frames.variant' must be corrected or literal");
    }
    cfg.corrected = variant == "corrected";
  } else if (rule == "vectors") {
    cfg.rule = FrameConfig::Rule::vectors;
    const json &v = field(j, "vectors", "frames.");
    if (!v.is_array() || v.size() != static_cast<std::size_t>(agents)) {
      throw InvalidInput("scenario: 'frames.vectors' must list one frame per agent");
    }
    for (int i = 0; i < agents; ++i) {
      // stored as n direction vectors, i.e. rows; keep them as columns
      cfg.vectors.push_back(
          matrix(v[static_cast<std::size_t>(i)], "frames.vectors[" + std::to_string(i) + "]", n, n).transpose());
    }
  } else {
    throw InvalidInput("scenario: 'frames.rule' unknown value '" + rule + "'");
  }
  return cfg;
}

inline json frames_json(const FrameConfig &cfg)
{
  switch (cfg.rule) {
  case FrameConfig::Rule::identity:
    return {{"rule", "identity"}};
  case FrameConfig::Rule::planar_angles:
    return {{"rule", "planar_angles"}, {"phi", cfg.phi}};
  case FrameConfig::Rule::spherical_angles:
    return {{"rule", "spherical_angles"},
            {"phi", cfg.phi},
            {"theta", cfg.theta},
            {"variant", cfg.corrected ? "corrected" : "literal"}};
  case FrameConfig::Rule::vectors: {
    json v = json::array();
    for (const auto &m : cfg.vectors) {
      v.push_back(matrix_json(m.transpose()));
    }
    return {{"rule", "vectors"}, {"vectors", v}};
  }
  }
  return {};
}

} // namespace detail

inline BodyFrames resolve_frames(const FrameConfig &cfg, int agents, int n)
{
  switch (cfg.rule) {
  case FrameConfig::Rule::identity:
    return BodyFrames::identity(agents, n);
  case FrameConfig::Rule::planar_angles:
    return BodyFrames::orthonormalized(planar_frames(cfg.phi));
  case FrameConfig::Rule::spherical_angles:
    return BodyFrames::orthonormalized(spherical_frames(cfg.phi, cfg.theta, cfg.corrected));
  case FrameConfig::Rule::vectors:
    return BodyFrames::orthonormalized(cfg.vectors);
  }
  throw InvalidInput("frames: unknown rule");
}

inline DitherShape resolve_dither(const DitherConfig &cfg)
{
  if (cfg.amplitude == "tanh") {
    return DitherShape::log_oscillator(Amplitude::tanh());
  }
  if (cfg.amplitude == "rational") {
    return DitherShape::log_oscillator(Amplitude::rational());
  }
  if (cfg.amplitude == "table") {
    return DitherShape::log_oscillator(Amplitude::table(cfg.table_y, cfg.table_a));
  }
  throw InvalidInput("scenario: 'dither.amplitude' unknown value '" + cfg.amplitude + "'");
}

/**
 * Validate and resolve a scenario document. Errors name the offending field. The
 * realization must be a target formation (psi <= 1e-9); failing infinitesimal rigidity is
 * only recorded as a warning here.
 */
inline Scenario scenario_from_json(const json &j)
{
  using namespace detail;
  if (!j.is_object()) {
    throw InvalidInput("scenario: document must be a JSON object");
  }
  if (j.contains("schema_version") && j.at("schema_version") != kScenarioSchemaVersion) {
    throw InvalidInput("scenario: unsupported 'schema_version' " + j.at("schema_version").dump());
  }
  Scenario s;
  s.name = j.value("name", std::string("unnamed"));
  s.dim = integer(field(j, "dim", ""), "dim");
  s.num_agents = integer(field(j, "num_agents", ""), "num_agents");
  if (s.dim <= 0 || s.num_agents <= 0) {
    throw InvalidInput("scenario: 'dim' and 'num_agents' must be positive");
  }

  const json &edges = field(j, "edges", "");
  if (!edges.is_array() || edges.empty()) {
    throw InvalidInput("scenario: 'edges' must be a nonempty array");
  }
  std::vector<std::pair<Edge, double>> pairs;
  std::vector<Edge> seen;
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const std::string path = "edges[" + std::to_string(e) + "]";
    const auto ends = numbers(field(edges[e], "edge", path + "."), path + ".edge", 2);
    const int a = static_cast<int>(ends[0]);
    const int b = static_cast<int>(ends[1]);
    if (a != ends[0] || b != ends[1] || a < 1 || b < 1 || a > s.num_agents || b > s.num_agents || a == b) {
      throw InvalidInput("scenario: '" + path + ".edge' must name two distinct agents in 1.." +
                         std::to_string(s.num_agents));
    }
    Edge edge{std::min(a, b) - 1, std::max(a, b) - 1};
    if (std::find(seen.begin(), seen.end(), edge) != seen.end()) {
      throw InvalidInput("scenario: '" + path + ".edge' duplicate edge " + to_string(edge));
    }
    seen.push_back(edge);
    const double d = number(field(edges[e], "distance", path + "."), path + ".distance");
    if (!(d >= 0.0)) {
      throw InvalidInput("scenario: '" + path + ".distance' must be nonnegative");
    }
    pairs.emplace_back(edge, d);
  }
  s.spec = FormationSpec::from_pairs(s.num_agents, s.dim, pairs);

  s.realization = points(field(j, "realization", ""), "realization", s.num_agents, s.dim);
  s.initial = points(field(j, "initial_positions", ""), "initial_positions", s.num_agents, s.dim);

  s.frame_config = j.contains("frames") ? parse_frames(j.at("frames"), s.num_agents, s.dim) : FrameConfig{};
  try {
    s.frames = resolve_frames(s.frame_config, s.num_agents, s.dim);
  } catch (const InvalidInput &err) {
    throw InvalidInput(std::string("scenario: 'frames' ") + err.what());
  }

  if (j.contains("dither")) {
    const json &d = j.at("dither");
    s.dither.amplitude = d.value("amplitude", std::string("tanh"));
    if (s.dither.amplitude == "table") {
      s.dither.table_y = numbers(field(d, "y", "dither."), "dither.y");
      s.dither.table_a = numbers(field(d, "a", "dither."), "dither.a");
    }
  }
  try {
    s.shape = resolve_dither(s.dither);
  } catch (const InvalidInput &err) {
    throw InvalidInput(std::string("scenario: 'dither' ") + err.what());
  }

  if (j.contains("frequencies")) {
    const json &f = j.at("frequencies");
    const std::string rule = field(f, "rule", "frequencies.").get<std::string>();
    if (rule == "linear") {
      s.frequencies.rule = SinusoidSchedule::Rule::linear;
      s.frequencies.omega = number(field(f, "omega", "frequencies."), "frequencies.omega");
    } else if (rule == "explicit") {
      s.frequencies.rule = SinusoidSchedule::Rule::explicit_table;
      s.frequencies.table = matrix(field(f, "table", "frequencies."), "frequencies.table", s.num_agents, s.dim);
    } else {
      throw InvalidInput("scenario: 'frequencies.rule' unknown value '" + rule + "'");
    }
  }
  s.phases = j.contains("phases") ? matrix(j.at("phases"), "phases", s.num_agents, s.dim)
                                  : Mat::Zero(s.num_agents, s.dim);
  try {
    (void)s.schedule();
  } catch (const InvalidInput &err) {
    throw InvalidInput(std::string("scenario: 'frequencies' ") + err.what());
  }

  s.t0 = j.contains("t0") ? number(j.at("t0"), "t0") : 0.0;
  s.t_final = number(field(j, "t_final", ""), "t_final");
  if (!(s.t_final > s.t0)) {
    throw InvalidInput("scenario: 't_final' must exceed 't0'");
  }
  if (j.contains("dt") && !j.at("dt").is_null()) {
    s.dt = number(j.at("dt"), "dt");
    if (!(*s.dt > 0.0)) {
      throw InvalidInput("scenario: 'dt' must be positive");
    }
  }
  s.seed = j.value("seed", std::uint64_t{0});

  const double residual = psi_global(s.spec, s.realization);
  if (residual > 1e-9) {
    throw InvalidInput("scenario: 'realization' does not meet the desired distances (psi = " +
                       std::to_string(residual) + ")");
  }
  if (!is_infinitesimally_rigid(s.target_framework()).is_inf_rigid) {
    s.warnings.push_back("realization is not infinitesimally rigid");
  }
  return s;
}

inline json scenario_to_json(const Scenario &s)
{
  using namespace detail;
  json j;
  j["schema_version"] = kScenarioSchemaVersion;
  j["name"] = s.name;
  j["dim"] = s.dim;
  j["num_agents"] = s.num_agents;
  json edges = json::array();
  const Vec d = s.spec.desired();
  for (std::size_t e = 0; e < s.spec.graph().num_edges(); ++e) {
    const Edge &edge = s.spec.graph().edges()[e];
    edges.push_back({{"edge", {edge.i + 1, edge.j + 1}}, {"distance", d(static_cast<Eigen::Index>(e))}});
  }
  j["edges"] = edges;
  j["realization"] = points_json(s.realization, s.dim);
  j["initial_positions"] = points_json(s.initial, s.dim);
  j["frames"] = frames_json(s.frame_config);
  json dither = {{"amplitude", s.dither.amplitude}};
  if (s.dither.amplitude == "table") {
    dither["y"] = s.dither.table_y;
    dither["a"] = s.dither.table_a;
  }
  j["dither"] = dither;
  if (s.frequencies.rule == SinusoidSchedule::Rule::linear) {
    j["frequencies"] = {{"rule", "linear"}, {"omega", s.frequencies.omega}};
  } else {
    j["frequencies"] = {{"rule", "explicit"}, {"table", matrix_json(s.frequencies.table)}};
  }
  j["phases"] = matrix_json(s.phases);
  j["t0"] = s.t0;
  j["t_final"] = s.t_final;
  j["dt"] = s.dt ? json(*s.dt) : json(nullptr);
  j["seed"] = s.seed;
  return j;
}

inline Scenario parse_scenario(const std::string &text)
{
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error &err) {
    throw InvalidInput(std::string("scenario: malformed JSON: ") + err.what());
  }
  try {
    return scenario_from_json(j);
  } catch (const json::exception &err) {
    throw InvalidInput(std::string("scenario: ") + err.what());
  }
}

// ---------------------------------------------------------------------------------------
// presets

/// K4 rectangle 3 x 4, reference initial state, phi_i = i pi / 3, A = tanh, omega = 7, T = 500.
inline Scenario rectangle_preset()
{
  const double pi = std::numbers::pi;
  json j = {
      {"name", "rectangle"},
      {"dim", 2},
      {"num_agents", 4},
      {"edges",
       {{{"edge", {1, 2}}, {"distance", 3}},
        {{"edge", {1, 3}}, {"distance", 5}},
        {{"edge", {1, 4}}, {"distance", 4}},
        {{"edge", {2, 3}}, {"distance", 4}},
        {{"edge", {2, 4}}, {"distance", 5}},
        {{"edge", {3, 4}}, {"distance", 3}}}},
      {"realization", {{0, 0}, {3, 0}, {3, 4}, {0, 4}}},
      {"initial_positions", {{0, 0}, {-1, 4}, {5, 3}, {3, 0}}},
      {"frames", {{"rule", "planar_angles"}, {"phi", {pi / 3, 2 * pi / 3, pi, 4 * pi / 3}}}},
      {"dither", {{"amplitude", "tanh"}}},
      {"frequencies", {{"rule", "linear"}, {"omega", 7.0}}},
      {"t0", 0.0},
      {"t_final", 500.0},
      {"seed", 0},
  };
  return scenario_from_json(j);
}

/// K5 minus {4,5}, all distances 2, reference initial state and angles, A = tanh, omega = 7, T = 800.
/// The third frame vector is taken literally and Gram-Schmidt sanitized unless corrected_frames is set.
inline Scenario double_tetrahedron_preset(bool corrected_frames = false)
{
  const double pi = std::numbers::pi;
  const double r = 2.0 / std::sqrt(3.0);
  const double h = std::sqrt(8.0 / 3.0);
  json edges = json::array();
  for (int a = 1; a <= 5; ++a) {
    for (int b = a + 1; b <= 5; ++b) {
      if (a == 4 && b == 5) {
        continue;
      }
      edges.push_back({{"edge", {a, b}}, {"distance", 2}});
    }
  }
  std::vector<double> phi;
  std::vector<double> theta;
  for (int i = 1; i <= 5; ++i) {
    phi.push_back(i * pi / 3);
    theta.push_back(i * pi / 6);
  }
  json j = {
      {"name", "double-tetrahedron"},
      {"dim", 3},
      {"num_agents", 5},
      {"edges", edges},
      {"realization",
       {{r, 0, 0},
        {-r / 2, 1.0, 0},
        {-r / 2, -1.0, 0},
        {0, 0, h},
        {0, 0, -h}}},
      {"initial_positions",
       {{0, -1.0, 0.5}, {1.8, 1.6, -0.1}, {-0.2, 1.8, 0.05}, {1.2, 1.9, 1.7}, {-1.0, -1.5, -1.2}}},
      {"frames",
       {{"rule", "spherical_angles"},
        {"phi", phi},
        {"theta", theta},
        {"variant", corrected_frames ? "corrected" : "literal"}}},
      {"dither", {{"amplitude", "tanh"}}},
      {"frequencies", {{"rule", "linear"}, {"omega", 7.0}}},
      {"t0", 0.0},
      {"t_final", 800.0},
      {"seed", 0},
  };
  return scenario_from_json(j);
}

inline std::vector<std::string> preset_names() { return {"rectangle", "double-tetrahedron", "double-tetrahedron-corrected"}; }

/// Preset name or path to a JSON file.
inline Scenario load_scenario(const std::string &name_or_path)
{
  if (name_or_path == "rectangle") {
    return rectangle_preset();
  }
  if (name_or_path == "double-tetrahedron" || name_or_path == "tetrahedron") {
    return double_tetrahedron_preset();
  }
  if (name_or_path == "double-tetrahedron-corrected") {
    return double_tetrahedron_preset(true);
  }
  std::ifstream in(name_or_path);
  if (!in) {
    throw InvalidInput("scenario: cannot open '" + name_or_path + "' (and it is not a preset name)");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

inline void save_scenario(const Scenario &s, const std::string &path)
{
  std::ofstream out(path);
  if (!out) {
    throw InvalidInput("scenario: cannot write '" + path + "'");
  }
  out << scenario_to_json(s).dump(2) << '\n';
}

} // namespace distform

#endif // DISTFORM_SCENARIO_HPP_
