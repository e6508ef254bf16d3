// Command-line front end. Every run writes CSV data files whose first line is
// "# manifest_hash=<fnv1a64 of the identity part of the manifest>" and a
// pretty-printed manifest.json with sorted keys.

#include "wasep/asymlimit.hpp"
#include "wasep/dynamics.hpp"
#include "wasep/elgp.hpp"
#include "wasep/functionals.hpp"
#include "wasep/microsim.hpp"
#include "wasep/ratefn.hpp"
#include "wasep/stationary.hpp"
#include "wasep/verify.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <Eigen/Core>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <sstream>

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace wasep;

namespace {

constexpr int kExitFailedChecks = 1;
constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string command;
  std::string E = "-2";  // a number or "E0"
  double rho_minus = 0.2;
  double rho_plus = 0.8;
  Index M = 401;
  double dt = 0.0;
  double T = 5.0;
  double output_dt = 0.002;
  int output_stride = 25;
  int N = 16;
  double sim_horizon = 110.0;
  double burn_in = 10.0;
  int samples = 8;
  std::uint64_t seed = 0x5eed;
  int threads = 1;
  std::string out_dir;
  std::string profile;
  std::string path;
  std::string gamma;
  bool decompose = false;
  std::vector<double> fields{-3.0, -10.0, -30.0, -100.0, -300.0};
  std::vector<int> criteria;
};

json config_json(const RunConfig& c) {
  return json{{"E", c.E},           {"rho_minus", c.rho_minus},     {"rho_plus", c.rho_plus},
              {"M", c.M},           {"dt", c.dt},                   {"T", c.T},
              {"output_dt", c.output_dt}, {"output_stride", c.output_stride}, {"N", c.N},
              {"sim_horizon", c.sim_horizon}, {"burn_in", c.burn_in}, {"samples", c.samples},
              {"seed", c.seed},     {"threads", c.threads},         {"profile", c.profile},
              {"path", c.path},     {"gamma", c.gamma},             {"decompose", c.decompose},
              {"fields", c.fields}, {"criteria", c.criteria}};
}

// Keys of a JSON config file override defaults; flags given on the command line
// override both. `given` reports whether a flag was set explicitly.
void apply_config_file(RunConfig& c, const std::string& file, const std::function<bool(const std::string&)>& given) {
  std::ifstream in(file);
  if (!in) throw ValidationError("cannot open config file " + file);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config file is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ValidationError("config file must hold a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    if (given(k)) continue;
    try {
      if (k == "E") c.E = it->is_string() ? it->get<std::string>() : json(it->get<double>()).dump();
      else if (k == "rho_minus") c.rho_minus = it->get<double>();
      else if (k == "rho_plus") c.rho_plus = it->get<double>();
      else if (k == "M") c.M = it->get<Index>();
      else if (k == "dt") c.dt = it->get<double>();
      else if (k == "T") c.T = it->get<double>();
      else if (k == "output_dt") c.output_dt = it->get<double>();
      else if (k == "output_stride") c.output_stride = it->get<int>();
      else if (k == "N") c.N = it->get<int>();
      else if (k == "sim_horizon") c.sim_horizon = it->get<double>();
      else if (k == "burn_in") c.burn_in = it->get<double>();
      else if (k == "samples") c.samples = it->get<int>();
      else if (k == "seed") c.seed = it->get<std::uint64_t>();
      else if (k == "threads") c.threads = it->get<int>();
      else if (k == "out_dir") c.out_dir = it->get<std::string>();
      else if (k == "profile") c.profile = it->get<std::string>();
      else if (k == "path") c.path = it->get<std::string>();
      else if (k == "gamma") c.gamma = it->get<std::string>();
      else if (k == "decompose") c.decompose = it->get<bool>();
      else if (k == "fields") c.fields = it->get<std::vector<double>>();
      else if (k == "criteria") c.criteria = it->get<std::vector<int>>();
      else throw ValidationError("unknown config key " + k);
    } catch (const json::exception& e) {
      throw ValidationError("config key " + k + ": " + e.what());
    }
  }
}

double parse_field(const std::string& s, const Params& reservoirs) {
  if (s == "E0") return reservoirs.E0();
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ValidationError("E must be a finite number or E0, got " + s);
  }
}

bool needs_subcritical(const std::string& cmd) {
  return cmd == "stationary" || cmd == "phi" || cmd == "free-energy" || cmd == "optimal-path" || cmd == "path-cost";
}

Params validated_params(const RunConfig& c) {
  if (!(c.rho_minus > 0.0 && c.rho_minus < c.rho_plus && c.rho_plus < 1.0))
    throw ValidationError("need 0 < rho_minus < rho_plus < 1");
  const Params reservoirs(0.0, c.rho_minus, c.rho_plus);
  const Params p = reservoirs.with_field(parse_field(c.E, reservoirs));
  if (needs_subcritical(c.command) && p.field() > p.E0())
    throw ValidationError("this command needs E <= E0 = " + json(p.E0()).dump());
  if (c.command == "optimal-path" && !(p.field() < p.E0())) throw ValidationError("optimal-path needs E < E0");
  if (c.command == "free-energy-asym" && !(p.field() < 0.0)) throw ValidationError("free-energy-asym needs E < 0");
  if (c.M < 9) throw ValidationError("M must be at least 9");
  if (!(c.T > 0.0) || !(c.dt >= 0.0) || !(c.output_dt > 0.0) || c.output_stride < 1)
    throw ValidationError("need T > 0, dt >= 0, output_dt > 0, output_stride >= 1");
  if (c.N < 2 || c.samples < 1 || !(c.sim_horizon > 0.0) || !(c.burn_in >= 0.0))
    throw ValidationError("need N >= 2, samples >= 1, sim_horizon > 0, burn_in >= 0");
  if (c.threads < 1) throw ValidationError("threads must be positive");
  for (double E : c.fields)
    if (c.command == "asym-limit" && !(E < 0.0)) throw ValidationError("asym-limit fields must be negative");
  return p;
}

// ---- output ----------------------------------------------------------------

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) out += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return out + "\"";
}

class Output {
 public:
  Output(fs::path dir, json identity) : dir_(std::move(dir)), identity_(std::move(identity)) {
    fs::create_directories(dir_);
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(identity_.dump())));
    hash_ = buf;
  }

  const std::string& hash() const { return hash_; }

  void csv(const std::string& name, const std::vector<std::string>& header,
           const std::vector<std::vector<double>>& rows) {
    std::ofstream out(dir_ / name);
    out << "# manifest_hash=" << hash_ << "\n";
    for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << quote(header[i]);
    out << "\n";
    for (const auto& row : rows) {
      for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << fmt(row[i]);
      out << "\n";
    }
    if (!out) throw std::runtime_error("failed writing " + (dir_ / name).string());
    files_.push_back(name);
  }

  void manifest(const json& headline, double wall) {
    json m = identity_;
    m["manifest_hash"] = hash_;
    m["headline"] = headline;
    m["outputs"] = files_;
    m["wall_time_s"] = wall;
    std::ofstream(dir_ / "manifest.json") << m.dump(2) << "\n";
  }

  void json_file(const std::string& name, json body) {
    body["manifest_hash"] = hash_;
    std::ofstream(dir_ / name) << body.dump(2) << "\n";
    files_.push_back(name);
  }

  void error(const json& record) { std::ofstream(dir_ / "error.json") << record.dump(2) << "\n"; }

 private:
  fs::path dir_;
  json identity_;
  std::string hash_;
  std::vector<std::string> files_;
};

// ---- input -----------------------------------------------------------------

std::vector<std::vector<double>> read_csv(const std::string& file, std::size_t columns) {
  std::ifstream in(file);
  if (!in) throw ValidationError("cannot open " + file);
  std::vector<std::vector<double>> rows;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (header) {
      header = false;
      continue;
    }
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw ValidationError("non-numeric cell '" + cell + "' in " + file);
      }
    }
    if (row.size() < columns) throw ValidationError("too few columns in " + file);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ValidationError("no data rows in " + file);
  return rows;
}

// Profile CSV with columns u, rho (sorted in u, covering [-1, 1]), linearly
// interpolated onto the grid.
DensityProfile read_profile(const std::string& file, const Grid& grid) {
  const auto rows = read_csv(file, 2);
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (!(rows[i][0] > rows[i - 1][0])) throw ValidationError("profile u values must increase: " + file);
  if (rows.front()[0] > -1.0 + 1e-12 || rows.back()[0] < 1.0 - 1e-12)
    throw ValidationError("profile must cover [-1, 1]: " + file);
  Vec v(grid.size());
  std::size_t j = 0;
  for (Index i = 0; i < grid.size(); ++i) {
    const double u = grid.node(i);
    while (j + 2 < rows.size() && rows[j + 1][0] < u) ++j;
    const double a = rows[j][0], b = rows[j + 1][0];
    const double s = std::clamp((u - a) / (b - a), 0.0, 1.0);
    v(i) = rows[j][1] + s * (rows[j + 1][1] - rows[j][1]);
  }
  try {
    return DensityProfile(grid, v);
  } catch (const NumericalError& e) {
    throw ValidationError(std::string("profile ") + file + ": " + e.what());
  }
}

// Default target when no profile is given: rho_bar_E + 0.1 sin(pi (u + 1)).
DensityProfile default_profile(const Params& p, const Grid& grid) {
  const DensityProfile rho_bar = solve_stationary(p, grid).rho_bar;
  Vec v = rho_bar.values();
  for (Index i = 1; i + 1 < grid.size(); ++i) v(i) += 0.1 * std::sin(std::numbers::pi * (grid.node(i) + 1.0));
  return DensityProfile(grid, v.cwiseMax(0.0).cwiseMin(1.0));
}

DensityProfile input_profile(const RunConfig& c, const Params& p, const Grid& grid) {
  return c.profile.empty() ? default_profile(p, grid) : read_profile(c.profile, grid);
}

// Long-format path CSV with columns t, u, rho; every time carries the full grid.
SpacetimePath read_path(const std::string& file, Index M) {
  const auto rows = read_csv(file, 3);
  std::map<double, std::vector<std::pair<double, double>>> slices;
  for (const auto& r : rows) slices[r[0]].emplace_back(r[1], r[2]);
  const Grid grid(M);
  std::vector<double> times;
  Mat values(M, static_cast<Index>(slices.size()));
  Index k = 0;
  for (auto& [t, pts] : slices) {
    if (static_cast<Index>(pts.size()) != M)
      throw ValidationError("path time " + fmt(t) + " has " + std::to_string(pts.size()) + " rows, expected M");
    std::sort(pts.begin(), pts.end());
    for (Index i = 0; i < M; ++i) {
      if (std::abs(pts[i].first - grid.node(i)) > 1e-9) throw ValidationError("path u values are not the grid nodes");
      values(i, k) = pts[i].second;
    }
    times.push_back(t);
    ++k;
  }
  return SpacetimePath(grid, std::move(times), std::move(values));
}

std::vector<std::vector<double>> path_rows(const SpacetimePath& path, int stride) {
  std::vector<std::vector<double>> rows;
  const Index K = path.steps();
  for (Index k = 0; k < K; ++k) {
    if (k % stride != 0 && k != K - 1) continue;
    for (Index i = 0; i < path.grid().size(); ++i)
      rows.push_back({path.times()[k], path.grid().node(i), path.values()(i, k)});
  }
  return rows;
}

PDEConfig pde_config(const RunConfig& c) {
  PDEConfig pde;
  pde.grid = Grid(c.M);
  pde.dt = c.dt;
  pde.horizon = c.T;
  pde.output_dt = c.output_dt;
  return pde;
}

json diagnostics_json(const std::map<std::string, double>& d) {
  json j = json::object();
  for (const auto& [k, v] : d) j[k] = v;
  return j;
}

// ---- commands --------------------------------------------------------------

json cmd_stationary(const RunConfig& c, const Params& p, Output& out) {
  const Grid grid(c.M);
  const StationaryState st = solve_stationary(p, grid);
  std::vector<std::vector<double>> rows;
  for (Index i = 0; i < grid.size(); ++i) rows.push_back({grid.node(i), st.rho_bar[i], st.phi_bar[i]});
  out.csv("stationary.csv", {"u", "rho_bar", "phi_bar"}, rows);
  json h{{"J", st.J},
         {"current_residual", st.diagnostics.current_residual},
         {"ode_residual", st.diagnostics.ode_residual},
         {"endpoint_error", st.diagnostics.endpoint_error}};
  h["A_E"] = st.A_E ? json(*st.A_E) : json(nullptr);
  if (p.field() < 0.0) {
    const AsymmetricConstants a = asymmetric_constants(p);
    h["rho_bar_a"] = a.rho_bar_a;
    h["A_a"] = a.A_a;
  }
  return h;
}

json cmd_phi(const RunConfig& c, const Params& p, Output& out) {
  const Grid grid(c.M);
  const DensityProfile rho = input_profile(c, p, grid);
  const ELSolution sol = solve_phi(rho, p);
  std::vector<std::vector<double>> rows;
  for (Index i = 0; i < grid.size(); ++i) rows.push_back({grid.node(i), rho[i], sol.phi[i], sol.slope(i)});
  out.csv("phi.csv", {"u", "rho", "phi", "phi_slope"}, rows);
  json h{{"branch", to_string(sol.branch)}, {"iterations", sol.iterations}, {"el_residual", sol.residual},
         {"fixed_point_increment", sol.increment}, {"omega", sol.omega}};
  if (p.field() < p.E0()) {
    const ShootingResult sh = shooting_oracle(rho, p);
    h["shooting_sup_difference"] = (sh.phi.values() - sol.phi.values()).cwiseAbs().maxCoeff();
  }
  return h;
}

json cmd_free_energy(const RunConfig& c, const Params& p, Output& out) {
  const Grid grid(c.M);
  const DensityProfile rho = input_profile(c, p, grid);
  const RateReport r = S_E(rho, p);
  const DensityProfile rho_bar = solve_stationary(p, grid).rho_bar;
  std::vector<std::vector<double>> rows;
  for (Index i = 0; i < grid.size(); ++i)
    rows.push_back({grid.node(i), rho[i], r.maximizer ? (*r.maximizer)[i] : NAN});
  out.csv("free_energy.csv", {"u", "rho", "maximizer"}, rows);
  return json{{"S_E", r.value},
              {"relative_entropy_bound", relative_entropy(rho, rho_bar.values())},
              {"diagnostics", diagnostics_json(r.diagnostics)}};
}

json cmd_free_energy_asym(const RunConfig& c, const Params& p, Output& out) {
  const Grid grid(c.M);
  const DensityProfile rho = input_profile(c, p, grid);
  const RateReport r = S_a(rho, p);
  std::vector<std::vector<double>> rows;
  for (Index i = 0; i < grid.size(); ++i) rows.push_back({grid.node(i), rho[i], (*r.maximizer)[i]});
  out.csv("free_energy_asym.csv", {"u", "rho", "maximizer"}, rows);
  const AsymmetricConstants a = asymmetric_constants(p);
  Vec ref = Vec::Constant(grid.size(), a.rho_bar_a);
  return json{{"S_a", r.value},
              {"relative_entropy_bound", relative_entropy(rho, ref)},
              {"diagnostics", diagnostics_json(r.diagnostics)}};
}

json cmd_optimal_path(const RunConfig& c, const Params& p, Output& out) {
  OptimalPathConfig oc;
  oc.pde = pde_config(c);
  const Grid& grid = oc.pde.grid;
  const DensityProfile rho = input_profile(c, p, grid);
  const OptimalPath op = optimal_path(rho, p, oc);
  const DensityProfile rho_bar = solve_stationary(p, grid).rho_bar;
  const DensityProfile end = op.reversed.profile(0);
  const double I_rev = rate_I_T(op.reversed, end, p).I_T;
  const double I_join = rate_I_T(op.joining, rho_bar, p).I_T;
  const double c1 = c1_norm(end.values() - rho_bar.values(), grid);
  out.csv("optimal_path.csv", {"t", "u", "rho"}, path_rows(op.full, c.output_stride));
  const PDEResidual res = transformed_pde_check(grid, op.adjoint.F.times(), op.adjoint.psi, p);
  return json{{"S_E_target", S_E(rho, p).value},
              {"S_E_at_T1", S_E(end, p).value},
              {"reversed_cost", I_rev},
              {"joining_cost", I_join},
              {"joining_bound", joining_cost_constant(rho_bar, end, p) * c1 * c1},
              {"total_cost", I_rev + I_join},
              {"T1", op.T1},
              {"mollified", op.mollified},
              {"mollification_error", op.mollification_error},
              {"transformed_pde_residual_sup", res.sup},
              {"transformed_pde_residual_mean", res.mean},
              {"adjoint", diagnostics_json(op.adjoint.diagnostics)}};
}

json cmd_path_cost(const RunConfig& c, const Params& p, Output& out) {
  if (c.path.empty()) throw ValidationError("path-cost needs --path");
  const SpacetimePath path = read_path(c.path, c.M);
  const DensityProfile gamma = c.gamma.empty() ? path.profile(0) : read_profile(c.gamma, path.grid());
  const CostBreakdown cost = rate_I_T(path, gamma, p, c.decompose);
  std::vector<std::vector<double>> rows;
  for (Index k = 0; k < cost.slice_cost.size(); ++k) rows.push_back({path.times()[k], cost.slice_cost(k)});
  out.csv("path_cost.csv", {"t", "slice_cost"}, rows);
  json h{{"I_T", std::isfinite(cost.I_T) ? json(cost.I_T) : json("inf")},
         {"Q", std::isfinite(cost.Q) ? json(cost.Q) : json("inf")},
         {"initial_mismatch", cost.initial_mismatch},
         {"degenerate", cost.degenerate}};
  if (cost.K_norm_sq) {
    h["K_norm_sq"] = *cost.K_norm_sq;
    h["delta_S"] = *cost.delta_S;
  }
  return h;
}

json cmd_simulate(const RunConfig& c, const Params& p, Output& out) {
  SimParams sim{.params = p, .N = c.N, .horizon = c.sim_horizon};
  sim.seed = c.seed;
  sim.n_samples = c.samples;
  sim.burn_in = c.burn_in;
  const ProfileEstimate est = stationary_estimate(sim, c.threads);
  const bool has_profile = p.field() <= p.E0();
  Vec reference = Vec::Constant(est.u.size(), NAN);
  if (has_profile) {
    const DensityProfile rho_bar = solve_stationary(p, Grid(16 * c.N + 1)).rho_bar;
    for (Index i = 0; i < est.u.size(); ++i) reference(i) = rho_bar[8 * (i + 1)];
  }
  std::vector<std::vector<double>> rows;
  for (Index i = 0; i < est.u.size(); ++i) rows.push_back({est.u(i), est.mean(i), est.std_error(i), reference(i)});
  out.csv("simulation.csv", {"u", "mean", "std_error", "rho_bar"}, rows);

  json diag{{"events", est.events}};
  if (has_profile && c.samples > 1) {
    double z = 0.0;
    for (Index i = 0; i < est.u.size(); ++i) z = std::max(z, std::abs(est.mean(i) - reference(i)) / est.std_error(i));
    diag["max_z_vs_rho_bar"] = z;
  }
  if (c.N <= 7) {
    const ExactStationary ex = exact_stationary(p, c.N);
    const Vec m = site_marginals(ex);
    diag["exact_product_fit_tv"] = product_fit_distance(ex);
    diag["exact_detailed_balance_defect"] = detailed_balance_defect(ex, p);
    double worst = 0.0;
    for (Index s = 0; s < ex.mu.size(); ++s)
      worst = std::max(worst, std::abs(ex.mu(s) - product_measure(LatticeConfig::from_state(c.N, s), p)));
    diag["exact_product_measure_difference"] = worst;
    diag["product_measure_holds"] = worst <= 1e-12;
    if (c.samples > 1) {
      double z = 0.0;
      for (Index i = 0; i < m.size(); ++i) z = std::max(z, std::abs(est.mean(i) - m(i)) / est.std_error(i));
      diag["max_z_vs_exact_marginals"] = z;
    }
  }
  out.json_file("stationarity.json", diag);
  return diag;
}

json cmd_asym_limit(const RunConfig& c, const Params& p, Output& out) {
  ProfileFunction rho = [](double u) { return 0.5 + 0.3 * std::sin(std::numbers::pi * u); };
  if (!c.profile.empty()) {
    const DensityProfile given = read_profile(c.profile, Grid(c.M));
    rho = [given](double u) { return std::clamp(interpolate_cubic(given.grid(), given.values(), u), 0.0, 1.0); };
  }
  const auto rows = gamma_limit_sweep(rho, p, c.fields, c.threads);
  const auto mx = maximizer_convergence(rho, p, c.fields, c.threads);
  std::vector<std::vector<double>> g, m;
  json errors = json::array();
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto& r = rows[k];
    g.push_back({r.E, static_cast<double>(r.M), r.S_E, r.S_a, r.gap, r.A_shift, r.A_a, r.jensen});
    m.push_back({mx[k].E, static_cast<double>(mx[k].M), mx[k].weak_distance, mx[k].l1_distance, mx[k].sup_distance,
                 mx[k].layer_width});
    if (!r.error.empty()) errors.push_back({{"E", r.E}, {"table", "gamma"}, {"error", r.error}});
    if (!mx[k].error.empty()) errors.push_back({{"E", r.E}, {"table", "maximizer"}, {"error", mx[k].error}});
  }
  out.csv("asym_limit.csv", {"E", "M", "S_E", "S_a", "gap", "A_E_minus_log_abs_E", "A_a", "jensen_defect"}, g);
  out.csv("maximizers.csv", {"E", "M", "weak_distance", "l1_distance", "sup_distance", "layer_width"}, m);
  return json{{"rows", rows.size()}, {"row_errors", errors}};
}

json cmd_verify(const RunConfig& c, const Params& p, Output& out, bool& all_passed) {
  VerifyConfig vc;
  vc.rho_minus = p.rho_minus();
  vc.rho_plus = p.rho_plus();
  vc.E = p.field();
  vc.M = c.M;
  vc.seed = c.seed;
  vc.threads = c.threads;
  vc.criteria = c.criteria;
  std::vector<std::vector<double>> rows;
  json results = json::array();
  all_passed = true;
  std::vector<int> ids = vc.criteria;
  if (ids.empty())
    for (int i = 1; i <= kCriterionCount; ++i) ids.push_back(i);
  for (int id : ids) {
    const CriterionResult r = run_criterion(id, vc);
    std::cout << format_result(r) << std::endl;
    all_passed = all_passed && r.passed;
    rows.push_back({static_cast<double>(r.id), r.passed ? 1.0 : 0.0, r.seconds});
    json values = json::object();
    for (const auto& [k, v] : r.values) values[k] = v;
    results.push_back({{"id", r.id}, {"title", r.title}, {"passed", r.passed}, {"values", values}, {"note", r.note}});
  }
  out.csv("verify.csv", {"criterion", "passed", "seconds"}, rows);
  return json{{"all_passed", all_passed}, {"criteria", results}};
}

json versions() {
  return json{{"wasep", WASEP_VERSION},
              {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                            std::to_string(EIGEN_MINOR_VERSION)},
              {"compiler", __VERSION__},
              {"cxx", __cplusplus}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quasi-potential of the boundary-driven weakly asymmetric exclusion process"};
  app.require_subcommand(1);
  RunConfig c;
  std::string config_file;
  const char* env_out = std::getenv("WASEP_OUT_DIR");
  c.out_dir = env_out ? env_out : "wasep_out";

  // Config key -> flag name, for "flags override the file".
  const std::map<std::string, std::string> flag_of{
      {"E", "--E"}, {"rho_minus", "--rho-minus"}, {"rho_plus", "--rho-plus"}, {"M", "--M"}, {"seed", "--seed"},
      {"threads", "--threads"}, {"out_dir", "--out"}, {"profile", "--profile"}, {"T", "--T"}, {"dt", "--dt"},
      {"output_dt", "--output-dt"}, {"output_stride", "--output-stride"}, {"path", "--path"}, {"gamma", "--gamma"},
      {"decompose", "--decompose"}, {"N", "--N"}, {"sim_horizon", "--horizon"}, {"samples", "--samples"},
      {"burn_in", "--burn-in"}, {"fields", "--fields"}, {"criteria", "--criteria"}};
  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_file, "JSON config file; flags override its keys");
    sub->add_option("--E", c.E, "external field, a number or E0");
    sub->add_option("--rho-minus", c.rho_minus, "left reservoir density");
    sub->add_option("--rho-plus", c.rho_plus, "right reservoir density");
    sub->add_option("--M", c.M, "grid nodes on [-1, 1]");
    sub->add_option("--seed", c.seed, "master seed");
    sub->add_option("--threads", c.threads, "worker cap for sweeps and replicas");
    sub->add_option("--out", c.out_dir, "output directory (default $WASEP_OUT_DIR or wasep_out)");
    sub->add_option("--profile", c.profile, "CSV with columns u,rho");
  };
  auto add = [&](const std::string& name, const std::string& help) {
    CLI::App* sub = app.add_subcommand(name, help);
    common(sub);
    return sub;
  };
  add("stationary", "stationary current, profile and A_E");
  add("phi", "Euler-Lagrange map Phi(rho) with the shooting cross-check");
  add("free-energy", "S_E(rho) and its maximizer");
  add("free-energy-asym", "S_a(rho) and its monotone maximizer");
  CLI::App* opt = add("optimal-path", "adjoint relaxation path and its costs");
  opt->add_option("--T", c.T, "adjoint horizon T1");
  opt->add_option("--dt", c.dt, "PDE step (0 selects h^2)");
  opt->add_option("--output-dt", c.output_dt, "snapshot spacing");
  opt->add_option("--output-stride", c.output_stride, "write every k-th snapshot");
  CLI::App* cost = add("path-cost", "I_T of a path given as CSV t,u,rho");
  cost->add_option("--path", c.path, "path CSV");
  cost->add_option("--gamma", c.gamma, "initial profile CSV (default: the path at its first time)");
  cost->add_flag("--decompose", c.decompose, "also report ||K||^2 and the free-energy change");
  CLI::App* sim = add("simulate", "replicated microscopic simulation");
  sim->add_option("--N", c.N, "lattice parameter; 2N - 1 sites");
  sim->add_option("--horizon", c.sim_horizon, "diffusive time per replica");
  sim->add_option("--samples", c.samples, "replicas");
  sim->add_option("--burn-in", c.burn_in, "time excluded from averages");
  CLI::App* asym = add("asym-limit", "sweep of S_E, S_a and maximizers as E -> -infinity");
  asym->add_option("--fields", c.fields, "negative fields")->delimiter(',');
  CLI::App* ver = add("verify", "acceptance suite, one line per criterion");
  ver->add_option("--criteria", c.criteria, "subset of criteria")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }
  CLI::App* selected = app.get_subcommands().front();
  c.command = selected->get_name();

  json identity;
  Params params(-2.0, 0.2, 0.8);
  try {
    if (!config_file.empty())
      apply_config_file(c, config_file, [&](const std::string& k) {
        auto it = flag_of.find(k);
        if (it == flag_of.end()) return false;
        const CLI::Option* o = selected->get_option_no_throw(it->second);
        return o != nullptr && o->count() > 0;
      });
    params = validated_params(c);
    identity = json{{"command", c.command}, {"config", config_json(c)}, {"seed", c.seed}, {"versions", versions()}};
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const NumericalError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  }

  Output out(c.out_dir, identity);
  const auto t0 = std::chrono::steady_clock::now();
  try {
    json headline;
    bool passed = true;
    if (c.command == "stationary") headline = cmd_stationary(c, params, out);
    else if (c.command == "phi") headline = cmd_phi(c, params, out);
    else if (c.command == "free-energy") headline = cmd_free_energy(c, params, out);
    else if (c.command == "free-energy-asym") headline = cmd_free_energy_asym(c, params, out);
    else if (c.command == "optimal-path") headline = cmd_optimal_path(c, params, out);
    else if (c.command == "path-cost") headline = cmd_path_cost(c, params, out);
    else if (c.command == "simulate") headline = cmd_simulate(c, params, out);
    else if (c.command == "asym-limit") headline = cmd_asym_limit(c, params, out);
    else headline = cmd_verify(c, params, out, passed);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.manifest(headline, wall);
    if (c.command != "verify") std::cout << headline.dump(2) << "\n";
    return passed ? 0 : kExitFailedChecks;
  } catch (const ValidationError& e) {
    out.error({{"kind", "validation"}, {"message", e.what()}});
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const NumericalError& e) {
    json rec{{"kind", to_string(e.kind())}, {"message", e.what()}};
    rec["best_residual"] = std::isfinite(e.best_residual()) ? json(e.best_residual()) : json(nullptr);
    out.error(rec);
    std::cerr << "numerical failure (" << to_string(e.kind()) << "): " << e.what() << "\n";
    return kExitNumerical;
  }
}
