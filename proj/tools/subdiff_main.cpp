#include <CLI11.hpp>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "subdiff/forward.hpp"
#include "subdiff/frequency.hpp"
#include "subdiff/inverse.hpp"
#include "subdiff/io.hpp"
#include "subdiff/specfun.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace subdiff;

namespace {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct CertError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

const json& need(const json& j, const std::string& field,
                 const std::string& where) {
  auto it = j.find(field);
  if (it == j.end())
    throw ConfigError("missing field '" + where + "." + field + "'");
  return *it;
}

template <typename T>
T as(const json& j, const std::string& field, const std::string& where) {
  try {
    return need(j, field, where).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("bad value for '" + where + "." + field + "': " +
                      e.what());
  }
}

template <typename T>
T as_or(const json& j, const std::string& field, const std::string& where,
        T fallback) {
  if (!j.contains(field)) return fallback;
  return as<T>(j, field, where);
}

struct Experiment {
  BoxDomain domain;
  double alpha = 0.5;
  int basis_size = 6;
  std::shared_ptr<const EigenBasis> basis;
  Target target = Target::source;
  SpectralField unknown;
  SourceTime g;
  std::string g_type = "exponential";
  double T = 200.0;
  int nodes = 1200;
  int boundary_order = 8;
  double omega_min = 0.5, omega_max = 3.0;
  int n_omega = 4, n_dir = 8;
  int k = 1;
  double theta = 0.5;
  double c0 = 0.01;
  int s_cont = 5;
  double xi_angle = 0.0;
  int grid_n = 60;
  int sweep_count = 6;
  double noise_level = 0.0;
};

SpectralField build_unknown(const json& spec,
                            std::shared_ptr<const EigenBasis> basis) {
  if (spec.contains("preset")) {
    std::string name = as<std::string>(spec, "preset", "unknown");
    if (name == "e1") return SpectralField::unit(basis, 0);
    if (name == "mix3") {
      if (basis->size() < 4)
        throw ConfigError("preset 'mix3' needs basis_size >= 4");
      SpectralField f = SpectralField::zero(basis);
      f.coeff[0] = 1.0;
      f.coeff[1] = 0.6;
      f.coeff[3] = 0.3;
      return f;
    }
    if (name == "bump") {
      auto bump = [](const Eigen::VectorXd& x) {
        return std::exp(-20.0 * x.squaredNorm());
      };
      return project(bump, basis, 48, 1e-9);
    }
    throw ConfigError("unknown preset '" + name + "'");
  }
  auto modes = as<std::vector<int>>(spec, "modes", "unknown");
  auto coeffs = as<std::vector<double>>(spec, "coefficients", "unknown");
  if (modes.size() != coeffs.size())
    throw ConfigError("unknown.modes and unknown.coefficients lengths differ");
  SpectralField f = SpectralField::zero(basis);
  for (size_t i = 0; i < modes.size(); ++i) {
    if (modes[i] < 0 || modes[i] >= basis->size())
      throw ConfigError("unknown.modes entry out of basis range");
    f.coeff[modes[i]] = coeffs[i];
  }
  return f;
}

Experiment parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  if (as<std::string>(j, "schema", "") != "subdiff-config-v1")
    throw ConfigError("config schema must be 'subdiff-config-v1'");

  Experiment exp;
  const json& dom = need(j, "domain", "");
  exp.domain.dim = as<int>(dom, "dim", "domain");
  auto lo = as<std::vector<double>>(dom, "lo", "domain");
  auto hi = as<std::vector<double>>(dom, "hi", "domain");
  if (static_cast<int>(lo.size()) != exp.domain.dim ||
      static_cast<int>(hi.size()) != exp.domain.dim)
    throw ConfigError("domain.lo/hi lengths must equal domain.dim");
  for (int i = 0; i < exp.domain.dim; ++i) {
    exp.domain.lo[i] = lo[i];
    exp.domain.hi[i] = hi[i];
  }
  try {
    exp.domain.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("domain: ") + e.what());
  }

  exp.alpha = as<double>(j, "alpha", "");
  if (!(exp.alpha > 0.0) || exp.alpha > 1.0)
    throw ConfigError("alpha must lie in (0, 1]");
  exp.basis_size = as<int>(j, "basis_size", "");
  if (exp.basis_size < 1) throw ConfigError("basis_size must be positive");
  exp.basis = build_basis(exp.domain, exp.basis_size);

  const json& unk = need(j, "unknown", "");
  std::string target = as_or<std::string>(unk, "target", "unknown",
                                          std::string("source"));
  if (target == "source") {
    exp.target = Target::source;
  } else if (target == "initial_state") {
    exp.target = Target::initial_state;
  } else {
    throw ConfigError("unknown.target must be 'source' or 'initial_state'");
  }
  exp.unknown = build_unknown(unk, exp.basis);

  exp.g_type = as_or<std::string>(need(j, "g", ""), "type", "g",
                                  std::string("exponential"));
  if (exp.g_type == "exponential") {
    exp.g = SourceTime::exponential();
  } else if (exp.g_type == "none") {
    exp.g = SourceTime::none();
  } else {
    throw ConfigError("g.type must be 'exponential' or 'none'");
  }
  if (exp.target == Target::initial_state) exp.g = SourceTime::none();

  const json& time = need(j, "time", "");
  exp.T = as<double>(time, "T", "time");
  exp.nodes = as<int>(time, "nodes", "time");
  if (!(exp.T > 0.0) || exp.nodes < 2)
    throw ConfigError("time.T must be > 0 and time.nodes >= 2");
  exp.boundary_order = as_or<int>(j, "boundary_order", "", 8);

  if (j.contains("probes")) {
    const json& pr = j["probes"];
    exp.omega_min = as<double>(pr, "omega_min", "probes");
    exp.omega_max = as<double>(pr, "omega_max", "probes");
    exp.n_omega = as<int>(pr, "n_omega", "probes");
    exp.n_dir = as<int>(pr, "n_dir", "probes");
  }
  if (j.contains("stability")) {
    const json& st = j["stability"];
    exp.k = as_or<int>(st, "k", "stability", 1);
    exp.theta = as_or<double>(st, "theta", "stability", 0.5);
    exp.c0 = as_or<double>(st, "c0", "stability", 0.01);
  }
  if (j.contains("continuation")) {
    const json& co = j["continuation"];
    exp.s_cont = as_or<int>(co, "s", "continuation", 5);
    exp.xi_angle = as_or<double>(co, "xi_angle", "continuation", 0.0);
    exp.grid_n = as_or<int>(co, "grid", "continuation", 60);
  }
  if (j.contains("sweep"))
    exp.sweep_count = as_or<int>(j["sweep"], "count", "sweep", 6);
  if (j.contains("noise"))
    exp.noise_level = as_or<double>(j["noise"], "level", "noise", 0.0);
  if (exp.sweep_count > exp.basis_size)
    throw ConfigError("sweep.count exceeds basis_size");
  return exp;
}

double tail_exponent_for(const Experiment& exp) {
  return exp.target == Target::source ? -exp.alpha - 1.0 : -exp.alpha;
}

ForwardSolution forward_solve(const Experiment& exp, int threads) {
  SpectralField zero = SpectralField::zero(exp.basis);
  TimeGrid grid = TimeGrid::graded(exp.T, exp.nodes, exp.alpha);
  if (exp.target == Target::source)
    return duhamel_solve(zero, exp.unknown, exp.g, grid, exp.alpha, threads);
  return duhamel_solve(exp.unknown, zero, SourceTime::none(), grid, exp.alpha,
                       threads);
}

TraceData make_trace(const Experiment& exp, int threads) {
  ForwardSolution sol = forward_solve(exp, threads);
  BoundaryQuadrature bq =
      boundary_quadrature(exp.domain, exp.boundary_order);
  return trace_from_solution(sol, bq, tail_exponent_for(exp));
}

StabilityContext stability_ctx(const Experiment& exp) {
  double c0 = exp.target == Target::source ? exp.c0 : 1.0;
  return StabilityContext::make(exp.alpha, exp.domain.dim, exp.k, exp.theta,
                                exp.domain, c0, 1.0);
}

Eigen::VectorXd direction(const Experiment& exp) {
  Eigen::VectorXd xi(exp.domain.dim);
  if (exp.domain.dim == 2) {
    xi << std::cos(exp.xi_angle), std::sin(exp.xi_angle);
  } else {
    xi << std::cos(exp.xi_angle), std::sin(exp.xi_angle), 0.0;
  }
  return xi;
}

void run_synthesize(const Experiment& exp, const fs::path& out, int threads) {
  ForwardSolution sol = forward_solve(exp, threads);
  BoundaryQuadrature bq =
      boundary_quadrature(exp.domain, exp.boundary_order);
  TraceData trace = trace_from_solution(sol, bq, tail_exponent_for(exp));
  write_solution_csv((out / "solution.csv").string(), sol);
  write_trace_csv((out / "trace.csv").string(), trace);
}

void run_certify(const Experiment& exp, const fs::path& out, int) {
  std::vector<Probe> probes = make_probes(exp.omega_min, exp.omega_max,
                                          exp.n_omega, exp.n_dir, exp.alpha,
                                          exp.domain.dim);
  SpectralField zero = SpectralField::zero(exp.basis);
  const SpectralField& f =
      exp.target == Target::source ? exp.unknown : zero;
  const SpectralField& u0 =
      exp.target == Target::source ? zero : exp.unknown;

  std::vector<std::vector<std::string>> rows;
  double max_resid = 0.0;
  for (size_t q = 0; q < probes.size(); ++q) {
    MomentParts parts = moment_identity_parts(probes[q], f, u0, exp.g,
                                              USource::analytic);
    max_resid = std::max(max_resid, parts.residual);
    rows.push_back({fmt17(probes[q].omega),
                    std::to_string(static_cast<int>(q) % exp.n_dir),
                    fmt17(parts.lhs.real()), fmt17(parts.lhs.imag()),
                    fmt17(parts.rhs.real()), fmt17(parts.rhs.imag()),
                    fmt17(parts.residual)});
  }
  write_csv((out / "probes.csv").string(),
            {"omega", "xi_id", "lhs_re", "lhs_im", "rhs_re", "rhs_im",
             "residual"},
            rows);

  Eigen::VectorXd xi = direction(exp);
  ContinuationContext ctx =
      make_continuation_context(exp.unknown, exp.s_cont, xi);
  const int n = exp.grid_n;
  double min_margin = std::numeric_limits<double>::infinity();
  std::complex<double> argmin(0.0, 0.0);
  std::vector<std::vector<std::string>> grid_rows;
  grid_rows.reserve(static_cast<size_t>(n) * n);
  for (int i = 0; i < n; ++i) {
    double x = -1.0 + std::pow(10.0, -4.0 + 8.0 * i / (n - 1));
    for (int jj = 0; jj < n; ++jj) {
      double y = -std::pow(10.0, -4.0 + 8.0 * jj / (n - 1));
      std::complex<double> z(x, y);
      double margin = two_constants_margin(ctx, z);
      if (margin < min_margin) {
        min_margin = margin;
        argmin = z;
      }
      grid_rows.push_back({fmt17(x), fmt17(y), fmt17(margin)});
    }
  }
  write_csv((out / "margin_grid.csv").string(), {"re", "im", "margin"},
            grid_rows);

  json cert;
  cert["schema"] = "subdiff-certification-v1";
  cert["grid"] = {{"n", n}, {"re_offset_log10", {-4.0, 4.0}},
                  {"im_log10", {-4.0, 4.0}}};
  cert["min_margin"] = min_margin;
  cert["argmin"] = {{"re", argmin.real()}, {"im", argmin.imag()}};
  cert["M"] = ctx.M;
  cert["m"] = ctx.m;
  cert["s"] = ctx.s;
  cert["xi"] = std::vector<double>(xi.data(), xi.data() + xi.size());
  cert["max_identity_residual"] = max_resid;
  write_text((out / "certification.json").string(), cert.dump(2) + "\n");

  if (min_margin < -1e-12)
    throw CertError("two-constants margin certification failed: " +
                    fmt17(min_margin));
  if (max_resid > 1e-8)
    throw CertError("moment identity residual too large: " + fmt17(max_resid));
}

void run_sweep(const Experiment& exp, const fs::path& out, int threads) {
  std::vector<std::pair<SpectralField, std::string>> family;
  for (int jmode = 0; jmode < exp.sweep_count; ++jmode)
    family.emplace_back(SpectralField::unit(exp.basis, jmode),
                        "e" + std::to_string(jmode + 1));
  StabilityContext ctx = stability_ctx(exp);
  SweepConfig cfg;
  cfg.T = exp.T;
  cfg.time_nodes = exp.nodes;
  cfg.boundary_order = exp.boundary_order;
  cfg.threads = threads > 0 ? threads : 2;
  cfg.target = exp.target;
  std::vector<SweepRecord> recs = stability_sweep(family, exp.g, ctx, cfg);
  std::vector<std::vector<std::string>> rows;
  for (const SweepRecord& r : recs)
    rows.push_back({r.label, fmt17(r.l2_norm), fmt17(r.hk_norm),
                    fmt17(r.epsilon),
                    r.error.empty() ? r.branch : r.error,
                    fmt17(r.exponent), fmt17(r.ratio)});
  write_csv((out / "sweep.csv").string(),
            {"label", "l2_norm", "hk_norm", "epsilon", "branch", "exponent",
             "ratio"},
            rows);
}

void run_reconstruct(const Experiment& exp, const fs::path& out, int threads,
                     uint64_t seed) {
  TraceData trace = make_trace(exp, threads);
  if (exp.noise_level > 0.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    for (int i = 0; i < trace.values.rows(); ++i)
      for (int q = 0; q < trace.values.cols(); ++q)
        trace.values(i, q) *= 1.0 + exp.noise_level * nd(rng);
  }
  StabilityContext ctx = stability_ctx(exp);
  std::vector<Probe> probes = make_probes(exp.omega_min, exp.omega_max,
                                          exp.n_omega, exp.n_dir, exp.alpha,
                                          exp.domain.dim);
  Eigen::VectorXcd moments =
      reconstruct_fourier_line(trace, exp.g, ctx, probes, exp.target);
  double reg = exp.noise_level > 0.0
                   ? morozov_reg(moments, probes, exp.basis, exp.noise_level,
                                 exp.k)
                   : 1e-8;
  SpectralField rec =
      tikhonov_reconstruct(moments, probes, exp.basis, reg, exp.k);
  double rel_err = (rec.coeff - exp.unknown.coeff).norm() /
                   std::max(exp.unknown.coeff.norm(), 1e-300);
  double eps = epsilon_from_trace(trace, ctx);

  std::vector<std::vector<std::string>> rows;
  for (int kmode = 0; kmode < exp.basis->size(); ++kmode)
    rows.push_back({std::to_string(kmode),
                    fmt17(exp.basis->mode(kmode).lambda),
                    fmt17(exp.unknown.coeff[kmode]),
                    fmt17(rec.coeff[kmode])});
  write_csv((out / "reconstruction.csv").string(),
            {"mode", "lambda", "truth", "estimate"}, rows);

  json rep;
  rep["schema"] = "subdiff-reconstruction-v1";
  rep["target"] =
      exp.target == Target::source ? "source" : "initial_state";
  rep["coefficients"] =
      std::vector<double>(rec.coeff.data(), rec.coeff.data() + rec.coeff.size());
  rep["reg"] = reg;
  rep["relative_l2_error"] = rel_err;
  rep["epsilon"] = eps;
  rep["noise_level"] = exp.noise_level;
  rep["seed"] = seed;
  write_text((out / "reconstruction.json").string(), rep.dump(2) + "\n");
}

void run_ml_table(const fs::path& out) {
  std::vector<std::vector<std::string>> rows;
  for (double b1 : {0.3, 0.5, 0.7, 0.9}) {
    for (double b2 : {1.0, b1}) {
      for (int i = 0; i <= 60; ++i) {
        double tau = -1e-3 * std::pow(1e9, i / 60.0);
        rows.push_back({fmt17(b1), fmt17(b2), fmt17(tau),
                        fmt17(mittag_leffler(b1, b2, tau))});
      }
    }
  }
  write_csv((out / "ml_table.csv").string(), {"beta1", "beta2", "tau", "value"},
            rows);
}

void run_plot_scripts(const fs::path& dir) {
  int written = 0;
  auto preamble = std::string("set datafile separator ','\n") +
                  "set key autotitle columnhead\n";
  if (fs::exists(dir / "sweep.csv")) {
    write_text((dir / "stability_curve.gp").string(),
               preamble + "set logscale xy\n" +
                   "set xlabel 'epsilon'\nset ylabel 'ratio'\n" +
                   "plot 'sweep.csv' using \"epsilon\":\"ratio\" "
                   "with linespoints title 'stability ratio'\n");
    ++written;
  }
  if (fs::exists(dir / "margin_grid.csv")) {
    write_text((dir / "margin_heatmap.gp").string(),
               preamble + "set view map\n" +
                   "splot 'margin_grid.csv' using \"re\":\"im\":\"margin\" "
                   "with points palette pt 7 title 'margin'\n");
    ++written;
  }
  if (fs::exists(dir / "reconstruction.csv")) {
    write_text(
        (dir / "reconstruction_overlay.gp").string(),
        preamble +
            "plot 'reconstruction.csv' using \"mode\":\"truth\" with "
            "linespoints title 'truth', \\\n     'reconstruction.csv' using "
            "\"mode\":\"estimate\" with linespoints title 'estimate'\n");
    ++written;
  }
  if (written == 0)
    throw ConfigError("no artifact CSVs found in " + dir.string());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spectral laboratory for time-fractional diffusion problems"};
  app.require_subcommand(1);

  std::string config_path, out_dir = ".";
  int threads = 0;
  uint64_t seed = 0;
  app.add_option("--config", config_path, "experiment config (JSON)");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--threads", threads, "worker threads (0 = auto)");
  app.add_option("--seed", seed, "RNG seed for noise draws");

  auto* c_synth = app.add_subcommand("synthesize", "forward solve + trace");
  auto* c_cert = app.add_subcommand("certify", "identity and margin checks");
  auto* c_sweep = app.add_subcommand("sweep", "stability sweep");
  auto* c_rec = app.add_subcommand("reconstruct", "regularized inversion");
  auto* c_ml = app.add_subcommand("ml-table", "kernel function table");
  auto* c_plot = app.add_subcommand("plot-scripts", "emit plotting scripts");
  for (CLI::App* sc : {c_synth, c_cert, c_sweep, c_rec, c_ml, c_plot})
    sc->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    fs::path out(out_dir);
    fs::create_directories(out);
    if (c_plot->parsed()) {
      run_plot_scripts(out);
      return 0;
    }
    if (c_ml->parsed()) {
      run_ml_table(out);
      return 0;
    }
    if (config_path.empty())
      throw ConfigError("this subcommand requires --config");
    Experiment exp = parse_config(config_path);
    if (c_synth->parsed()) run_synthesize(exp, out, threads);
    if (c_cert->parsed()) run_certify(exp, out, threads);
    if (c_sweep->parsed()) run_sweep(exp, out, threads);
    if (c_rec->parsed()) run_reconstruct(exp, out, threads, seed);
    return 0;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const CertError& e) {
    std::fprintf(stderr, "certification failure: %s\n", e.what());
    return 3;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 3;
  }
}
