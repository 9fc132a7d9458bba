#include "subdiff/inverse.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <thread>

namespace subdiff {

namespace {

double fourier_prefactor(int d) { return std::pow(2.0 * M_PI, -0.5 * d); }

int smoothness_order(double alpha) {
  return 1 + static_cast<int>(std::floor(2.0 / alpha));
}

/// The moment matrix A(p, k) = phihat_k(i omega xi) over (probe, mode).
Eigen::MatrixXcd moment_matrix(const std::vector<Probe>& probes,
                               const std::shared_ptr<const EigenBasis>& basis) {
  const int P = static_cast<int>(probes.size());
  const int K = basis->size();
  const int d = basis->domain().dim;
  Eigen::MatrixXcd A(P, K);
  for (int p = 0; p < P; ++p) {
    Eigen::Vector3cd zeta = Eigen::Vector3cd::Zero();
    for (int i = 0; i < d; ++i)
      zeta[i] = std::complex<double>(0.0, probes[p].omega * probes[p].xi[i]);
    for (int k = 0; k < K; ++k)
      A(p, k) = mode_fourier(basis->domain(), basis->mode(k), zeta);
  }
  return A;
}

Eigen::VectorXd solve_penalized(const Eigen::MatrixXcd& A,
                                const Eigen::VectorXcd& m, double reg,
                                const Eigen::VectorXd& penalty) {
  const int K = static_cast<int>(A.cols());
  Eigen::MatrixXd G = (A.adjoint() * A).real();
  Eigen::VectorXd b = (A.adjoint() * m).real();
  G += reg * penalty.asDiagonal().toDenseMatrix();
  Eigen::LDLT<Eigen::MatrixXd> ldlt(G);
  if (ldlt.info() != Eigen::Success)
    throw std::runtime_error("normal equations factorization failed");
  return ldlt.solve(b);
}

}  // namespace

double unit_sphere_measure(int d) {
  if (d == 2) return 2.0 * M_PI;
  if (d == 3) return 4.0 * M_PI;
  throw std::invalid_argument("dimension must be 2 or 3");
}

StabilityContext StabilityContext::make(double alpha, int d, int k,
                                        double theta, const BoxDomain& domain,
                                        double c0, double M) {
  StabilityContext ctx;
  ctx.alpha = alpha;
  ctx.d = d;
  ctx.k = k;
  ctx.theta = theta;
  ctx.s = smoothness_order(alpha);
  ctx.kappa = domain.kappa();
  ctx.boundary_measure = domain.boundary_measure();
  ctx.c0 = c0;
  ctx.Cd = unit_sphere_measure(d);
  ctx.M = M;
  ctx.validate();
  return ctx;
}

void StabilityContext::validate() const {
  if (!(alpha > 0.0) || alpha >= 1.0)
    throw std::invalid_argument("alpha must lie in (0, 1)");
  if (d != 2 && d != 3) throw std::invalid_argument("d must be 2 or 3");
  if (k < 1) throw std::invalid_argument("k must be a positive integer");
  if (!(theta > 0.0) || theta >= 1.0)
    throw std::invalid_argument("theta must lie in (0, 1)");
  if (s != smoothness_order(alpha) || s < 3)
    throw std::invalid_argument("s inconsistent with alpha");
  if (!(kappa > 0.0) || !(boundary_measure > 0.0) || !(c0 > 0.0) ||
      !(Cd > 0.0) || M < 1.0)
    throw std::invalid_argument("stability constants must be positive (M >= 1)");
}

double epsilon_prefactor(const StabilityContext& ctx) {
  return std::pow(3.0, ctx.s) / ctx.c0 * fourier_prefactor(ctx.d) *
         std::exp(2.0 * ctx.kappa) * std::sqrt(ctx.boundary_measure);
}

double epsilon_from_trace(const TraceData& trace, const StabilityContext& ctx) {
  return epsilon_prefactor(ctx) * trace.norm();
}

double hs_bound(const TruncationPlan& plan, const StabilityContext& ctx,
                double eps) {
  if (!(eps > 0.0) || eps >= 1.0)
    throw std::invalid_argument("hs_bound needs eps in (0, 1)");
  if (!(plan.delta > 0.0) || plan.delta >= 1.0 || plan.R <= 1.0)
    throw std::invalid_argument("truncation plan needs delta < 1 < R");
  double ks;
  switch (plan.case_tag) {
    case TruncationPlan::Case::s_lt_d:
      ks = std::pow(plan.R, ctx.d);
      break;
    case TruncationPlan::Case::s_eq_d:
      ks = -std::log(plan.delta) + std::pow(plan.R, ctx.d);
      break;
    default:
      ks = std::pow(plan.delta, -(ctx.s - ctx.d)) + std::pow(plan.R, ctx.d);
      break;
  }
  const double power = (2.0 / M_PI) * std::atan(1.0 / plan.R);
  return std::pow(5.0, 0.5 * ctx.s) * ctx.Cd * ctx.M * std::pow(eps, power) *
         ks;
}

TruncationPlan choose_truncation(const StabilityContext& ctx, double R) {
  if (R <= 1.0) throw std::invalid_argument("truncation radius must exceed 1");
  TruncationPlan plan;
  plan.R = R;
  if (ctx.s < ctx.d) {
    plan.case_tag = TruncationPlan::Case::s_lt_d;
    plan.delta = std::pow(R, -2.0 * ctx.k / ctx.d);
  } else if (ctx.s == ctx.d) {
    plan.case_tag = TruncationPlan::Case::s_eq_d;
    plan.delta = std::exp(-std::pow(R, ctx.d));
  } else {
    plan.case_tag = TruncationPlan::Case::s_gt_d;
    plan.delta = std::pow(R, -static_cast<double>(ctx.d) / (ctx.s - ctx.d));
  }
  return plan;
}

StabilityRhs stability_rhs(double eps, const StabilityContext& ctx,
                           double hk_norm) {
  if (!(eps > 0.0) || eps >= 1.0)
    throw std::invalid_argument("stability_rhs needs eps in (0, 1)");
  if (!(hk_norm > 0.0))
    throw std::invalid_argument("hk_norm must be positive");
  StabilityRhs out;
  out.first_branch =
      ctx.s <= ctx.d + ctx.d * ctx.d / (2.0 * ctx.k);
  out.exponent = out.first_branch
                     ? ctx.k / (1.0 + ctx.theta)
                     : ctx.d * ctx.d /
                           (2.0 * (ctx.s - ctx.d) * (1.0 + ctx.theta));
  // C assembled from the derivation constants: the two balanced terms of the
  // truncation argument are each at most (5^{s/2} Cd M + 1) hk^2 R^{-2k}.
  const double C =
      std::sqrt(2.0 * (std::pow(5.0, 0.5 * ctx.s) * ctx.Cd * ctx.M + 1.0));
  out.value = C * hk_norm * std::pow(-std::log(eps), -out.exponent);
  return out;
}

std::vector<Probe> make_probes(double omega_min, double omega_max, int n_omega,
                               int n_dir, double alpha, int d) {
  if (!(omega_min > 0.0) || omega_max < omega_min || n_omega < 1 || n_dir < 1)
    throw std::invalid_argument("bad probe grid");
  std::vector<Probe> probes;
  probes.reserve(static_cast<size_t>(n_omega) * n_dir);
  for (int i = 0; i < n_omega; ++i) {
    double t = n_omega == 1 ? 0.0 : static_cast<double>(i) / (n_omega - 1);
    double omega = omega_min * std::pow(omega_max / omega_min, t);
    for (int j = 0; j < n_dir; ++j) {
      Probe pr;
      pr.omega = omega;
      pr.alpha = alpha;
      pr.xi.resize(d);
      if (d == 2) {
        double th = 2.0 * M_PI * j / n_dir;
        pr.xi << std::cos(th), std::sin(th);
      } else {
        // Fibonacci lattice on S^2: deterministic, near-uniform.
        double z = 1.0 - 2.0 * (j + 0.5) / n_dir;
        double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        double th = M_PI * (1.0 + std::sqrt(5.0)) * j;
        pr.xi << r * std::cos(th), r * std::sin(th), z;
        pr.xi.normalize();
      }
      pr.validate();
      probes.push_back(pr);
    }
  }
  return probes;
}

Eigen::VectorXcd reconstruct_fourier_line(const TraceData& trace,
                                          const SourceTime& g,
                                          const StabilityContext& ctx,
                                          const std::vector<Probe>& probes,
                                          Target target) {
  trace.validate();
  const int d = static_cast<int>(trace.bq.points.cols());
  Eigen::VectorXcd out(probes.size());
  for (size_t q = 0; q < probes.size(); ++q) {
    const Probe& pr = probes[q];
    pr.validate();
    if (pr.omega * ctx.kappa > 700.0)
      throw std::overflow_error("exponent overflow: omega * kappa > 700");
    Eigen::VectorXd lb = laplace_boundary(trace, pr.p());
    double acc = 0.0;
    for (int i = 0; i < trace.bq.points.rows(); ++i) {
      double expo = pr.omega * trace.bq.points.row(i).head(d).dot(pr.xi);
      acc += trace.bq.weights[i] * lb[i] * std::exp(expo);
    }
    double BI = -fourier_prefactor(d) * acc;
    if (target == Target::source) {
      if (!g.laplace_g)
        throw std::invalid_argument("source target needs a closed-form laplace_g");
      double gt = g.laplace_g(pr.p());
      if (std::abs(gt) < 0.5 * ctx.c0)
        throw std::runtime_error("|g~| below c0/2: inconsistent data");
      out[q] = BI / gt;
    } else {
      out[q] = std::pow(pr.omega, 2.0 / pr.alpha - 2.0) * BI;
    }
  }
  return out;
}

SpectralField tikhonov_reconstruct(const Eigen::VectorXcd& moments,
                                   const std::vector<Probe>& probes,
                                   std::shared_ptr<const EigenBasis> basis,
                                   double reg, int k_order) {
  if (reg < 0.0) throw std::invalid_argument("reg must be >= 0");
  const int P = static_cast<int>(probes.size());
  const int K = basis->size();
  if (moments.size() != P)
    throw std::invalid_argument("moment/probe count mismatch");
  if (reg == 0.0 && P < K)
    throw std::invalid_argument("rank deficiency: fewer probes than modes");
  Eigen::MatrixXcd A = moment_matrix(probes, basis);
  Eigen::VectorXd penalty(K);
  for (int k = 0; k < K; ++k)
    penalty[k] = std::pow(basis->mode(k).lambda, k_order);
  SpectralField out = SpectralField::zero(basis);
  out.coeff = solve_penalized(A, moments, reg, penalty);
  return out;
}

double morozov_reg(const Eigen::VectorXcd& moments,
                   const std::vector<Probe>& probes,
                   std::shared_ptr<const EigenBasis> basis, double noise_level,
                   int k_order) {
  if (noise_level <= 0.0) return 1e-8;
  Eigen::MatrixXcd A = moment_matrix(probes, basis);
  const int K = basis->size();
  Eigen::VectorXd penalty(K);
  for (int k = 0; k < K; ++k)
    penalty[k] = std::pow(basis->mode(k).lambda, k_order);
  const double mnorm = moments.norm();
  if (mnorm == 0.0) return 1e-8;
  auto resid = [&](double reg) {
    Eigen::VectorXd c = solve_penalized(A, moments, reg, penalty);
    return (A * c - moments).norm() / mnorm;
  };
  double lo = -14.0, hi = 4.0;  // log10 bracket
  if (resid(std::pow(10.0, lo)) >= noise_level) return std::pow(10.0, lo);
  if (resid(std::pow(10.0, hi)) <= noise_level) return std::pow(10.0, hi);
  for (int it = 0; it < 60; ++it) {
    double mid = 0.5 * (lo + hi);
    (resid(std::pow(10.0, mid)) < noise_level ? lo : hi) = mid;
  }
  return std::pow(10.0, 0.5 * (lo + hi));
}

std::vector<SweepRecord> stability_sweep(
    const std::vector<std::pair<SpectralField, std::string>>& family,
    const SourceTime& g, const StabilityContext& ctx, const SweepConfig& cfg) {
  const int n = static_cast<int>(family.size());
  std::vector<SweepRecord> records(n);
  if (n == 0) return records;
  const auto basis = family[0].first.basis;
  const BoundaryQuadrature bq =
      boundary_quadrature(basis->domain(), cfg.boundary_order);
  const double tail_e =
      cfg.target == Target::source ? -ctx.alpha - 1.0 : -ctx.alpha;
  std::vector<double> raw_eps(n, 0.0);

  auto run_member = [&](int i) {
    SweepRecord& rec = records[i];
    rec.label = family[i].second;
    try {
      const SpectralField& phi = family[i].first;
      if (phi.basis != basis)
        throw std::invalid_argument("family members must share a basis");
      rec.l2_norm = sobolev_norm(phi, 0);
      rec.hk_norm = sobolev_norm(phi, ctx.k);
      SpectralField zero = SpectralField::zero(basis);
      TimeGrid grid = TimeGrid::graded(cfg.T, cfg.time_nodes, ctx.alpha);
      ForwardSolution sol =
          cfg.target == Target::source
              ? duhamel_solve(zero, phi, g, grid, ctx.alpha, 1)
              : duhamel_solve(phi, zero, SourceTime::none(), grid, ctx.alpha,
                              1);
      TraceData trace = trace_from_solution(sol, bq, tail_e);
      raw_eps[i] = epsilon_from_trace(trace, ctx);
    } catch (const std::exception& e) {
      rec.error = e.what();
    }
  };

  const int nthreads = std::max(1, std::min(cfg.threads, n));
  if (nthreads <= 1) {
    for (int i = 0; i < n; ++i) run_member(i);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t)
      pool.emplace_back([&, t]() {
        for (int i = t; i < n; i += nthreads) run_member(i);
      });
    for (auto& th : pool) th.join();
  }

  double max_eps = 0.0;
  for (int i = 0; i < n; ++i)
    if (records[i].error.empty()) max_eps = std::max(max_eps, raw_eps[i]);
  const double factor = max_eps > 0.0 ? 0.5 / max_eps : 1.0;

  for (int i = 0; i < n; ++i) {
    SweepRecord& rec = records[i];
    if (!rec.error.empty()) continue;
    rec.l2_norm *= factor;
    rec.hk_norm *= factor;
    rec.epsilon = factor * raw_eps[i];
    const bool first =
        ctx.s <= ctx.d + ctx.d * ctx.d / (2.0 * ctx.k);
    rec.exponent = first ? ctx.k / (1.0 + ctx.theta)
                         : ctx.d * ctx.d /
                               (2.0 * (ctx.s - ctx.d) * (1.0 + ctx.theta));
    rec.branch = first ? "log-k" : "log-d";
    if (rec.epsilon <= 0.0) {
      rec.error = "zero trace: below-epsilon regime not applicable";
      continue;
    }
    rec.ratio = rec.l2_norm /
                (rec.hk_norm * std::pow(-std::log(rec.epsilon), -rec.exponent));
  }
  return records;
}

}  // namespace subdiff
