#pragma once

#include <Eigen/Core>
#include <string>
#include <utility>
#include <vector>

#include "subdiff/frequency.hpp"

namespace subdiff {

/// Constants of the logarithmic stability estimates: the smoothness order
/// s = 1 + floor(2/alpha), the geometry constants of the working domain, the
/// source-transform lower bound c0 (1 for the initial-state problem), the
/// annulus constant Cd, and the continuation bound M.
struct StabilityContext {
  double alpha = 0.5;
  int d = 2;
  int k = 1;
  double theta = 0.5;
  int s = 5;
  double kappa = 0.0;
  double boundary_measure = 0.0;
  double c0 = 1.0;
  double Cd = 1.0;
  double M = 1.0;

  static StabilityContext make(double alpha, int d, int k, double theta,
                               const BoxDomain& domain, double c0, double M);
  void validate() const;
};

/// Frequency annulus B_R \ B_delta with delta matched to the (s, d, k) case.
struct TruncationPlan {
  enum class Case { s_lt_d, s_eq_d, s_gt_d };
  Case case_tag = Case::s_gt_d;
  double R = 2.0;
  double delta = 0.5;
};

/// Surface measure of the unit sphere S^{d-1}.
double unit_sphere_measure(int d);

/// 3^s c0^{-1} (2 pi)^{-d/2} e^{2 kappa} |dOmega|^{1/2} (the multiplier of the
/// trace norm in the data-size definition).
double epsilon_prefactor(const StabilityContext& ctx);

/// epsilon = prefactor * ||d_nu u||_{L^{2/alpha}(R+; L2(dOmega))}.
double epsilon_from_trace(const TraceData& trace, const StabilityContext& ctx);

/// 5^{s/2} Cd M eps^{(2/pi) arctan(1/R)} k_s(delta, R) with
/// k_s = R^d (s < d), -ln delta + R^d (s = d), delta^{-(s-d)} + R^d (s > d).
double hs_bound(const TruncationPlan& plan, const StabilityContext& ctx,
                double eps);

/// delta = R^{-2k/d} (s < d), e^{-R^d} (s = d), R^{-d/(s-d)} (s > d).
TruncationPlan choose_truncation(const StabilityContext& ctx, double R);

struct StabilityRhs {
  double value = 0.0;
  bool first_branch = true;  // s <= d + d^2/(2k)
  double exponent = 0.0;     // k/(1+theta) or d^2/(2(s-d)(1+theta))
};

/// C hk_norm (-ln eps)^{-exponent} with the branch picked by the case split.
StabilityRhs stability_rhs(double eps, const StabilityContext& ctx,
                           double hk_norm);

enum class Target { source, initial_state };

/// Per-probe moment estimate from measured data:
/// f^(i w xi) = BI/g~(w^{2/alpha}) or u0^(i w xi) = w^{(2/alpha)-2} BI, with
/// BI the boundary integral of the Laplace-transformed trace.
Eigen::VectorXcd reconstruct_fourier_line(const TraceData& trace,
                                          const SourceTime& g,
                                          const StabilityContext& ctx,
                                          const std::vector<Probe>& probes,
                                          Target target);

/// Log-spaced omega in [omega_min, omega_max], equi-angular directions.
std::vector<Probe> make_probes(double omega_min, double omega_max, int n_omega,
                               int n_dir, double alpha, int d);

/// Penalized least squares on the moment system
///   min_c sum_probes |sum_k c_k phihat_k(i w xi) - moment|^2
///         + reg sum_k lambda_k^{k_order} c_k^2,
/// solved by real normal equations (the unknown is real-valued).
SpectralField tikhonov_reconstruct(const Eigen::VectorXcd& moments,
                                   const std::vector<Probe>& probes,
                                   std::shared_ptr<const EigenBasis> basis,
                                   double reg, int k_order = 1);

/// Morozov discrepancy choice: the reg whose residual matches
/// noise_level * ||moments||; returns 1e-8 when no noise level is declared.
double morozov_reg(const Eigen::VectorXcd& moments,
                   const std::vector<Probe>& probes,
                   std::shared_ptr<const EigenBasis> basis, double noise_level,
                   int k_order = 1);

struct SweepRecord {
  std::string label;
  double l2_norm = 0.0;
  double hk_norm = 0.0;
  double epsilon = 0.0;
  std::string branch;  // "log-k" / "log-d" / flag text on failure
  double exponent = 0.0;
  double ratio = 0.0;
  std::string error;
};

struct SweepConfig {
  double T = 200.0;
  int time_nodes = 1200;
  int boundary_order = 16;
  int threads = 1;
  Target target = Target::source;
};

/// Forward-solve each family member, measure epsilon, and report the ratio
/// ||phi||_{L2} / (||phi||_{H^k} (-ln eps)^{-exponent}). All members share a
/// common amplitude rescaling putting max epsilon at 0.5; output order
/// follows the input labels regardless of scheduling.
std::vector<SweepRecord> stability_sweep(
    const std::vector<std::pair<SpectralField, std::string>>& family,
    const SourceTime& g, const StabilityContext& ctx, const SweepConfig& cfg);

}  // namespace subdiff
