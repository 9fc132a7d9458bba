#pragma once

#include <Eigen/Core>
#include <functional>
#include <memory>

#include "subdiff/spectral.hpp"

namespace subdiff {

/// Time factor g of the separable source g(t) f(x), with optional closed-form
/// Laplace transform and the lower bound c0 on |g~| where declared.
struct SourceTime {
  std::function<double(double)> g;
  std::function<double(double)> laplace_g;  // optional
  double c0 = 0.0;                          // optional; 0 means unset

  static SourceTime exponential();  // g = e^{-t}, g~ = 1/(1+p), c0 validated
  static SourceTime none();         // g = 0
};

struct TimeGrid {
  Eigen::VectorXd nodes;  // t_0 = 0, strictly increasing

  /// t_j = T (j/n)^{2/alpha}: standard grading for the weakly singular kernel.
  static TimeGrid graded(double T, int n, double alpha);
  static TimeGrid uniform(double T, int n);
  void validate() const;
  int size() const { return static_cast<int>(nodes.size()); }
};

struct ForwardSolution {
  std::shared_ptr<const EigenBasis> basis;
  TimeGrid grid;
  double alpha = 0.5;
  Eigen::MatrixXd coeff;  // grid.size() x basis->size()

  SpectralField at(int node) const;
};

/// Riemann-Liouville integral (1/Gamma(beta)) Int_0^t h(s) (t-s)^{beta-1} ds
/// by product integration exact on piecewise-linear h over a graded grid of
/// n intervals.
double rl_integral(const std::function<double(double)>& h, double beta,
                   double t, int n = 2000);

/// L1-scheme Caputo derivative of the sampled function h at grid node n_index
/// (values h[j] at t[j], t[0] = 0). Consistency order 2 - alpha on smooth h.
double caputo_derivative(const Eigen::VectorXd& t, const Eigen::VectorXd& h,
                         double alpha, int n_index);

/// S0(t): coefficients scale by E_{alpha,1}(-lambda t^alpha).
SpectralField s0_apply(double alpha, double t, const SpectralField& u0);

/// S1(t): coefficients scale by t^{alpha-1} E_{alpha,alpha}(-lambda t^alpha);
/// throws at t = 0 (integrable singularity).
SpectralField s1_apply(double alpha, double t, const SpectralField& f);

/// Duhamel solution u(t) = S0(t) u0 + Int_0^t S1(t-s) f g(s) ds, per-mode
/// product integration exact on piecewise-constant g per subinterval.
/// threads = 0 picks the hardware concurrency.
ForwardSolution duhamel_solve(const SpectralField& u0, const SpectralField& f,
                              const SourceTime& g, const TimeGrid& grid,
                              double alpha, int threads = 0);

/// d_nu u(t) at the boundary quadrature points, closed form.
Eigen::VectorXd neumann_trace(const SpectralField& u_at_t,
                              const BoundaryQuadrature& bq);

/// Max over modes and interior grid nodes (t >= 0.05 T, away from the t^alpha
/// initial layer where the L1 scheme is O(1)) of the normalized equation
/// residual |d_t^alpha u_k + lambda_k u_k - g f_k|.
double pde_residual(const ForwardSolution& sol, const SpectralField& f,
                    const SourceTime& g);

}  // namespace subdiff
