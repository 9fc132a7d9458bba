#pragma once

#include <Eigen/Core>
#include <complex>

#include "subdiff/forward.hpp"
#include "subdiff/spectral.hpp"

namespace subdiff {

/// One Laplace-domain probe: frequency omega, unit direction xi, and the
/// Laplace abscissa p = omega^{2/alpha}.
struct Probe {
  double omega = 1.0;
  Eigen::VectorXd xi;
  double alpha = 0.5;

  double p() const;
  void validate() const;
};

/// Neumann boundary measurement d_nu u sampled on (time x boundary) grids,
/// together with power-law head/tail models so that the Laplace transform and
/// the L^{2/alpha}(R+; L2(dOmega)) norm extend beyond the sampling window:
/// values ~ t^{head_exponent} on [0, times[0]) when times[0] > 0, and
/// values ~ t^{tail_exponent} beyond times[end].
struct TraceData {
  Eigen::VectorXd times;   // strictly increasing, times[0] >= 0
  BoundaryQuadrature bq;
  Eigen::MatrixXd values;  // times.size() x bq.points.rows()
  double alpha = 0.5;
  double head_exponent = 0.0;
  double tail_exponent = 0.0;
  bool tail_declared = false;

  void validate() const;
  /// ||d_nu u||_{L^{2/alpha}(R+; L2(dOmega))}; requires the tail model.
  double norm() const;
};

/// Sample d_nu u of a forward solution on a boundary quadrature; the caller
/// declares the large-time decay exponent of the trace.
TraceData trace_from_solution(const ForwardSolution& sol,
                              const BoundaryQuadrature& bq,
                              double tail_exponent);

/// Int_0^inf e^{-pt} (trace) dt per boundary point: exact piecewise-linear
/// product integration on the window plus the modeled head/tail parts.
/// Throws if the tail bound exceeds 1% of the window integral; the bound
/// fraction is reported through tail_fraction when non-null.
Eigen::VectorXd laplace_boundary(const TraceData& trace, double p,
                                 double* tail_fraction = nullptr);

/// (-Laplace + omega^2)^{-1}: coefficients divide by lambda_k + omega^2.
SpectralField resolvent_solve(double omega, const SpectralField& rhs);

enum class USource { analytic, from_trace };

struct MomentParts {
  std::complex<double> lhs;
  std::complex<double> rhs;
  double residual = 0.0;
};

/// Both sides plus the residual of the moment identity (see below).
MomentParts moment_identity_parts(const Probe& probe, const SpectralField& f,
                                  const SpectralField& u0, const SourceTime& g,
                                  USource mode,
                                  const TraceData* trace = nullptr);

/// Residual |LHS - RHS| / (1 + |LHS|) of the moment identity
///   g~(p) f^(i w xi) + w^{2-2/alpha} u0^(i w xi)
///     = -(2 pi)^{-d/2} Int_{dOmega} d_nu U e^{w x.xi} dsigma,
/// with U the resolvent solution (analytic mode) or the Laplace transform of
/// the measured trace (from_trace mode).
double moment_identity_residual(const Probe& probe, const SpectralField& f,
                                const SpectralField& u0, const SourceTime& g,
                                USource mode, const TraceData* trace = nullptr);

/// Holomorphic interpolation data on the quadrant
/// Q = {Re z > -1, Im z < 0} for F(z) = (z/(2+z))^s e^{-kappa z} phi^(iz xi):
/// the a priori bound M on |F| and the real-axis supremum m.
struct ContinuationContext {
  SpectralField phi;
  int s = 3;
  Eigen::VectorXd xi;
  double kappa = 0.0;
  double M = 1.0;
  double m = 0.0;
};

ContinuationContext make_continuation_context(const SpectralField& phi, int s,
                                              const Eigen::VectorXd& xi);

/// e^{-kappa z} phi^(iz xi) evaluated with per-axis exponent extraction so
/// the product never overflows on the closed quadrant.
std::complex<double> shifted_fourier(const SpectralField& phi,
                                     std::complex<double> z,
                                     const Eigen::VectorXd& xi);

/// F(z) for Re z >= -1.
std::complex<double> eval_F(const ContinuationContext& ctx,
                            std::complex<double> z);

/// w(z) = (2/pi)(pi/2 + arg(z + 1)) on the closed quadrant minus {-1}.
double harmonic_measure(std::complex<double> z);

/// M m^{w(z)} - |F(z)|; nonnegative up to roundoff by the two-constants
/// theorem.
double two_constants_margin(const ContinuationContext& ctx,
                            std::complex<double> z);

}  // namespace subdiff
