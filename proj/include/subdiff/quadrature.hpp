#pragma once

#include <Eigen/Core>
#include <functional>

namespace subdiff {

/// Gauss-Legendre rule on [-1, 1].
struct GaussRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};

/// n-point Gauss-Legendre rule (Newton iteration on Legendre polynomials).
const GaussRule& gauss_legendre(int n);

/// Integrate f over [a, b] with an n-point Gauss-Legendre rule.
double gauss_integrate(const std::function<double(double)>& f, double a,
                       double b, int n);

/// Adaptive Gauss-Kronrod (7/15) integration of f over [a, b].
/// Recursively bisects until the local error estimate is below
/// max(abstol, reltol * |integral|).
double integrate_adaptive(const std::function<double(double)>& f, double a,
                          double b, double abstol = 1e-14,
                          double reltol = 1e-12, int max_depth = 30);

}  // namespace subdiff
