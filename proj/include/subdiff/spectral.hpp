#pragma once

#include <Eigen/Core>
#include <complex>
#include <functional>
#include <memory>
#include <vector>

namespace subdiff {

/// Axis-aligned box (a_i, b_i) in d = 2 or 3 dimensions, required to contain
/// the origin so that |x| is maximized at a corner.
struct BoxDomain {
  int dim = 2;
  Eigen::Vector3d lo = Eigen::Vector3d::Zero();  // entries >= dim unused
  Eigen::Vector3d hi = Eigen::Vector3d::Zero();

  void validate() const;
  double length(int axis) const { return hi[axis] - lo[axis]; }
  /// sup_{x in closure(Omega)} |x|, attained at a corner.
  double kappa() const;
  /// |dOmega|: perimeter for d=2, surface area for d=3.
  double boundary_measure() const;
  double volume() const;

  static BoxDomain square(double a, double b);
  static BoxDomain cube(double a, double b);
};

/// One Dirichlet eigenpair of -Laplace on the box: phi = prod_i sqrt(2/L_i)
/// sin(m_i pi (x_i - a_i)/L_i), lambda = sum_i (m_i pi / L_i)^2.
struct EigenMode {
  Eigen::Vector3i index = Eigen::Vector3i::Ones();  // entries >= dim unused
  double lambda = 0.0;
};

class EigenBasis {
 public:
  EigenBasis(BoxDomain domain, std::vector<EigenMode> modes)
      : domain_(domain), modes_(std::move(modes)) {}

  const BoxDomain& domain() const { return domain_; }
  int size() const { return static_cast<int>(modes_.size()); }
  const EigenMode& mode(int i) const { return modes_[i]; }
  const std::vector<EigenMode>& modes() const { return modes_; }

  /// phi_i(x); x has domain().dim entries.
  double eval_mode(int i, const Eigen::VectorXd& x) const;
  /// Outward normal derivative of phi_i at a boundary point x; throws if x is
  /// not on the boundary to within tol.
  double mode_neumann(int i, const Eigen::VectorXd& x, double tol = 1e-12) const;

 private:
  BoxDomain domain_;
  std::vector<EigenMode> modes_;
};

/// The `count` lowest Dirichlet modes, sorted by nondecreasing lambda with
/// lexicographic multi-index tie-breaking.
std::shared_ptr<const EigenBasis> build_basis(const BoxDomain& domain,
                                              int count);

/// A function known by finitely many eigen-coefficients.
struct SpectralField {
  std::shared_ptr<const EigenBasis> basis;
  Eigen::VectorXd coeff;

  static SpectralField zero(std::shared_ptr<const EigenBasis> basis);
  /// Coefficient vector e_{k} (0-based mode position in the basis).
  static SpectralField unit(std::shared_ptr<const EigenBasis> basis, int k);
};

/// L2 projection of f onto the basis by tensor Gauss quadrature of the given
/// per-axis order; self-checked against a refined rule, throws if the two
/// disagree beyond tol.
SpectralField project(const std::function<double(const Eigen::VectorXd&)>& f,
                      std::shared_ptr<const EigenBasis> basis, int order = 48,
                      double tol = 1e-9);

/// Pointwise evaluation sum_k c_k phi_k(x).
double synthesize(const SpectralField& field, const Eigen::VectorXd& x);

/// (2 pi)^{-d/2} Int_Omega phi_mode(x) e^{-i x.zeta} dx, entire in zeta;
/// closed form per axis.
std::complex<double> mode_fourier(const BoxDomain& domain,
                                  const EigenMode& mode,
                                  const Eigen::Vector3cd& zeta);

/// Fourier transform of the whole field at zeta.
std::complex<double> field_fourier(const SpectralField& field,
                                   const Eigen::Vector3cd& zeta);

/// Spectral Sobolev norm (sum_k lambda_k^k_order |c_k|^2)^{1/2}; k_order = 0
/// gives the L2 norm.
double sobolev_norm(const SpectralField& field, int k_order);

/// L1 norm of the field by quadrature (used in continuation constants).
double l1_norm(const SpectralField& field, int order = 64);

/// Tensor Gauss quadrature nodes on each face of the boundary, with outward
/// normals. Exact for the closed-form traces used everywhere in the library.
struct BoundaryQuadrature {
  Eigen::MatrixXd points;   // n x dim
  Eigen::VectorXd weights;  // n
  Eigen::MatrixXd normals;  // n x dim, outward unit normals
  std::vector<int> face;    // face id 0..2*dim-1 (axis*2 + (low?0:1))
};

BoundaryQuadrature boundary_quadrature(const BoxDomain& domain, int order = 24);

}  // namespace subdiff
