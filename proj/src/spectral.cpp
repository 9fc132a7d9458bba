#include "subdiff/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "subdiff/quadrature.hpp"

namespace subdiff {

void BoxDomain::validate() const {
  if (dim != 2 && dim != 3)
    throw std::invalid_argument("BoxDomain: dim must be 2 or 3");
  for (int i = 0; i < dim; ++i)
    if (!(lo[i] < 0.0 && 0.0 < hi[i]))
      throw std::invalid_argument(
          "BoxDomain: each axis interval must contain the origin");
}

double BoxDomain::kappa() const {
  double s = 0.0;
  for (int i = 0; i < dim; ++i) {
    double m = std::max(-lo[i], hi[i]);
    s += m * m;
  }
  return std::sqrt(s);
}

double BoxDomain::boundary_measure() const {
  if (dim == 2) return 2.0 * (length(0) + length(1));
  return 2.0 * (length(0) * length(1) + length(0) * length(2) +
                length(1) * length(2));
}

double BoxDomain::volume() const {
  double v = 1.0;
  for (int i = 0; i < dim; ++i) v *= length(i);
  return v;
}

BoxDomain BoxDomain::square(double a, double b) {
  BoxDomain d;
  d.dim = 2;
  d.lo = Eigen::Vector3d(a, a, 0.0);
  d.hi = Eigen::Vector3d(b, b, 0.0);
  d.validate();
  return d;
}

BoxDomain BoxDomain::cube(double a, double b) {
  BoxDomain d;
  d.dim = 3;
  d.lo = Eigen::Vector3d(a, a, a);
  d.hi = Eigen::Vector3d(b, b, b);
  d.validate();
  return d;
}

double EigenBasis::eval_mode(int i, const Eigen::VectorXd& x) const {
  const EigenMode& m = modes_[i];
  double v = 1.0;
  for (int a = 0; a < domain_.dim; ++a) {
    double L = domain_.length(a);
    v *= std::sqrt(2.0 / L) *
         std::sin(m.index[a] * M_PI * (x[a] - domain_.lo[a]) / L);
  }
  return v;
}

double EigenBasis::mode_neumann(int i, const Eigen::VectorXd& x,
                                double tol) const {
  const EigenMode& m = modes_[i];
  int axis = -1;
  bool high = false;
  for (int a = 0; a < domain_.dim; ++a) {
    if (std::abs(x[a] - domain_.lo[a]) <= tol) {
      axis = a;
      high = false;
      break;
    }
    if (std::abs(x[a] - domain_.hi[a]) <= tol) {
      axis = a;
      high = true;
      break;
    }
  }
  if (axis < 0)
    throw std::invalid_argument("mode_neumann: point is not on the boundary");
  double v = 1.0;
  for (int a = 0; a < domain_.dim; ++a) {
    double L = domain_.length(a);
    double k = m.index[a] * M_PI / L;
    if (a == axis) {
      // d/dx sqrt(2/L) sin(k(x-a)) = sqrt(2/L) k cos(k(x-a));
      // cos = 1 at the low wall, (-1)^m at the high wall.
      double c = high ? (m.index[a] % 2 == 0 ? 1.0 : -1.0) : 1.0;
      double sign = high ? 1.0 : -1.0;  // outward normal direction
      v *= sign * std::sqrt(2.0 / L) * k * c;
    } else {
      v *= std::sqrt(2.0 / L) * std::sin(k * (x[a] - domain_.lo[a]));
    }
  }
  return v;
}

std::shared_ptr<const EigenBasis> build_basis(const BoxDomain& domain,
                                              int count) {
  domain.validate();
  if (count < 1) throw std::invalid_argument("build_basis: count must be >= 1");

  double minL = domain.length(0);
  for (int a = 1; a < domain.dim; ++a) minL = std::min(minL, domain.length(a));
  double cut = 4.0 * domain.dim * M_PI * M_PI / (minL * minL);

  std::vector<EigenMode> modes;
  for (;;) {
    modes.clear();
    Eigen::Vector3i mmax = Eigen::Vector3i::Ones();
    for (int a = 0; a < domain.dim; ++a)
      mmax[a] = static_cast<int>(std::floor(domain.length(a) *
                                            std::sqrt(cut) / M_PI)) + 1;
    Eigen::Vector3i idx = Eigen::Vector3i::Ones();
    for (idx[0] = 1; idx[0] <= mmax[0]; ++idx[0])
      for (idx[1] = 1; idx[1] <= mmax[1]; ++idx[1])
        for (idx[2] = 1; idx[2] <= (domain.dim == 3 ? mmax[2] : 1); ++idx[2]) {
          double lambda = 0.0;
          for (int a = 0; a < domain.dim; ++a) {
            double k = idx[a] * M_PI / domain.length(a);
            lambda += k * k;
          }
          if (lambda <= cut) modes.push_back({idx, lambda});
        }
    if (static_cast<int>(modes.size()) >= count) break;
    cut *= 2.0;
  }
  std::sort(modes.begin(), modes.end(),
            [](const EigenMode& a, const EigenMode& b) {
              if (a.lambda != b.lambda) return a.lambda < b.lambda;
              return std::lexicographical_compare(
                  a.index.data(), a.index.data() + 3, b.index.data(),
                  b.index.data() + 3);
            });
  modes.resize(count);
  return std::make_shared<EigenBasis>(domain, std::move(modes));
}

SpectralField SpectralField::zero(std::shared_ptr<const EigenBasis> basis) {
  SpectralField f;
  f.coeff = Eigen::VectorXd::Zero(basis->size());
  f.basis = std::move(basis);
  return f;
}

SpectralField SpectralField::unit(std::shared_ptr<const EigenBasis> basis,
                                  int k) {
  SpectralField f = zero(std::move(basis));
  f.coeff[k] = 1.0;
  return f;
}

namespace {

// Coefficients of f against every basis mode with a per-axis Gauss rule of
// the given order.
Eigen::VectorXd project_once(const std::function<double(const Eigen::VectorXd&)>& f,
                             const EigenBasis& basis, int order) {
  const BoxDomain& dom = basis.domain();
  const GaussRule& rule = gauss_legendre(order);
  const int d = dom.dim;
  // Tensor grid of mapped nodes and weights per axis.
  Eigen::MatrixXd nodes(order, d), weights(order, d);
  for (int a = 0; a < d; ++a) {
    double mid = 0.5 * (dom.lo[a] + dom.hi[a]), half = 0.5 * dom.length(a);
    for (int i = 0; i < order; ++i) {
      nodes(i, a) = mid + half * rule.nodes[i];
      weights(i, a) = half * rule.weights[i];
    }
  }
  // Precompute per-axis sine factors for every mode index in use.
  int mmax = 0;
  for (int k = 0; k < basis.size(); ++k)
    mmax = std::max(mmax, basis.mode(k).index.maxCoeff());
  // sines[a](i, m-1) = sqrt(2/L) sin(m pi (x_i - lo)/L)
  std::vector<Eigen::MatrixXd> sines(d);
  for (int a = 0; a < d; ++a) {
    sines[a].resize(order, mmax);
    double L = dom.length(a);
    for (int i = 0; i < order; ++i)
      for (int m = 1; m <= mmax; ++m)
        sines[a](i, m - 1) =
            std::sqrt(2.0 / L) * std::sin(m * M_PI * (nodes(i, a) - dom.lo[a]) / L);
  }
  Eigen::VectorXd coeff = Eigen::VectorXd::Zero(basis.size());
  Eigen::VectorXd x(d);
  if (d == 2) {
    for (int i = 0; i < order; ++i)
      for (int j = 0; j < order; ++j) {
        x[0] = nodes(i, 0);
        x[1] = nodes(j, 1);
        double wf = weights(i, 0) * weights(j, 1) * f(x);
        for (int k = 0; k < basis.size(); ++k) {
          const auto& idx = basis.mode(k).index;
          coeff[k] += wf * sines[0](i, idx[0] - 1) * sines[1](j, idx[1] - 1);
        }
      }
  } else {
    for (int i = 0; i < order; ++i)
      for (int j = 0; j < order; ++j)
        for (int l = 0; l < order; ++l) {
          x[0] = nodes(i, 0);
          x[1] = nodes(j, 1);
          x[2] = nodes(l, 2);
          double wf = weights(i, 0) * weights(j, 1) * weights(l, 2) * f(x);
          for (int k = 0; k < basis.size(); ++k) {
            const auto& idx = basis.mode(k).index;
            coeff[k] += wf * sines[0](i, idx[0] - 1) * sines[1](j, idx[1] - 1) *
                        sines[2](l, idx[2] - 1);
          }
        }
  }
  return coeff;
}

}  // namespace

SpectralField project(const std::function<double(const Eigen::VectorXd&)>& f,
                      std::shared_ptr<const EigenBasis> basis, int order,
                      double tol) {
  Eigen::VectorXd c = project_once(f, *basis, order);
  Eigen::VectorXd c2 = project_once(f, *basis, order + order / 2 + 8);
  double scale = 1.0 + c2.cwiseAbs().maxCoeff();
  if ((c - c2).cwiseAbs().maxCoeff() > tol * scale)
    throw std::runtime_error(
        "project: quadrature self-check failed; raise the order");
  SpectralField field;
  field.basis = std::move(basis);
  field.coeff = std::move(c2);
  return field;
}

double synthesize(const SpectralField& field, const Eigen::VectorXd& x) {
  double v = 0.0;
  for (int k = 0; k < field.basis->size(); ++k)
    if (field.coeff[k] != 0.0) v += field.coeff[k] * field.basis->eval_mode(k, x);
  return v;
}

namespace {

using cplx = std::complex<double>;

// sin(z)/z, entire.
cplx sinc(cplx z) {
  if (std::abs(z) < 1e-8) {
    cplx z2 = z * z;
    return 1.0 - z2 / 6.0 + z2 * z2 / 120.0;
  }
  return std::sin(z) / z;
}

// Int_a^b e^{i w x} dx, entire in w.
cplx cexp_int(cplx w, double a, double b) {
  double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  return (b - a) * std::exp(cplx(0.0, 1.0) * w * mid) * sinc(w * half);
}

// Int_a^b sqrt(2/L) sin(m pi (x-a)/L) e^{-i zeta x} dx.
cplx axis_fourier(int m, double a, double b, cplx zeta) {
  double L = b - a;
  double k = m * M_PI / L;
  cplx i(0.0, 1.0);
  cplx term1 = std::exp(-i * k * a) * cexp_int(k - zeta, a, b);
  cplx term2 = std::exp(i * k * a) * cexp_int(-k - zeta, a, b);
  return std::sqrt(2.0 / L) * (term1 - term2) / (2.0 * i);
}

}  // namespace

std::complex<double> mode_fourier(const BoxDomain& domain,
                                  const EigenMode& mode,
                                  const Eigen::Vector3cd& zeta) {
  cplx v = std::pow(2.0 * M_PI, -0.5 * domain.dim);
  for (int a = 0; a < domain.dim; ++a)
    v *= axis_fourier(mode.index[a], domain.lo[a], domain.hi[a], zeta[a]);
  return v;
}

std::complex<double> field_fourier(const SpectralField& field,
                                   const Eigen::Vector3cd& zeta) {
  cplx v = 0.0;
  for (int k = 0; k < field.basis->size(); ++k)
    if (field.coeff[k] != 0.0)
      v += field.coeff[k] *
           mode_fourier(field.basis->domain(), field.basis->mode(k), zeta);
  return v;
}

double sobolev_norm(const SpectralField& field, int k_order) {
  if (k_order < 0) throw std::invalid_argument("sobolev_norm: k must be >= 0");
  double s = 0.0;
  for (int k = 0; k < field.basis->size(); ++k)
    s += std::pow(field.basis->mode(k).lambda, k_order) * field.coeff[k] *
         field.coeff[k];
  return std::sqrt(s);
}

double l1_norm(const SpectralField& field, int order) {
  const BoxDomain& dom = field.basis->domain();
  const GaussRule& rule = gauss_legendre(order);
  const int d = dom.dim;
  Eigen::VectorXd x(d);
  double total = 0.0;
  auto node = [&](int a, int i) {
    return 0.5 * (dom.lo[a] + dom.hi[a]) + 0.5 * dom.length(a) * rule.nodes[i];
  };
  auto weight = [&](int a, int i) { return 0.5 * dom.length(a) * rule.weights[i]; };
  if (d == 2) {
    for (int i = 0; i < order; ++i)
      for (int j = 0; j < order; ++j) {
        x[0] = node(0, i);
        x[1] = node(1, j);
        total += weight(0, i) * weight(1, j) * std::abs(synthesize(field, x));
      }
  } else {
    for (int i = 0; i < order; ++i)
      for (int j = 0; j < order; ++j)
        for (int l = 0; l < order; ++l) {
          x[0] = node(0, i);
          x[1] = node(1, j);
          x[2] = node(2, l);
          total += weight(0, i) * weight(1, j) * weight(2, l) *
                   std::abs(synthesize(field, x));
        }
  }
  return total;
}

BoundaryQuadrature boundary_quadrature(const BoxDomain& domain, int order) {
  domain.validate();
  const int d = domain.dim;
  const GaussRule& rule = gauss_legendre(order);
  const int per_face = d == 2 ? order : order * order;
  const int n = 2 * d * per_face;
  BoundaryQuadrature q;
  q.points.resize(n, d);
  q.weights.resize(n);
  q.normals = Eigen::MatrixXd::Zero(n, d);
  q.face.resize(n);
  int row = 0;
  for (int axis = 0; axis < d; ++axis) {
    for (int side = 0; side < 2; ++side) {
      double fixed = side == 0 ? domain.lo[axis] : domain.hi[axis];
      double nsign = side == 0 ? -1.0 : 1.0;
      // tangential axes
      int t0 = (axis + 1) % d, t1 = (axis + 2) % d;
      auto map = [&](int a, int i) {
        return 0.5 * (domain.lo[a] + domain.hi[a]) +
               0.5 * domain.length(a) * rule.nodes[i];
      };
      auto wgt = [&](int a, int i) {
        return 0.5 * domain.length(a) * rule.weights[i];
      };
      if (d == 2) {
        for (int i = 0; i < order; ++i) {
          q.points(row, axis) = fixed;
          q.points(row, t0) = map(t0, i);
          q.weights[row] = wgt(t0, i);
          q.normals(row, axis) = nsign;
          q.face[row] = axis * 2 + side;
          ++row;
        }
      } else {
        for (int i = 0; i < order; ++i)
          for (int j = 0; j < order; ++j) {
            q.points(row, axis) = fixed;
            q.points(row, t0) = map(t0, i);
            q.points(row, t1) = map(t1, j);
            q.weights[row] = wgt(t0, i) * wgt(t1, j);
            q.normals(row, axis) = nsign;
            q.face[row] = axis * 2 + side;
            ++row;
          }
      }
    }
  }
  return q;
}

}  // namespace subdiff
