#include "subdiff/frequency.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>

#include "subdiff/quadrature.hpp"

namespace subdiff {

namespace {

constexpr std::complex<double> kI(0.0, 1.0);

std::complex<double> csinc(std::complex<double> z) {
  if (std::abs(z) < 1e-8) return 1.0 - z * z / 6.0;
  return std::sin(z) / z;
}

double fourier_prefactor(int d) { return std::pow(2.0 * M_PI, -0.5 * d); }

double weighted_norm(const Eigen::VectorXd& v, const Eigen::VectorXd& w) {
  return std::sqrt(v.cwiseAbs2().dot(w));
}

}  // namespace

double Probe::p() const { return std::pow(omega, 2.0 / alpha); }

void Probe::validate() const {
  if (!(omega > 0.0)) throw std::invalid_argument("probe omega must be > 0");
  if (!(alpha > 0.0) || alpha > 1.0)
    throw std::invalid_argument("probe alpha must lie in (0, 1]");
  if (xi.size() < 2 || std::abs(xi.norm() - 1.0) > 1e-14)
    throw std::invalid_argument("probe direction must be a unit vector");
}

void TraceData::validate() const {
  const int n = static_cast<int>(times.size());
  if (n < 2) throw std::invalid_argument("trace needs at least two samples");
  if (times[0] < 0.0) throw std::invalid_argument("trace times must be >= 0");
  for (int j = 1; j < n; ++j)
    if (times[j] <= times[j - 1])
      throw std::invalid_argument("trace times must be strictly increasing");
  if (values.rows() != n || values.cols() != bq.points.rows())
    throw std::invalid_argument("trace value matrix shape mismatch");
  if (!(alpha > 0.0) || alpha > 1.0)
    throw std::invalid_argument("trace alpha must lie in (0, 1]");
}

double TraceData::norm() const {
  validate();
  if (!tail_declared)
    throw std::invalid_argument("trace norm requires a declared tail model");
  const double r = 2.0 / alpha;
  if (r * tail_exponent + 1.0 >= 0.0)
    throw std::invalid_argument("tail exponent too slow for the L^{2/alpha} norm");

  const int n = static_cast<int>(times.size());
  Eigen::VectorXd phi(n);
  for (int j = 0; j < n; ++j)
    phi[j] = weighted_norm(values.row(j).transpose(), bq.weights);

  double total = 0.0;
  for (int j = 0; j + 1 < n; ++j)
    total += 0.5 * (times[j + 1] - times[j]) *
             (std::pow(phi[j], r) + std::pow(phi[j + 1], r));
  if (times[0] > 0.0) {
    if (r * head_exponent + 1.0 <= 0.0)
      throw std::invalid_argument("head exponent not integrable in L^{2/alpha}");
    total += std::pow(phi[0], r) * times[0] / (r * head_exponent + 1.0);
  }
  total += std::pow(phi[n - 1], r) * times[n - 1] /
           (-(r * tail_exponent + 1.0));
  return std::pow(total, 1.0 / r);
}

TraceData trace_from_solution(const ForwardSolution& sol,
                              const BoundaryQuadrature& bq,
                              double tail_exponent) {
  TraceData trace;
  trace.times = sol.grid.nodes;
  trace.bq = bq;
  trace.alpha = sol.alpha;
  trace.tail_exponent = tail_exponent;
  trace.tail_declared = true;
  const int n = sol.grid.size();
  trace.values.resize(n, bq.points.rows());
  for (int j = 0; j < n; ++j)
    trace.values.row(j) = neumann_trace(sol.at(j), bq).transpose();
  return trace;
}

Eigen::VectorXd laplace_boundary(const TraceData& trace, double p,
                                 double* tail_fraction) {
  trace.validate();
  if (!(p > 0.0)) throw std::invalid_argument("laplace abscissa must be > 0");
  const int n = static_cast<int>(trace.times.size());
  const int npts = static_cast<int>(trace.bq.points.rows());

  Eigen::VectorXd window = Eigen::VectorXd::Zero(npts);
  for (int j = 0; j + 1 < n; ++j) {
    const double t0 = trace.times[j];
    const double d = trace.times[j + 1] - t0;
    const double scale = std::exp(-p * t0);
    if (scale == 0.0) break;
    const double x = p * d;
    const double A = -std::expm1(-x) / p;
    double B;
    if (x < 1e-3) {
      B = d * d * (0.5 - x / 3.0 + x * x / 8.0 - x * x * x / 30.0);
    } else {
      B = (1.0 - (1.0 + x) * std::exp(-x)) / (p * p);
    }
    window += scale * (A * trace.values.row(j).transpose() +
                       (B / d) * (trace.values.row(j + 1) -
                                  trace.values.row(j)).transpose());
  }

  Eigen::VectorXd result = window;

  if (trace.times[0] > 0.0) {
    const double h = trace.head_exponent;
    if (h <= -1.0)
      throw std::invalid_argument("head exponent must exceed -1");
    const double t1 = trace.times[0];
    const double q = 1.0 / (h + 1.0);
    const double I01 = gauss_integrate(
        [&](double u) { return std::exp(-p * t1 * std::pow(u, q)); }, 0.0,
        1.0, 48);
    result += trace.values.row(0).transpose() * (t1 * q * I01);
  }

  const double T = trace.times[n - 1];
  const double decay = std::exp(-p * T);
  double frac = 0.0;
  if (decay > 0.0) {
    if (!trace.tail_declared)
      throw std::invalid_argument("laplace tail requires a declared tail model");
    const double e = trace.tail_exponent;
    const double K =
        (decay / p) * integrate_adaptive(
                          [&](double x) {
                            return std::exp(-x) * std::pow(1.0 + x / (p * T), e);
                          },
                          0.0, 40.0, 1e-16, 1e-12);
    result += trace.values.row(n - 1).transpose() * K;

    const double num = weighted_norm(trace.values.row(n - 1).transpose(),
                                     trace.bq.weights) *
                       (decay / p);
    const double den = weighted_norm(window, trace.bq.weights);
    frac = num / std::max(den, 1e-300);
  }
  if (tail_fraction) *tail_fraction = frac;
  if (frac > 0.01)
    throw std::runtime_error(
        "laplace tail bound exceeds 1% of the window integral");
  return result;
}

SpectralField resolvent_solve(double omega, const SpectralField& rhs) {
  if (omega < 0.0) throw std::invalid_argument("omega must be >= 0");
  SpectralField out = rhs;
  for (int k = 0; k < rhs.basis->size(); ++k)
    out.coeff[k] = rhs.coeff[k] / (rhs.basis->mode(k).lambda + omega * omega);
  return out;
}

MomentParts moment_identity_parts(const Probe& probe, const SpectralField& f,
                                  const SpectralField& u0, const SourceTime& g,
                                  USource mode, const TraceData* trace) {
  probe.validate();
  const auto& basis = f.basis ? f.basis : u0.basis;
  if (!basis) throw std::invalid_argument("fields need a basis");
  const BoxDomain& domain = basis->domain();
  const int d = domain.dim;
  if (probe.xi.size() != d)
    throw std::invalid_argument("probe direction dimension mismatch");
  if (probe.omega * domain.kappa() > 700.0)
    throw std::overflow_error("exponent overflow: omega * kappa > 700");

  const double p = probe.p();
  const double w_init = std::pow(probe.omega, 2.0 - 2.0 / probe.alpha);
  const bool has_f = f.coeff.size() > 0 && f.coeff.cwiseAbs().maxCoeff() > 0;
  double gt = 0.0;
  if (has_f) {
    if (!g.laplace_g)
      throw std::invalid_argument("source mode needs a closed-form laplace_g");
    gt = g.laplace_g(p);
  }

  Eigen::Vector3cd zeta = Eigen::Vector3cd::Zero();
  for (int i = 0; i < d; ++i) zeta[i] = kI * probe.omega * probe.xi[i];
  std::complex<double> lhs = 0.0;
  if (has_f) lhs += gt * field_fourier(f, zeta);
  if (u0.coeff.size() > 0) lhs += w_init * field_fourier(u0, zeta);

  std::complex<double> rhs;
  const double pref = fourier_prefactor(d);
  if (mode == USource::analytic) {
    SpectralField elliptic_rhs = SpectralField::zero(basis);
    if (has_f) elliptic_rhs.coeff += gt * f.coeff;
    if (u0.coeff.size() > 0) elliptic_rhs.coeff += w_init * u0.coeff;
    SpectralField U = resolvent_solve(probe.omega, elliptic_rhs);

    auto boundary_integral = [&](int order) {
      BoundaryQuadrature bq = boundary_quadrature(domain, order);
      double acc = 0.0;
      Eigen::VectorXd tr = neumann_trace(U, bq);
      for (int i = 0; i < bq.points.rows(); ++i) {
        double expo = probe.omega *
                      bq.points.row(i).head(d).dot(probe.xi.transpose());
        acc += bq.weights[i] * tr[i] * std::exp(expo);
      }
      return acc;
    };
    double prev = boundary_integral(16);
    double val = prev;
    for (int order : {32, 64, 128}) {
      val = boundary_integral(order);
      if (std::abs(val - prev) <= 1e-12 * (1.0 + std::abs(val))) break;
      prev = val;
    }
    rhs = -pref * val;
  } else {
    if (!trace) throw std::invalid_argument("from_trace mode needs trace data");
    Eigen::VectorXd lb = laplace_boundary(*trace, p);
    double acc = 0.0;
    for (int i = 0; i < trace->bq.points.rows(); ++i) {
      double expo = probe.omega *
                    trace->bq.points.row(i).head(d).dot(probe.xi.transpose());
      acc += trace->bq.weights[i] * lb[i] * std::exp(expo);
    }
    rhs = -pref * acc;
  }
  MomentParts parts;
  parts.lhs = lhs;
  parts.rhs = rhs;
  parts.residual = std::abs(lhs - rhs) / (1.0 + std::abs(lhs));
  return parts;
}

double moment_identity_residual(const Probe& probe, const SpectralField& f,
                                const SpectralField& u0, const SourceTime& g,
                                USource mode, const TraceData* trace) {
  return moment_identity_parts(probe, f, u0, g, mode, trace).residual;
}

std::complex<double> shifted_fourier(const SpectralField& phi,
                                     std::complex<double> z,
                                     const Eigen::VectorXd& xi) {
  const BoxDomain& domain = phi.basis->domain();
  const int d = domain.dim;
  if (xi.size() != d)
    throw std::invalid_argument("direction dimension mismatch");
  const double kappa = domain.kappa();

  // e^{-kappa z} phi^(iz xi) = (2 pi)^{-d/2} Int phi e^{z x.xi} dx e^{-kappa z};
  // per axis extract the endpoint c maximizing Re(z xi_i x) so every factor
  // stays bounded, and apply the accumulated exponent once at the end.
  std::complex<double> shift = -kappa * z;
  std::vector<std::complex<double>> w(d);
  std::vector<double> c(d);
  for (int i = 0; i < d; ++i) {
    w[i] = z * xi[i];
    c[i] = w[i].real() >= 0.0 ? domain.hi[i] : domain.lo[i];
    shift += w[i] * c[i];
  }

  auto H = [](std::complex<double> u, double a, double b, double cc) {
    // Int_a^b e^{u (x - cc)} dx with Re(u (x - cc)) <= 0 at both endpoints.
    if (std::abs(u) * (b - a) < 1e-8)
      return (b - a) * std::exp(u * (0.5 * (a + b) - cc)) *
             csinc(u * 0.5 * (b - a));
    return (std::exp(u * (b - cc)) - std::exp(u * (a - cc))) / u;
  };

  std::complex<double> sum = 0.0;
  for (int kmode = 0; kmode < phi.basis->size(); ++kmode) {
    if (phi.coeff[kmode] == 0.0) continue;
    const EigenMode& m = phi.basis->mode(kmode);
    std::complex<double> prod = phi.coeff[kmode];
    for (int i = 0; i < d; ++i) {
      const double a = domain.lo[i], b = domain.hi[i];
      const double L = b - a;
      const double k = m.index[i] * M_PI / L;
      std::complex<double> J =
          std::sqrt(2.0 / L) / (2.0 * kI) *
          (std::exp(kI * k * (c[i] - a)) * H(w[i] + kI * k, a, b, c[i]) -
           std::exp(-kI * k * (c[i] - a)) * H(w[i] - kI * k, a, b, c[i]));
      prod *= J;
    }
    sum += prod;
  }
  return fourier_prefactor(d) * sum * std::exp(shift);
}

std::complex<double> eval_F(const ContinuationContext& ctx,
                            std::complex<double> z) {
  if (z.real() < -1.0 - 1e-12)
    throw std::invalid_argument("eval_F requires Re z >= -1");
  if (z == 0.0) return 0.0;
  std::complex<double> ratio = std::pow(z / (2.0 + z), ctx.s);
  return ratio * shifted_fourier(ctx.phi, z, ctx.xi);
}

double harmonic_measure(std::complex<double> z) {
  if (z.real() < -1.0 - 1e-12 || z.imag() > 1e-12)
    throw std::invalid_argument("harmonic measure: z outside the quadrant");
  std::complex<double> u = z + 1.0;
  if (std::abs(u) == 0.0)
    throw std::invalid_argument("harmonic measure undefined at z = -1");
  double w = (2.0 / M_PI) * (M_PI / 2.0 + std::atan2(u.imag(), u.real()));
  return std::min(1.0, std::max(0.0, w));
}

double two_constants_margin(const ContinuationContext& ctx,
                            std::complex<double> z) {
  const double w = harmonic_measure(z);
  const double Fv = std::abs(eval_F(ctx, z));
  if (ctx.m == 0.0 && Fv > 0.0)
    throw std::runtime_error("inconsistent continuation data: m = 0, |F| > 0");
  return ctx.M * std::pow(ctx.m, w) - Fv;
}

ContinuationContext make_continuation_context(const SpectralField& phi, int s,
                                              const Eigen::VectorXd& xi) {
  if (s < 1) throw std::invalid_argument("s must be a positive integer");
  if (std::abs(xi.norm() - 1.0) > 1e-14)
    throw std::invalid_argument("xi must be a unit vector");
  ContinuationContext ctx;
  ctx.phi = phi;
  ctx.s = s;
  ctx.xi = xi;
  const int d = phi.basis->domain().dim;
  ctx.kappa = phi.basis->domain().kappa();
  ctx.M = 1.0 + fourier_prefactor(d) * std::exp(2.0 * ctx.kappa) * l1_norm(phi);

  // m = sup_{t in [-1, inf)} |F(t)|: dense scan of [-1, 1e4] with local
  // refinement, plus the last-decade maximum doubled as the tail bound.
  auto absF = [&](double t) { return std::abs(eval_F(ctx, {t, 0.0})); };
  std::vector<double> ts;
  for (int i = 0; i <= 800; ++i) {
    double u = static_cast<double>(i) / 800.0;
    ts.push_back(-1.0 + 4.0 * u * u);
  }
  for (int i = 1; i <= 700; ++i)
    ts.push_back(3.0 * std::pow(1e4 / 3.0, static_cast<double>(i) / 700.0));

  double best = 0.0, tail_max = 0.0;
  size_t best_i = 0;
  for (size_t i = 0; i < ts.size(); ++i) {
    double v = absF(ts[i]);
    if (v > best) {
      best = v;
      best_i = i;
    }
    if (ts[i] >= 1e3) tail_max = std::max(tail_max, v);
  }
  double lo = ts[best_i == 0 ? 0 : best_i - 1];
  double hi = ts[std::min(best_i + 1, ts.size() - 1)];
  for (int round = 0; round < 5; ++round) {
    double step = (hi - lo) / 64.0;
    double blo = lo, bval = -1.0, bt = lo;
    for (int i = 0; i <= 64; ++i) {
      double t = lo + i * step;
      double v = absF(t);
      if (v > bval) {
        bval = v;
        bt = t;
      }
    }
    best = std::max(best, bval);
    lo = std::max(blo, bt - step);
    hi = std::min(hi, bt + step);
  }
  ctx.m = std::max(best, 2.0 * tail_max);
  return ctx;
}

}  // namespace subdiff
