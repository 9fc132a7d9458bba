#include "subdiff/forward.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <vector>

#include "subdiff/specfun.hpp"

namespace subdiff {

SourceTime SourceTime::exponential() {
  SourceTime s;
  s.g = [](double t) { return std::exp(-t); };
  s.laplace_g = [](double p) { return 1.0 / (1.0 + p); };
  s.c0 = 0.0;  // callers validate on their probe range
  return s;
}

SourceTime SourceTime::none() {
  SourceTime s;
  s.g = [](double) { return 0.0; };
  s.laplace_g = [](double) { return 0.0; };
  return s;
}

TimeGrid TimeGrid::graded(double T, int n, double alpha) {
  if (!(T > 0.0) || n < 1)
    throw std::invalid_argument("TimeGrid::graded: need T > 0, n >= 1");
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw std::invalid_argument("TimeGrid::graded: alpha must be in (0, 1]");
  TimeGrid g;
  g.nodes.resize(n + 1);
  double r = 2.0 / alpha;
  for (int j = 0; j <= n; ++j)
    g.nodes[j] = T * std::pow(static_cast<double>(j) / n, r);
  return g;
}

TimeGrid TimeGrid::uniform(double T, int n) {
  TimeGrid g;
  g.nodes = Eigen::VectorXd::LinSpaced(n + 1, 0.0, T);
  return g;
}

void TimeGrid::validate() const {
  if (nodes.size() < 2 || nodes[0] != 0.0)
    throw std::invalid_argument("TimeGrid: need t_0 = 0 and >= 2 nodes");
  for (int j = 1; j < nodes.size(); ++j)
    if (!(nodes[j] > nodes[j - 1]))
      throw std::invalid_argument("TimeGrid: nodes must increase strictly");
}

SpectralField ForwardSolution::at(int node) const {
  SpectralField f;
  f.basis = basis;
  f.coeff = coeff.row(node).transpose();
  return f;
}

double rl_integral(const std::function<double(double)>& h, double beta,
                   double t, int n) {
  if (!(beta > 0.0))
    throw std::invalid_argument("rl_integral: beta must be positive");
  if (!(t > 0.0)) throw std::invalid_argument("rl_integral: t must be positive");
  // Graded nodes resolve an integrable singularity of h near 0 as well as the
  // kernel's near t; product integration is exact for piecewise-linear h.
  double sum = 0.0;
  double tau1 = 0.0, h1 = h(0.0);
  for (int j = 1; j <= n; ++j) {
    double tau2 = t * std::pow(static_cast<double>(j) / n, 2.0);
    double h2 = h(tau2);
    // Int_{tau1}^{tau2} (a + b s)(t-s)^{beta-1} ds with h linear on the piece.
    double b = (h2 - h1) / (tau2 - tau1);
    double a = h1 - b * tau1;
    double r2 = t - tau1, r1 = t - tau2;  // r2 > r1 >= 0
    double pb = (std::pow(r2, beta) - std::pow(r1, beta)) / beta;
    double pb1 = (std::pow(r2, beta + 1.0) - std::pow(r1, beta + 1.0)) / (beta + 1.0);
    sum += (a + b * t) * pb - b * pb1;
    tau1 = tau2;
    h1 = h2;
  }
  return sum * recip_gamma(beta);
}

double caputo_derivative(const Eigen::VectorXd& t, const Eigen::VectorXd& h,
                         double alpha, int n_index) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("caputo_derivative: alpha must be in (0,1)");
  if (n_index < 1 || n_index >= t.size() || h.size() != t.size())
    throw std::invalid_argument("caputo_derivative: bad node index or sizes");
  for (int j = 1; j <= n_index; ++j)
    if (!(t[j] > t[j - 1]))
      throw std::invalid_argument("caputo_derivative: non-monotone grid");
  const double tn = t[n_index];
  const double p = 1.0 - alpha;
  double sum = 0.0;
  for (int j = 0; j < n_index; ++j) {
    double dt = t[j + 1] - t[j];
    double slope = (h[j + 1] - h[j]) / dt;
    // (tn-t_j)^p - (tn-t_{j+1})^p without cancellation when the interval is
    // tiny relative to its distance from tn (strongly graded grids). The
    // interval length enters as t_{j+1}-t_j directly; forming it from the
    // two rounded distances to tn would reintroduce the cancellation.
    double b = tn - t[j];
    double diff =
        j + 1 < n_index
            ? -std::pow(b, p) * std::expm1(p * std::log1p(-dt / b))
            : std::pow(b, p);
    sum += slope * diff;
  }
  return sum * recip_gamma(2.0 - alpha);
}

SpectralField s0_apply(double alpha, double t, const SpectralField& u0) {
  if (!(t >= 0.0)) throw std::invalid_argument("s0_apply: t must be >= 0");
  SpectralField out;
  out.basis = u0.basis;
  out.coeff.resize(u0.coeff.size());
  for (int k = 0; k < u0.coeff.size(); ++k)
    out.coeff[k] = u0.coeff[k] == 0.0
                       ? 0.0
                       : mittag_leffler(alpha, 1.0,
                                        -u0.basis->mode(k).lambda *
                                            std::pow(t, alpha)) *
                             u0.coeff[k];
  return out;
}

SpectralField s1_apply(double alpha, double t, const SpectralField& f) {
  if (!(t > 0.0))
    throw std::invalid_argument("s1_apply: t must be positive (singular at 0)");
  SpectralField out;
  out.basis = f.basis;
  out.coeff.resize(f.coeff.size());
  double ta = std::pow(t, alpha);
  double pre = std::pow(t, alpha - 1.0);
  for (int k = 0; k < f.coeff.size(); ++k)
    out.coeff[k] = f.coeff[k] == 0.0
                       ? 0.0
                       : pre *
                             mittag_leffler(alpha, alpha,
                                            -f.basis->mode(k).lambda * ta) *
                             f.coeff[k];
  return out;
}

namespace {

// Log-spaced lookup table for E_{alpha,beta}(-y). The Duhamel convolution is
// integrated exactly on piecewise-linear g via the antiderivatives
//   W(r) = Int_0^r rho^{alpha-1} E_{alpha,alpha}(-lam rho^alpha) drho
//        = r^alpha E_{alpha,alpha+1}(-lam r^alpha),
//   V(r) = Int_0^r rho^alpha E_{alpha,alpha}(-lam rho^alpha) drho
//        = r^{alpha+1} [E_{alpha,alpha+1} - E_{alpha,alpha+2}](-lam r^alpha),
// so beta in {alpha+1, alpha+2} is tabulated once per alpha and shared across
// all modes (lambda only rescales the argument). 4-point Lagrange in log y;
// outside the table a 3-term power series below and 3-term algebraic tail
// above.
class KernelTable {
 public:
  KernelTable(double alpha, double beta) : alpha_(alpha), beta_(beta) {
    u0_ = std::log(1e-8);
    const double u1 = std::log(1e10);
    n_ = static_cast<int>(std::ceil((u1 - u0_) / (std::log(10.0) / 256.0))) + 4;
    du_ = (u1 - u0_) / (n_ - 1);
    val_.resize(n_);
    for (int i = 0; i < n_; ++i)
      val_[i] = mittag_leffler(alpha_, beta_, -std::exp(u0_ + i * du_));
  }

  double operator()(double y) const {
    if (y <= 0.0) return recip_gamma(beta_);
    double u = std::log(y);
    if (u <= u0_ + du_) {
      return recip_gamma(beta_) - y * recip_gamma(alpha_ + beta_) +
             y * y * recip_gamma(2.0 * alpha_ + beta_);
    }
    if (u >= u0_ + (n_ - 3) * du_) {
      double iy = 1.0 / y;
      return iy * recip_gamma(beta_ - alpha_) -
             iy * iy * recip_gamma(beta_ - 2.0 * alpha_) +
             iy * iy * iy * recip_gamma(beta_ - 3.0 * alpha_);
    }
    int i = static_cast<int>((u - u0_) / du_);
    i = std::clamp(i, 1, n_ - 3);
    double s = (u - (u0_ + i * du_)) / du_;  // in [0,1) around node i
    // 4-point Lagrange on nodes i-1..i+2
    double c0 = -s * (s - 1.0) * (s - 2.0) / 6.0;
    double c1 = (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0;
    double c2 = -(s + 1.0) * s * (s - 2.0) / 2.0;
    double c3 = (s + 1.0) * s * (s - 1.0) / 6.0;
    return c0 * val_[i - 1] + c1 * val_[i] + c2 * val_[i + 1] + c3 * val_[i + 2];
  }

 private:
  double alpha_, beta_, u0_, du_;
  int n_ = 0;
  std::vector<double> val_;
};

const KernelTable& kernel_table(double alpha, double beta) {
  static std::map<std::pair<double, double>, KernelTable> cache;
  static std::mutex mtx;
  std::lock_guard<std::mutex> lock(mtx);
  auto key = std::make_pair(alpha, beta);
  auto it = cache.find(key);
  if (it == cache.end())
    it = cache.emplace(key, KernelTable(alpha, beta)).first;
  return it->second;
}

}  // namespace

ForwardSolution duhamel_solve(const SpectralField& u0, const SpectralField& f,
                              const SourceTime& g, const TimeGrid& grid,
                              double alpha, int threads) {
  grid.validate();
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw std::invalid_argument("duhamel_solve: alpha must be in (0, 1]");
  if (u0.basis != f.basis)
    throw std::invalid_argument("duhamel_solve: u0 and f need the same basis");
  const int n = grid.size();
  const int modes = u0.basis->size();

  ForwardSolution sol;
  sol.basis = u0.basis;
  sol.grid = grid;
  sol.alpha = alpha;
  sol.coeff.resize(n, modes);

  // Node values of g; the convolution integrates the piecewise-linear
  // interpolant exactly.
  Eigen::VectorXd gval(n);
  for (int j = 0; j < n; ++j) gval[j] = g.g(grid.nodes[j]);
  const bool has_source = f.coeff.cwiseAbs().maxCoeff() > 0.0 &&
                          gval.cwiseAbs().maxCoeff() > 0.0;
  const KernelTable& tab1 = kernel_table(alpha, alpha + 1.0);
  const KernelTable& tab2 = kernel_table(alpha, alpha + 2.0);

  auto solve_mode = [&](int k) {
    const double lam = u0.basis->mode(k).lambda;
    // homogeneous part
    sol.coeff(0, k) = u0.coeff[k];
    for (int i = 1; i < n; ++i)
      sol.coeff(i, k) =
          u0.coeff[k] == 0.0
              ? 0.0
              : mittag_leffler(alpha, 1.0,
                               -lam * std::pow(grid.nodes[i], alpha)) *
                    u0.coeff[k];
    if (!has_source || f.coeff[k] == 0.0) return;
    // On [t_j, t_{j+1}] with g linear, substituting s = t_i - r:
    //   Int g(s) (t_i-s)^{alpha-1} E_{alpha,alpha}(-lam (t_i-s)^alpha) ds
    //   = [g(t_j) + b (t_i - t_j)] (W(r2) - W(r1)) - b (V(r2) - V(r1)),
    // with b the slope of g, r1 = t_i - t_{j+1}, r2 = t_i - t_j.
    auto W = [&](double r) {
      if (r <= 0.0) return 0.0;
      double ra = std::pow(r, alpha);
      return ra * tab1(lam * ra);
    };
    auto V = [&](double r) {
      if (r <= 0.0) return 0.0;
      double ra = std::pow(r, alpha);
      double y = lam * ra;
      return ra * r * (tab1(y) - tab2(y));
    };
    for (int i = 1; i < n; ++i) {
      const double ti = grid.nodes[i];
      double acc = 0.0;
      double w_hi = W(ti - grid.nodes[0]);
      double v_hi = V(ti - grid.nodes[0]);
      for (int j = 0; j < i; ++j) {
        double w_lo = W(ti - grid.nodes[j + 1]);
        double v_lo = V(ti - grid.nodes[j + 1]);
        double b = (gval[j + 1] - gval[j]) / (grid.nodes[j + 1] - grid.nodes[j]);
        acc += (gval[j] + b * (ti - grid.nodes[j])) * (w_hi - w_lo) -
               b * (v_hi - v_lo);
        w_hi = w_lo;
        v_hi = v_lo;
      }
      sol.coeff(i, k) += f.coeff[k] * acc;
    }
  };

  int nthreads = threads > 0 ? threads
                             : static_cast<int>(std::max(
                                   1u, std::thread::hardware_concurrency()));
  nthreads = std::min(nthreads, modes);
  if (nthreads <= 1) {
    for (int k = 0; k < modes; ++k) solve_mode(k);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    for (int t = 0; t < nthreads; ++t)
      pool.emplace_back([&, t]() {
        for (int k = t; k < modes; k += nthreads) solve_mode(k);
      });
    for (auto& th : pool) th.join();
  }
  return sol;
}

Eigen::VectorXd neumann_trace(const SpectralField& u_at_t,
                              const BoundaryQuadrature& bq) {
  const int n = static_cast<int>(bq.points.rows());
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd x = bq.points.row(i).transpose();
    for (int k = 0; k < u_at_t.basis->size(); ++k)
      if (u_at_t.coeff[k] != 0.0)
        out[i] += u_at_t.coeff[k] * u_at_t.basis->mode_neumann(k, x);
  }
  return out;
}

double pde_residual(const ForwardSolution& sol, const SpectralField& f,
                    const SourceTime& g) {
  const int n = sol.grid.size();
  const int modes = sol.basis->size();
  const double T = sol.grid.nodes[n - 1];
  double worst = 0.0;
  for (int k = 0; k < modes; ++k) {
    const double lam = sol.basis->mode(k).lambda;
    Eigen::VectorXd uk = sol.coeff.col(k);
    double scale = 1e-300;
    for (int i = 0; i < n; ++i)
      scale = std::max(scale, std::abs(lam * uk[i]));
    for (int i = 0; i < n; ++i)
      scale = std::max(scale, std::abs(g.g(sol.grid.nodes[i]) * f.coeff[k]));
    if (scale <= 1e-300) continue;
    for (int i = 1; i < n; ++i) {
      if (sol.grid.nodes[i] < 0.05 * T) continue;  // skip the t^alpha layer
      double res = caputo_derivative(sol.grid.nodes, uk, sol.alpha, i) +
                   lam * uk[i] - g.g(sol.grid.nodes[i]) * f.coeff[k];
      worst = std::max(worst, std::abs(res) / scale);
    }
  }
  return worst;
}

}  // namespace subdiff
