#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "ml_reference.hpp"
#include "subdiff/forward.hpp"
#include "subdiff/specfun.hpp"

using namespace subdiff;
using subdiff::testing::ml_series_reference;

namespace {

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = static_cast<int>(x.size());
  for (int i = 0; i < n; ++i) {
    double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

TEST_CASE("rl_integral closed forms") {
  for (double beta : {0.3, 0.5, 1.0}) {
    for (double t : {0.2, 1.0, 3.0}) {
      double got = rl_integral([](double) { return 1.0; }, beta, t);
      double want = std::pow(t, beta) * recip_gamma(beta + 1.0);
      CHECK(got == doctest::Approx(want).epsilon(1e-13));
    }
  }
  CHECK(rl_integral([](double s) { return s; }, 1.0, 2.0) ==
        doctest::Approx(2.0).epsilon(1e-13));
  // I^{1/2} of sqrt(s) at t=1: Gamma(3/2)/Gamma(2) = sqrt(pi)/2
  CHECK(rl_integral([](double s) { return std::sqrt(s); }, 0.5, 1.0) ==
        doctest::Approx(std::sqrt(M_PI) / 2.0).epsilon(1e-7));
  CHECK_THROWS(rl_integral([](double) { return 1.0; }, -0.2, 1.0));
}

TEST_CASE("caputo_derivative closed forms and L1 order") {
  TimeGrid g = TimeGrid::uniform(1.0, 400);
  Eigen::VectorXd c = Eigen::VectorXd::Constant(g.size(), 3.7);
  CHECK(caputo_derivative(g.nodes, c, 0.5, g.size() - 1) == doctest::Approx(0.0));

  // h = t: exactly t^{1-alpha}/Gamma(2-alpha) (L1 is exact on piecewise linear)
  for (double alpha : {0.3, 0.7}) {
    Eigen::VectorXd h = g.nodes;
    double got = caputo_derivative(g.nodes, h, alpha, g.size() - 1);
    double want = std::pow(1.0, 1.0 - alpha) * recip_gamma(2.0 - alpha);
    CHECK(got == doctest::Approx(want).epsilon(1e-12));
  }

  // h = t^2 at t=1, alpha=0.5: 2 Gamma(2)/Gamma(2.5) = rl_integral(2s, 0.5, 1)
  double want = rl_integral([](double s) { return 2.0 * s; }, 0.5, 1.0);
  CHECK(want == doctest::Approx(2.0 * recip_gamma(2.5)).epsilon(1e-10));
  TimeGrid fine = TimeGrid::uniform(1.0, 20000);
  Eigen::VectorXd h2 = fine.nodes.array().square();
  double got = caputo_derivative(fine.nodes, h2, 0.5, fine.size() - 1);
  CHECK(got == doctest::Approx(want).epsilon(1e-6));

  // consistency order 2 - alpha on smooth h = t^2
  for (double alpha : {0.4, 0.8}) {
    std::vector<double> hs, errs;
    for (int n : {100, 200, 400, 800}) {
      TimeGrid gg = TimeGrid::uniform(1.0, n);
      Eigen::VectorXd hh = gg.nodes.array().square();
      double exact = 2.0 * std::pow(1.0, 2.0 - alpha) * recip_gamma(3.0 - alpha);
      hs.push_back(1.0 / n);
      errs.push_back(std::abs(
          caputo_derivative(gg.nodes, hh, alpha, gg.size() - 1) - exact));
    }
    CHECK(loglog_slope(hs, errs) >= (2.0 - alpha) - 0.15);
  }

  Eigen::VectorXd bad(3), vals(3);
  bad << 0.0, 0.5, 0.4;
  vals << 0.0, 1.0, 2.0;
  CHECK_THROWS(caputo_derivative(bad, vals, 0.5, 2));
}

TEST_CASE("s0/s1 semigroup factors") {
  auto basis = build_basis(BoxDomain::square(-0.5, 0.5), 3);
  SpectralField e1 = SpectralField::unit(basis, 0);
  double lam = basis->mode(0).lambda;

  SpectralField a = s0_apply(0.5, 0.0, e1);
  CHECK(a.coeff[0] == doctest::Approx(1.0).epsilon(1e-14));

  // alpha = 1: heat semigroup
  SpectralField b = s0_apply(1.0, 0.3, e1);
  CHECK(b.coeff[0] == doctest::Approx(std::exp(-lam * 0.3)).epsilon(1e-12));
  SpectralField c = s1_apply(1.0, 0.3, e1);
  CHECK(c.coeff[0] == doctest::Approx(std::exp(-lam * 0.3)).epsilon(1e-12));

  // alpha = 0.5 at t=1 vs the high-precision oracle
  SpectralField d = s0_apply(0.5, 1.0, e1);
  CHECK(d.coeff[0] ==
        doctest::Approx(ml_series_reference(0.5, 1.0, -lam)).epsilon(1e-11));
  SpectralField e = s1_apply(0.5, 1.0, e1);
  CHECK(e.coeff[0] ==
        doctest::Approx(ml_series_reference(0.5, 0.5, -lam)).epsilon(1e-11));

  CHECK_THROWS(s1_apply(0.5, 0.0, e1));
}

TEST_CASE("s1 large-time decay slope -(alpha+1)") {
  auto basis = build_basis(BoxDomain::square(-0.5, 0.5), 1);
  SpectralField e1 = SpectralField::unit(basis, 0);
  std::vector<double> ts, vs;
  for (double t = 1e3; t <= 1e6; t *= 10.0) {
    ts.push_back(t);
    vs.push_back(std::abs(s1_apply(0.5, t, e1).coeff[0]));
  }
  CHECK(std::abs(loglog_slope(ts, vs) - (-1.5)) < 0.05 * 1.5);
}

TEST_CASE("s0 decay envelope C/(1+t^alpha) in D(A)") {
  auto basis = build_basis(BoxDomain::square(-0.5, 0.5), 4);
  SpectralField u0 = SpectralField::zero(basis);
  u0.coeff << 1.0, -0.4, 0.2, 0.1;
  double alpha = 0.6;
  double norm0 = sobolev_norm(u0, 2);
  // the uniform decay constant of E_{alpha,1} itself
  double cu = 0.0;
  for (int i = 0; i <= 200; ++i) {
    double y = 1e-3 * std::pow(1e10, i / 200.0);
    cu = std::max(cu, (1.0 + y) * std::abs(mittag_leffler(alpha, 1.0, -y)));
  }
  for (int i = 0; i <= 40; ++i) {
    double t = std::pow(10.0, -2.0 + 6.0 * i / 40.0);  // up to 1e4
    double norm = sobolev_norm(s0_apply(alpha, t, u0), 2);  // D(A) norm
    CHECK(norm * (1.0 + std::pow(t, alpha)) <= 1.01 * cu * norm0);
  }
}

TEST_CASE("s1 smoothing norm slope alpha/8 - 1 into D(A^{7/8})") {
  // operator norm L^2 -> D(A^{7/8}): sup over lambda of
  // lambda^{7/8} t^{alpha-1} E_{alpha,alpha}(-lambda t^alpha)
  double alpha = 0.5;
  std::vector<double> ts, vs;
  for (double t = 1e-6; t <= 1e-2 * 1.001; t *= 10.0) {
    double sup = 0.0;
    for (int i = 0; i <= 400; ++i) {
      double lam = std::pow(10.0, 14.0 * i / 400.0);  // 1 .. 1e14
      double v = std::pow(lam, 0.875) * std::pow(t, alpha - 1.0) *
                 mittag_leffler(alpha, alpha, -lam * std::pow(t, alpha));
      sup = std::max(sup, v);
    }
    ts.push_back(t);
    vs.push_back(sup);
  }
  double slope = loglog_slope(ts, vs);
  double want = alpha / 8.0 - 1.0;
  CHECK(std::abs(slope - want) < 0.10 * std::abs(want));
}

TEST_CASE("duhamel: no source reduces to s0 exactly") {
  auto basis = build_basis(BoxDomain::square(-0.5, 0.5), 4);
  SpectralField u0 = SpectralField::zero(basis);
  u0.coeff << 1.0, -2.0, 0.5, 0.0;
  SpectralField f = SpectralField::zero(basis);
  TimeGrid grid = TimeGrid::graded(1.0, 64, 0.5);
  ForwardSolution sol = duhamel_solve(u0, f, SourceTime::none(), grid, 0.5, 1);
  CHECK(sol.coeff.row(0).transpose().isApprox(u0.coeff, 1e-15));
  for (int i = 1; i < grid.size(); ++i) {
    SpectralField want = s0_apply(0.5, grid.nodes[i], u0);
    CHECK((sol.coeff.row(i).transpose() - want.coeff).cwiseAbs().maxCoeff() <
          1e-14);
  }
}

TEST_CASE("duhamel: alpha = 1 matches the heat closed form") {
  auto basis = build_basis(BoxDomain::square(-0.5, 0.5), 4);
  SpectralField u0 = SpectralField::zero(basis);
  SpectralField f = SpectralField::unit(basis, 0);
  double lam = basis->mode(0).lambda;
  TimeGrid grid = TimeGrid::graded(1.0, 2000, 1.0);
  ForwardSolution sol = duhamel_solve(u0, f, SourceTime::exponential(), grid, 1.0, 2);
  for (int i : {500, 1000, 1999, 2000}) {
    double t = grid.nodes[i];
    double want = (std::exp(-t) - std::exp(-lam * t)) / (lam - 1.0);
    CHECK(sol.coeff(i, 0) == doctest::Approx(want).epsilon(1e-8));
  }
}

TEST_CASE("duhamel: refined-grid oracle at alpha = 0.5") {
  auto basis = build_basis(BoxDomain::square(-0.5, 0.5), 1);
  SpectralField u0 = SpectralField::zero(basis);
  SpectralField f = SpectralField::unit(basis, 0);
  TimeGrid coarse = TimeGrid::graded(1.0, 2000, 0.5);
  TimeGrid fine = TimeGrid::graded(1.0, 12000, 0.5);
  ForwardSolution a = duhamel_solve(u0, f, SourceTime::exponential(), coarse, 0.5, 1);
  ForwardSolution b = duhamel_solve(u0, f, SourceTime::exponential(), fine, 0.5, 1);
  double va = a.coeff(coarse.size() - 1, 0);
  double vb = b.coeff(fine.size() - 1, 0);
  CHECK(std::abs(va - vb) / std::abs(vb) < 1e-6);
}

TEST_CASE("duhamel linearity and thread-count independence") {
  auto basis = build_basis(BoxDomain::square(-0.5, 0.5), 6);
  SpectralField u0 = SpectralField::zero(basis);
  u0.coeff << 0.2, 0.0, -1.0, 0.4, 0.0, 0.1;
  SpectralField f = SpectralField::zero(basis);
  f.coeff << 1.0, -0.3, 0.0, 0.7, 0.2, 0.0;
  TimeGrid grid = TimeGrid::graded(0.7, 128, 0.6);
  ForwardSolution one = duhamel_solve(u0, f, SourceTime::exponential(), grid, 0.6, 1);

  SpectralField u0s = u0, fs = f;
  u0s.coeff *= -2.5;
  fs.coeff *= -2.5;
  ForwardSolution scaled =
      duhamel_solve(u0s, fs, SourceTime::exponential(), grid, 0.6, 1);
  CHECK((scaled.coeff + 2.5 * one.coeff).cwiseAbs().maxCoeff() < 1e-13);

  ForwardSolution four = duhamel_solve(u0, f, SourceTime::exponential(), grid, 0.6, 4);
  CHECK((four.coeff - one.coeff).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("pde_residual: zero data, manufactured solution, convergence") {
  auto basis = build_basis(BoxDomain::square(-0.5, 0.5), 2);
  SpectralField zero = SpectralField::zero(basis);
  TimeGrid grid = TimeGrid::graded(1.0, 64, 0.5);
  ForwardSolution empty = duhamel_solve(zero, zero, SourceTime::none(), grid, 0.5, 1);
  CHECK(pde_residual(empty, zero, SourceTime::none()) == 0.0);

  // manufactured: u_1(t) = t^2 with matched separable source (single mode)
  double alpha = 0.5;
  double lam = basis->mode(0).lambda;
  TimeGrid fine = TimeGrid::uniform(1.0, 20000);
  Eigen::VectorXd h2 = fine.nodes.array().square();
  double capu = caputo_derivative(fine.nodes, h2, alpha, fine.size() - 1);
  double exact = 2.0 * recip_gamma(3.0 - alpha);  // t=1
  double resid = std::abs(capu + lam * 1.0 - (exact + lam * 1.0)) /
                 (exact + lam);
  CHECK(resid < 1e-6);

  // residual of the Duhamel solution decreases at order ~ 2 - alpha
  for (double a : {0.5, 0.8}) {
    SpectralField u0 = SpectralField::unit(basis, 0);
    std::vector<double> hs, rs;
    for (int n : {64, 128, 256}) {
      TimeGrid gg = TimeGrid::graded(1.0, n, a);
      ForwardSolution sol = duhamel_solve(u0, zero, SourceTime::none(), gg, a, 1);
      hs.push_back(1.0 / n);
      rs.push_back(pde_residual(sol, zero, SourceTime::none()));
    }
    CHECK(loglog_slope(hs, rs) >= (2.0 - a) - 0.2);
  }
}

TEST_CASE("neumann_trace of solution fields") {
  auto basis = build_basis(BoxDomain::square(-0.5, 0.5), 3);
  BoundaryQuadrature bq = boundary_quadrature(basis->domain(), 8);
  SpectralField z = SpectralField::zero(basis);
  CHECK(neumann_trace(z, bq).norm() == 0.0);
  SpectralField mix = SpectralField::zero(basis);
  mix.coeff << 1.0, -0.5, 0.25;
  Eigen::VectorXd tr = neumann_trace(mix, bq);
  for (int i = 0; i < bq.points.rows(); ++i) {
    double want = 0.0;
    for (int k = 0; k < 3; ++k)
      want += mix.coeff[k] *
              basis->mode_neumann(k, bq.points.row(i).transpose());
    CHECK(tr[i] == doctest::Approx(want).epsilon(1e-14));
  }
}

TEST_CASE("graded grid construction and validation") {
  TimeGrid g = TimeGrid::graded(2.0, 10, 0.5);
  CHECK(g.nodes[0] == 0.0);
  CHECK(g.nodes[10] == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(g.nodes[5] == doctest::Approx(2.0 * std::pow(0.5, 4.0)).epsilon(1e-14));
  g.validate();
  TimeGrid bad;
  bad.nodes = Eigen::VectorXd::Zero(3);
  CHECK_THROWS(bad.validate());
}
