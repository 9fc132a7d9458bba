#include "subdiff/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace subdiff {

static GaussRule compute_gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    // Chebyshev-like initial guess for the i-th root of P_n.
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      // Legendre recurrence for P_n(x) and its derivative.
      double p0 = 1.0, p1 = x;
      for (int j = 2; j <= n; ++j) {
        double p2 = ((2 * j - 1) * x * p1 - (j - 1) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      pp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    double w = 2.0 / ((1.0 - x * x) * pp * pp);
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  return rule;
}

const GaussRule& gauss_legendre(int n) {
  static std::map<int, GaussRule> cache;
  static std::mutex mtx;
  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, compute_gauss_legendre(n)).first;
  return it->second;
}

double gauss_integrate(const std::function<double(double)>& f, double a,
                       double b, int n) {
  const GaussRule& rule = gauss_legendre(n);
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double sum = 0.0;
  for (int i = 0; i < n; ++i)
    sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
  return half * sum;
}

namespace {

// Gauss-Kronrod 7/15 nodes and weights on [-1, 1] (positive half; symmetric).
const double kKronrodNodes[8] = {
    0.0,
    0.207784955007898467600689403773245,
    0.405845151377397166906606412076961,
    0.586087235467691130294144838258730,
    0.741531185599394439863864773280788,
    0.864864423359769072789712788640926,
    0.949107912342758524526189684047851,
    0.991455371120812639206854697526329};
const double kKronrodWeights[8] = {
    0.209482141084727828012999174891714,
    0.204432940075298892414161999234649,
    0.190350578064785409913256402421014,
    0.169004726639267902826583426598550,
    0.140653259715525918745189590510238,
    0.104790010322250183839876322541518,
    0.063092092629978553290700663189204,
    0.022935322010529224963732008058970};
const double kGaussWeights[4] = {
    0.417959183673469387755102040816327,
    0.381830050505118944950369775488975,
    0.279705391489276667901467771423780,
    0.129484966168869693270611432679082};

struct GK15Result {
  double integral;
  double error;
};

GK15Result gk15(const std::function<double(double)>& f, double a, double b) {
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double fv[15];
  fv[7] = f(mid);
  for (int i = 1; i < 8; ++i) {
    double dx = half * kKronrodNodes[i];
    fv[7 - i] = f(mid - dx);
    fv[7 + i] = f(mid + dx);
  }
  double resk = kKronrodWeights[0] * fv[7];
  double resg = kGaussWeights[0] * fv[7];
  for (int i = 1; i < 8; ++i) {
    double pair = fv[7 - i] + fv[7 + i];
    resk += kKronrodWeights[i] * pair;
    if (i % 2 == 0) resg += kGaussWeights[i / 2] * pair;
  }
  GK15Result r;
  r.integral = resk * half;
  r.error = std::abs((resk - resg) * half);
  return r;
}

double adapt(const std::function<double(double)>& f, double a, double b,
             double abstol, double reltol, int depth, int max_depth) {
  GK15Result r = gk15(f, a, b);
  double tol = std::max(abstol, reltol * std::abs(r.integral));
  if (r.error <= tol || depth >= max_depth) return r.integral;
  double mid = 0.5 * (a + b);
  return adapt(f, a, mid, 0.5 * abstol, reltol, depth + 1, max_depth) +
         adapt(f, mid, b, 0.5 * abstol, reltol, depth + 1, max_depth);
}

}  // namespace

double integrate_adaptive(const std::function<double(double)>& f, double a,
                          double b, double abstol, double reltol,
                          int max_depth) {
  if (!(a < b)) {
    if (a == b) return 0.0;
    return -integrate_adaptive(f, b, a, abstol, reltol, max_depth);
  }
  return adapt(f, a, b, abstol, reltol, 0, max_depth);
}

}  // namespace subdiff
