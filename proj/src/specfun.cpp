#include "subdiff/specfun.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "subdiff/quadrature.hpp"

namespace subdiff {

void MLParams::validate() const {
  if (!(beta1 > 0.0 && beta1 < 2.0))
    throw std::invalid_argument("MLParams: beta1 must lie in (0, 2)");
  if (!std::isfinite(beta2))
    throw std::invalid_argument("MLParams: beta2 must be finite");
  if (tail_terms < 1)
    throw std::invalid_argument("MLParams: tail_terms must be >= 1");
}

double sin_pi(double x) {
  // Reduce to [-1, 1] before multiplying by pi so large arguments keep full
  // accuracy and integers map to exactly 0.
  double r = std::remainder(x, 2.0);
  if (r == std::floor(r)) return 0.0;
  return std::sin(M_PI * r);
}

double recip_gamma(double x) {
  if (x <= 0.0 && x == std::floor(x)) return 0.0;  // poles of Gamma
  if (x > 0.5) {
    if (x > 170.0) {
      double lg = std::lgamma(x);
      return lg > 708.0 ? 0.0 : std::exp(-lg);
    }
    return 1.0 / std::tgamma(x);
  }
  // Reflection: 1/Gamma(x) = sin(pi x) * Gamma(1 - x) / pi.
  return sin_pi(x) * std::exp(std::lgamma(1.0 - x)) / M_PI;
}

namespace {

constexpr double kSeriesLimit = 5.0;      // series used while |tau|^(1/b1) <= 5
constexpr double kAsymptoticLimit = 38.0; // tail used once |tau|^(1/b1) >= 38

// Power series sum_k tau^k / Gamma(b1 k + b2) with compensated summation.
double ml_series(double b1, double b2, double tau) {
  double sum = 0.0, comp = 0.0;
  double power = 1.0;
  double peak = 0.0;
  for (int k = 0; k < 4000; ++k) {
    double term = power * recip_gamma(b1 * k + b2);
    double y = term - comp;
    double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
    double a = std::abs(term);
    peak = std::max(peak, a);
    if (k > 4 && a < 1e-18 * peak) break;
    power *= tau;
  }
  return sum;
}

// Confluent-hypergeometric route for b1 == 1:
//   E_{1,b}(-x) = e^{-x} M(b-1, b, x) / Gamma(b),
// whose Kummer-transformed series has a single sign pattern (no catastrophic
// cancellation for any x >= 0).
double ml_exp_order(double b2, double x) {
  const double a = b2 - 1.0;
  double term = 1.0, sum = 1.0;
  for (int k = 0; k < 100000; ++k) {
    term *= x * (a + k) / ((b2 + k) * (k + 1.0));
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
  }
  return std::exp(-x) * sum * recip_gamma(b2);
}

// Oscillatory pole-pair contribution present for b1 in (1, 2):
//   (2/b1) x^{(1-b2)/b1} e^{x^{1/b1} cos(pi/b1)} cos(x^{1/b1} sin(pi/b1)
//                                                    + pi (1-b2)/b1).
double pole_pair(double b1, double b2, double x) {
  double r = std::pow(x, 1.0 / b1);
  double ex = r * std::cos(M_PI / b1);
  if (ex < -745.0) return 0.0;
  return (2.0 / b1) * std::pow(x, (1.0 - b2) / b1) * std::exp(ex) *
         std::cos(r * std::sin(M_PI / b1) + M_PI * (1.0 - b2) / b1);
}

// Branch-cut integral for E_{b1,b2}(-x), requiring b2 <= 1:
//   E(-x) = 1/(pi b1) Int_0^inf chi^{(1-b2)/b1} e^{-chi^{1/b1}}
//           [chi sin(pi(1-b2)) + x sin(pi(1-b2+b1))]
//           / (chi^2 + 2 chi x cos(pi b1) + x^2) d chi   (+ pole pair, b1 > 1).
double ml_branch_cut(double b1, double b2, double x) {
  const double s1 = sin_pi(1.0 - b2);
  const double s2 = sin_pi(1.0 - b2 + b1);
  const double c = std::cos(M_PI * b1);
  double value;
  if (b1 <= 1.0) {
    auto f = [&](double chi) {
      double den = chi * chi + 2.0 * chi * x * c + x * x;
      return std::pow(chi, (1.0 - b2) / b1) * std::exp(-std::pow(chi, 1.0 / b1)) *
             (chi * s1 + x * s2) / den;
    };
    const double upper = std::pow(45.0, b1);
    // Split at the denominator minimum to help the adaptive rule.
    double split = std::min(x, upper);
    value = integrate_adaptive(f, 0.0, split, 1e-16, 5e-13) +
            integrate_adaptive(f, split, upper, 1e-16, 5e-13);
    value /= M_PI * b1;
  } else {
    // Substitute chi = v^{b1} so the e^{-v} factor decays on an O(1) window.
    auto f = [&](double v) {
      double vp = std::pow(v, b1);
      double den = vp * vp + 2.0 * vp * x * c + x * x;
      return std::pow(v, b1 - b2) * std::exp(-v) * (vp * s1 + x * s2) / den;
    };
    const double split = std::min(std::pow(x, 1.0 / b1), 45.0);
    value = integrate_adaptive(f, 0.0, split, 1e-16, 5e-13) +
            integrate_adaptive(f, split, 45.0, 1e-16, 5e-13);
    value /= M_PI;
    value += pole_pair(b1, b2, x);
  }
  return value;
}

// Adaptive algebraic expansion, truncated at the minimum of the smooth term
// envelope |tau|^{-k} Gamma(1 - b2 + b1 k) / pi (the reflection-formula bound
// on |tau^{-k}/Gamma(b2 - b1 k)|, with the oscillating sine factor dropped so
// near-pole terms do not fool the stopping rule). Reports the envelope of the
// first omitted term through *err.
double ml_asymptotic(double b1, double b2, double tau, double* err) {
  const double itau = 1.0 / tau;
  double power = 1.0;
  double sum = 0.0;
  double env_prev = std::numeric_limits<double>::infinity();
  double omitted = 0.0;
  for (int k = 1; k <= 1000; ++k) {
    power *= itau;
    double u = b2 - b1 * k;
    double env = u > 0.5 ? std::abs(power) * std::abs(recip_gamma(u))
                         : std::abs(power) * std::exp(std::lgamma(1.0 - u)) / M_PI;
    if (env >= env_prev) {  // divergent part of the expansion reached
      omitted = env;
      break;
    }
    env_prev = env;
    sum -= power * recip_gamma(u);
    omitted = env;
    if (env < 1e-18 * std::abs(sum)) break;
  }
  if (err) *err = omitted;
  if (b1 > 1.0) sum += pole_pair(b1, b2, -tau);
  return sum;
}

}  // namespace

double ml_tail_expansion(const MLParams& p, double tau) {
  p.validate();
  if (!(tau < 0.0))
    throw std::invalid_argument("ml_tail_expansion: tau must be negative");
  const double itau = 1.0 / tau;
  double power = 1.0;
  double sum = 0.0;
  for (int k = 1; k <= p.tail_terms; ++k) {
    power *= itau;
    sum -= power * recip_gamma(p.beta2 - p.beta1 * k);
  }
  return sum;
}

double mittag_leffler(const MLParams& p, double tau) {
  p.validate();
  if (!(tau <= 0.0))
    throw std::invalid_argument("mittag_leffler: tau must be <= 0");
  if (tau == 0.0) return recip_gamma(p.beta2);

  double b1 = p.beta1, b2 = p.beta2;
  const double x = -tau;

  if (std::abs(b1 - 1.0) < 1e-12) {
    if (b2 == 1.0) return std::exp(tau);
    if (b2 > 0.0 && x <= kAsymptoticLimit) return ml_exp_order(b2, x);
    if (b2 <= 0.0 && x <= kAsymptoticLimit) {
      // Lift beta2 into (0, 1] first: E_{a,b}(z) = z E_{a,b+a}(z) + 1/Gamma(b).
      int lift = static_cast<int>(std::ceil(-b2)) + 1;
      double e = ml_exp_order(b2 + lift, x);
      for (int j = lift; j >= 1; --j) e = tau * e + recip_gamma(b2 + j - 1.0);
      return e;
    }
    double err = 0.0;
    double v = ml_asymptotic(b1, b2, tau, &err);
    if (err > 1e-9 * std::abs(v) + 1e-280)
      throw std::runtime_error("mittag_leffler: tail expansion did not converge");
    return v;
  }

  const double scale = std::pow(x, 1.0 / b1);
  if (scale <= kSeriesLimit) return ml_series(b1, b2, tau);
  if (scale >= kAsymptoticLimit) {
    double err = 0.0;
    double v = ml_asymptotic(b1, b2, tau, &err);
    if (err > 1e-9 * std::abs(v) + 1e-280)
      throw std::runtime_error("mittag_leffler: tail expansion did not converge");
    return v;
  }

  // Mid range: Laplace-type branch-cut representation. It needs b2 <= 1, so
  // larger b2 is first reduced by E_{a,b}(z) = z E_{a,b+a}(z) + 1/Gamma(b),
  // walked back up after the integral.
  int steps = 0;
  double b2r = b2;
  while (b2r > 1.0) {
    b2r -= b1;
    ++steps;
  }
  double value = ml_branch_cut(b1, b2r, x);
  for (int j = 1; j <= steps; ++j)
    value = (value - recip_gamma(b2r)) / tau, b2r += b1;
  return value;
}

double mittag_leffler(double beta1, double beta2, double tau) {
  MLParams p;
  p.beta1 = beta1;
  p.beta2 = beta2;
  return mittag_leffler(p, tau);
}

}  // namespace subdiff
