#pragma once

namespace subdiff {

/// Orders of a two-parameter Mittag-Leffler evaluation. `tail_terms` is the
/// number of terms used when the algebraic large-argument expansion is
/// requested explicitly through ml_tail_expansion().
struct MLParams {
  double beta1 = 0.5;  // in (0, 2)
  double beta2 = 1.0;
  int tail_terms = 10;  // >= 1

  void validate() const;
};

/// sin(pi*x) with exact zeros at all integers.
double sin_pi(double x);

/// 1/Gamma(x). Entire function of x; returns exactly 0 at x = 0, -1, -2, ...
double recip_gamma(double x);

/// E_{beta1,beta2}(tau) for tau <= 0. Relative accuracy ~1e-12 over the
/// whole negative axis. Throws std::runtime_error if no evaluation regime
/// reaches the tolerance (diagnostic; not expected for tau <= 0).
double mittag_leffler(const MLParams& p, double tau);
double mittag_leffler(double beta1, double beta2, double tau);

/// N-term algebraic expansion -sum_{k=1}^{N} tau^{-k} / Gamma(beta2 - beta1 k),
/// valid as tau -> -inf with error O(|tau|^{-N-1}). Terms whose Gamma argument
/// is a nonpositive integer vanish.
double ml_tail_expansion(const MLParams& p, double tau);

}  // namespace subdiff
