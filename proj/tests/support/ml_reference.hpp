#pragma once

namespace subdiff::testing {

/// Reference Mittag-Leffler value E_{b1,b2}(tau), tau <= 0, computed by
/// direct summation of the defining power series in MPFR arithmetic. The
/// working precision is chosen from the largest term of the series
/// (~ exp(|tau|^{1/b1})), so the result is accurate to ~1e-25 relative even
/// where the double-precision series suffers total cancellation.
///
/// Independent of subdiff::mittag_leffler: shares no code with the library
/// evaluation paths.
double ml_series_reference(double b1, double b2, double tau);

/// Number of MPFR bits the reference will use for the given argument
/// (useful for budgeting test grids).
long ml_reference_bits(double b1, double tau);

}  // namespace subdiff::testing
