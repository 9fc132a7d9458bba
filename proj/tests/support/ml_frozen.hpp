#pragma once

namespace subdiff::testing {

/// Reference values frozen from ml_series_reference at precisions too high to
/// recompute inside the test budget (the beta1 = 0.3 deep-negative corner,
/// where the working precision reaches ~3e5 bits). Regenerate with the
/// ml_oracle_gen tool if the grid changes.
struct MLFrozen {
  double b1, b2, tau, value;
};

inline constexpr MLFrozen ml_frozen_table[] = {
    // {b1, b2, tau, value}
    {0.3, 1.0, -22.0, 3.40965143428889131e-02},
    {0.3, 1.0, -30.0, 2.51826175029276622e-02},
    {0.3, 1.0, -40.0, 1.89795212664786959e-02},
    {0.3, 0.3, -22.0, 4.52547159410714259e-04},
    {0.3, 0.3, -30.0, 2.46900789599652302e-04},
    {0.3, 0.3, -40.0, 1.40259235914465480e-04},
};

}  // namespace subdiff::testing
