// Prints reference Mittag-Leffler values for the frozen-table entries used by
// the acceptance suite. Run manually; paste the output into
// tests/support/ml_frozen.hpp if the grid changes.
#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <initializer_list>

#include "ml_reference.hpp"

// With arguments `b1 b2 tau`, prints the single requested entry (useful for
// running the expensive grid points in parallel).
int main(int argc, char** argv) {
  auto emit = [](double b1, double b2, double tau) {
    double v = subdiff::testing::ml_series_reference(b1, b2, tau);
    std::printf("    {%.1f, %.1f, %.1f, %.17e},\n", b1, b2, tau, v);
    std::fflush(stdout);
  };
  if (argc == 4) {
    emit(std::atof(argv[1]), std::atof(argv[2]), std::atof(argv[3]));
    return 0;
  }
  const double b1 = 0.3;
  std::printf("// {b1, b2, tau, value}\n");
  for (double b2 : {1.0, 0.3})
    for (double tau : {-22.0, -30.0, -40.0}) emit(b1, b2, tau);
  return 0;
}
