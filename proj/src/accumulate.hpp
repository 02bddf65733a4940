#pragma once

namespace splinequad::detail {

/// Compensated (Kahan) summation; keeps the low-order bits that a plain
/// running sum would drop.
struct KahanAccumulator {
  double sum = 0.0;
  double compensation = 0.0;

  void add(double term) {
    const double y = term - compensation;
    const double t = sum + y;
    compensation = (t - sum) - y;
    sum = t;
  }

  double value() const { return sum; }
};

}  // namespace splinequad::detail
