#pragma once

#include <cmath>

namespace gwmd {

/// Neumaier compensated accumulator. The correction term also captures the
/// case |x| > |sum|, so the result is insensitive to the order and grouping
/// of the additions up to one final rounding.
class NeumaierSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }

  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace gwmd
