// Copyright 2026 The reliakit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>

namespace reliakit::detail {

// Neumaier-compensated accumulator. Sums of repeated decimal values such as
// ten copies of 0.9 come out correctly rounded.
class CompensatedSum {
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

}  // namespace reliakit::detail
